#include "rrvi/analysis_io.hpp"

#include <cmath>
#include <ostream>

#include "rrvi/trajectory_io.hpp"

namespace rrvi {

namespace {

// JSON has no NaN; absent values become null.
nlohmann::json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

nlohmann::json optional_number(const std::optional<double>& v) {
  return v ? number(*v) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json to_json(const MomentReport& r) {
  return {{"n", r.n},
          {"k", r.k},
          {"exact", number(r.exact)},
          {"bound", number(r.bound)},
          {"brute", number(r.brute)},
          {"S4", r.S4},
          {"U2", r.U2},
          {"T2", r.T2},
          {"trace_sigma_hat", r.trace_sigma_hat}};
}

nlohmann::json to_json(const BiasCurve& c) {
  nlohmann::json j = {{"estimator", to_string(c.estimator)},
                      {"gammas", c.gammas},
                      {"bias_plain", c.bias_plain},
                      {"bias_extrap", c.bias_extrap},
                      {"slope_plain", optional_number(c.slope_plain)},
                      {"slope_extrap", optional_number(c.slope_extrap)}};
  if (!c.bias_plain_se.empty()) {
    j["bias_plain_se"] = c.bias_plain_se;
    j["bias_extrap_se"] = c.bias_extrap_se;
  }
  return j;
}

nlohmann::json to_json(const CltSample& s) {
  return {{"T", s.T},
          {"trials", s.trials},
          {"gamma", s.gamma},
          {"pooled_mean", number(s.pooled_mean)},
          {"normalized_sums", s.normalized_sums},
          {"averaged_values", s.averaged_values}};
}

nlohmann::json to_json(const PlateauEstimate& p) {
  return {{"gamma", p.gamma},         {"power", p.power},     {"value", number(p.value)},
          {"std_error", number(p.std_error)}, {"trend", number(p.trend)},
          {"burn_in", p.burn_in},     {"window", p.window}};
}

void write_bias_csv(const BiasCurve& c, std::ostream& out) {
  const bool se = !c.bias_plain_se.empty();
  out << "gamma,bias_plain,bias_extrap";
  if (se) out << ",bias_plain_se,bias_extrap_se";
  out << '\n';
  for (std::size_t i = 0; i < c.gammas.size(); ++i) {
    out << format_double(c.gammas[i]) << ',' << format_double(c.bias_plain[i]) << ','
        << format_double(c.bias_extrap[i]);
    if (se) out << ',' << format_double(c.bias_plain_se[i]) << ',' << format_double(c.bias_extrap_se[i]);
    out << '\n';
  }
}

void write_plateau_csv(const std::vector<PlateauEstimate>& p, std::ostream& out) {
  out << "gamma,power,value,std_error,trend,burn_in,window\n";
  for (const auto& e : p) {
    out << format_double(e.gamma) << ',' << e.power << ',' << format_double(e.value) << ','
        << format_double(e.std_error) << ',' << format_double(e.trend) << ',' << e.burn_in << ','
        << e.window << '\n';
  }
}

}  // namespace rrvi
