#include "rrvi/trajectory_io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>

#include <fmt/format.h>

#include "rrvi/errors.hpp"

namespace rrvi {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", v);
}

namespace {

std::string cell(const std::vector<double>& col, std::size_t k) {
  return k < col.size() ? format_double(col[k]) : std::string();
}

double rel_log10(double err, double base) {
  if (base == 0.0) return NAN;
  return std::log10(err / base);
}

static_assert(std::endian::native == std::endian::little,
              "binary iterate files assume a little-endian host");

}  // namespace

void write_trajectory_csv(const RunResult& result, std::ostream& out, const CsvOptions& options) {
  out << "epoch,err_sq,err_sq_extrap_last,err_sq_extrap_avg,wall_ms,rel_err_log10,"
         "rel_err_extrap_log10,status\n";
  const auto& err = result.primary.per_epoch_error;
  const bool extrap = result.companion.has_value();
  const std::size_t rows = extrap ? result.extrap_last.size() : result.primary.epoch_iterates.size();
  const double base = err.empty() ? NAN : err.front();
  for (std::size_t k = 0; k < rows; ++k) {
    const double wall =
        options.record_time && k < result.epoch_wall_ms.size() ? result.epoch_wall_ms[k] : 0.0;
    out << k << ',' << cell(err, k) << ',';
    out << (extrap ? cell(result.err_extrap_last, k) : "") << ',';
    out << (extrap ? cell(result.err_extrap_avg, k) : "") << ',';
    out << format_double(wall) << ',';
    out << (k < err.size() ? format_double(rel_log10(err[k], base)) : "") << ',';
    if (extrap && k < result.err_extrap_last.size()) {
      out << format_double(rel_log10(result.err_extrap_last[k], base));
    }
    out << ",ok\n";
  }
  if (result.diverged()) out << rows << ",,,,,,,diverged\n";
}

void write_iterates_binary(const std::vector<Vector>& iterates, std::ostream& out) {
  const std::uint64_t d = iterates.empty() ? 0 : static_cast<std::uint64_t>(iterates.front().size());
  out.write(reinterpret_cast<const char*>(&d), sizeof d);
  for (const auto& x : iterates) {
    if (static_cast<std::uint64_t>(x.size()) != d) {
      throw ParameterError("write_iterates_binary: iterates have different dimensions");
    }
    out.write(reinterpret_cast<const char*>(x.data()),
              static_cast<std::streamsize>(sizeof(double) * d));
  }
}

std::vector<Vector> read_iterates_binary(std::istream& in) {
  std::uint64_t d = 0;
  if (!in.read(reinterpret_cast<char*>(&d), sizeof d)) {
    throw ParameterError("read_iterates_binary: missing header");
  }
  std::vector<Vector> rows;
  if (d == 0) return rows;
  Vector x(static_cast<Eigen::Index>(d));
  while (in.read(reinterpret_cast<char*>(x.data()), static_cast<std::streamsize>(sizeof(double) * d))) {
    rows.push_back(x);
  }
  if (in.gcount() != 0) throw ParameterError("read_iterates_binary: truncated row");
  return rows;
}

}  // namespace rrvi
