#ifndef RRVI_ANALYSIS_IO_HPP
#define RRVI_ANALYSIS_IO_HPP

#include <iosfwd>
#include <vector>

#include <nlohmann/json.hpp>

#include "rrvi/moments.hpp"
#include "rrvi/montecarlo.hpp"
#include "rrvi/stationary.hpp"

namespace rrvi {

nlohmann::json to_json(const MomentReport& r);
nlohmann::json to_json(const BiasCurve& c);
nlohmann::json to_json(const CltSample& s);
nlohmann::json to_json(const PlateauEstimate& p);

/// gamma,bias_plain,bias_extrap[,bias_plain_se,bias_extrap_se]
void write_bias_csv(const BiasCurve& c, std::ostream& out);
/// gamma,power,value,std_error,trend,burn_in,window
void write_plateau_csv(const std::vector<PlateauEstimate>& p, std::ostream& out);

}  // namespace rrvi

#endif  // RRVI_ANALYSIS_IO_HPP
