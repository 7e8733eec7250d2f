#ifndef RRVI_TRAJECTORY_IO_HPP
#define RRVI_TRAJECTORY_IO_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "rrvi/solver.hpp"

namespace rrvi {

struct CsvOptions {
  /// Fill wall_ms with measured times. Off by default so that identical runs
  /// produce identical bytes.
  bool record_time = false;
};

/// Header: epoch,err_sq,err_sq_extrap_last,err_sq_extrap_avg,wall_ms,
/// rel_err_log10,rel_err_extrap_log10,status. Values use 17 significant
/// digits; extrapolated columns are empty for single-chain variants. A
/// diverged run ends with one row whose status is "diverged".
void write_trajectory_csv(const RunResult& result, std::ostream& out,
                          const CsvOptions& options = {});

/// Iterates as raw little-endian float64 rows, preceded by d as a
/// little-endian u64.
void write_iterates_binary(const std::vector<Vector>& iterates, std::ostream& out);
std::vector<Vector> read_iterates_binary(std::istream& in);

/// Formats a double with 17 significant digits ("nan"/"inf" for non-finite).
std::string format_double(double v);

}  // namespace rrvi

#endif  // RRVI_TRAJECTORY_IO_HPP
