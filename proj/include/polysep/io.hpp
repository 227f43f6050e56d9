#pragma once

#include "polysep/harness.hpp"
#include "polysep/recover.hpp"
#include "polysep/signalkit.hpp"

#include <iosfwd>
#include <string>

#include <json.hpp>

namespace polysep::io {

/// Reads `t,re`, `t,re,im` or the vector form `t,c0,c1` (mapped to c0 + i c1).
/// Nodes must be uniform on [0, 1] within 1e-9 relative.
/// Throws SeparationError(InputFormat) on any violation.
Signal read_signal_csv(std::istream& in);
Signal read_signal_csv(const std::string& path);

/// Writes `t,re` for real-field signals and `t,re,im` otherwise, %.17g.
void write_signal_csv(std::ostream& out, const Signal& F);
void write_signal_csv(const std::string& path, const Signal& F);

nlohmann::json to_json(const SeparationResult& result);
nlohmann::json to_json(const OracleResult& result);

/// One row per noise level: level,median_err,p90_err,fail_rate,trials.
/// Preceded by a comment line declaring the error metric.
void write_report_csv(std::ostream& out, const SweepReport& report);

} // namespace polysep::io
