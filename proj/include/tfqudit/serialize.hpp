#pragma once

// JSON conversions for configuration and report types. Readers reject
// unknown keys and keep defaults for absent ones; any malformed value is
// reported as ConfigError.

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "tfqudit/bootstrap.hpp"
#include "tfqudit/coincidence.hpp"
#include "tfqudit/error.hpp"
#include "tfqudit/mub.hpp"
#include "tfqudit/security.hpp"
#include "tfqudit/simulation.hpp"
#include "tfqudit/witness.hpp"

namespace tfq {

using nlohmann::json;

void to_json(json& j, const BinningConfig& c);
void from_json(const json& j, BinningConfig& c);
void to_json(json& j, const SecurityParams& s);
void from_json(const json& j, SecurityParams& s);
void to_json(json& j, const ProtocolConfig& p);
void from_json(const json& j, ProtocolConfig& p);
void to_json(json& j, const BootstrapConfig& b);
void from_json(const json& j, BootstrapConfig& b);
void to_json(json& j, const MubThresholds& t);
void from_json(const json& j, MubThresholds& t);

void to_json(json& j, const WitnessReport& r);
void to_json(json& j, const MubReport& r);
void to_json(json& j, const ConsistencyResult& r);
void to_json(json& j, const MubAssessment& a);
void to_json(json& j, const KeyComponents& c);
void to_json(json& j, const KeyRateResult& r);
void to_json(json& j, const BootstrapSummary& s);

namespace sim {
void to_json(json& j, const SourceModel& s);
void from_json(const json& j, SourceModel& s);
void to_json(json& j, const DetectorModel& d);
void from_json(const json& j, DetectorModel& d);
void to_json(json& j, const DispersionModel& d);
void from_json(const json& j, DispersionModel& d);
void to_json(json& j, const SimConfig& c);
void from_json(const json& j, SimConfig& c);
}  // namespace sim

/// Parses JSON text; syntax errors become ConfigError.
json parse_json(std::string_view text, std::string_view what = "config");

/// Converts with error mapping to ConfigError, naming `what` in the message.
template <class T>
T json_as(const json& j, std::string_view what) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  }
}

/// Two-space indented dump with trailing newline. Key order is sorted, so the
/// output is stable for equal values.
std::string dump(const json& j);

}  // namespace tfq
