#pragma once

#include <string>

#include <json.hpp>

#include "pcvx/convexity.hpp"
#include "pcvx/psh.hpp"
#include "pcvx/ray.hpp"
#include "pcvx/slicing.hpp"

namespace pcvx {

inline constexpr const char* kToolVersion = "0.1.0";

/// Complex vectors are arrays of [re, im] pairs.
nlohmann::json to_json(const Point& z);
Point point_from_json(const nlohmann::json& v);

nlohmann::json to_json(const ViolationCertificate& cert);
nlohmann::json to_json(const BudgetDescriptor& budget);
nlohmann::json to_json(const Verdict& verdict);
nlohmann::json to_json(const RatioEstimate& ratio);
nlohmann::json to_json(const HyperplaneResult& result);
nlohmann::json to_json(const ComponentReport& report);  // without the label grid
nlohmann::json to_json(const ExceptionalSweepReport& report);
nlohmann::json to_json(const Lemma5Result& result, bool with_table);

/// Labelled grid as CSV: x,y,label (member cells only).
std::string components_csv(const ComponentReport& report);

/// Deterministic text of a payload (sorted keys, shortest round-trip doubles).
std::string dump_payload(const nlohmann::json& payload);

/// {"payload": ..., "run": {"version", "wall_clock_seconds", "threads"}}.
/// Only the payload is meant to be compared across runs.
nlohmann::json wrap_report(const nlohmann::json& payload, double wall_clock_seconds);

}  // namespace pcvx
