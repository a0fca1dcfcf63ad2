#pragma once

#include "ipd/sim.hpp"

#include <json.hpp>

#include <string>

namespace ipd {

using Json = nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

Json estimate_json(const StrategyEstimate& est);
Json solution_json(const DecisionSolution& sol);

/// Report of one decision: strategies, decision, weights, intermediates,
/// preferences, diagnostics, seed and version.
Json decision_json(const DecisionRun& run);

/// decision_json plus the predictor summary of a simulated run.
Json scenario_json(const ScenarioReport& report);

Json calibration_json(const PreferenceCalibration& cal, std::uint64_t seed);

/// Rounds every number to 12 significant digits and serialises with sorted
/// keys, so that re-parsing and re-emitting reproduces the same bytes.
Json canonicalize(const Json& doc);
std::string canonical_dump(const Json& doc);

/// Rebuilds the parts of a solution that decide() reads from a report.
DecisionSolution solution_from_json(const Json& doc);

}  // namespace ipd
