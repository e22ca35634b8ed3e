#pragma once

#include <nlohmann/json.hpp>

#include "vlx/patrol.hpp"
#include "vlx/recognition.hpp"

namespace vlx {

/// JSON views of result types, used for CLI output and JSONL logs. Keys are
/// emitted in sorted order, so identical values serialize to identical
/// bytes. `include_raw` adds per-trial raw answers where a type carries
/// them.

nlohmann::json to_json(const GroundingBox& box);
nlohmann::json to_json(const AnswerDistribution& distribution);
nlohmann::json to_json(const BinaryResult& result, bool include_raw = false);
nlohmann::json to_json(const ChoiceResult& result, bool include_raw = false);
nlohmann::json to_json(const ChoiceDistribution& result);
nlohmann::json to_json(const FreeformResult& result, bool include_raw = false);
nlohmann::json to_json(const DicResult& result);
nlohmann::json to_json(const DicEnsembleResult& result);
nlohmann::json to_json(const RelationResult& result, bool include_raw = false);
nlohmann::json to_json(const ViewpointStats& stats);
nlohmann::json to_json(const RefinementResult& result, bool include_raw = false);
nlohmann::json to_json(const TaskValue& value, bool include_raw = false);
nlohmann::json to_json(const Waypoint& waypoint);  // omits embedding values
nlohmann::json to_json(const AnomalyReport& report);
nlohmann::json to_json(const PatrolEntry& entry);

/// Current time as UTC ISO-8601 with second resolution, e.g.
/// "2024-05-01T12:00:00Z".
std::string current_timestamp_utc();

}  // namespace vlx
