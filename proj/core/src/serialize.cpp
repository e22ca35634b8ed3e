#include "vlx/serialize.hpp"

#include <chrono>
#include <ctime>

namespace vlx {

using nlohmann::json;

json to_json(const GroundingBox& box) {
  return json{{"x_min", box.x_min},
              {"y_min", box.y_min},
              {"x_max", box.x_max},
              {"y_max", box.y_max},
              {"phrase", box.source_phrase}};
}

json to_json(const AnswerDistribution& distribution) {
  json out{{"invalid", distribution.invalid}, {"total", distribution.total}};
  if (distribution.per_choice.empty()) {
    out["yes"] = distribution.yes;
    out["no"] = distribution.no;
  } else {
    out["per_choice"] = distribution.per_choice;
  }
  return out;
}

json to_json(const BinaryResult& result, bool include_raw) {
  json out{{"decision", std::string(to_string(result.decision))},
           {"yes_ratio", result.yes_ratio},
           {"no_ratio", result.no_ratio},
           {"invalid_ratio", result.invalid_ratio},
           {"tallies", to_json(result.distribution)}};
  if (include_raw) out["raw_answers"] = result.raw_answers;
  return out;
}

json to_json(const ChoiceResult& result, bool include_raw) {
  json out{{"choices", result.choices.phrases()},
           {"ratios", result.per_choice_ratio},
           {"invalid_ratio", result.invalid_ratio},
           {"tallies", to_json(result.distribution)}};
  if (result.selected) {
    out["selected_index"] = *result.selected;
    out["selected"] = result.choices.phrases()[*result.selected];
  } else {
    out["selected_index"] = nullptr;
    out["selected"] = nullptr;
  }
  if (include_raw) out["raw_answers"] = result.raw_answers;
  return out;
}

json to_json(const ChoiceDistribution& result) {
  return json{{"choices", result.choices.phrases()},
              {"probabilities", result.probabilities},
              {"selected_index", result.selected},
              {"selected", result.choices.phrases()[result.selected]}};
}

json to_json(const FreeformResult& result, bool include_raw) {
  json out{{"text", result.text}, {"counts", result.counts}};
  if (include_raw) out["raw_answers"] = result.raw_answers;
  return out;
}

json to_json(const DicResult& result) {
  return json{{"caption_a", result.caption_a},
              {"caption_b", result.caption_b},
              {"similarity", result.similarity},
              {"changed", result.changed},
              {"threshold", result.threshold}};
}

json to_json(const DicEnsembleResult& result) {
  json trials = json::array();
  for (const DicResult& trial : result.trials) trials.push_back(to_json(trial));
  return json{{"trials", trials},
              {"mean_similarity", result.mean_similarity},
              {"std_similarity", result.std_similarity},
              {"changed", result.changed},
              {"threshold", result.threshold}};
}

json to_json(const RelationResult& result, bool include_raw) {
  json out{{"counts", result.counts},
           {"unmatched", result.unmatched},
           {"total", result.total}};
  out["relation"] = result.relation ? json(*result.relation) : json(nullptr);
  if (include_raw) out["raw_answers"] = result.raw_answers;
  return out;
}

json to_json(const ViewpointStats& stats) {
  return json{{"rates", stats.rates},
              {"mean", stats.mean},
              {"stddev", stats.stddev}};
}

json to_json(const RefinementResult& result, bool include_raw) {
  json steps = json::array();
  for (const StepOutcome& step : result.steps) {
    json entry{{"kind", std::string(to_string(step.kind))},
               {"method", std::string(to_string(step.method))},
               {"result", to_json(step.value, include_raw)}};
    if (step.local_box) entry["local_box"] = to_json(*step.local_box);
    if (step.global_box) entry["global_box"] = to_json(*step.global_box);
    steps.push_back(std::move(entry));
  }
  json chain = json::array();
  for (const GroundingBox& box : result.box_chain) chain.push_back(to_json(box));
  return json{{"complete", result.complete},
              {"steps", steps},
              {"box_chain", chain}};
}

json to_json(const TaskValue& value, bool include_raw) {
  return std::visit(
      [&](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ChoiceDistribution> ||
                      std::is_same_v<T, GroundingBox> ||
                      std::is_same_v<T, DicResult>) {
          return to_json(v);
        } else {
          return to_json(v, include_raw);
        }
      },
      value);
}

json to_json(const Waypoint& waypoint) {
  return json{{"id", waypoint.id},
              {"label", waypoint.label},
              {"image_ref", waypoint.baseline_image_ref},
              {"caption", waypoint.baseline_caption},
              {"embedding_dim", waypoint.baseline_embedding.dimension()},
              {"embedding_space", waypoint.embedding_space},
              {"recorded_at", waypoint.recorded_at}};
}

json to_json(const AnomalyReport& report) {
  json out{{"waypoint_id", report.waypoint_id},
           {"similarity", report.similarity},
           {"anomalous", report.anomalous},
           {"baseline_caption", report.baseline_caption},
           {"current_caption", report.current_caption},
           {"threshold", report.threshold},
           {"checked_at", report.checked_at}};
  if (report.trials > 1) {
    out["trials"] = report.trials;
    out["similarity_stddev"] = *report.similarity_stddev;
  }
  return out;
}

json to_json(const PatrolEntry& entry) {
  if (entry.report) {
    return to_json(*entry.report);
  }
  return json{{"waypoint_id", entry.waypoint_id},
              {"error", entry.error_code},
              {"detail", entry.error_detail}};
}

std::string current_timestamp_utc() {
  const std::time_t now = std::chrono::system_clock::to_time_t(
      std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace vlx
