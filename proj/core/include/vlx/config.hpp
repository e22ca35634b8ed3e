#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vlx/backend.hpp"
#include "vlx/recognition.hpp"

namespace vlx {

enum class BackendKind { mock, http };

struct BackendConfig {
  BackendKind kind = BackendKind::mock;
  std::filesystem::path fixtures;  // mock: fixture table, may be empty
  std::string endpoint;            // http
  std::set<BackendCapability> capabilities = kAllCapabilities;
};

/// A named entry under "tasks": either a single recognition task or a
/// refinement chain.
struct TaskDef {
  std::optional<RecognitionTask> task;
  std::optional<RefinementChain> chain;
};

/// All tunables the toolkit exposes, loaded from one versioned JSON
/// document. Loading is all-or-nothing: the first out-of-range field fails
/// the load with a field-path diagnostic.
struct ToolkitConfig {
  int schema_version = 1;
  BackendConfig backend;
  NoiseConfig noise;
  std::vector<std::string> articles = kDefaultArticles;
  DecisionPolicy decision_policy;
  BinaryAliases aliases;
  double itr_temperature = 1.0;
  /// Calibration-required: tune against baseline imagery per deployment.
  double dic_threshold = 0.8;
  RelationLexicon relation_lexicon = RelationLexicon::defaults();
  std::map<std::string, TaskDef> tasks;

  RunOptions run_options() const;
};

ToolkitConfig load_config(const std::filesystem::path& path);

/// Relative fixture paths resolve against `base_dir`.
ToolkitConfig parse_config(const nlohmann::json& doc,
                           const std::filesystem::path& base_dir);

RecognitionTask parse_task(const nlohmann::json& doc, const std::string& where);

/// Instantiates the configured backend. A non-empty endpoint override (the
/// VLX_BACKEND_ENDPOINT environment variable or a flag) forces an HTTP
/// backend at that endpoint regardless of the configured kind.
std::unique_ptr<Backend> make_backend(const ToolkitConfig& config,
                                      const std::string& endpoint_override = "");

}  // namespace vlx
