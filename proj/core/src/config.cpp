#include "vlx/config.hpp"

#include <fstream>

#include "vlx/errors.hpp"
#include "vlx/fixture_backend.hpp"
#include "vlx/http_backend.hpp"

namespace vlx {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& doc,
                         const std::set<std::string>& allowed,
                         const std::string& where) {
  for (const auto& [key, value] : doc.items()) {
    if (!allowed.contains(key)) {
      throw ConfigError(where.empty() ? key : where + "." + key,
                        "unknown field");
    }
  }
}

double require_number(const json& doc, const std::string& where) {
  if (!doc.is_number()) {
    throw ConfigError(where, "must be a number");
  }
  return doc.get<double>();
}

std::string require_string(const json& doc, const std::string& where) {
  if (!doc.is_string()) {
    throw ConfigError(where, "must be a string");
  }
  return doc.get<std::string>();
}

std::vector<std::string> require_string_list(const json& doc,
                                             const std::string& where) {
  if (!doc.is_array() || doc.empty()) {
    throw ConfigError(where, "must be a non-empty array of strings");
  }
  std::vector<std::string> out;
  out.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    out.push_back(require_string(doc[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

NoiseConfig parse_noise(const json& doc, const std::string& where,
                        const NoiseConfig& defaults) {
  reject_unknown_keys(doc, {"shift_low", "shift_high", "n_variants", "seed"},
                      where);
  NoiseConfig noise = defaults;
  if (doc.contains("shift_low")) {
    noise.shift_low = require_number(doc["shift_low"], where + ".shift_low");
  }
  if (doc.contains("shift_high")) {
    noise.shift_high = require_number(doc["shift_high"], where + ".shift_high");
  }
  if (doc.contains("n_variants")) {
    if (!doc["n_variants"].is_number_integer()) {
      throw ConfigError(where + ".n_variants", "must be an integer");
    }
    noise.n_variants = doc["n_variants"].get<int>();
  }
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) {
      throw ConfigError(where + ".seed", "must be a non-negative integer");
    }
    noise.seed = doc["seed"].get<std::uint64_t>();
  }
  try {
    validate(noise);
  } catch (const InvalidArgumentError& e) {
    throw ConfigError(where, e.what());
  }
  return noise;
}

ChoiceSet parse_choices(const json& doc, const std::string& where) {
  if (!doc.is_array() || doc.empty()) {
    throw ConfigError(where, "must be a non-empty array");
  }
  std::vector<std::string> phrases;
  std::vector<std::vector<std::string>> tokens;
  bool custom_tokens = false;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const std::string entry_where = where + "[" + std::to_string(i) + "]";
    const json& entry = doc[i];
    if (entry.is_string()) {
      phrases.push_back(entry.get<std::string>());
      tokens.emplace_back();
    } else if (entry.is_object()) {
      reject_unknown_keys(entry, {"phrase", "match_tokens"}, entry_where);
      if (!entry.contains("phrase")) {
        throw ConfigError(entry_where + ".phrase", "required");
      }
      phrases.push_back(require_string(entry["phrase"], entry_where + ".phrase"));
      if (entry.contains("match_tokens")) {
        tokens.push_back(require_string_list(entry["match_tokens"],
                                             entry_where + ".match_tokens"));
        custom_tokens = true;
      } else {
        tokens.emplace_back();
      }
    } else {
      throw ConfigError(entry_where, "must be a string or an object");
    }
  }
  try {
    if (!custom_tokens) {
      return ChoiceSet::from_phrases(std::move(phrases));
    }
    // Fill defaults for entries without explicit tokens.
    ChoiceSet defaults = ChoiceSet::from_phrases(phrases);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (tokens[i].empty()) tokens[i] = defaults.match_tokens(i);
    }
    return ChoiceSet(std::move(phrases), std::move(tokens));
  } catch (const InvalidArgumentError& e) {
    throw ConfigError(where, e.what());
  }
}

BackendConfig parse_backend(const json& doc, const std::string& where,
                            const std::filesystem::path& base_dir) {
  reject_unknown_keys(doc, {"type", "fixtures", "endpoint", "capabilities"},
                      where);
  BackendConfig backend;
  const std::string type = doc.contains("type")
                               ? require_string(doc["type"], where + ".type")
                               : "mock";
  if (type == "mock") {
    backend.kind = BackendKind::mock;
    if (doc.contains("endpoint")) {
      throw ConfigError(where + ".endpoint", "not valid for a mock backend");
    }
    if (doc.contains("fixtures")) {
      std::filesystem::path fixtures =
          require_string(doc["fixtures"], where + ".fixtures");
      if (fixtures.is_relative()) {
        fixtures = base_dir / fixtures;
      }
      if (!std::filesystem::exists(fixtures)) {
        throw ConfigError(where + ".fixtures",
                          "fixture file not found: " + fixtures.string());
      }
      backend.fixtures = fixtures;
    }
  } else if (type == "http") {
    backend.kind = BackendKind::http;
    if (doc.contains("fixtures")) {
      throw ConfigError(where + ".fixtures", "not valid for an http backend");
    }
    if (!doc.contains("endpoint")) {
      throw ConfigError(where + ".endpoint", "required for an http backend");
    }
    backend.endpoint = require_string(doc["endpoint"], where + ".endpoint");
    if (backend.endpoint.rfind("http://", 0) != 0) {
      throw ConfigError(where + ".endpoint",
                        "must start with http:// (TLS is not supported)");
    }
  } else {
    throw ConfigError(where + ".type", "must be \"mock\" or \"http\"");
  }
  if (doc.contains("capabilities")) {
    backend.capabilities.clear();
    for (const std::string& name : require_string_list(
             doc["capabilities"], where + ".capabilities")) {
      try {
        backend.capabilities.insert(capability_from_string(name));
      } catch (const InvalidArgumentError& e) {
        throw ConfigError(where + ".capabilities", e.what());
      }
    }
  }
  return backend;
}

}  // namespace

RecognitionTask parse_task(const json& doc, const std::string& where) {
  if (!doc.is_object()) {
    throw ConfigError(where, "must be an object");
  }
  reject_unknown_keys(doc,
                      {"kind", "method", "template", "choices", "attribute",
                       "phrase", "object", "part", "object_a", "object_b"},
                      where);
  if (!doc.contains("kind")) {
    throw ConfigError(where + ".kind", "required");
  }
  RecognitionTask task;
  try {
    task.kind = task_kind_from_string(
        require_string(doc["kind"], where + ".kind"));
  } catch (const InvalidArgumentError& e) {
    throw ConfigError(where + ".kind", e.what());
  }

  switch (task.kind) {
    case TaskKind::object_class:
    case TaskKind::feature:
      task.method = TaskMethod::mvqa;
      break;
    case TaskKind::location:
    case TaskKind::affordance:
      task.method = TaskMethod::vg;
      break;
    case TaskKind::state_binary:
      task.method = TaskMethod::bvqa;
      break;
    case TaskKind::state_character:
    case TaskKind::relation:
      task.method = TaskMethod::mvqa;
      break;
  }
  if (doc.contains("method")) {
    try {
      task.method = task_method_from_string(
          require_string(doc["method"], where + ".method"));
    } catch (const InvalidArgumentError& e) {
      throw ConfigError(where + ".method", e.what());
    }
  }
  if (doc.contains("template")) {
    task.question_template = require_string(doc["template"], where + ".template");
  }
  if (doc.contains("phrase")) {
    task.question_template = require_string(doc["phrase"], where + ".phrase");
  }
  if (doc.contains("choices")) {
    task.choices = parse_choices(doc["choices"], where + ".choices");
  }
  if (doc.contains("attribute")) {
    task.attribute = require_string(doc["attribute"], where + ".attribute");
  }
  if (doc.contains("object")) {
    task.object_name = require_string(doc["object"], where + ".object");
  }
  if (doc.contains("part")) {
    task.part_name = require_string(doc["part"], where + ".part");
  }
  if (doc.contains("object_a")) {
    task.object_a = require_string(doc["object_a"], where + ".object_a");
  }
  if (doc.contains("object_b")) {
    task.object_b = require_string(doc["object_b"], where + ".object_b");
  }
  try {
    validate(task);
  } catch (const InvalidArgumentError& e) {
    throw ConfigError(where, e.what());
  }
  return task;
}

ToolkitConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("config", "cannot open " + path.string());
  }
  json doc = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) {
    throw ConfigError("config", "invalid JSON in " + path.string());
  }
  return parse_config(doc, path.parent_path());
}

ToolkitConfig parse_config(const json& doc,
                           const std::filesystem::path& base_dir) {
  if (!doc.is_object()) {
    throw ConfigError("config", "must be a JSON object");
  }
  reject_unknown_keys(doc,
                      {"schema_version", "backend", "noise", "articles",
                       "decision_policy", "aliases", "itr_temperature",
                       "dic_threshold", "relation_lexicon", "tasks"},
                      "");
  ToolkitConfig config;
  if (!doc.contains("schema_version") ||
      !doc["schema_version"].is_number_integer()) {
    throw ConfigError("schema_version", "required integer");
  }
  config.schema_version = doc["schema_version"].get<int>();
  if (config.schema_version != 1) {
    throw ConfigError("schema_version",
                      "unsupported version " +
                          std::to_string(config.schema_version));
  }

  if (doc.contains("backend")) {
    if (!doc["backend"].is_object()) {
      throw ConfigError("backend", "must be an object");
    }
    config.backend = parse_backend(doc["backend"], "backend", base_dir);
  }
  if (doc.contains("noise")) {
    if (!doc["noise"].is_object()) {
      throw ConfigError("noise", "must be an object");
    }
    config.noise = parse_noise(doc["noise"], "noise", NoiseConfig{});
  }
  if (doc.contains("articles")) {
    config.articles = require_string_list(doc["articles"], "articles");
    for (std::size_t i = 0; i < config.articles.size(); ++i) {
      if (config.articles[i].empty()) {
        throw ConfigError("articles[" + std::to_string(i) + "]",
                          "must not be empty");
      }
    }
  }
  if (doc.contains("decision_policy")) {
    const json& policy = doc["decision_policy"];
    if (!policy.is_object()) {
      throw ConfigError("decision_policy", "must be an object");
    }
    reject_unknown_keys(policy, {"min_valid_fraction"}, "decision_policy");
    if (policy.contains("min_valid_fraction")) {
      config.decision_policy.min_valid_fraction = require_number(
          policy["min_valid_fraction"], "decision_policy.min_valid_fraction");
      if (config.decision_policy.min_valid_fraction < 0.0 ||
          config.decision_policy.min_valid_fraction > 1.0) {
        throw ConfigError("decision_policy.min_valid_fraction",
                          "must be in [0,1]");
      }
    }
  }
  if (doc.contains("aliases")) {
    const json& aliases = doc["aliases"];
    if (!aliases.is_object()) {
      throw ConfigError("aliases", "must be an object");
    }
    reject_unknown_keys(aliases, {"yes", "no"}, "aliases");
    if (aliases.contains("yes")) {
      config.aliases.yes = require_string_list(aliases["yes"], "aliases.yes");
    }
    if (aliases.contains("no")) {
      config.aliases.no = require_string_list(aliases["no"], "aliases.no");
    }
  }
  if (doc.contains("itr_temperature")) {
    config.itr_temperature =
        require_number(doc["itr_temperature"], "itr_temperature");
    if (!(config.itr_temperature > 0.0)) {
      throw ConfigError("itr_temperature", "must be > 0");
    }
  }
  if (doc.contains("dic_threshold")) {
    config.dic_threshold = require_number(doc["dic_threshold"], "dic_threshold");
    if (config.dic_threshold < -1.0 || config.dic_threshold > 1.0) {
      throw ConfigError("dic_threshold", "must be in [-1,1]");
    }
  }
  if (doc.contains("relation_lexicon")) {
    try {
      config.relation_lexicon = RelationLexicon::from_phrases(
          require_string_list(doc["relation_lexicon"], "relation_lexicon"));
    } catch (const InvalidArgumentError& e) {
      throw ConfigError("relation_lexicon", e.what());
    }
  }
  if (doc.contains("tasks")) {
    if (!doc["tasks"].is_object()) {
      throw ConfigError("tasks", "must be an object");
    }
    for (const auto& [name, def] : doc["tasks"].items()) {
      const std::string where = "tasks." + name;
      if (!def.is_object()) {
        throw ConfigError(where, "must be an object");
      }
      TaskDef task_def;
      if (def.contains("kind") && def["kind"].is_string() &&
          def["kind"].get<std::string>() == "refinement") {
        reject_unknown_keys(def, {"kind", "steps"}, where);
        if (!def.contains("steps") || !def["steps"].is_array() ||
            def["steps"].empty()) {
          throw ConfigError(where + ".steps", "must be a non-empty array");
        }
        RefinementChain chain;
        for (std::size_t i = 0; i < def["steps"].size(); ++i) {
          chain.steps.push_back(parse_task(
              def["steps"][i], where + ".steps[" + std::to_string(i) + "]"));
        }
        try {
          validate(chain);
        } catch (const InvalidArgumentError& e) {
          throw ConfigError(where, e.what());
        }
        task_def.chain = std::move(chain);
      } else {
        task_def.task = parse_task(def, where);
      }
      config.tasks.emplace(name, std::move(task_def));
    }
  }
  return config;
}

RunOptions ToolkitConfig::run_options() const {
  RunOptions options;
  options.noise = noise;
  options.articles = articles;
  options.policy = decision_policy;
  options.aliases = aliases;
  options.itr_temperature = itr_temperature;
  options.lexicon = relation_lexicon;
  return options;
}

std::unique_ptr<Backend> make_backend(const ToolkitConfig& config,
                                      const std::string& endpoint_override) {
  if (!endpoint_override.empty()) {
    HttpBackendOptions options;
    options.capabilities = config.backend.capabilities;
    return std::make_unique<HttpBackend>(endpoint_override, options);
  }
  if (config.backend.kind == BackendKind::http) {
    HttpBackendOptions options;
    options.capabilities = config.backend.capabilities;
    return std::make_unique<HttpBackend>(config.backend.endpoint, options);
  }
  if (config.backend.fixtures.empty()) {
    return std::make_unique<FixtureBackend>(config.backend.capabilities);
  }
  return std::make_unique<FixtureBackend>(FixtureBackend::from_file(
      config.backend.fixtures, config.backend.capabilities));
}

}  // namespace vlx
