#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vlx/config.hpp"
#include "vlx/errors.hpp"
#include "vlx/fixture_backend.hpp"
#include "vlx/hash.hpp"
#include "vlx/http_backend.hpp"
#include "vlx/image_io.hpp"
#include "vlx/serialize.hpp"

namespace {

using nlohmann::json;

/// Command-line misuse distinct from extraction failures; exits with 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Context {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string log_path;
  bool audit = false;
  std::string now_override;

  vlx::ToolkitConfig config;
  std::unique_ptr<vlx::Backend> backend;
  vlx::RunOptions options;

  void load() {
    config = vlx::load_config(config_path);
    if (seed_set) {
      config.noise.seed = seed;  // flag wins over config, config over default
    }
    const char* env_endpoint = std::getenv("VLX_BACKEND_ENDPOINT");
    backend = vlx::make_backend(config, env_endpoint ? env_endpoint : "");
    options = config.run_options();
  }

  std::string now() const {
    return now_override.empty() ? vlx::current_timestamp_utc() : now_override;
  }

  void append_log(const std::string& task_name, const json& inputs,
                  const json& result) const {
    if (log_path.empty()) return;
    const std::string digest = vlx::sha256_hex(inputs.dump());
    const std::string timestamp = now();
    json record{{"schema_version", 1},
                {"run_id",
                 vlx::sha256_hex(task_name + "|" + timestamp + "|" + digest)
                     .substr(0, 12)},
                {"task_name", task_name},
                {"timestamp", timestamp},
                {"inputs_digest", digest},
                {"result", result}};
    std::ofstream out(log_path, std::ios::app);
    if (!out) {
      throw vlx::StoreWriteError("cannot append to log " + log_path);
    }
    out << record.dump() << '\n';
  }
};

struct ExtractArgs {
  std::string image;
  std::string image_a;
  std::string image_b;
  std::string template_text;
  std::vector<std::string> choices;
  std::string phrase;
  bool freeform = false;
  double temperature = 0.0;  // 0: use config value
  double threshold = 2.0;    // sentinel: use config value
  int ensemble = 1;
};

struct TaskArgs {
  std::string name;
  std::string image;
  std::vector<std::string> views;
  std::string expected;
};

struct PatrolArgs {
  std::string store;
  std::string id;
  std::string image;
  std::string label;
  std::string route;
  double threshold = 2.0;  // sentinel: use config value
  int ensemble = 1;
};

vlx::ChoiceSet choice_set_from_flags(const std::vector<std::string>& choices) {
  if (choices.empty()) {
    throw UsageError("--choices is required");
  }
  return vlx::ChoiceSet::from_phrases(choices);
}

json cmd_extract_bvqa(Context& ctx, const ExtractArgs& args) {
  ctx.load();
  const vlx::ImageBuffer image = vlx::load_image(args.image);
  const vlx::BinaryResult result = vlx::run_bvqa(
      *ctx.backend, image,
      vlx::QuestionTemplate(args.template_text, ctx.options.articles),
      ctx.options.noise, ctx.options.policy, ctx.options.aliases);
  const json out = vlx::to_json(result, ctx.audit);
  ctx.append_log("extract.bvqa",
                 json{{"image", vlx::content_hash(image)},
                      {"template", args.template_text},
                      {"seed", ctx.options.noise.seed}},
                 out);
  return out;
}

json cmd_extract_mvqa(Context& ctx, const ExtractArgs& args) {
  ctx.load();
  const vlx::ImageBuffer image = vlx::load_image(args.image);
  const vlx::QuestionTemplate tmpl(args.template_text, ctx.options.articles);
  json out;
  if (args.freeform) {
    out = vlx::to_json(
        vlx::run_mvqa_freeform(*ctx.backend, image, tmpl, ctx.options.noise),
        ctx.audit);
  } else {
    out = vlx::to_json(vlx::run_mvqa(*ctx.backend, image, tmpl,
                                     choice_set_from_flags(args.choices),
                                     ctx.options.noise),
                       ctx.audit);
  }
  ctx.append_log("extract.mvqa",
                 json{{"image", vlx::content_hash(image)},
                      {"template", args.template_text},
                      {"choices", args.choices},
                      {"freeform", args.freeform},
                      {"seed", ctx.options.noise.seed}},
                 out);
  return out;
}

json cmd_extract_itr(Context& ctx, const ExtractArgs& args) {
  ctx.load();
  const vlx::ImageBuffer image = vlx::load_image(args.image);
  const vlx::ChoiceSet choices = choice_set_from_flags(args.choices);
  const double temperature =
      args.temperature > 0.0 ? args.temperature : ctx.options.itr_temperature;
  json out;
  if (args.ensemble > 1) {
    vlx::NoiseConfig noise = ctx.options.noise;
    noise.n_variants = args.ensemble;
    out = vlx::to_json(
        vlx::run_itr_ensemble(*ctx.backend, image, choices, temperature, noise));
  } else {
    out = vlx::to_json(vlx::run_itr(*ctx.backend, image, choices, temperature));
  }
  ctx.append_log("extract.itr",
                 json{{"image", vlx::content_hash(image)},
                      {"choices", args.choices},
                      {"temperature", temperature},
                      {"ensemble", args.ensemble}},
                 out);
  return out;
}

json cmd_extract_vg(Context& ctx, const ExtractArgs& args) {
  ctx.load();
  const vlx::ImageBuffer image = vlx::load_image(args.image);
  const json out =
      vlx::to_json(vlx::run_vg(*ctx.backend, image, args.phrase));
  ctx.append_log(
      "extract.vg",
      json{{"image", vlx::content_hash(image)}, {"phrase", args.phrase}}, out);
  return out;
}

json cmd_extract_dic(Context& ctx, const ExtractArgs& args) {
  ctx.load();
  const vlx::ImageBuffer image_a = vlx::load_image(args.image_a);
  const vlx::ImageBuffer image_b = vlx::load_image(args.image_b);
  const double threshold =
      args.threshold <= 1.0 ? args.threshold : ctx.config.dic_threshold;
  json out;
  if (args.ensemble > 1) {
    vlx::NoiseConfig noise = ctx.options.noise;
    noise.n_variants = args.ensemble;
    out = vlx::to_json(
        vlx::run_dic_ensemble(*ctx.backend, image_a, image_b, threshold, noise));
  } else {
    out = vlx::to_json(vlx::run_dic(*ctx.backend, image_a, image_b, threshold));
  }
  ctx.append_log("extract.dic",
                 json{{"image_a", vlx::content_hash(image_a)},
                      {"image_b", vlx::content_hash(image_b)},
                      {"threshold", threshold},
                      {"ensemble", args.ensemble}},
                 out);
  return out;
}

json run_named_task(Context& ctx, const vlx::TaskDef& def,
                    const vlx::ImageBuffer& image) {
  if (def.chain) {
    return vlx::to_json(
        vlx::stepwise_refine(*ctx.backend, image, *def.chain, ctx.options),
        ctx.audit);
  }
  return vlx::to_json(
      vlx::run_recognition_task(*ctx.backend, *def.task, image, ctx.options),
      ctx.audit);
}

json cmd_task_run(Context& ctx, const TaskArgs& args) {
  ctx.load();
  const auto it = ctx.config.tasks.find(args.name);
  if (it == ctx.config.tasks.end()) {
    throw UsageError("unknown task \"" + args.name + "\"");
  }
  const vlx::TaskDef& def = it->second;

  json out;
  json inputs{{"task", args.name}, {"seed", ctx.options.noise.seed}};
  if (!args.views.empty()) {
    if (args.expected.empty()) {
      throw UsageError("--expected is required with --views");
    }
    if (def.chain) {
      throw UsageError("--views is not supported for refinement chains");
    }
    std::vector<double> rates;
    json views = json::array();
    json image_hashes = json::array();
    for (const std::string& view_path : args.views) {
      const vlx::ImageBuffer view = vlx::load_image(view_path);
      image_hashes.push_back(vlx::content_hash(view));
      const vlx::TaskValue value =
          vlx::run_recognition_task(*ctx.backend, *def.task, view, ctx.options);
      const double rate = vlx::correct_rate(value, args.expected);
      rates.push_back(rate);
      views.push_back(json{{"image", view_path},
                           {"rate", rate},
                           {"result", vlx::to_json(value, ctx.audit)}});
    }
    const vlx::ViewpointStats stats = vlx::viewpoint_stats(rates);
    out = json{{"task", args.name},
               {"expected", args.expected},
               {"views", views},
               {"stats", vlx::to_json(stats)}};
    inputs["images"] = image_hashes;
    inputs["expected"] = args.expected;
  } else {
    if (args.image.empty()) {
      throw UsageError("--image is required (or pass --views)");
    }
    const vlx::ImageBuffer image = vlx::load_image(args.image);
    out = json{{"task", args.name},
               {"result", run_named_task(ctx, def, image)}};
    inputs["image"] = vlx::content_hash(image);
  }
  ctx.append_log("task." + args.name, inputs, out);
  return out;
}

json cmd_patrol_record(Context& ctx, const PatrolArgs& args) {
  ctx.load();
  vlx::PatrolStore store(args.store);
  const vlx::ImageBuffer image = vlx::load_image(args.image);
  const vlx::Waypoint waypoint = store.record_baseline(
      *ctx.backend, args.id, image, ctx.now(), args.label);
  return vlx::to_json(waypoint);
}

json cmd_patrol_check(Context& ctx, const PatrolArgs& args) {
  ctx.load();
  vlx::PatrolStore store(args.store);
  const vlx::ImageBuffer image = vlx::load_image(args.image);
  const double threshold =
      args.threshold <= 1.0 ? args.threshold : ctx.config.dic_threshold;
  vlx::CheckOptions check;
  check.ensemble = args.ensemble;
  check.noise = ctx.options.noise;
  const vlx::AnomalyReport report = store.check_waypoint(
      *ctx.backend, args.id, image, threshold, ctx.now(), check);
  return vlx::to_json(report);
}

json cmd_patrol_run(Context& ctx, const PatrolArgs& args) {
  ctx.load();
  vlx::PatrolStore store(args.store);
  std::ifstream in(args.route);
  if (!in) {
    throw UsageError("cannot open route file " + args.route);
  }
  const json doc = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_array()) {
    throw UsageError("route file must be a JSON array of "
                     "{\"waypoint_id\", \"image\"} objects");
  }
  const std::filesystem::path route_dir =
      std::filesystem::path(args.route).parent_path();
  std::vector<vlx::RouteStop> route;
  for (const json& stop : doc) {
    if (!stop.is_object() || !stop.contains("waypoint_id") ||
        !stop.contains("image")) {
      throw UsageError("route stops need \"waypoint_id\" and \"image\"");
    }
    std::filesystem::path image_path = stop["image"].get<std::string>();
    if (image_path.is_relative()) {
      image_path = route_dir / image_path;  // relative to the route file
    }
    route.push_back(
        {stop["waypoint_id"].get<std::string>(), vlx::load_image(image_path)});
  }
  const double threshold =
      args.threshold <= 1.0 ? args.threshold : ctx.config.dic_threshold;
  vlx::CheckOptions check;
  check.ensemble = args.ensemble;
  check.noise = ctx.options.noise;
  const std::vector<vlx::PatrolEntry> entries =
      store.patrol(*ctx.backend, route, threshold, ctx.now(), check);
  json out = json::array();
  for (const vlx::PatrolEntry& entry : entries) {
    out.push_back(vlx::to_json(entry));
  }
  return out;
}

json cmd_backend_ping(Context& ctx) {
  ctx.load();
  json capabilities = json::array();
  for (const vlx::BackendCapability cap : ctx.backend->capabilities()) {
    capabilities.push_back(std::string(vlx::to_string(cap)));
  }
  json out{{"backend", ctx.backend->name()}, {"capabilities", capabilities}};
  if (const auto* http = dynamic_cast<const vlx::HttpBackend*>(ctx.backend.get())) {
    out["endpoint"] = http->endpoint();
  }
  if (const auto* mock =
          dynamic_cast<const vlx::FixtureBackend*>(ctx.backend.get())) {
    out["fixture_entries"] = mock->entry_count();
  }
  if (ctx.backend->supports(vlx::BackendCapability::embed_text)) {
    ctx.backend->embed_text("ping");  // throws if the server is unreachable
    out["status"] = "ok";
  } else {
    out["status"] = "configured";
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Turns vision-language backend outputs into "
               "robot-understandable values"};
  app.require_subcommand(1);

  Context ctx;
  ExtractArgs extract_args;
  TaskArgs task_args;
  PatrolArgs patrol_args;
  std::function<json()> action;

  app.add_option("--config", ctx.config_path, "Toolkit config JSON")
      ->required();
  app.add_option("--seed", ctx.seed, "Noise seed (overrides config)")
      ->each([&](const std::string&) { ctx.seed_set = true; });
  app.add_option("--log", ctx.log_path, "Append result records to this JSONL file");
  app.add_flag("--audit", ctx.audit, "Include raw per-trial answers in output");
  app.add_option("--now", ctx.now_override,
                 "Pin timestamps to this value (for reproducible output)");

  // vlx extract {bvqa|mvqa|itr|vg|dic}
  CLI::App* extract = app.add_subcommand("extract", "Run one extraction method");
  extract->require_subcommand(1);
  extract->fallthrough();

  CLI::App* bvqa = extract->add_subcommand("bvqa", "Binary yes/no decision");
  bvqa->fallthrough();
  bvqa->add_option("--image", extract_args.image, "Input image")->required();
  bvqa->add_option("--template", extract_args.template_text,
                   "Question with one {art} slot")
      ->required();
  bvqa->callback([&] { action = [&] { return cmd_extract_bvqa(ctx, extract_args); }; });

  CLI::App* mvqa = extract->add_subcommand("mvqa", "Choice matching over answers");
  mvqa->fallthrough();
  mvqa->add_option("--image", extract_args.image, "Input image")->required();
  mvqa->add_option("--template", extract_args.template_text,
                   "Question with one {art} slot")
      ->required();
  mvqa->add_option("--choices", extract_args.choices,
                   "Candidate phrases (comma separated or repeated)")
      ->delimiter(',');
  mvqa->add_flag("--freeform", extract_args.freeform,
                 "Return the modal answer instead of matching choices");
  mvqa->callback([&] { action = [&] { return cmd_extract_mvqa(ctx, extract_args); }; });

  CLI::App* itr = extract->add_subcommand("itr", "Image-to-text retrieval");
  itr->fallthrough();
  itr->add_option("--image", extract_args.image, "Input image")->required();
  itr->add_option("--choices", extract_args.choices,
                  "Candidate phrases (comma separated or repeated)")
      ->delimiter(',');
  itr->add_option("--temperature", extract_args.temperature,
                  "Softmax temperature (overrides config)");
  itr->add_option("--ensemble", extract_args.ensemble,
                  "Average probabilities over N noise variants");
  itr->callback([&] { action = [&] { return cmd_extract_itr(ctx, extract_args); }; });

  CLI::App* vg = extract->add_subcommand("vg", "Ground a phrase to a box");
  vg->fallthrough();
  vg->add_option("--image", extract_args.image, "Input image")->required();
  vg->add_option("--phrase", extract_args.phrase, "Phrase to ground")->required();
  vg->callback([&] { action = [&] { return cmd_extract_vg(ctx, extract_args); }; });

  CLI::App* dic = extract->add_subcommand("dic", "Caption-difference change flag");
  dic->fallthrough();
  dic->add_option("--image-a", extract_args.image_a, "First image")->required();
  dic->add_option("--image-b", extract_args.image_b, "Second image")->required();
  dic->add_option("--threshold", extract_args.threshold,
                  "Change threshold in [-1,1] (overrides config)");
  dic->add_option("--ensemble", extract_args.ensemble,
                  "Compare N noise-variant pairs and report mean/stddev");
  dic->callback([&] { action = [&] { return cmd_extract_dic(ctx, extract_args); }; });

  // vlx task run NAME
  CLI::App* task = app.add_subcommand("task", "Run a task defined in the config");
  task->require_subcommand(1);
  task->fallthrough();
  CLI::App* task_run = task->add_subcommand("run", "Run a named task");
  task_run->fallthrough();
  task_run->add_option("name", task_args.name, "Task name from the config")
      ->required();
  task_run->add_option("--image", task_args.image, "Input image");
  task_run->add_option("--views", task_args.views,
                       "Per-view images; reports correctness mean/stddev")
      ->delimiter(',');
  task_run->add_option("--expected", task_args.expected,
                       "Expected answer used to score --views");
  task_run->callback([&] { action = [&] { return cmd_task_run(ctx, task_args); }; });

  // vlx patrol {record|check|run}
  CLI::App* patrol = app.add_subcommand("patrol", "Baseline-and-check anomaly patrol");
  patrol->require_subcommand(1);
  patrol->fallthrough();

  CLI::App* record = patrol->add_subcommand("record", "Record a waypoint baseline");
  record->fallthrough();
  record->add_option("--store", patrol_args.store, "Store directory")->required();
  record->add_option("--id", patrol_args.id, "Waypoint id")->required();
  record->add_option("--image", patrol_args.image, "Baseline image")->required();
  record->add_option("--label", patrol_args.label, "Human-readable label");
  record->callback([&] { action = [&] { return cmd_patrol_record(ctx, patrol_args); }; });

  CLI::App* check = patrol->add_subcommand("check", "Check one waypoint");
  check->fallthrough();
  check->add_option("--store", patrol_args.store, "Store directory")->required();
  check->add_option("--id", patrol_args.id, "Waypoint id")->required();
  check->add_option("--image", patrol_args.image, "Current image")->required();
  check->add_option("--threshold", patrol_args.threshold,
                    "Anomaly threshold in [-1,1] (overrides config)");
  check->add_option("--ensemble", patrol_args.ensemble,
                    "Caption N noise variants and compare the mean");
  check->callback([&] { action = [&] { return cmd_patrol_check(ctx, patrol_args); }; });

  CLI::App* run = patrol->add_subcommand("run", "Check every stop on a route");
  run->fallthrough();
  run->add_option("--store", patrol_args.store, "Store directory")->required();
  run->add_option("--route", patrol_args.route,
                  "JSON array of {\"waypoint_id\", \"image\"}")
      ->required();
  run->add_option("--threshold", patrol_args.threshold,
                  "Anomaly threshold in [-1,1] (overrides config)");
  run->add_option("--ensemble", patrol_args.ensemble,
                  "Caption N noise variants per stop");
  run->callback([&] { action = [&] { return cmd_patrol_run(ctx, patrol_args); }; });

  // vlx backend ping
  CLI::App* backend = app.add_subcommand("backend", "Backend utilities");
  backend->require_subcommand(1);
  backend->fallthrough();
  CLI::App* ping = backend->add_subcommand("ping", "Probe the configured backend");
  ping->fallthrough();
  ping->callback([&] { action = [&] { return cmd_backend_ping(ctx); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Keep stdout JSON-only; help and usage diagnostics go to stderr.
    const int code = app.exit(e, std::cerr, std::cerr);
    return code == 0 ? 0 : 2;
  }

  try {
    const json out = action();
    std::cout << out.dump() << '\n';
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const vlx::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const vlx::Error& e) {
    std::cout << json{{"error", e.code()}}.dump() << '\n';
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
