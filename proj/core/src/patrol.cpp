#include "vlx/patrol.hpp"

#include <fstream>
#include <system_error>

#include <nlohmann/json.hpp>

#include "vlx/errors.hpp"
#include "vlx/hash.hpp"
#include "vlx/image_io.hpp"
#include "vlx/variation.hpp"

namespace vlx {

namespace {

using nlohmann::json;

json waypoint_to_json(const Waypoint& wp) {
  return json{{"id", wp.id},
              {"label", wp.label},
              {"baseline_image_ref", wp.baseline_image_ref},
              {"baseline_caption", wp.baseline_caption},
              {"baseline_embedding", wp.baseline_embedding.values},
              {"embedding_space", wp.embedding_space},
              {"recorded_at", wp.recorded_at}};
}

Waypoint waypoint_from_json(const json& doc) {
  Waypoint wp;
  wp.id = doc.at("id").get<std::string>();
  wp.label = doc.at("label").get<std::string>();
  wp.baseline_image_ref = doc.at("baseline_image_ref").get<std::string>();
  wp.baseline_caption = doc.at("baseline_caption").get<std::string>();
  wp.baseline_embedding.values =
      doc.at("baseline_embedding").get<std::vector<double>>();
  wp.embedding_space = doc.at("embedding_space").get<std::string>();
  wp.recorded_at = doc.at("recorded_at").get<std::string>();
  return wp;
}

// reports.jsonl record: exactly the documented seven fields.
json report_to_json(const AnomalyReport& report) {
  return json{{"waypoint_id", report.waypoint_id},
              {"similarity", report.similarity},
              {"anomalous", report.anomalous},
              {"baseline_caption", report.baseline_caption},
              {"current_caption", report.current_caption},
              {"threshold", report.threshold},
              {"checked_at", report.checked_at}};
}

}  // namespace

PatrolStore::PatrolStore(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_ / "images", ec);
  if (ec || !std::filesystem::is_directory(dir_)) {
    throw StoreWriteError("cannot create store directory " + dir_.string() +
                          (ec ? ": " + ec.message() : ""));
  }
  load_index();
}

void PatrolStore::load_index() {
  const std::filesystem::path index = dir_ / "waypoints.json";
  if (!std::filesystem::exists(index)) {
    return;
  }
  std::ifstream in(index);
  json doc = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("waypoints")) {
    throw StoreError("corrupt index " + index.string());
  }
  try {
    for (const auto& [id, wp] : doc["waypoints"].items()) {
      waypoints_[id] = waypoint_from_json(wp);
    }
  } catch (const json::exception& e) {
    throw StoreError("corrupt index " + index.string() + ": " + e.what());
  }
}

void PatrolStore::save_index() const {
  json waypoints = json::object();
  for (const auto& [id, wp] : waypoints_) {
    waypoints[id] = waypoint_to_json(wp);
  }
  const json doc = {{"schema_version", 1}, {"waypoints", waypoints}};
  const std::filesystem::path index = dir_ / "waypoints.json";
  std::ofstream out(index, std::ios::trunc);
  if (!out) {
    throw StoreWriteError("cannot write " + index.string());
  }
  out << doc.dump(2) << '\n';
  if (!out) {
    throw StoreWriteError("short write to " + index.string());
  }
}

void PatrolStore::append_jsonl(const std::filesystem::path& file,
                               const std::string& line) const {
  std::ofstream out(file, std::ios::app);
  if (!out) {
    throw StoreWriteError("cannot append to " + file.string());
  }
  out << line << '\n';
  if (!out) {
    throw StoreWriteError("short write to " + file.string());
  }
}

std::optional<Waypoint> PatrolStore::find(const std::string& waypoint_id) const {
  if (auto it = waypoints_.find(waypoint_id); it != waypoints_.end()) {
    return it->second;
  }
  return std::nullopt;
}

std::vector<std::string> PatrolStore::waypoint_ids() const {
  std::vector<std::string> ids;
  ids.reserve(waypoints_.size());
  for (const auto& [id, wp] : waypoints_) ids.push_back(id);
  return ids;
}

std::size_t PatrolStore::audit_entry_count() const {
  std::ifstream in(dir_ / "audit.jsonl");
  std::size_t count = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) ++count;
  }
  return count;
}

Waypoint PatrolStore::record_baseline(const Backend& backend,
                                      const std::string& id,
                                      const ImageBuffer& image,
                                      const std::string& recorded_at,
                                      const std::string& label) {
  if (id.empty()) {
    throw InvalidArgumentError("waypoint id must not be empty");
  }
  Waypoint wp;
  wp.id = id;
  wp.label = label;
  wp.baseline_caption = backend.caption_image(image);
  wp.baseline_embedding = backend.embed_text(wp.baseline_caption);
  wp.embedding_space = backend.embedding_space();
  wp.recorded_at = recorded_at;

  const std::vector<std::uint8_t> png = encode_png(image);
  const std::string sha = sha256_hex(png);
  wp.baseline_image_ref = "images/" + sha + ".png";
  const std::filesystem::path image_path = dir_ / wp.baseline_image_ref;
  if (!std::filesystem::exists(image_path)) {
    std::ofstream out(image_path, std::ios::binary);
    if (!out) {
      throw StoreWriteError("cannot write " + image_path.string());
    }
    out.write(reinterpret_cast<const char*>(png.data()),
              static_cast<std::streamsize>(png.size()));
    if (!out) {
      throw StoreWriteError("short write to " + image_path.string());
    }
  }

  waypoints_[id] = wp;
  save_index();
  const json audit = {{"event", "record"},
                      {"waypoint_id", id},
                      {"recorded_at", recorded_at},
                      {"image_ref", wp.baseline_image_ref},
                      {"caption", wp.baseline_caption}};
  append_jsonl(dir_ / "audit.jsonl", audit.dump());
  return wp;
}

AnomalyReport PatrolStore::check_waypoint(const Backend& backend,
                                          const std::string& id,
                                          const ImageBuffer& image,
                                          double threshold,
                                          const std::string& checked_at,
                                          const CheckOptions& options) {
  if (threshold < -1.0 || threshold > 1.0) {
    throw InvalidArgumentError("threshold must be in [-1,1]");
  }
  if (options.ensemble < 1) {
    throw InvalidArgumentError("ensemble count must be >= 1");
  }
  const auto wp = find(id);
  if (!wp) {
    throw UnknownWaypointError("no baseline recorded for waypoint \"" + id +
                               "\"");
  }
  if (wp->embedding_space != backend.embedding_space()) {
    throw EmbeddingSpaceMismatchError(
        "baseline for \"" + id + "\" was embedded under \"" +
        wp->embedding_space + "\" but the backend provides \"" +
        backend.embedding_space() + "\"");
  }

  AnomalyReport report;
  report.waypoint_id = id;
  report.baseline_caption = wp->baseline_caption;
  report.threshold = threshold;
  report.checked_at = checked_at;

  if (options.ensemble == 1) {
    report.current_caption = backend.caption_image(image);
    report.similarity =
        cosine_similarity(wp->baseline_embedding,
                          backend.embed_text(report.current_caption));
  } else {
    NoiseConfig noise = options.noise;
    noise.n_variants = options.ensemble;
    std::vector<double> sims;
    sims.reserve(options.ensemble);
    for (int v = 0; v < options.ensemble; ++v) {
      const std::string caption =
          backend.caption_image(rgb_shift(image, noise, v));
      if (v == 0) report.current_caption = caption;
      sims.push_back(cosine_similarity(wp->baseline_embedding,
                                       backend.embed_text(caption)));
    }
    double sum = 0.0;
    for (double s : sims) sum += s;
    report.similarity = sum / static_cast<double>(sims.size());
    double sum_sq = 0.0;
    for (double s : sims) {
      sum_sq += (s - report.similarity) * (s - report.similarity);
    }
    report.similarity_stddev =
        std::sqrt(sum_sq / static_cast<double>(sims.size()));
    report.trials = options.ensemble;
  }
  report.anomalous = report.similarity < threshold;
  append_jsonl(dir_ / "reports.jsonl", report_to_json(report).dump());
  return report;
}

std::vector<PatrolEntry> PatrolStore::patrol(const Backend& backend,
                                             const std::vector<RouteStop>& route,
                                             double threshold,
                                             const std::string& checked_at,
                                             const CheckOptions& options) {
  std::vector<PatrolEntry> entries;
  entries.reserve(route.size());
  for (const RouteStop& stop : route) {
    PatrolEntry entry;
    entry.waypoint_id = stop.waypoint_id;
    try {
      entry.report = check_waypoint(backend, stop.waypoint_id, stop.image,
                                    threshold, checked_at, options);
    } catch (const Error& e) {
      entry.error_code = e.code();
      entry.error_detail = e.what();
    }
    entries.push_back(std::move(entry));
  }
  return entries;
}

}  // namespace vlx
