#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vlx/backend.hpp"
#include "vlx/extractors.hpp"

namespace vlx {

/// A fixed patrol location with its recorded normal-state baseline.
struct Waypoint {
  std::string id;
  std::string label;
  std::string baseline_image_ref;  // store-relative, images/<sha256>.png
  std::string baseline_caption;
  EmbeddingVector baseline_embedding;
  std::string embedding_space;
  std::string recorded_at;
};

struct AnomalyReport {
  std::string waypoint_id;
  double similarity = 0.0;
  bool anomalous = false;
  std::string baseline_caption;
  std::string current_caption;
  double threshold = 0.0;
  std::string checked_at;
  int trials = 1;                          // > 1 for ensemble checks
  std::optional<double> similarity_stddev;  // set when trials > 1
};

struct RouteStop {
  std::string waypoint_id;
  ImageBuffer image;
};

/// One patrol outcome per route stop: either a report or an error entry.
struct PatrolEntry {
  std::string waypoint_id;
  std::optional<AnomalyReport> report;
  std::string error_code;    // empty on success
  std::string error_detail;
};

struct CheckOptions {
  /// Number of noise variants captioned per check; 1 compares the image
  /// as-is.
  int ensemble = 1;
  NoiseConfig noise;
};

/// Directory-backed waypoint store:
///   waypoints.json        index with baselines (caption + embedding)
///   images/<sha256>.png   content-addressed baseline images
///   reports.jsonl         one JSON object per check
///   audit.jsonl           one JSON object per baseline recording
///
/// Single writer; concurrent readers are safe.
class PatrolStore {
 public:
  explicit PatrolStore(std::filesystem::path dir);

  const std::filesystem::path& dir() const noexcept { return dir_; }

  std::optional<Waypoint> find(const std::string& waypoint_id) const;
  std::vector<std::string> waypoint_ids() const;
  std::size_t audit_entry_count() const;

  /// Captions and embeds the image, persists it content-addressed, and
  /// replaces any prior baseline for the id. Every recording is appended to
  /// the audit log.
  Waypoint record_baseline(const Backend& backend, const std::string& id,
                           const ImageBuffer& image,
                           const std::string& recorded_at,
                           const std::string& label = "");

  /// Compares the current image's caption embedding against the stored
  /// baseline embedding (the baseline is not re-captioned) and appends the
  /// report to reports.jsonl.
  AnomalyReport check_waypoint(const Backend& backend, const std::string& id,
                               const ImageBuffer& image, double threshold,
                               const std::string& checked_at,
                               const CheckOptions& options = {});

  /// Checks every stop in route order. Failures become error entries; the
  /// route is never aborted.
  std::vector<PatrolEntry> patrol(const Backend& backend,
                                  const std::vector<RouteStop>& route,
                                  double threshold,
                                  const std::string& checked_at,
                                  const CheckOptions& options = {});

 private:
  void load_index();
  void save_index() const;
  void append_jsonl(const std::filesystem::path& file,
                    const std::string& line) const;

  std::filesystem::path dir_;
  std::map<std::string, Waypoint> waypoints_;
};

}  // namespace vlx
