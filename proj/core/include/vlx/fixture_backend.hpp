#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "vlx/backend.hpp"

namespace vlx {

/// Deterministic fixture-table backend.
///
/// Responses are exact-match lookups keyed on (image identity, task,
/// normalized text); a miss raises FixtureMissError rather than returning a
/// fallback answer. Image identity resolves in order: the image's content
/// hash, the id registered for that hash, then the image's provenance label.
/// Content-hash entries therefore override label entries, which lets tests
/// target individual noise variants while hand-written fixtures answer all
/// variants of a labeled image uniformly.
///
/// Text embedding is not table-driven: it is an L2-normalized bag-of-tokens
/// hash vector (64 buckets, FNV-1a), a pure function of the input text.
///
/// Configure single-threaded via the add_* calls; afterwards the table is
/// read-only and safe for concurrent use.
class FixtureBackend final : public Backend {
 public:
  static constexpr std::size_t kEmbeddingDim = 64;

  explicit FixtureBackend(std::set<BackendCapability> caps = kAllCapabilities);

  /// Loads a JSON fixture file: an array of
  /// {"image_id", "task", "text", "response"} entries.
  static FixtureBackend from_file(
      const std::filesystem::path& path,
      std::set<BackendCapability> caps = kAllCapabilities);

  /// Maps the image's content hash to `id` so fixture entries can refer to
  /// the image by that id.
  void register_image(const std::string& id, const ImageBuffer& image);

  void add_vqa(const std::string& image_id, const std::string& question,
               const std::string& answer);
  void add_caption(const std::string& image_id, const std::string& caption);
  void add_itr_score(const std::string& image_id, const std::string& choice,
                     double score);
  void add_vg(const std::string& image_id, const std::string& phrase,
              const GroundingBox& box);

  std::size_t entry_count() const noexcept { return table_.size(); }

  const std::set<BackendCapability>& capabilities() const override {
    return caps_;
  }
  std::string name() const override { return "mock"; }
  std::string embedding_space() const override { return "mock-bag64-v1"; }

  /// The bag-of-tokens hash embedding, exposed for direct use in tests.
  static EmbeddingVector hash_embedding(const std::string& text);

 protected:
  std::string do_vqa(const ImageBuffer& image,
                     const std::string& question) const override;
  std::vector<double> do_itr_scores(
      const ImageBuffer& image,
      const std::vector<std::string>& choices) const override;
  GroundingBox do_ground_phrase(const ImageBuffer& image,
                                const std::string& phrase) const override;
  std::string do_caption(const ImageBuffer& image) const override;
  EmbeddingVector do_embed(const std::string& text) const override;

 private:
  using Response = std::variant<std::string, double, GroundingBox>;

  const Response& lookup(const ImageBuffer& image, const std::string& task,
                         const std::string& text) const;

  std::set<BackendCapability> caps_;
  std::map<std::string, Response> table_;
  std::map<std::string, std::string> registered_;  // content hash -> id
};

/// Canonical form for fixture text keys: lowercased, trimmed, inner
/// whitespace collapsed. Punctuation is preserved.
std::string normalize_fixture_text(std::string_view text);

}  // namespace vlx
