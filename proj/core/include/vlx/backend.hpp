#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "vlx/image.hpp"

namespace vlx {

enum class BackendCapability { vqa, itr_scores, vg, caption, embed_text };

std::string_view to_string(BackendCapability capability);
BackendCapability capability_from_string(std::string_view name);

inline const std::set<BackendCapability> kAllCapabilities = {
    BackendCapability::vqa, BackendCapability::itr_scores,
    BackendCapability::vg, BackendCapability::caption,
    BackendCapability::embed_text};

struct EmbeddingVector {
  std::vector<double> values;

  std::size_t dimension() const noexcept { return values.size(); }
};

/// Uniform gateway over vision-language capabilities.
///
/// Public entry points check capabilities and preconditions, and normalize
/// outputs (grounding boxes are clamped to image bounds; degenerate boxes
/// raise GroundingEmptyError). Answer strings, scores, and captions pass
/// through unmodified. Implementations override the do_* hooks and must be
/// safe for concurrent read-only use.
class Backend {
 public:
  virtual ~Backend() = default;

  virtual const std::set<BackendCapability>& capabilities() const = 0;
  virtual std::string name() const = 0;

  /// Identifier of the text-embedding space. Patrol stores refuse to compare
  /// embeddings recorded under a different identifier.
  virtual std::string embedding_space() const = 0;

  bool supports(BackendCapability capability) const {
    return capabilities().contains(capability);
  }

  /// Raw free-form answer to a question about the image.
  std::string vqa_answer(const ImageBuffer& image,
                         const std::string& question) const;

  /// One raw similarity score per choice, order-aligned with the input.
  std::vector<double> itr_scores(const ImageBuffer& image,
                                 const std::vector<std::string>& choices) const;

  /// The region best matching the phrase, clamped to image bounds.
  GroundingBox ground_phrase(const ImageBuffer& image,
                             const std::string& phrase) const;

  std::string caption_image(const ImageBuffer& image) const;

  /// Deterministic embedding for identical input text.
  EmbeddingVector embed_text(const std::string& text) const;

 protected:
  virtual std::string do_vqa(const ImageBuffer& image,
                             const std::string& question) const = 0;
  virtual std::vector<double> do_itr_scores(
      const ImageBuffer& image, const std::vector<std::string>& choices) const = 0;
  virtual GroundingBox do_ground_phrase(const ImageBuffer& image,
                                        const std::string& phrase) const = 0;
  virtual std::string do_caption(const ImageBuffer& image) const = 0;
  virtual EmbeddingVector do_embed(const std::string& text) const = 0;

 private:
  void require(BackendCapability capability) const;
};

}  // namespace vlx
