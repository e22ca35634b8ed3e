#include "vlx/backend.hpp"

#include <cmath>

#include "vlx/errors.hpp"

namespace vlx {

std::string_view to_string(BackendCapability capability) {
  switch (capability) {
    case BackendCapability::vqa:
      return "vqa";
    case BackendCapability::itr_scores:
      return "itr";
    case BackendCapability::vg:
      return "vg";
    case BackendCapability::caption:
      return "caption";
    case BackendCapability::embed_text:
      return "embed";
  }
  return "unknown";
}

BackendCapability capability_from_string(std::string_view name) {
  if (name == "vqa") return BackendCapability::vqa;
  if (name == "itr") return BackendCapability::itr_scores;
  if (name == "vg") return BackendCapability::vg;
  if (name == "caption") return BackendCapability::caption;
  if (name == "embed") return BackendCapability::embed_text;
  throw InvalidArgumentError("unknown backend capability \"" +
                             std::string(name) + "\"");
}

void Backend::require(BackendCapability capability) const {
  if (!supports(capability)) {
    throw CapabilityUnsupportedError("backend \"" + name() +
                                     "\" does not support " +
                                     std::string(to_string(capability)));
  }
}

std::string Backend::vqa_answer(const ImageBuffer& image,
                                const std::string& question) const {
  require(BackendCapability::vqa);
  if (question.empty()) {
    throw InvalidArgumentError("vqa question must not be empty");
  }
  return do_vqa(image, question);
}

std::vector<double> Backend::itr_scores(
    const ImageBuffer& image, const std::vector<std::string>& choices) const {
  require(BackendCapability::itr_scores);
  if (choices.empty()) {
    throw InvalidArgumentError("itr choices must not be empty");
  }
  std::vector<double> scores = do_itr_scores(image, choices);
  if (scores.size() != choices.size()) {
    throw BackendUnavailableError(
        "backend returned " + std::to_string(scores.size()) + " scores for " +
        std::to_string(choices.size()) + " choices");
  }
  return scores;
}

GroundingBox Backend::ground_phrase(const ImageBuffer& image,
                                    const std::string& phrase) const {
  require(BackendCapability::vg);
  if (phrase.empty()) {
    throw InvalidArgumentError("grounding phrase must not be empty");
  }
  GroundingBox box = clamp_box(do_ground_phrase(image, phrase),
                               image.width(), image.height());
  box.source_phrase = phrase;
  if (box.x_min >= box.x_max || box.y_min >= box.y_max) {
    throw GroundingEmptyError("no region for phrase \"" + phrase + "\"");
  }
  return box;
}

std::string Backend::caption_image(const ImageBuffer& image) const {
  require(BackendCapability::caption);
  std::string caption = do_caption(image);
  if (caption.empty()) {
    throw BackendUnavailableError("backend returned an empty caption");
  }
  return caption;
}

EmbeddingVector Backend::embed_text(const std::string& text) const {
  require(BackendCapability::embed_text);
  if (text.empty()) {
    throw InvalidArgumentError("embed_text input must not be empty");
  }
  EmbeddingVector embedding = do_embed(text);
  if (embedding.values.empty()) {
    throw BackendUnavailableError("backend returned an empty embedding");
  }
  double norm_sq = 0.0;
  for (double v : embedding.values) norm_sq += v * v;
  if (norm_sq == 0.0) {
    throw ZeroVectorError("embedding of \"" + text + "\" is all-zero");
  }
  return embedding;
}

}  // namespace vlx
