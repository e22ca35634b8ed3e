#pragma once

#include <chrono>
#include <set>
#include <string>

#include "vlx/backend.hpp"

namespace vlx {

struct HttpBackendOptions {
  /// Transport failures are retried this many times with a fixed backoff,
  /// then BackendUnavailableError is raised. HTTP error responses are not
  /// retried.
  int max_retries = 2;
  std::chrono::milliseconds retry_backoff{500};
  std::chrono::seconds connect_timeout{5};
  std::chrono::seconds read_timeout{30};
  std::set<BackendCapability> capabilities = kAllCapabilities;
};

/// Client for an external model server speaking JSON over POST /v1/infer.
///
/// Request: {"task": "vqa"|"itr"|"vg"|"caption"|"embed",
///           "image": <base64 PNG, omitted for embed>,
///           "text": <string, for vqa/vg/embed>,
///           "texts": [<string>, ...] (for itr)}
/// Response: {"answer": str} | {"scores": [float, ...]} |
///           {"bbox": [x_min, y_min, x_max, y_max]} | {"caption": str} |
///           {"embedding": [float, ...]}; errors arrive as {"error": str}
///           with an HTTP 4xx/5xx status.
///
/// Each request uses its own connection, so concurrent calls are safe.
class HttpBackend final : public Backend {
 public:
  explicit HttpBackend(std::string endpoint, HttpBackendOptions options = {});

  const std::set<BackendCapability>& capabilities() const override {
    return options_.capabilities;
  }
  std::string name() const override { return "http"; }
  std::string embedding_space() const override {
    return "http:" + endpoint_;
  }
  const std::string& endpoint() const noexcept { return endpoint_; }

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
  std::string post_infer(const std::string& body) const;

  std::string endpoint_;
  HttpBackendOptions options_;
};

}  // namespace vlx
