#include "vlx/http_backend.hpp"

#include <httplib.h>

#include <thread>

#include <nlohmann/json.hpp>

#include "vlx/errors.hpp"
#include "vlx/hash.hpp"
#include "vlx/image_io.hpp"

namespace vlx {

namespace {

using nlohmann::json;

json parse_response(const std::string& body) {
  json doc = json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw BackendUnavailableError("model server returned malformed JSON");
  }
  return doc;
}

std::string image_field(const ImageBuffer& image) {
  const std::vector<std::uint8_t> png = encode_png(image);
  return base64_encode(png);
}

}  // namespace

HttpBackend::HttpBackend(std::string endpoint, HttpBackendOptions options)
    : endpoint_(std::move(endpoint)), options_(std::move(options)) {
  if (endpoint_.rfind("http://", 0) != 0) {
    throw InvalidArgumentError(
        "model server endpoint must start with http://, got \"" + endpoint_ +
        "\"");
  }
  if (options_.max_retries < 0) {
    throw InvalidArgumentError("max_retries must be >= 0");
  }
}

std::string HttpBackend::post_infer(const std::string& body) const {
  std::string last_error;
  for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(options_.retry_backoff);
    }
    httplib::Client client(endpoint_);
    client.set_connection_timeout(options_.connect_timeout);
    client.set_read_timeout(options_.read_timeout);
    httplib::Result result = client.Post("/v1/infer", body, "application/json");
    if (!result) {
      last_error = httplib::to_string(result.error());
      continue;  // transport failure: retry
    }
    if (result->status != 200) {
      std::string detail = "HTTP " + std::to_string(result->status);
      const json doc = json::parse(result->body, nullptr, false);
      if (doc.is_object() && doc.contains("error") && doc["error"].is_string()) {
        detail += ": " + doc["error"].get<std::string>();
      }
      throw BackendUnavailableError("model server error (" + detail + ")");
    }
    return result->body;
  }
  throw BackendUnavailableError("transport failure after " +
                                std::to_string(options_.max_retries + 1) +
                                " attempts to " + endpoint_ + ": " +
                                last_error);
}

std::string HttpBackend::do_vqa(const ImageBuffer& image,
                                const std::string& question) const {
  json request = {{"task", "vqa"},
                  {"image", image_field(image)},
                  {"text", question}};
  json response = parse_response(post_infer(request.dump()));
  if (!response.contains("answer") || !response["answer"].is_string()) {
    throw BackendUnavailableError("vqa response missing \"answer\"");
  }
  return response["answer"].get<std::string>();
}

std::vector<double> HttpBackend::do_itr_scores(
    const ImageBuffer& image, const std::vector<std::string>& choices) const {
  json request = {{"task", "itr"},
                  {"image", image_field(image)},
                  {"texts", choices}};
  json response = parse_response(post_infer(request.dump()));
  if (!response.contains("scores") || !response["scores"].is_array()) {
    throw BackendUnavailableError("itr response missing \"scores\"");
  }
  std::vector<double> scores;
  scores.reserve(response["scores"].size());
  for (const json& v : response["scores"]) {
    if (!v.is_number()) {
      throw BackendUnavailableError("itr score is not a number");
    }
    scores.push_back(v.get<double>());
  }
  return scores;
}

GroundingBox HttpBackend::do_ground_phrase(const ImageBuffer& image,
                                           const std::string& phrase) const {
  json request = {{"task", "vg"},
                  {"image", image_field(image)},
                  {"text", phrase}};
  json response = parse_response(post_infer(request.dump()));
  if (!response.contains("bbox") || response["bbox"].is_null() ||
      (response["bbox"].is_array() && response["bbox"].empty())) {
    throw GroundingEmptyError("model server returned no region for \"" +
                              phrase + "\"");
  }
  const json& bbox = response["bbox"];
  if (!bbox.is_array() || bbox.size() != 4) {
    throw BackendUnavailableError("vg response \"bbox\" must be a 4-element array");
  }
  GroundingBox box;
  box.x_min = bbox[0].get<int>();
  box.y_min = bbox[1].get<int>();
  box.x_max = bbox[2].get<int>();
  box.y_max = bbox[3].get<int>();
  return box;
}

std::string HttpBackend::do_caption(const ImageBuffer& image) const {
  json request = {{"task", "caption"}, {"image", image_field(image)}};
  json response = parse_response(post_infer(request.dump()));
  if (!response.contains("caption") || !response["caption"].is_string()) {
    throw BackendUnavailableError("caption response missing \"caption\"");
  }
  return response["caption"].get<std::string>();
}

EmbeddingVector HttpBackend::do_embed(const std::string& text) const {
  json request = {{"task", "embed"}, {"text", text}};
  json response = parse_response(post_infer(request.dump()));
  if (!response.contains("embedding") || !response["embedding"].is_array()) {
    throw BackendUnavailableError("embed response missing \"embedding\"");
  }
  EmbeddingVector embedding;
  embedding.values.reserve(response["embedding"].size());
  for (const json& v : response["embedding"]) {
    if (!v.is_number()) {
      throw BackendUnavailableError("embedding value is not a number");
    }
    embedding.values.push_back(v.get<double>());
  }
  return embedding;
}

}  // namespace vlx
