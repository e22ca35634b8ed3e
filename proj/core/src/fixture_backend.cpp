#include "vlx/fixture_backend.hpp"

#include <cctype>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "vlx/answers.hpp"
#include "vlx/errors.hpp"
#include "vlx/hash.hpp"

namespace vlx {

namespace {

constexpr char kKeySep = '\x1f';

std::string make_key(const std::string& image_key, const std::string& task,
                     const std::string& text) {
  return image_key + kKeySep + task + kKeySep + normalize_fixture_text(text);
}

}  // namespace

std::string normalize_fixture_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char ch : text) {
    const unsigned char c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
  }
  return out;
}

FixtureBackend::FixtureBackend(std::set<BackendCapability> caps)
    : caps_(std::move(caps)) {}

FixtureBackend FixtureBackend::from_file(const std::filesystem::path& path,
                                         std::set<BackendCapability> caps) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("fixtures", "cannot open fixture file " + path.string());
  }
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("fixtures", "invalid JSON in " + path.string() + ": " +
                                      e.what());
  }
  if (!doc.is_array()) {
    throw ConfigError("fixtures", "fixture file must be a JSON array");
  }

  FixtureBackend backend(std::move(caps));
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const std::string where = "fixtures[" + std::to_string(i) + "]";
    const nlohmann::json& entry = doc[i];
    if (!entry.is_object()) {
      throw ConfigError(where, "entry must be an object");
    }
    if (!entry.contains("image_id") || !entry["image_id"].is_string()) {
      throw ConfigError(where + ".image_id", "required string");
    }
    if (!entry.contains("task") || !entry["task"].is_string()) {
      throw ConfigError(where + ".task", "required string");
    }
    if (!entry.contains("response")) {
      throw ConfigError(where + ".response", "required");
    }
    const std::string image_id = entry["image_id"].get<std::string>();
    const std::string task = entry["task"].get<std::string>();
    std::string text;
    if (entry.contains("text") && !entry["text"].is_null()) {
      if (!entry["text"].is_string()) {
        throw ConfigError(where + ".text", "must be a string or null");
      }
      text = entry["text"].get<std::string>();
    }
    const nlohmann::json& response = entry["response"];

    if (task == "vqa") {
      if (text.empty()) throw ConfigError(where + ".text", "vqa entry needs a question");
      if (!response.is_string()) throw ConfigError(where + ".response", "vqa response must be a string");
      backend.add_vqa(image_id, text, response.get<std::string>());
    } else if (task == "caption") {
      if (!response.is_string()) throw ConfigError(where + ".response", "caption response must be a string");
      backend.add_caption(image_id, response.get<std::string>());
    } else if (task == "itr") {
      if (text.empty()) throw ConfigError(where + ".text", "itr entry needs a choice phrase");
      if (!response.is_number()) throw ConfigError(where + ".response", "itr response must be a number");
      backend.add_itr_score(image_id, text, response.get<double>());
    } else if (task == "vg") {
      if (text.empty()) throw ConfigError(where + ".text", "vg entry needs a phrase");
      if (!response.is_array() || response.size() != 4) {
        throw ConfigError(where + ".response", "vg response must be [x_min,y_min,x_max,y_max]");
      }
      GroundingBox box;
      box.x_min = response[0].get<int>();
      box.y_min = response[1].get<int>();
      box.x_max = response[2].get<int>();
      box.y_max = response[3].get<int>();
      backend.add_vg(image_id, text, box);
    } else {
      throw ConfigError(where + ".task", "unknown task \"" + task + "\"");
    }
  }
  return backend;
}

void FixtureBackend::register_image(const std::string& id,
                                    const ImageBuffer& image) {
  registered_[content_hash(image)] = id;
}

void FixtureBackend::add_vqa(const std::string& image_id,
                             const std::string& question,
                             const std::string& answer) {
  table_[make_key(image_id, "vqa", question)] = answer;
}

void FixtureBackend::add_caption(const std::string& image_id,
                                 const std::string& caption) {
  table_[make_key(image_id, "caption", "")] = caption;
}

void FixtureBackend::add_itr_score(const std::string& image_id,
                                   const std::string& choice, double score) {
  table_[make_key(image_id, "itr", choice)] = score;
}

void FixtureBackend::add_vg(const std::string& image_id,
                            const std::string& phrase,
                            const GroundingBox& box) {
  table_[make_key(image_id, "vg", phrase)] = box;
}

const FixtureBackend::Response& FixtureBackend::lookup(
    const ImageBuffer& image, const std::string& task,
    const std::string& text) const {
  const std::string hash = content_hash(image);
  std::vector<std::string> candidates = {hash};
  if (auto it = registered_.find(hash); it != registered_.end()) {
    candidates.push_back(it->second);
  }
  if (!image.source_id().empty()) {
    candidates.push_back(image.source_id());
  }
  for (const std::string& key : candidates) {
    if (auto it = table_.find(make_key(key, task, text)); it != table_.end()) {
      return it->second;
    }
  }
  std::string tried;
  for (const std::string& key : candidates) {
    if (!tried.empty()) tried += ", ";
    tried += "\"" + key + "\"";
  }
  throw FixtureMissError("no fixture for task \"" + task + "\", text \"" +
                         text + "\", image keys " + tried);
}

std::string FixtureBackend::do_vqa(const ImageBuffer& image,
                                   const std::string& question) const {
  return std::get<std::string>(lookup(image, "vqa", question));
}

std::vector<double> FixtureBackend::do_itr_scores(
    const ImageBuffer& image, const std::vector<std::string>& choices) const {
  std::vector<double> scores;
  scores.reserve(choices.size());
  for (const std::string& choice : choices) {
    scores.push_back(std::get<double>(lookup(image, "itr", choice)));
  }
  return scores;
}

GroundingBox FixtureBackend::do_ground_phrase(const ImageBuffer& image,
                                              const std::string& phrase) const {
  return std::get<GroundingBox>(lookup(image, "vg", phrase));
}

std::string FixtureBackend::do_caption(const ImageBuffer& image) const {
  return std::get<std::string>(lookup(image, "caption", ""));
}

EmbeddingVector FixtureBackend::hash_embedding(const std::string& text) {
  EmbeddingVector embedding;
  embedding.values.assign(kEmbeddingDim, 0.0);
  for (const std::string& token : normalize_answer(text)) {
    embedding.values[fnv1a64(token) % kEmbeddingDim] += 1.0;
  }
  double norm_sq = 0.0;
  for (double v : embedding.values) norm_sq += v * v;
  if (norm_sq > 0.0) {
    const double inv_norm = 1.0 / std::sqrt(norm_sq);
    for (double& v : embedding.values) v *= inv_norm;
  }
  return embedding;
}

EmbeddingVector FixtureBackend::do_embed(const std::string& text) const {
  return hash_embedding(text);
}

}  // namespace vlx
