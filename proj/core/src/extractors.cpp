#include "vlx/extractors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vlx/errors.hpp"

namespace vlx {

namespace {

std::vector<std::string> collect_grid_answers(const Backend& backend,
                                              const QueryGrid& grid) {
  std::vector<std::string> answers;
  answers.reserve(grid.pairs.size());
  for (const QueryGrid::Pair& pair : grid.pairs) {
    answers.push_back(
        backend.vqa_answer(grid.images[pair.image], grid.questions[pair.question]));
  }
  return answers;
}

void validate_policy(const DecisionPolicy& policy) {
  if (policy.min_valid_fraction < 0.0 || policy.min_valid_fraction > 1.0) {
    throw InvalidArgumentError("min_valid_fraction must be in [0,1]");
  }
}

double mean_of(const std::vector<double>& values) {
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

double population_stddev(const std::vector<double>& values, double mean) {
  double sum_sq = 0.0;
  for (double v : values) sum_sq += (v - mean) * (v - mean);
  return std::sqrt(sum_sq / static_cast<double>(values.size()));
}

}  // namespace

std::string_view to_string(Decision decision) {
  switch (decision) {
    case Decision::yes:
      return "YES";
    case Decision::no:
      return "NO";
    case Decision::undecided:
      return "UNDECIDED";
  }
  return "UNDECIDED";
}

int AnswerDistribution::valid() const noexcept {
  int v = yes + no;
  for (int c : per_choice) v += c;
  return v;
}

bool AnswerDistribution::consistent() const noexcept {
  return valid() + invalid == total;
}

BinaryResult aggregate_binary(const std::vector<std::string>& raw_answers,
                              const DecisionPolicy& policy,
                              const BinaryAliases& aliases) {
  validate_policy(policy);
  BinaryResult result;
  result.raw_answers = raw_answers;
  for (const std::string& raw : raw_answers) {
    switch (classify_binary_answer(raw, aliases)) {
      case BinaryLabel::yes:
        ++result.distribution.yes;
        break;
      case BinaryLabel::no:
        ++result.distribution.no;
        break;
      case BinaryLabel::invalid:
        ++result.distribution.invalid;
        break;
    }
  }
  result.distribution.total = static_cast<int>(raw_answers.size());
  const int total = result.distribution.total;
  if (total == 0) {
    result.decision = Decision::undecided;
    return result;
  }
  result.yes_ratio = static_cast<double>(result.distribution.yes) / total;
  result.no_ratio = static_cast<double>(result.distribution.no) / total;
  result.invalid_ratio =
      static_cast<double>(result.distribution.invalid) / total;

  const int valid = result.distribution.yes + result.distribution.no;
  const double valid_fraction = static_cast<double>(valid) / total;
  if (valid_fraction < policy.min_valid_fraction ||
      result.distribution.yes == result.distribution.no) {
    result.decision = Decision::undecided;
  } else {
    result.decision = result.distribution.yes > result.distribution.no
                          ? Decision::yes
                          : Decision::no;
  }
  return result;
}

BinaryResult run_bvqa(const Backend& backend, const ImageBuffer& image,
                      const QuestionTemplate& tmpl, const NoiseConfig& noise,
                      const DecisionPolicy& policy,
                      const BinaryAliases& aliases) {
  const QueryGrid grid = make_query_grid(image, tmpl, noise);
  return aggregate_binary(collect_grid_answers(backend, grid), policy, aliases);
}

ChoiceResult aggregate_choices(const std::vector<std::string>& raw_answers,
                               const ChoiceSet& choices) {
  ChoiceResult result{choices, {}, 0.0, std::nullopt, {}, raw_answers};
  result.distribution.per_choice.assign(choices.size(), 0);
  for (const std::string& raw : raw_answers) {
    if (const auto index = match_answer(raw, choices)) {
      ++result.distribution.per_choice[*index];
    } else {
      ++result.distribution.invalid;
    }
  }
  result.distribution.total = static_cast<int>(raw_answers.size());
  result.per_choice_ratio.assign(choices.size(), 0.0);
  if (result.distribution.total == 0) {
    return result;
  }
  const double total = result.distribution.total;
  for (std::size_t i = 0; i < choices.size(); ++i) {
    result.per_choice_ratio[i] = result.distribution.per_choice[i] / total;
  }
  result.invalid_ratio = result.distribution.invalid / total;

  const auto best = std::max_element(result.distribution.per_choice.begin(),
                                     result.distribution.per_choice.end());
  if (best != result.distribution.per_choice.end() && *best > 0) {
    result.selected = static_cast<std::size_t>(
        std::distance(result.distribution.per_choice.begin(), best));
  }
  return result;
}

ChoiceResult run_mvqa(const Backend& backend, const ImageBuffer& image,
                      const QuestionTemplate& tmpl, const ChoiceSet& choices,
                      const NoiseConfig& noise) {
  const QueryGrid grid = make_query_grid(image, tmpl, noise);
  return aggregate_choices(collect_grid_answers(backend, grid), choices);
}

FreeformResult run_mvqa_freeform(const Backend& backend,
                                 const ImageBuffer& image,
                                 const QuestionTemplate& tmpl,
                                 const NoiseConfig& noise) {
  const QueryGrid grid = make_query_grid(image, tmpl, noise);
  FreeformResult result;
  result.raw_answers = collect_grid_answers(backend, grid);
  for (const std::string& raw : result.raw_answers) {
    ++result.counts[normalize_join(raw)];
  }
  // std::map iterates keys in ascending order, so keeping the first
  // strictly-greater count yields the lexicographically smallest mode.
  int best = -1;
  for (const auto& [answer, count] : result.counts) {
    if (count > best) {
      best = count;
      result.text = answer;
    }
  }
  return result;
}

std::vector<double> softmax(std::span<const double> scores,
                            double temperature) {
  if (scores.empty()) {
    throw InvalidArgumentError("softmax input must not be empty");
  }
  if (!(temperature > 0.0)) {
    throw InvalidArgumentError("softmax temperature must be > 0");
  }
  std::vector<double> scaled(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    scaled[i] = scores[i] / temperature;
  }
  const double max_scaled = *std::max_element(scaled.begin(), scaled.end());
  double sum = 0.0;
  for (double& v : scaled) {
    v = std::exp(v - max_scaled);
    sum += v;
  }
  for (double& v : scaled) v /= sum;
  return scaled;
}

ChoiceDistribution run_itr(const Backend& backend, const ImageBuffer& image,
                           const ChoiceSet& choices, double temperature) {
  if (choices.size() < 2) {
    throw InvalidArgumentError("retrieval needs at least two choices");
  }
  const std::vector<double> scores = backend.itr_scores(image, choices.phrases());
  ChoiceDistribution result{choices, softmax(scores, temperature), 0};
  result.selected = static_cast<std::size_t>(std::distance(
      result.probabilities.begin(),
      std::max_element(result.probabilities.begin(), result.probabilities.end())));
  return result;
}

ChoiceDistribution run_itr_ensemble(const Backend& backend,
                                    const ImageBuffer& image,
                                    const ChoiceSet& choices,
                                    double temperature,
                                    const NoiseConfig& noise) {
  validate(noise);
  if (choices.size() < 2) {
    throw InvalidArgumentError("retrieval needs at least two choices");
  }
  std::vector<double> mean_probs(choices.size(), 0.0);
  for (int v = 0; v < noise.n_variants; ++v) {
    const ImageBuffer variant = rgb_shift(image, noise, v);
    const std::vector<double> probs =
        softmax(backend.itr_scores(variant, choices.phrases()), temperature);
    for (std::size_t i = 0; i < probs.size(); ++i) mean_probs[i] += probs[i];
  }
  for (double& p : mean_probs) p /= noise.n_variants;
  ChoiceDistribution result{choices, std::move(mean_probs), 0};
  result.selected = static_cast<std::size_t>(std::distance(
      result.probabilities.begin(),
      std::max_element(result.probabilities.begin(), result.probabilities.end())));
  return result;
}

GroundingBox run_vg(const Backend& backend, const ImageBuffer& image,
                    const std::string& phrase) {
  return backend.ground_phrase(image, phrase);
}

double cosine_similarity(const EmbeddingVector& u, const EmbeddingVector& v) {
  if (u.dimension() != v.dimension()) {
    throw DimensionMismatchError("embedding dimensions differ: " +
                                 std::to_string(u.dimension()) + " vs " +
                                 std::to_string(v.dimension()));
  }
  double dot = 0.0, norm_u = 0.0, norm_v = 0.0;
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    dot += u.values[i] * v.values[i];
    norm_u += u.values[i] * u.values[i];
    norm_v += v.values[i] * v.values[i];
  }
  if (norm_u == 0.0 || norm_v == 0.0) {
    throw ZeroVectorError("cosine similarity of a zero vector is undefined");
  }
  if (u.values == v.values) {
    return 1.0;  // cos(u, u) = 1; avoids sqrt rounding on the identity case
  }
  const double sim = dot / (std::sqrt(norm_u) * std::sqrt(norm_v));
  return std::clamp(sim, -1.0, 1.0);
}

DicResult run_dic(const Backend& backend, const ImageBuffer& image_a,
                  const ImageBuffer& image_b, double threshold) {
  if (threshold < -1.0 || threshold > 1.0) {
    throw InvalidArgumentError("dic threshold must be in [-1,1]");
  }
  DicResult result;
  result.threshold = threshold;
  result.caption_a = backend.caption_image(image_a);
  result.caption_b = backend.caption_image(image_b);
  result.similarity = cosine_similarity(backend.embed_text(result.caption_a),
                                        backend.embed_text(result.caption_b));
  result.changed = result.similarity < threshold;
  return result;
}

DicEnsembleResult run_dic_ensemble(const Backend& backend,
                                   const ImageBuffer& image_a,
                                   const ImageBuffer& image_b,
                                   double threshold, const NoiseConfig& noise) {
  validate(noise);
  DicEnsembleResult result;
  result.threshold = threshold;
  std::vector<double> similarities;
  similarities.reserve(noise.n_variants);
  for (int v = 0; v < noise.n_variants; ++v) {
    result.trials.push_back(run_dic(backend, rgb_shift(image_a, noise, v),
                                    rgb_shift(image_b, noise, v), threshold));
    similarities.push_back(result.trials.back().similarity);
  }
  result.mean_similarity = mean_of(similarities);
  result.std_similarity = population_stddev(similarities, result.mean_similarity);
  result.changed = result.mean_similarity < threshold;
  return result;
}

}  // namespace vlx
