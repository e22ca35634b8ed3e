#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vlx/answers.hpp"
#include "vlx/backend.hpp"
#include "vlx/variation.hpp"

namespace vlx {

enum class Decision { yes, no, undecided };

std::string_view to_string(Decision decision);

struct DecisionPolicy {
  /// A run whose valid-answer fraction falls below this is undecided.
  double min_valid_fraction = 0.5;
};

/// Tallies of classified answers over an ensemble of trials. Binary runs
/// populate yes/no; choice runs populate per_choice. Counts always sum to
/// total, which equals the grid size when produced by a grid run.
struct AnswerDistribution {
  int yes = 0;
  int no = 0;
  std::vector<int> per_choice;
  int invalid = 0;
  int total = 0;

  int valid() const noexcept;
  bool consistent() const noexcept;
};

struct BinaryResult {
  Decision decision = Decision::undecided;
  double yes_ratio = 0.0;
  double no_ratio = 0.0;
  double invalid_ratio = 0.0;
  AnswerDistribution distribution;
  std::vector<std::string> raw_answers;  // aligned with grid pairs
};

/// Classifies and tallies raw answers, then decides: undecided when the
/// valid fraction is below policy.min_valid_fraction or on a yes/no tie,
/// otherwise the majority among valid answers.
BinaryResult aggregate_binary(const std::vector<std::string>& raw_answers,
                              const DecisionPolicy& policy = {},
                              const BinaryAliases& aliases = {});

/// Full grid run: n_variants noise images x article-variant questions,
/// each answer classified as yes/no/invalid and aggregated.
BinaryResult run_bvqa(const Backend& backend, const ImageBuffer& image,
                      const QuestionTemplate& tmpl, const NoiseConfig& noise,
                      const DecisionPolicy& policy = {},
                      const BinaryAliases& aliases = {});

struct ChoiceResult {
  ChoiceSet choices;
  std::vector<double> per_choice_ratio;
  double invalid_ratio = 0.0;
  std::optional<std::size_t> selected;  // nullopt when every answer invalid
  AnswerDistribution distribution;
  std::vector<std::string> raw_answers;
};

ChoiceResult aggregate_choices(const std::vector<std::string>& raw_answers,
                               const ChoiceSet& choices);

ChoiceResult run_mvqa(const Backend& backend, const ImageBuffer& image,
                      const QuestionTemplate& tmpl, const ChoiceSet& choices,
                      const NoiseConfig& noise);

struct FreeformResult {
  std::string text;  // modal normalized answer; ties break lexicographically
  std::map<std::string, int> counts;
  std::vector<std::string> raw_answers;
};

/// Grid run returning the most frequent normalized answer, for reading
/// characters and other open-ended values.
FreeformResult run_mvqa_freeform(const Backend& backend,
                                 const ImageBuffer& image,
                                 const QuestionTemplate& tmpl,
                                 const NoiseConfig& noise);

/// Numerically stable softmax of scores / temperature.
std::vector<double> softmax(std::span<const double> scores,
                            double temperature = 1.0);

struct ChoiceDistribution {
  ChoiceSet choices;
  std::vector<double> probabilities;
  std::size_t selected = 0;  // argmax; lowest index on exact tie
};

/// Single-trial retrieval: softmax over the backend's raw matching scores.
ChoiceDistribution run_itr(const Backend& backend, const ImageBuffer& image,
                           const ChoiceSet& choices, double temperature = 1.0);

/// Optional ensemble variant: probabilities averaged over noise variants.
ChoiceDistribution run_itr_ensemble(const Backend& backend,
                                    const ImageBuffer& image,
                                    const ChoiceSet& choices,
                                    double temperature,
                                    const NoiseConfig& noise);

GroundingBox run_vg(const Backend& backend, const ImageBuffer& image,
                    const std::string& phrase);

/// dot(u, v) / (|u| |v|), clamped into [-1, 1]. Bitwise-identical inputs
/// return exactly 1.
double cosine_similarity(const EmbeddingVector& u, const EmbeddingVector& v);

struct DicResult {
  std::string caption_a;
  std::string caption_b;
  double similarity = 0.0;
  bool changed = false;
  double threshold = 0.0;
};

/// Captions both images, embeds the captions, and flags a change when the
/// cosine similarity falls below the threshold.
DicResult run_dic(const Backend& backend, const ImageBuffer& image_a,
                  const ImageBuffer& image_b, double threshold);

struct DicEnsembleResult {
  std::vector<DicResult> trials;
  double mean_similarity = 0.0;
  double std_similarity = 0.0;
  bool changed = false;
  double threshold = 0.0;
};

/// Repeats the comparison over paired noise variants of both images and
/// reports mean and population standard deviation of the similarities;
/// changed compares the mean against the threshold.
DicEnsembleResult run_dic_ensemble(const Backend& backend,
                                   const ImageBuffer& image_a,
                                   const ImageBuffer& image_b,
                                   double threshold, const NoiseConfig& noise);

}  // namespace vlx
