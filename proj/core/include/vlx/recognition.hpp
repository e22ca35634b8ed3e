#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "vlx/extractors.hpp"

namespace vlx {

enum class TaskKind {
  object_class,
  feature,
  location,
  state_binary,
  state_character,
  affordance,
  relation,
};

enum class TaskMethod { bvqa, mvqa, itr, vg };

std::string_view to_string(TaskKind kind);
std::string_view to_string(TaskMethod method);
TaskKind task_kind_from_string(std::string_view name);
TaskMethod task_method_from_string(std::string_view name);

/// Ordered preposition phrases scanned longest-first, so an answer
/// containing "on top of" never matches plain "on".
class RelationLexicon {
 public:
  static RelationLexicon defaults();
  static RelationLexicon from_phrases(std::vector<std::string> phrases);

  const std::vector<std::string>& phrases() const noexcept { return phrases_; }

 private:
  explicit RelationLexicon(std::vector<std::string> phrases)
      : phrases_(std::move(phrases)) {}

  std::vector<std::string> phrases_;
};

/// A declarative recognition task, typically loaded from configuration.
/// Unused fields stay empty; validate() enforces the kind/method matrix
/// (location and affordance ground via VG, binary state uses BVQA or a
/// two-choice retrieval, and so on).
struct RecognitionTask {
  TaskKind kind = TaskKind::object_class;
  TaskMethod method = TaskMethod::mvqa;
  std::string question_template;  // question with {art} slot, or VG phrase
  std::optional<ChoiceSet> choices;
  std::string attribute;     // feature: shape, color, size, ...
  std::string object_name;   // affordance
  std::string part_name;     // affordance
  std::string object_a;      // relation
  std::string object_b;      // relation
};

void validate(const RecognitionTask& task);

/// Ordered task list where each grounding step crops the working image for
/// the next step; only grounding steps may be non-terminal.
struct RefinementChain {
  std::vector<RecognitionTask> steps;
};

void validate(const RefinementChain& chain);

struct RunOptions {
  NoiseConfig noise;
  std::vector<std::string> articles = kDefaultArticles;
  DecisionPolicy policy;
  BinaryAliases aliases;
  double itr_temperature = 1.0;
  RelationLexicon lexicon = RelationLexicon::defaults();
};

struct RelationResult {
  std::optional<std::string> relation;  // nullopt: no match or modal tie
  std::map<std::string, int> counts;
  int unmatched = 0;
  int total = 0;
  std::vector<std::string> raw_answers;
};

using ChoiceOutcome = std::variant<ChoiceResult, ChoiceDistribution>;

ChoiceOutcome recognize_object_class(const Backend& backend,
                                     const ImageBuffer& image,
                                     const ChoiceSet& choices,
                                     TaskMethod method,
                                     const RunOptions& options,
                                     const std::string& template_override = "");

ChoiceOutcome recognize_feature(const Backend& backend,
                                const ImageBuffer& image,
                                const std::string& attribute,
                                const ChoiceSet& choices, TaskMethod method,
                                const RunOptions& options,
                                const std::string& template_override = "");

GroundingBox locate_object(const Backend& backend, const ImageBuffer& image,
                           const std::string& phrase);

/// Binary state via the full BVQA grid.
BinaryResult recognize_state(const Backend& backend, const ImageBuffer& image,
                             const QuestionTemplate& tmpl,
                             const RunOptions& options);

/// Binary state via two-choice retrieval; the first choice is the positive
/// phrase. YES when its probability exceeds 0.5, NO below, UNDECIDED at
/// exactly 0.5.
BinaryResult recognize_state_itr2(const Backend& backend,
                                  const ImageBuffer& image,
                                  const ChoiceSet& two_choices,
                                  double temperature = 1.0);

FreeformResult read_text(const Backend& backend, const ImageBuffer& image,
                         const QuestionTemplate& tmpl,
                         const NoiseConfig& noise);

/// Grounds "<part> of the <object>".
GroundingBox recognize_affordance(const Backend& backend,
                                  const ImageBuffer& image,
                                  const std::string& object_name,
                                  const std::string& part_name);

/// First lexicon phrase (longest-first) whose tokens appear consecutively in
/// the answer tokens.
std::optional<std::string> match_relation_phrase(
    const std::vector<std::string>& answer_tokens,
    const RelationLexicon& lexicon);

RelationResult recognize_relation(const Backend& backend,
                                  const ImageBuffer& image,
                                  const std::string& object_a,
                                  const std::string& object_b,
                                  const RunOptions& options,
                                  const std::string& template_override = "");

struct ViewpointStats {
  std::vector<double> rates;
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
};

ViewpointStats viewpoint_stats(const std::vector<double>& per_view_rates);

using TaskValue = std::variant<BinaryResult, ChoiceResult, ChoiceDistribution,
                               GroundingBox, FreeformResult, RelationResult>;

struct StepOutcome {
  TaskKind kind;
  TaskMethod method;
  TaskValue value;
  std::optional<GroundingBox> local_box;   // grounding steps: working coords
  std::optional<GroundingBox> global_box;  // mapped to original coords
};

struct RefinementResult {
  std::vector<StepOutcome> steps;
  bool complete = false;
  std::vector<GroundingBox> box_chain;  // global boxes, outermost first
};

/// Executes the chain in order; each grounding step crops the working image
/// for the next step. An empty grounding aborts the chain and returns the
/// partial results with complete = false.
RefinementResult stepwise_refine(const Backend& backend,
                                 const ImageBuffer& image,
                                 const RefinementChain& chain,
                                 const RunOptions& options);

/// Dispatches a declarative task to the matching operation.
TaskValue run_recognition_task(const Backend& backend,
                               const RecognitionTask& task,
                               const ImageBuffer& image,
                               const RunOptions& options);

/// Per-view correctness of a task result against an expected label: the
/// ratio or probability mass the run assigned to the expected answer.
double correct_rate(const TaskValue& value, const std::string& expected);

}  // namespace vlx
