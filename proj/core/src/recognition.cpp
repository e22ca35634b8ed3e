#include "vlx/recognition.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "vlx/errors.hpp"

namespace vlx {

namespace {

std::string feature_template(const std::string& attribute) {
  if (attribute == "size") return "how big is {art} object?";
  if (attribute == "color") return "what color is {art} object?";
  if (attribute == "shape") return "what shape is {art} object?";
  return "what is the " + attribute + " of {art} object?";
}

ChoiceOutcome run_choice_task(const Backend& backend, const ImageBuffer& image,
                              const ChoiceSet& choices, TaskMethod method,
                              const RunOptions& options,
                              const std::string& template_text) {
  if (method == TaskMethod::mvqa) {
    return run_mvqa(backend, image,
                    QuestionTemplate(template_text, options.articles), choices,
                    options.noise);
  }
  if (method == TaskMethod::itr) {
    return run_itr(backend, image, choices, options.itr_temperature);
  }
  throw InvalidArgumentError("choice recognition requires mvqa or itr");
}

bool contains_subsequence(const std::vector<std::string>& haystack,
                          const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > haystack.size()) return false;
  for (std::size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
    if (std::equal(needle.begin(), needle.end(), haystack.begin() + i)) {
      return true;
    }
  }
  return false;
}

}  // namespace

std::string_view to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::object_class:
      return "object_class";
    case TaskKind::feature:
      return "feature";
    case TaskKind::location:
      return "location";
    case TaskKind::state_binary:
      return "state_binary";
    case TaskKind::state_character:
      return "state_character";
    case TaskKind::affordance:
      return "affordance";
    case TaskKind::relation:
      return "relation";
  }
  return "unknown";
}

std::string_view to_string(TaskMethod method) {
  switch (method) {
    case TaskMethod::bvqa:
      return "bvqa";
    case TaskMethod::mvqa:
      return "mvqa";
    case TaskMethod::itr:
      return "itr";
    case TaskMethod::vg:
      return "vg";
  }
  return "unknown";
}

TaskKind task_kind_from_string(std::string_view name) {
  if (name == "object_class") return TaskKind::object_class;
  if (name == "feature") return TaskKind::feature;
  if (name == "location") return TaskKind::location;
  if (name == "state_binary") return TaskKind::state_binary;
  if (name == "state_character") return TaskKind::state_character;
  if (name == "affordance") return TaskKind::affordance;
  if (name == "relation") return TaskKind::relation;
  throw InvalidArgumentError("unknown task kind \"" + std::string(name) + "\"");
}

TaskMethod task_method_from_string(std::string_view name) {
  if (name == "bvqa") return TaskMethod::bvqa;
  if (name == "mvqa") return TaskMethod::mvqa;
  if (name == "itr") return TaskMethod::itr;
  if (name == "vg") return TaskMethod::vg;
  throw InvalidArgumentError("unknown task method \"" + std::string(name) +
                             "\"");
}

RelationLexicon RelationLexicon::defaults() {
  return from_phrases({"on top of", "in front of", "next to", "under", "on"});
}

RelationLexicon RelationLexicon::from_phrases(std::vector<std::string> phrases) {
  if (phrases.empty()) {
    throw InvalidArgumentError("relation lexicon must not be empty");
  }
  std::vector<std::string> normalized;
  std::set<std::string> seen;
  for (const std::string& phrase : phrases) {
    std::string norm = normalize_join(phrase);
    if (norm.empty()) {
      throw InvalidArgumentError("relation phrase \"" + phrase +
                                 "\" normalizes to nothing");
    }
    if (!seen.insert(norm).second) {
      throw InvalidArgumentError("duplicate relation phrase \"" + phrase + "\"");
    }
    normalized.push_back(std::move(norm));
  }
  // Longest first so that scanning stops at the most specific phrase.
  std::sort(normalized.begin(), normalized.end(),
            [](const std::string& a, const std::string& b) {
              const std::size_t ta = normalize_answer(a).size();
              const std::size_t tb = normalize_answer(b).size();
              if (ta != tb) return ta > tb;
              if (a.size() != b.size()) return a.size() > b.size();
              return a < b;
            });
  return RelationLexicon(std::move(normalized));
}

void validate(const RecognitionTask& task) {
  switch (task.kind) {
    case TaskKind::object_class:
      if (task.method != TaskMethod::mvqa && task.method != TaskMethod::itr) {
        throw InvalidArgumentError("object_class requires mvqa or itr");
      }
      if (!task.choices) {
        throw InvalidArgumentError("object_class requires choices");
      }
      break;
    case TaskKind::feature:
      if (task.method != TaskMethod::mvqa && task.method != TaskMethod::itr) {
        throw InvalidArgumentError("feature requires mvqa or itr");
      }
      if (!task.choices) {
        throw InvalidArgumentError("feature requires choices");
      }
      if (task.attribute.empty() && task.question_template.empty()) {
        throw InvalidArgumentError("feature requires an attribute or a template");
      }
      break;
    case TaskKind::location:
      if (task.question_template.empty()) {
        throw InvalidArgumentError("location requires a grounding phrase");
      }
      break;
    case TaskKind::state_binary:
      if (task.method == TaskMethod::bvqa) {
        if (task.question_template.empty()) {
          throw InvalidArgumentError("state_binary via bvqa requires a template");
        }
      } else if (task.method == TaskMethod::itr) {
        if (!task.choices || task.choices->size() != 2) {
          throw InvalidArgumentError(
              "state_binary via itr requires exactly two choices");
        }
      } else {
        throw InvalidArgumentError("state_binary requires bvqa or itr");
      }
      break;
    case TaskKind::state_character:
      if (task.question_template.empty()) {
        throw InvalidArgumentError("state_character requires a template");
      }
      break;
    case TaskKind::affordance:
      if (task.object_name.empty() || task.part_name.empty()) {
        throw InvalidArgumentError("affordance requires object and part names");
      }
      break;
    case TaskKind::relation:
      if (task.object_a.empty() || task.object_b.empty()) {
        throw InvalidArgumentError("relation requires two object names");
      }
      break;
  }
}

void validate(const RefinementChain& chain) {
  if (chain.steps.empty()) {
    throw InvalidArgumentError("refinement chain must not be empty");
  }
  for (std::size_t i = 0; i < chain.steps.size(); ++i) {
    validate(chain.steps[i]);
    const TaskKind kind = chain.steps[i].kind;
    const bool grounds =
        kind == TaskKind::location || kind == TaskKind::affordance;
    if (!grounds && i + 1 < chain.steps.size()) {
      throw InvalidArgumentError(
          "only grounding steps may be non-terminal in a refinement chain");
    }
  }
}

ChoiceOutcome recognize_object_class(const Backend& backend,
                                     const ImageBuffer& image,
                                     const ChoiceSet& choices,
                                     TaskMethod method,
                                     const RunOptions& options,
                                     const std::string& template_override) {
  const std::string tmpl = template_override.empty()
                               ? "what object is included in {art} image?"
                               : template_override;
  return run_choice_task(backend, image, choices, method, options, tmpl);
}

ChoiceOutcome recognize_feature(const Backend& backend,
                                const ImageBuffer& image,
                                const std::string& attribute,
                                const ChoiceSet& choices, TaskMethod method,
                                const RunOptions& options,
                                const std::string& template_override) {
  const std::string tmpl = template_override.empty()
                               ? feature_template(attribute)
                               : template_override;
  return run_choice_task(backend, image, choices, method, options, tmpl);
}

GroundingBox locate_object(const Backend& backend, const ImageBuffer& image,
                           const std::string& phrase) {
  return run_vg(backend, image, phrase);
}

BinaryResult recognize_state(const Backend& backend, const ImageBuffer& image,
                             const QuestionTemplate& tmpl,
                             const RunOptions& options) {
  return run_bvqa(backend, image, tmpl, options.noise, options.policy,
                  options.aliases);
}

BinaryResult recognize_state_itr2(const Backend& backend,
                                  const ImageBuffer& image,
                                  const ChoiceSet& two_choices,
                                  double temperature) {
  if (two_choices.size() != 2) {
    throw InvalidArgumentError(
        "binary state via retrieval requires exactly two choices");
  }
  const ChoiceDistribution dist =
      run_itr(backend, image, two_choices, temperature);
  BinaryResult result;
  result.yes_ratio = dist.probabilities[0];
  result.no_ratio = dist.probabilities[1];
  result.invalid_ratio = 0.0;
  if (dist.probabilities[0] > 0.5) {
    result.decision = Decision::yes;
  } else if (dist.probabilities[0] < 0.5) {
    result.decision = Decision::no;
  } else {
    result.decision = Decision::undecided;
  }
  return result;
}

FreeformResult read_text(const Backend& backend, const ImageBuffer& image,
                         const QuestionTemplate& tmpl,
                         const NoiseConfig& noise) {
  return run_mvqa_freeform(backend, image, tmpl, noise);
}

GroundingBox recognize_affordance(const Backend& backend,
                                  const ImageBuffer& image,
                                  const std::string& object_name,
                                  const std::string& part_name) {
  if (object_name.empty() || part_name.empty()) {
    throw InvalidArgumentError("affordance requires object and part names");
  }
  return run_vg(backend, image, part_name + " of the " + object_name);
}

std::optional<std::string> match_relation_phrase(
    const std::vector<std::string>& answer_tokens,
    const RelationLexicon& lexicon) {
  for (const std::string& phrase : lexicon.phrases()) {
    if (contains_subsequence(answer_tokens, normalize_answer(phrase))) {
      return phrase;
    }
  }
  return std::nullopt;
}

RelationResult recognize_relation(const Backend& backend,
                                  const ImageBuffer& image,
                                  const std::string& object_a,
                                  const std::string& object_b,
                                  const RunOptions& options,
                                  const std::string& template_override) {
  if (object_a.empty() || object_b.empty()) {
    throw InvalidArgumentError("relation requires two object names");
  }
  const std::string tmpl =
      template_override.empty()
          ? "what is the relative relationship between {art} " + object_a +
                " and the " + object_b + "?"
          : template_override;
  const QueryGrid grid =
      make_query_grid(image, QuestionTemplate(tmpl, options.articles),
                      options.noise);

  RelationResult result;
  for (const QueryGrid::Pair& pair : grid.pairs) {
    const std::string raw = backend.vqa_answer(grid.images[pair.image],
                                               grid.questions[pair.question]);
    result.raw_answers.push_back(raw);
    if (const auto phrase =
            match_relation_phrase(normalize_answer(raw), options.lexicon)) {
      ++result.counts[*phrase];
    } else {
      ++result.unmatched;
    }
  }
  result.total = static_cast<int>(result.raw_answers.size());

  int best = 0;
  bool tie = false;
  for (const auto& [phrase, count] : result.counts) {
    if (count > best) {
      best = count;
      result.relation = phrase;
      tie = false;
    } else if (count == best && best > 0) {
      tie = true;
    }
  }
  if (tie || best == 0) {
    // A tie between modal phrases is reported as no relation; acting on a
    // wrong spatial relation is worse than abstaining.
    result.relation = std::nullopt;
  }
  return result;
}

ViewpointStats viewpoint_stats(const std::vector<double>& per_view_rates) {
  if (per_view_rates.empty()) {
    throw InvalidArgumentError("viewpoint stats require at least one rate");
  }
  for (double rate : per_view_rates) {
    if (!(rate >= 0.0 && rate <= 1.0)) {
      throw InvalidArgumentError("correct rate outside [0,1]: " +
                                 std::to_string(rate));
    }
  }
  ViewpointStats stats;
  stats.rates = per_view_rates;
  double sum = 0.0;
  for (double r : per_view_rates) sum += r;
  stats.mean = sum / static_cast<double>(per_view_rates.size());
  double sum_sq = 0.0;
  for (double r : per_view_rates) sum_sq += (r - stats.mean) * (r - stats.mean);
  stats.stddev = std::sqrt(sum_sq / static_cast<double>(per_view_rates.size()));
  return stats;
}

RefinementResult stepwise_refine(const Backend& backend,
                                 const ImageBuffer& image,
                                 const RefinementChain& chain,
                                 const RunOptions& options) {
  validate(chain);
  RefinementResult result;
  ImageBuffer working = image;
  int offset_x = 0;
  int offset_y = 0;
  for (std::size_t i = 0; i < chain.steps.size(); ++i) {
    const RecognitionTask& task = chain.steps[i];
    const bool grounds =
        task.kind == TaskKind::location || task.kind == TaskKind::affordance;
    if (grounds) {
      GroundingBox local;
      try {
        local = task.kind == TaskKind::location
                    ? locate_object(backend, working, task.question_template)
                    : recognize_affordance(backend, working, task.object_name,
                                           task.part_name);
      } catch (const GroundingEmptyError&) {
        result.complete = false;  // abort; partial results stay marked
        return result;
      }
      GroundingBox global = local;
      global.x_min += offset_x;
      global.x_max += offset_x;
      global.y_min += offset_y;
      global.y_max += offset_y;
      result.steps.push_back(
          {task.kind, TaskMethod::vg, global, local, global});
      result.box_chain.push_back(global);
      if (i + 1 < chain.steps.size()) {
        working = crop(working, local);
        offset_x += local.x_min;
        offset_y += local.y_min;
      }
    } else {
      result.steps.push_back({task.kind, task.method,
                              run_recognition_task(backend, task, working,
                                                   options),
                              std::nullopt, std::nullopt});
    }
  }
  result.complete = true;
  return result;
}

TaskValue run_recognition_task(const Backend& backend,
                               const RecognitionTask& task,
                               const ImageBuffer& image,
                               const RunOptions& options) {
  validate(task);
  auto to_value = [](ChoiceOutcome&& outcome) -> TaskValue {
    return std::visit([](auto&& v) -> TaskValue { return std::move(v); },
                      std::move(outcome));
  };
  switch (task.kind) {
    case TaskKind::object_class:
      return to_value(recognize_object_class(backend, image, *task.choices,
                                             task.method, options,
                                             task.question_template));
    case TaskKind::feature:
      return to_value(recognize_feature(backend, image, task.attribute,
                                        *task.choices, task.method, options,
                                        task.question_template));
    case TaskKind::location:
      return locate_object(backend, image, task.question_template);
    case TaskKind::state_binary:
      if (task.method == TaskMethod::bvqa) {
        return recognize_state(
            backend, image,
            QuestionTemplate(task.question_template, options.articles),
            options);
      }
      return recognize_state_itr2(backend, image, *task.choices,
                                  options.itr_temperature);
    case TaskKind::state_character:
      return read_text(backend, image,
                       QuestionTemplate(task.question_template, options.articles),
                       options.noise);
    case TaskKind::affordance:
      return recognize_affordance(backend, image, task.object_name,
                                  task.part_name);
    case TaskKind::relation:
      return recognize_relation(backend, image, task.object_a, task.object_b,
                                options, task.question_template);
  }
  throw InvalidArgumentError("unhandled task kind");
}

double correct_rate(const TaskValue& value, const std::string& expected) {
  const std::string want = normalize_join(expected);
  if (want.empty()) {
    throw InvalidArgumentError("expected label must not be empty");
  }
  if (const auto* binary = std::get_if<BinaryResult>(&value)) {
    if (want == "yes") return binary->yes_ratio;
    if (want == "no") return binary->no_ratio;
    throw InvalidArgumentError("expected label for a binary task must be yes or no");
  }
  if (const auto* choice = std::get_if<ChoiceResult>(&value)) {
    for (std::size_t i = 0; i < choice->choices.size(); ++i) {
      if (normalize_join(choice->choices.phrases()[i]) == want) {
        return choice->per_choice_ratio[i];
      }
    }
    throw InvalidArgumentError("expected label \"" + expected +
                               "\" is not one of the choices");
  }
  if (const auto* dist = std::get_if<ChoiceDistribution>(&value)) {
    for (std::size_t i = 0; i < dist->choices.size(); ++i) {
      if (normalize_join(dist->choices.phrases()[i]) == want) {
        return dist->probabilities[i];
      }
    }
    throw InvalidArgumentError("expected label \"" + expected +
                               "\" is not one of the choices");
  }
  if (const auto* freeform = std::get_if<FreeformResult>(&value)) {
    return freeform->text == want ? 1.0 : 0.0;
  }
  if (const auto* relation = std::get_if<RelationResult>(&value)) {
    return relation->relation && *relation->relation == want ? 1.0 : 0.0;
  }
  throw InvalidArgumentError(
      "correctness is not defined for grounding results");
}

}  // namespace vlx
