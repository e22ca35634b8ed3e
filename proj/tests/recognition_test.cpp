#include "vlx/recognition.hpp"

#include <gtest/gtest.h>

#include <random>

#include "vlx/errors.hpp"
#include "vlx/fixture_backend.hpp"
#include "support/test_util.hpp"

namespace vlx {
namespace {

using testing::make_image;

void add_answers_for_all_articles(FixtureBackend& backend,
                                  const std::string& image_id,
                                  const std::string& template_text,
                                  const std::string& answer) {
  for (const std::string& q :
       article_variants(QuestionTemplate(template_text))) {
    backend.add_vqa(image_id, q, answer);
  }
}

TEST(RecognitionTaskValidation, MethodMustBeLegalForKind) {
  RecognitionTask task;
  task.kind = TaskKind::object_class;
  task.method = TaskMethod::bvqa;
  task.choices = ChoiceSet::from_phrases({"cup", "glass"});
  EXPECT_THROW(validate(task), InvalidArgumentError);

  task.method = TaskMethod::mvqa;
  EXPECT_NO_THROW(validate(task));

  task.choices.reset();
  EXPECT_THROW(validate(task), InvalidArgumentError);

  RecognitionTask state;
  state.kind = TaskKind::state_binary;
  state.method = TaskMethod::itr;
  state.choices = ChoiceSet::from_phrases({"an open door", "a closed door", "x"});
  EXPECT_THROW(validate(state), InvalidArgumentError);  // needs exactly 2
  state.choices = ChoiceSet::from_phrases({"an open door", "a closed door"});
  EXPECT_NO_THROW(validate(state));

  RecognitionTask location;
  location.kind = TaskKind::location;
  EXPECT_THROW(validate(location), InvalidArgumentError);
  location.question_template = "cup";
  EXPECT_NO_THROW(validate(location));

  RecognitionTask affordance;
  affordance.kind = TaskKind::affordance;
  affordance.object_name = "kettle";
  EXPECT_THROW(validate(affordance), InvalidArgumentError);
  affordance.part_name = "handle";
  EXPECT_NO_THROW(validate(affordance));
}

TEST(RefinementChainValidation, OnlyGroundingStepsMayBeNonTerminal) {
  RefinementChain chain;
  RecognitionTask mvqa;
  mvqa.kind = TaskKind::object_class;
  mvqa.method = TaskMethod::mvqa;
  mvqa.choices = ChoiceSet::from_phrases({"cup", "glass"});
  RecognitionTask vg;
  vg.kind = TaskKind::location;
  vg.question_template = "the tv";

  chain.steps = {mvqa, vg};
  EXPECT_THROW(validate(chain), InvalidArgumentError);
  chain.steps = {vg, mvqa};
  EXPECT_NO_THROW(validate(chain));
  chain.steps = {};
  EXPECT_THROW(validate(chain), InvalidArgumentError);
}

TEST(RecognizeObjectClass, MvqaFixtureDominatedByCup) {
  const ImageBuffer image = make_image(16, 16, 3, "scene");
  FixtureBackend backend;
  add_answers_for_all_articles(backend, "scene",
                               "what object is included in {art} image?",
                               "a yellow cup");
  const ChoiceOutcome outcome = recognize_object_class(
      backend, image, ChoiceSet::from_phrases({"cup", "glass", "box"}),
      TaskMethod::mvqa, RunOptions{});
  const auto& result = std::get<ChoiceResult>(outcome);
  ASSERT_TRUE(result.selected.has_value());
  EXPECT_EQ(*result.selected, 0u);
  EXPECT_DOUBLE_EQ(result.per_choice_ratio[0], 1.0);
}

TEST(RecognizeObjectClass, ItrFixtureFavoringGlass) {
  const ImageBuffer image = make_image(16, 16, 3, "scene");
  FixtureBackend backend;
  backend.add_itr_score("scene", "cup", 0.2);
  backend.add_itr_score("scene", "glass", 3.0);
  backend.add_itr_score("scene", "box", 0.1);
  const ChoiceOutcome outcome = recognize_object_class(
      backend, image, ChoiceSet::from_phrases({"cup", "glass", "box"}),
      TaskMethod::itr, RunOptions{});
  const auto& result = std::get<ChoiceDistribution>(outcome);
  EXPECT_EQ(result.selected, 1u);
  EXPECT_GT(result.probabilities[1], 0.8);
}

TEST(RecognizeFeature, ShapeAndColorTemplates) {
  const ImageBuffer image = make_image(16, 16, 3, "cup");
  FixtureBackend backend;
  add_answers_for_all_articles(backend, "cup", "what shape is {art} object?",
                               "round");
  add_answers_for_all_articles(backend, "cup", "what color is {art} object?",
                               "yellow");
  RunOptions options;

  const auto shape = std::get<ChoiceResult>(recognize_feature(
      backend, image, "shape", ChoiceSet::from_phrases({"round", "rectangular"}),
      TaskMethod::mvqa, options));
  EXPECT_EQ(*shape.selected, 0u);

  const auto color = std::get<ChoiceResult>(recognize_feature(
      backend, image, "color",
      ChoiceSet::from_phrases({"yellow", "clear", "blue"}), TaskMethod::mvqa,
      options));
  EXPECT_EQ(*color.selected, 0u);
  EXPECT_DOUBLE_EQ(color.per_choice_ratio[0], 1.0);
}

TEST(LocateObject, ClassAndFeaturePhrasesAgreeOnFixture) {
  const ImageBuffer image = make_image(64, 48, 3, "desk");
  FixtureBackend backend;
  const GroundingBox box{10, 12, 30, 40, ""};
  backend.add_vg("desk", "cup", box);
  backend.add_vg("desk", "yellow object", box);
  const GroundingBox by_class = locate_object(backend, image, "cup");
  const GroundingBox by_color = locate_object(backend, image, "yellow object");
  EXPECT_EQ(by_class.x_min, by_color.x_min);
  EXPECT_EQ(by_class.y_min, by_color.y_min);
  EXPECT_EQ(by_class.x_max, by_color.x_max);
  EXPECT_EQ(by_class.y_max, by_color.y_max);
}

TEST(RecognizeState, BvqaPathDecidesYes) {
  const ImageBuffer image = make_image(16, 16, 3, "door");
  FixtureBackend backend;
  add_answers_for_all_articles(backend, "door", "is {art} door open?", "yes");
  const BinaryResult result = recognize_state(
      backend, image, QuestionTemplate("is {art} door open?"), RunOptions{});
  EXPECT_EQ(result.decision, Decision::yes);
}

TEST(RecognizeStateItr2, ProbabilityAboveHalfIsYes) {
  const ImageBuffer image = make_image(16, 16, 3, "door");
  FixtureBackend backend;
  backend.add_itr_score("door", "an open door", 2.0);
  backend.add_itr_score("door", "a closed door", 0.4);
  const BinaryResult result = recognize_state_itr2(
      backend, image, ChoiceSet::from_phrases({"an open door", "a closed door"}));
  EXPECT_EQ(result.decision, Decision::yes);
  EXPECT_NEAR(result.yes_ratio + result.no_ratio + result.invalid_ratio, 1.0,
              1e-9);
}

TEST(RecognizeStateItr2, ScoresFavoringSecondChoiceAreNo) {
  const ImageBuffer image = make_image(16, 16, 3, "door");
  FixtureBackend backend;
  backend.add_itr_score("door", "an open door", 0.4);
  backend.add_itr_score("door", "a closed door", 2.0);
  const BinaryResult result = recognize_state_itr2(
      backend, image, ChoiceSet::from_phrases({"an open door", "a closed door"}));
  EXPECT_EQ(result.decision, Decision::no);
  EXPECT_LT(result.yes_ratio, 0.5);
}

TEST(RecognizeStateItr2, EqualScoresAreUndecided) {
  const ImageBuffer image = make_image(16, 16, 3, "door");
  FixtureBackend backend;
  backend.add_itr_score("door", "an open door", 1.0);
  backend.add_itr_score("door", "a closed door", 1.0);
  const BinaryResult result = recognize_state_itr2(
      backend, image, ChoiceSet::from_phrases({"an open door", "a closed door"}));
  EXPECT_EQ(result.decision, Decision::undecided);
}

TEST(ReadText, DelegatesToFreeformModal) {
  const ImageBuffer image = make_image(16, 16, 3, "display");
  FixtureBackend backend;
  add_answers_for_all_articles(backend, "display",
                               "what number is shown on {art} display?", "7");
  const FreeformResult result =
      read_text(backend, image,
                QuestionTemplate("what number is shown on {art} display?"),
                NoiseConfig{});
  EXPECT_EQ(result.text, "7");
}

TEST(RecognizeAffordance, ComposesPartOfTheObjectPhrase) {
  const ImageBuffer image = make_image(640, 480, 3, "kettle");
  FixtureBackend backend;
  backend.add_vg("kettle", "handle of the kettle", {120, 40, 180, 90, ""});
  backend.add_vg("kettle", "spout of the kettle", {300, 60, 360, 120, ""});
  const GroundingBox handle = recognize_affordance(backend, image, "kettle", "handle");
  const GroundingBox spout = recognize_affordance(backend, image, "kettle", "spout");
  EXPECT_EQ(handle.x_min, 120);
  EXPECT_EQ(spout.x_min, 300);
  const bool disjoint = handle.x_max <= spout.x_min ||
                        spout.x_max <= handle.x_min ||
                        handle.y_max <= spout.y_min ||
                        spout.y_max <= handle.y_min;
  EXPECT_TRUE(disjoint);
}

TEST(RecognizeAffordance, MissingPartRaisesGroundingEmpty) {
  const ImageBuffer image = make_image(64, 48, 3, "kettle");
  FixtureBackend backend;
  backend.add_vg("kettle", "lid of the kettle", {5, 5, 5, 9, ""});
  EXPECT_THROW(recognize_affordance(backend, image, "kettle", "lid"),
               GroundingEmptyError);
}

TEST(MatchRelationPhrase, LongestPhraseWinsOverPrefix) {
  const RelationLexicon lexicon = RelationLexicon::defaults();
  const auto tokens = normalize_answer("the mug is on top of the keyboard");
  const auto match = match_relation_phrase(tokens, lexicon);
  ASSERT_TRUE(match.has_value());
  EXPECT_EQ(*match, "on top of");
}

TEST(MatchRelationPhrase, FuzzedAnswersNeverDowngradeToOn) {
  const RelationLexicon lexicon = RelationLexicon::defaults();
  const std::vector<std::string> prefixes = {
      "the mug is", "it sits", "a cup rests", "the bottle is placed",
      "looks like the mouse is"};
  const std::vector<std::string> suffixes = {
      "the keyboard",          "the keyboard near the lamp",
      "the desk on the left",  "the shelf under the window",
      "the box in front of us"};
  std::mt19937 rng(4242);
  int checked = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::string answer = prefixes[rng() % prefixes.size()] +
                               " on top of " +
                               suffixes[rng() % suffixes.size()];
    const auto match =
        match_relation_phrase(normalize_answer(answer), lexicon);
    ASSERT_TRUE(match.has_value()) << answer;
    ASSERT_NE(*match, "on") << answer;
    if (answer.find("in front of") == std::string::npos) {
      // With no competing long phrase present the full phrase must win.
      ASSERT_EQ(*match, "on top of") << answer;
    }
    ++checked;
  }
  EXPECT_EQ(checked, 50);
}

TEST(RecognizeRelation, ModalPhraseOverGrid) {
  const ImageBuffer image = make_image(16, 16, 3, "desk");
  FixtureBackend backend;
  for (const std::string& q : article_variants(QuestionTemplate(
           "what is the relative relationship between {art} mug and the "
           "keyboard?"))) {
    backend.add_vqa("desk", q, "the mug is on top of the keyboard");
  }
  const RelationResult result =
      recognize_relation(backend, image, "mug", "keyboard", RunOptions{});
  ASSERT_TRUE(result.relation.has_value());
  EXPECT_EQ(*result.relation, "on top of");
  EXPECT_EQ(result.counts.at("on top of"), 20);
  EXPECT_EQ(result.unmatched, 0);
}

TEST(RecognizeRelation, NoLexiconPhraseYieldsNone) {
  const ImageBuffer image = make_image(16, 16, 3, "desk");
  FixtureBackend backend;
  for (const std::string& q : article_variants(QuestionTemplate(
           "what is the relative relationship between {art} mug and the "
           "keyboard?"))) {
    backend.add_vqa("desk", q, "they are both grey");
  }
  const RelationResult result =
      recognize_relation(backend, image, "mug", "keyboard", RunOptions{});
  EXPECT_FALSE(result.relation.has_value());
  EXPECT_EQ(result.unmatched, 20);
}

TEST(RecognizeRelation, ModalTieAbstains) {
  const ImageBuffer image = make_image(16, 16, 3, "desk");
  FixtureBackend backend;
  const auto questions = article_variants(QuestionTemplate(
      "what is the relative relationship between {art} mug and the "
      "keyboard?"));
  // Two questions answer "next to", two answer "under": 10 vs 10 over the grid.
  backend.add_vqa("desk", questions[0], "the mug is next to the keyboard");
  backend.add_vqa("desk", questions[1], "the mug is next to the keyboard");
  backend.add_vqa("desk", questions[2], "the mug is under the keyboard");
  backend.add_vqa("desk", questions[3], "the mug is under the keyboard");
  const RelationResult result =
      recognize_relation(backend, image, "mug", "keyboard", RunOptions{});
  EXPECT_FALSE(result.relation.has_value());
  EXPECT_EQ(result.counts.at("next to"), 10);
  EXPECT_EQ(result.counts.at("under"), 10);
}

TEST(RelationLexicon, RejectsDuplicatesAndEmpty) {
  EXPECT_THROW(RelationLexicon::from_phrases({}), InvalidArgumentError);
  EXPECT_THROW(RelationLexicon::from_phrases({"on", "On!"}),
               InvalidArgumentError);
}

TEST(ViewpointStats, HandComputedPopulationSigma) {
  const ViewpointStats stats = viewpoint_stats({1.0, 0.0});
  EXPECT_DOUBLE_EQ(stats.mean, 0.5);
  EXPECT_DOUBLE_EQ(stats.stddev, 0.5);
}

TEST(ViewpointStats, PerfectScoresHaveZeroSigma) {
  const ViewpointStats stats = viewpoint_stats({1.0, 1.0, 1.0, 1.0, 1.0});
  EXPECT_DOUBLE_EQ(stats.mean, 1.0);
  EXPECT_DOUBLE_EQ(stats.stddev, 0.0);
}

TEST(ViewpointStats, SingleElement) {
  const ViewpointStats stats = viewpoint_stats({0.8});
  EXPECT_DOUBLE_EQ(stats.mean, 0.8);
  EXPECT_DOUBLE_EQ(stats.stddev, 0.0);
}

TEST(ViewpointStats, RejectsEmptyAndOutOfRange) {
  EXPECT_THROW(viewpoint_stats({}), InvalidArgumentError);
  EXPECT_THROW(viewpoint_stats({0.5, 1.2}), InvalidArgumentError);
}

RefinementChain tv_chain() {
  RecognitionTask find_tv;
  find_tv.kind = TaskKind::location;
  find_tv.question_template = "the tv";
  RecognitionTask what_on_screen;
  what_on_screen.kind = TaskKind::object_class;
  what_on_screen.method = TaskMethod::mvqa;
  what_on_screen.question_template = "what is shown on {art} screen?";
  what_on_screen.choices = ChoiceSet::from_phrases({"mountain", "sea"});
  return RefinementChain{{find_tv, what_on_screen}};
}

TEST(StepwiseRefine, GroundThenAskOnCrop) {
  const ImageBuffer room = make_image(64, 48, 17, "room");
  FixtureBackend backend;
  backend.add_vg("room", "the tv", {10, 20, 34, 36, ""});
  // After the crop the working image carries the derived provenance label.
  for (const std::string& q : article_variants(
           QuestionTemplate("what is shown on {art} screen?"))) {
    backend.add_vqa("room@10,20,34,36", q, "a mountain");
  }
  const RefinementResult result =
      stepwise_refine(backend, room, tv_chain(), RunOptions{});
  ASSERT_TRUE(result.complete);
  ASSERT_EQ(result.steps.size(), 2u);
  ASSERT_EQ(result.box_chain.size(), 1u);
  EXPECT_EQ(result.box_chain[0].x_min, 10);
  const auto& mvqa = std::get<ChoiceResult>(result.steps[1].value);
  ASSERT_TRUE(mvqa.selected.has_value());
  EXPECT_EQ(mvqa.choices.phrases()[*mvqa.selected], "mountain");
}

TEST(StepwiseRefine, NestedBoxesMapToGlobalCoordinates) {
  const ImageBuffer image = make_image(64, 48, 21, "scene");
  FixtureBackend backend;
  backend.add_vg("scene", "the desk", {10, 20, 40, 44, ""});
  backend.add_vg("scene@10,20,40,44", "the cup", {2, 2, 4, 4, ""});

  RecognitionTask outer;
  outer.kind = TaskKind::location;
  outer.question_template = "the desk";
  RecognitionTask inner;
  inner.kind = TaskKind::location;
  inner.question_template = "the cup";

  const RefinementResult result = stepwise_refine(
      backend, image, RefinementChain{{outer, inner}}, RunOptions{});
  ASSERT_TRUE(result.complete);
  ASSERT_EQ(result.box_chain.size(), 2u);
  const GroundingBox& global_inner = result.box_chain[1];
  EXPECT_EQ(global_inner.x_min, 12);
  EXPECT_EQ(global_inner.y_min, 22);
  EXPECT_EQ(global_inner.x_max, 14);
  EXPECT_EQ(global_inner.y_max, 24);

  // The reported global box reproduces the nested crop pixel-exactly.
  const ImageBuffer nested =
      crop(crop(image, {10, 20, 40, 44, ""}), {2, 2, 4, 4, ""});
  EXPECT_TRUE(crop(image, global_inner).same_pixels(nested));
}

TEST(StepwiseRefine, SingleMvqaStepEqualsPlainRun) {
  const ImageBuffer image = make_image(16, 16, 3, "scene");
  FixtureBackend backend;
  add_answers_for_all_articles(backend, "scene",
                               "what object is included in {art} image?",
                               "a cup");
  RecognitionTask task;
  task.kind = TaskKind::object_class;
  task.method = TaskMethod::mvqa;
  task.choices = ChoiceSet::from_phrases({"cup", "glass"});
  const RunOptions options;

  const RefinementResult chained =
      stepwise_refine(backend, image, RefinementChain{{task}}, options);
  const ChoiceResult direct =
      run_mvqa(backend, image,
               QuestionTemplate("what object is included in {art} image?"),
               *task.choices, options.noise);
  ASSERT_TRUE(chained.complete);
  const auto& step = std::get<ChoiceResult>(chained.steps[0].value);
  EXPECT_EQ(step.selected, direct.selected);
  EXPECT_EQ(step.per_choice_ratio, direct.per_choice_ratio);
}

TEST(StepwiseRefine, GroundingEmptyAbortsAndMarksIncomplete) {
  const ImageBuffer room = make_image(64, 48, 17, "room");
  FixtureBackend backend;
  backend.add_vg("room", "the tv", {5, 5, 5, 9, ""});  // degenerate
  const RefinementResult result =
      stepwise_refine(backend, room, tv_chain(), RunOptions{});
  EXPECT_FALSE(result.complete);
  EXPECT_TRUE(result.steps.empty());
  EXPECT_TRUE(result.box_chain.empty());
}

TEST(RunRecognitionTask, DispatchesEveryKind) {
  const ImageBuffer image = make_image(64, 48, 3, "door");
  FixtureBackend backend;
  add_answers_for_all_articles(backend, "door", "is {art} door open?", "yes");
  backend.add_vg("door", "the handle", {1, 2, 9, 9, ""});

  RecognitionTask state;
  state.kind = TaskKind::state_binary;
  state.method = TaskMethod::bvqa;
  state.question_template = "is {art} door open?";
  EXPECT_EQ(std::get<BinaryResult>(
                run_recognition_task(backend, state, image, RunOptions{}))
                .decision,
            Decision::yes);

  RecognitionTask location;
  location.kind = TaskKind::location;
  location.question_template = "the handle";
  EXPECT_EQ(std::get<GroundingBox>(
                run_recognition_task(backend, location, image, RunOptions{}))
                .x_max,
            9);
}

TEST(CorrectRate, ExtractsExpectedMass) {
  BinaryResult binary;
  binary.yes_ratio = 0.75;
  binary.no_ratio = 0.15;
  EXPECT_DOUBLE_EQ(correct_rate(TaskValue{binary}, "yes"), 0.75);
  EXPECT_DOUBLE_EQ(correct_rate(TaskValue{binary}, "No"), 0.15);
  EXPECT_THROW(correct_rate(TaskValue{binary}, "cup"), InvalidArgumentError);

  const ChoiceSet choices = ChoiceSet::from_phrases({"cup", "glass"});
  ChoiceResult choice{choices, {0.7, 0.1}, 0.2, 0, {}, {}};
  EXPECT_DOUBLE_EQ(correct_rate(TaskValue{choice}, "cup"), 0.7);
  EXPECT_DOUBLE_EQ(correct_rate(TaskValue{choice}, "glass"), 0.1);
  EXPECT_THROW(correct_rate(TaskValue{choice}, "box"), InvalidArgumentError);

  FreeformResult freeform;
  freeform.text = "7";
  EXPECT_DOUBLE_EQ(correct_rate(TaskValue{freeform}, "7"), 1.0);
  EXPECT_DOUBLE_EQ(correct_rate(TaskValue{freeform}, "8"), 0.0);
}

}  // namespace
}  // namespace vlx
