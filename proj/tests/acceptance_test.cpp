// Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
// Run directly (./vlx_acceptance) to see the lines, or via ctest.

#include <gtest/gtest.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "vlx/config.hpp"
#include "vlx/extractors.hpp"
#include "vlx/fixture_backend.hpp"
#include "vlx/image_io.hpp"
#include "vlx/patrol.hpp"
#include "vlx/recognition.hpp"
#include "vlx/serialize.hpp"
#include "support/test_util.hpp"

namespace vlx {
namespace {

using nlohmann::json;
using testing::CountingBackend;
using testing::make_image;
using testing::TempDir;
using testing::write_file;

void criterion_line(int number, const std::string& description, bool ok) {
  std::cout << "[ACCEPTANCE] criterion " << number << " "
            << (ok ? "PASS" : "FAIL") << " - " << description << std::endl;
}

// Independent recount/re-decide oracles (no library calls).
std::vector<std::string> oracle_tokens(const std::string& raw) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : raw) {
    if (std::isalnum(static_cast<unsigned char>(ch))) {
      current.push_back(
          static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    } else if (!current.empty()) {
      tokens.push_back(current);
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(current);
  return tokens;
}

const QuestionTemplate kDoorTemplate("is {art} door open?");

TEST(Acceptance, C01GridProtocolExactness) {
  const ImageBuffer image = make_image(64, 48, 3, "door");
  FixtureBackend fixtures;
  const std::vector<std::string> expected_questions = {
      "is a door open?", "is the door open?", "is this door open?",
      "is that door open?"};
  EXPECT_EQ(article_variants(kDoorTemplate), expected_questions);
  for (const std::string& q : expected_questions) {
    fixtures.add_vqa("door", q, "yes");
  }
  for (const std::string& q : article_variants(QuestionTemplate(
           "what object is included in {art} image?"))) {
    fixtures.add_vqa("door", q, "cup");
  }
  CountingBackend counting(fixtures);

  const auto start = std::chrono::steady_clock::now();
  run_bvqa(counting, image, kDoorTemplate, NoiseConfig{});
  EXPECT_EQ(counting.vqa_calls, 20);

  run_mvqa(counting, image,
           QuestionTemplate("what object is included in {art} image?"),
           ChoiceSet::from_phrases({"cup", "glass"}), NoiseConfig{});
  EXPECT_EQ(counting.vqa_calls, 40);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  EXPECT_LT(seconds, 1.0);

  criterion_line(1,
                 "default BVQA/MVQA runs issue exactly 20 queries "
                 "(5 RGBShift variants x 4 articles), < 1 s on mock",
                 !HasFailure());
  ASSERT_FALSE(HasFailure());
}

TEST(Acceptance, C02NoiseBounds) {
  NoiseConfig wide;
  wide.n_variants = 3334;  // 3334 variants x 3 channels >= 1e4 draws
  wide.seed = 2024;
  int draws = 0;
  int violations = 0;
  for (int v = 0; v < wide.n_variants; ++v) {
    for (double s : draw_channel_shifts(wide, v)) {
      ++draws;
      if (s < -0.1 || s > 0.1) ++violations;
    }
  }
  EXPECT_GE(draws, 10000);
  EXPECT_EQ(violations, 0);

  const ImageBuffer image = make_image(32, 24, 8, "img");
  const QueryGrid grid = make_query_grid(image, kDoorTemplate, NoiseConfig{});
  for (const ImageBuffer& variant : grid.images) {
    for (float value : variant.data()) {
      if (!(value >= 0.0f && value <= 1.0f)) {
        ADD_FAILURE() << "intensity out of range: " << value;
      }
    }
  }

  NoiseConfig zero;
  zero.shift_low = 0.0;
  zero.shift_high = 0.0;
  for (int v = 0; v < zero.n_variants; ++v) {
    EXPECT_TRUE(rgb_shift(image, zero, v).same_pixels(image));
  }

  criterion_line(2,
                 "10^4 sampled shifts all in [-0.1, 0.1], outputs in [0, 1], "
                 "zero-shift reproduces input bit-exactly",
                 !HasFailure());
  ASSERT_FALSE(HasFailure());
}

TEST(Acceptance, C03AggregationOracleEquivalence) {
  std::mt19937 rng(67890);
  const std::vector<std::string> binary_pool = {
      "yes", "Yes.", "YES", "no", "No!", "maybe", "the door is open",
      "a cup", "", "yes no"};
  const ChoiceSet choices = ChoiceSet::from_phrases({"cup", "glass", "box"});
  const std::vector<std::vector<std::string>> choice_tokens = {
      {"cup"}, {"glass"}, {"box"}};
  const std::vector<std::string> choice_pool = {
      "a yellow cup", "the glass", "a box", "glass box", "mug", "",
      "a cup shaped glass", "cup", "box on a desk"};

  for (int trial = 0; trial < 1000; ++trial) {
    // BVQA half.
    std::vector<std::string> answers;
    const int n = static_cast<int>(rng() % 50);
    for (int i = 0; i < n; ++i) {
      answers.push_back(binary_pool[rng() % binary_pool.size()]);
    }
    int yes = 0, no = 0, invalid = 0;
    for (const std::string& raw : answers) {
      const auto tokens = oracle_tokens(raw);
      if (tokens.size() == 1 && tokens[0] == "yes") ++yes;
      else if (tokens.size() == 1 && tokens[0] == "no") ++no;
      else ++invalid;
    }
    const BinaryResult binary = aggregate_binary(answers);
    ASSERT_EQ(binary.distribution.yes, yes);
    ASSERT_EQ(binary.distribution.no, no);
    ASSERT_EQ(binary.distribution.invalid, invalid);
    std::string decision = "UNDECIDED";
    if (n > 0 && 2 * (yes + no) >= n && yes != no) {
      decision = yes > no ? "YES" : "NO";
    }
    ASSERT_EQ(std::string(to_string(binary.decision)), decision);
    if (n > 0) {
      ASSERT_EQ(binary.yes_ratio, static_cast<double>(yes) / n);
      ASSERT_EQ(binary.no_ratio, static_cast<double>(no) / n);
      ASSERT_EQ(binary.invalid_ratio, static_cast<double>(invalid) / n);
    }

    // MVQA half.
    std::vector<std::string> choice_answers;
    const int m = static_cast<int>(rng() % 50);
    for (int i = 0; i < m; ++i) {
      choice_answers.push_back(choice_pool[rng() % choice_pool.size()]);
    }
    std::vector<int> per_choice(choice_tokens.size(), 0);
    int choice_invalid = 0;
    for (const std::string& raw : choice_answers) {
      const auto tokens = oracle_tokens(raw);
      int matches = 0, index = -1;
      for (std::size_t c = 0; c < choice_tokens.size(); ++c) {
        bool all = true;
        for (const std::string& t : choice_tokens[c]) {
          if (std::find(tokens.begin(), tokens.end(), t) == tokens.end()) {
            all = false;
            break;
          }
        }
        if (all) {
          ++matches;
          index = static_cast<int>(c);
        }
      }
      if (matches == 1) ++per_choice[index];
      else ++choice_invalid;
    }
    const ChoiceResult choice_result = aggregate_choices(choice_answers, choices);
    for (std::size_t c = 0; c < per_choice.size(); ++c) {
      ASSERT_EQ(choice_result.distribution.per_choice[c], per_choice[c]);
      if (m > 0) {
        ASSERT_EQ(choice_result.per_choice_ratio[c],
                  static_cast<double>(per_choice[c]) / m);
      }
    }
    ASSERT_EQ(choice_result.distribution.invalid, choice_invalid);
    int best = 0, selected = -1;
    for (std::size_t c = 0; c < per_choice.size(); ++c) {
      if (per_choice[c] > best) {
        best = per_choice[c];
        selected = static_cast<int>(c);
      }
    }
    if (selected < 0) {
      ASSERT_FALSE(choice_result.selected.has_value());
    } else {
      ASSERT_EQ(static_cast<int>(*choice_result.selected), selected);
    }
  }

  criterion_line(3,
                 "BVQA/MVQA aggregation equals a brute-force recount and "
                 "re-decision over 1000 random answer multisets (exact)",
                 !HasFailure());
  ASSERT_FALSE(HasFailure());
}

TEST(Acceptance, C04InvalidHandling) {
  const ImageBuffer image = make_image(32, 24, 9, "mirror");
  FixtureBackend backend;
  for (const std::string& q : article_variants(kDoorTemplate)) {
    backend.add_vqa("mirror", q, "it looks like a door");  // never yes/no
  }
  const BinaryResult result =
      run_bvqa(backend, image, kDoorTemplate, NoiseConfig{});
  EXPECT_EQ(result.distribution.invalid, 20);
  EXPECT_EQ(result.invalid_ratio, 1.0);
  EXPECT_EQ(result.decision, Decision::undecided);

  criterion_line(4,
                 "20/20 invalid answers yield invalid_ratio = 1.0 and "
                 "UNDECIDED (exact)",
                 !HasFailure());
  ASSERT_FALSE(HasFailure());
}

TEST(Acceptance, C05ItrMath) {
  std::mt19937 rng(555);
  std::uniform_real_distribution<double> score_dist(-8.0, 8.0);
  std::uniform_real_distribution<double> temp_dist(1e-3, 10.0);
  std::uniform_real_distribution<double> shift_dist(-5.0, 5.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng() % 7;
    std::vector<double> scores(n);
    for (double& s : scores) s = score_dist(rng);
    const double temperature = temp_dist(rng);

    const std::vector<double> probs = softmax(scores, temperature);
    double sum = 0.0;
    for (double p : probs) sum += p;
    ASSERT_NEAR(sum, 1.0, 1e-9);

    const auto raw_argmax = std::distance(
        scores.begin(), std::max_element(scores.begin(), scores.end()));
    const auto prob_argmax = std::distance(
        probs.begin(), std::max_element(probs.begin(), probs.end()));
    ASSERT_EQ(prob_argmax, raw_argmax);

    const double shift = shift_dist(rng);
    std::vector<double> shifted = scores;
    for (double& s : shifted) s += shift;
    const std::vector<double> shifted_probs = softmax(shifted, temperature);
    for (std::size_t i = 0; i < n; ++i) {
      ASSERT_NEAR(probs[i], shifted_probs[i], 1e-9);
    }
  }

  criterion_line(5,
                 "softmax sums to 1 (1e-9), argmax matches raw scores, and "
                 "shift invariance holds over 1000 random vectors",
                 !HasFailure());
  ASSERT_FALSE(HasFailure());
}

TEST(Acceptance, C06DicMath) {
  std::mt19937 rng(666);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 4 + rng() % 28;
    EmbeddingVector u, v;
    for (std::size_t i = 0; i < n; ++i) {
      u.values.push_back(dist(rng));
      v.values.push_back(dist(rng));
    }
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      dot += u.values[i] * v.values[i];
      nu += u.values[i] * u.values[i];
      nv += v.values[i] * v.values[i];
    }
    if (nu == 0.0 || nv == 0.0) continue;
    const double expected = dot / (std::sqrt(nu) * std::sqrt(nv));
    ASSERT_NEAR(cosine_similarity(u, v), expected, 1e-12);
    ASSERT_NEAR(cosine_similarity(u, u), 1.0, 1e-12);
  }

  // Changed flag monotone in threshold over a 100-step sweep.
  FixtureBackend backend;
  const ImageBuffer a = make_image(8, 8, 1, "a");
  const ImageBuffer b = make_image(8, 8, 2, "b");
  backend.add_caption("a", "a shelf with a closed door");
  backend.add_caption("b", "a shelf with dishes and an open door");
  bool previous = false;
  for (int i = 0; i < 100; ++i) {
    const double threshold = -1.0 + 2.0 * i / 99.0;
    const bool changed = run_dic(backend, a, b, threshold).changed;
    EXPECT_TRUE(changed || !previous)
        << "changed flipped true -> false at threshold " << threshold;
    previous = changed;
  }

  criterion_line(6,
                 "cosine matches a hand-rolled oracle (1e-12), cos(u,u)=1, "
                 "and the DIC changed flag is monotone in threshold",
                 !HasFailure());
  ASSERT_FALSE(HasFailure());
}

TEST(Acceptance, C07StepwiseRefinementCoordinates) {
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
  EXPECT_EQ(result.box_chain[1].x_min, 12);
  EXPECT_EQ(result.box_chain[1].y_min, 22);
  EXPECT_EQ(result.box_chain[1].x_max, 14);
  EXPECT_EQ(result.box_chain[1].y_max, 24);

  const ImageBuffer nested =
      crop(crop(image, {10, 20, 40, 44, ""}), {2, 2, 4, 4, ""});
  EXPECT_TRUE(crop(image, result.box_chain[1]).same_pixels(nested));

  criterion_line(7,
                 "global box chain reproduces the innermost crop "
                 "pixel-exactly on nested synthetic boxes",
                 !HasFailure());
  ASSERT_FALSE(HasFailure());
}

TEST(Acceptance, C08RelationLongestMatch) {
  const RelationLexicon lexicon = RelationLexicon::defaults();
  const std::vector<std::string> prefixes = {
      "the mug is", "it sits", "a cup rests", "the bottle is placed",
      "looks like the mouse is", "the keyboard has a mug"};
  const std::vector<std::string> suffixes = {
      "the keyboard",         "the keyboard near the lamp",
      "the desk on the left", "the shelf under the window",
      "the box next to the monitor"};
  std::mt19937 rng(880);
  int checked = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::string answer = prefixes[rng() % prefixes.size()] +
                               " on top of " +
                               suffixes[rng() % suffixes.size()];
    const auto match = match_relation_phrase(normalize_answer(answer), lexicon);
    ASSERT_TRUE(match.has_value()) << answer;
    ASSERT_NE(*match, "on") << answer;
    ++checked;
  }
  EXPECT_EQ(checked, 50);

  criterion_line(8,
                 "answers containing \"on top of\" never match \"on\" across "
                 "a 50-answer fuzz corpus (exact)",
                 !HasFailure());
  ASSERT_FALSE(HasFailure());
}

TEST(Acceptance, C09PatrolRoundTrip) {
  TempDir dir;
  FixtureBackend backend;
  backend.add_caption("kitchen", "a kitchen with a closed shelf");
  const ImageBuffer image = make_image(24, 18, 5, "kitchen");
  const std::string now = "2024-05-01T12:00:00Z";

  std::string recorded_caption;
  std::vector<double> recorded_embedding;
  {
    PatrolStore store(dir.path() / "store");
    const Waypoint wp = store.record_baseline(backend, "kitchen-1", image, now);
    recorded_caption = wp.baseline_caption;
    recorded_embedding = wp.baseline_embedding.values;
  }
  PatrolStore reopened(dir.path() / "store");
  const auto loaded = reopened.find("kitchen-1");
  ASSERT_TRUE(loaded.has_value());
  EXPECT_EQ(loaded->baseline_caption, recorded_caption);  // byte-identical
  EXPECT_EQ(loaded->baseline_embedding.values, recorded_embedding);

  const AnomalyReport report =
      reopened.check_waypoint(backend, "kitchen-1", image, 0.8, now);
  EXPECT_EQ(report.similarity, 1.0);
  EXPECT_FALSE(report.anomalous);

  criterion_line(9,
                 "record -> check on the identical image yields similarity "
                 "1.0, not anomalous; store round-trip is byte-identical",
                 !HasFailure());
  ASSERT_FALSE(HasFailure());
}

TEST(Acceptance, C10EndToEndDeterminism) {
  TempDir dir;
  save_png(make_image(16, 12, 1), dir.path() / "door.png");
  save_png(make_image(32, 24, 5), dir.path() / "room.png");

  json fixtures = json::array();
  auto add = [&fixtures](const std::string& id, const std::string& task,
                         const json& text, const json& response) {
    fixtures.push_back(json{{"image_id", id},
                            {"task", task},
                            {"text", text},
                            {"response", response}});
  };
  add("door", "vqa", "is a door open?", "yes");
  add("door", "vqa", "is the door open?", "yes");
  add("door", "vqa", "is this door open?", "yes");
  add("door", "vqa", "is that door open?", "no");
  add("room", "vg", "the tv", json::array({8, 6, 24, 18}));
  for (const std::string& article : {"a", "the", "this", "that"}) {
    add("room@8,6,24,18", "vqa", "what is shown on " + article + " screen?",
        "a mountain");
  }
  write_file(dir.path() / "fixtures.json", fixtures.dump());
  const json config = {
      {"schema_version", 1},
      {"backend", {{"type", "mock"}, {"fixtures", "fixtures.json"}}},
      {"tasks",
       {{"tv-drill",
         {{"kind", "refinement"},
          {"steps",
           {{{"kind", "location"}, {"phrase", "the tv"}},
            {{"kind", "object_class"},
             {"method", "mvqa"},
             {"template", "what is shown on {art} screen?"},
             {"choices", {"mountain", "sea"}}}}}}}}}};
  write_file(dir.path() / "config.json", config.dump());

  const std::string base = "--config '" + (dir.path() / "config.json").string() +
                           "' --seed 17 --now 2024-05-01T12:00:00Z";
  const std::string extract_cmd =
      base + " extract bvqa --image '" + (dir.path() / "door.png").string() +
      "' --template 'is {art} door open?'";
  const auto run_a = testing::run_cli(VLX_BIN_PATH, extract_cmd, dir.path());
  const auto run_b = testing::run_cli(VLX_BIN_PATH, extract_cmd, dir.path());
  ASSERT_EQ(run_a.exit_code, 0) << run_a.err;
  ASSERT_EQ(run_b.exit_code, 0) << run_b.err;
  EXPECT_FALSE(run_a.out.empty());
  EXPECT_EQ(run_a.out, run_b.out);  // byte-identical stdout
  EXPECT_NO_THROW(json::parse(run_a.out));

  const std::string log_a = (dir.path() / "log_a.jsonl").string();
  const std::string log_b = (dir.path() / "log_b.jsonl").string();
  const std::string task_cmd = base + " task run tv-drill --image '" +
                               (dir.path() / "room.png").string() + "'";
  const auto task_a =
      testing::run_cli(VLX_BIN_PATH, task_cmd + " --log '" + log_a + "'", dir.path());
  const auto task_b =
      testing::run_cli(VLX_BIN_PATH, task_cmd + " --log '" + log_b + "'", dir.path());
  ASSERT_EQ(task_a.exit_code, 0) << task_a.err;
  ASSERT_EQ(task_b.exit_code, 0) << task_b.err;
  EXPECT_EQ(task_a.out, task_b.out);
  std::ifstream in_a(log_a), in_b(log_b);
  const std::string bytes_a((std::istreambuf_iterator<char>(in_a)),
                            std::istreambuf_iterator<char>());
  const std::string bytes_b((std::istreambuf_iterator<char>(in_b)),
                            std::istreambuf_iterator<char>());
  EXPECT_FALSE(bytes_a.empty());
  EXPECT_EQ(bytes_a, bytes_b);  // byte-identical result records

  criterion_line(10,
                 "two CLI runs with identical config/seed/fixtures and pinned "
                 "timestamps produce byte-identical JSON",
                 !HasFailure());
  ASSERT_FALSE(HasFailure());
}

TEST(Acceptance, C11LiveDoorCheckIsManual) {
  std::cout << "[ACCEPTANCE] criterion 11 MANUAL - live open/closed-door "
               "decision against a real model server (not CI-gated); run "
               "scripts/live_door_check.sh"
            << std::endl;
  GTEST_SKIP() << "Requires a live model server; see scripts/live_door_check.sh";
}

}  // namespace
}  // namespace vlx
