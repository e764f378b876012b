#include <gtest/gtest.h>

#include <cmath>

#include "dative/verbhood.hpp"
#include "helpers.hpp"

using namespace dative;

namespace {

const char* kFixture =
    "# sent_id = v1\n"
    "1\tyou\tyou\tPRON\tPRP\t_\t2\tnsubj\t_\t_\n"
    "2\twanted\twant\tVERB\tVBD\t_\t0\tROOT\t_\t_\n"
    "3\tit\tit\tPRON\tPRP\t_\t2\tdobj\t_\t_\n"
    "\n"
    "# sent_id = v2\n"
    "1\tlook\tlook\tVERB\tVB\t_\t0\tROOT\t_\t_\n"
    "2\tat\tat\tADP\tIN\t_\t1\tprep\t_\t_\n"
    "3\tthe\tthe\tDET\tDT\t_\t4\tdet\t_\t_\n"
    "4\tboat\tboat\tNOUN\tNN\t_\t2\tpobj\t_\t_\n"
    "\n"
    "# sent_id = v3\n"
    "1\tJack\tJack\tPROPN\tNNP\t_\t2\tnsubj\t_\t_\n"
    "2\ttook\ttake\tVERB\tVBD\t_\t0\tROOT\t_\t_\n"
    "3\tthe\tthe\tDET\tDT\t_\t4\tdet\t_\t_\n"
    "4\ttreasure\ttreasure\tNOUN\tNN\t_\t2\tdobj\t_\t_\n"
    "\n"
    "# sent_id = v4\n"
    "1\tthat\tthat\tPRON\tDT\t_\t2\tnsubj\t_\t_\n"
    "2\tis\tbe\tAUX\tVBZ\t_\t0\tROOT\t_\t_\n"
    "3\tgood\tgood\tADJ\tJJ\t_\t2\tacomp\t_\t_\n"
    "\n"
    "# sent_id = v5\n"
    "1\tlet\tlet\tVERB\tVB\t_\t0\tROOT\t_\t_\n"
    "2\t's\twe\tPRON\tPRP\t_\t3\tnsubj\t_\t_\n"
    "3\tmake\tmake\tVERB\tVB\t_\t1\tccomp\t_\t_\n"
    "4\ta\ta\tDET\tDT\t_\t5\tdet\t_\t_\n"
    "5\tcake\tcake\tNOUN\tNN\t_\t3\tdobj\t_\t_\n"
    "\n";

}  // namespace

TEST(Verbhood, VbdCandidatesFromFixture) {
  auto parses = parse_conllu_string(kFixture);
  ASSERT_EQ(parses.size(), 5u);
  auto v = verb_candidates(parses);
  // two VBD tokens by hand: "wanted" (v1) and "took" (v3)
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v[0].text, "you ___ it");
  EXPECT_EQ(v[0].slot_index, 1);
  EXPECT_EQ(v[1].text, "jack ___ the treasure");
  auto n = nonverb_candidates(parses, {"v2:4", "v5:5"});
  ASSERT_EQ(n.size(), 2u);
  EXPECT_EQ(n[0].text, "look at the ___");
  EXPECT_EQ(n[1].slot_index, 4);
  EXPECT_THROW(nonverb_candidates(parses, {"v1:2"}), Error);  // tagged as a verb
  EXPECT_THROW(nonverb_candidates(parses, {"zz:1"}), Error);
}

TEST(Verbhood, BuildRequiresEnoughCandidates) {
  auto parses = parse_conllu_string(kFixture);
  auto s = build_verbhood_set(parses, {"v2:4", "v5:5"}, 2, 1);
  EXPECT_EQ(s.verb_expecting.size(), 2u);
  EXPECT_EQ(s.nonverb_expecting.size(), 2u);
  EXPECT_THROW(build_verbhood_set(parses, {"v2:4", "v5:5"}, 3, 1), Error);
  EXPECT_THROW(build_verbhood_set(parses, {"v2:4"}, 2, 1), Error);
}

TEST(Verbhood, JsonlRoundtrip) {
  testing_helpers::TempDir dir;
  auto s = build_verbhood_set(parse_conllu_string(kFixture), {"v2:4", "v5:5"}, 2, 1);
  save_verbhood_set(dir.file("v.jsonl"), s);
  auto back = load_verbhood_set(dir.file("v.jsonl"));
  ASSERT_EQ(back.verb_expecting.size(), 2u);
  EXPECT_EQ(back.verb_expecting[1].text, s.verb_expecting[1].text);
  EXPECT_EQ(back.nonverb_expecting[0].cls, SlotClass::NonVerb);
  VerbhoodSet bad = s;
  bad.verb_expecting[0].text = "no slot here";
  EXPECT_THROW(bad.validate(), Error);
}

TEST(Verbhood, DeltaHandComputedAndAntisymmetric) {
  std::vector<double> v{-2.0, -3.0}, n{-4.0, -4.5};
  EXPECT_DOUBLE_EQ(verbhood_delta_from_scores(v, n), (-2.5) - (-4.25));
  EXPECT_DOUBLE_EQ(verbhood_delta_from_scores(v, n), -verbhood_delta_from_scores(n, v));
}

TEST(Verbhood, UniformModelGivesZeroDeltaAndZeroAccuracy) {
  auto tok = SubwordTokenizer::train(make_corpus({"you want it", "look at the boat"}, Split::Train), 30);
  tok.bind_novel_surface("[pilked]");
  LanguageModel m(testing_helpers::tiny_config(tok.size()));
  VerbhoodSet s;
  s.verb_expecting = {{"you ___ it", 1, SlotClass::Verb}, {"___ the boat", 0, SlotClass::Verb}};
  s.nonverb_expecting = {{"look at the ___", 3, SlotClass::NonVerb}, {"the ___", 1, SlotClass::NonVerb}};
  VerbhoodEvaluator ev(tok, s, m.config());
  EXPECT_NEAR(ev.delta(m), 0.0, 1e-12);
  EXPECT_EQ(ev.accuracy(m), 0.0);
  EXPECT_EQ(ev.accuracy(m, VerbhoodPairing::AllPairs), 0.0);
}

// Property: accuracy is unchanged by any common strictly increasing transform of the scores.
TEST(Verbhood, AccuracyMonotoneInvariance) {
  Rng rng(77);
  NormalSampler n;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t k = 1 + rng() % 20;
    std::vector<double> v(k), nv(k);
    for (auto& x : v) x = n(rng);
    for (auto& x : nv) x = n(rng);
    const double a = 0.1 + uniform01(rng) * 3.0, b = n(rng);
    auto tf = [&](std::vector<double> xs) {
      for (auto& x : xs) x = std::exp(a * x) + b;
      return xs;
    };
    for (auto mode : {VerbhoodPairing::IndexPaired, VerbhoodPairing::AllPairs}) {
      const double acc = verbhood_accuracy_from_scores(v, nv, mode, 5);
      EXPECT_GE(acc, 0.0);
      EXPECT_LE(acc, 1.0);
      EXPECT_EQ(acc, verbhood_accuracy_from_scores(tf(v), tf(nv), mode, 5));
    }
  }
}

TEST(Verbhood, RandomModelsNearChance) {
  // Chance-level oracle: untrained models should not systematically prefer either class.
  auto tok = SubwordTokenizer::train(
      make_corpus({"you want it", "look at the boat", "she took the cake", "he has a ball"}, Split::Train), 40);
  tok.bind_novel_surface("[pilked]");
  VerbhoodSet s;
  const char* verbs[] = {"you ___ it", "she ___ the cake", "he ___ a ball", "they ___ the boat"};
  const char* nonverbs[] = {"look at the ___", "he has a ___", "she took the ___", "you want a ___"};
  for (int i = 0; i < 4; ++i) {
    s.verb_expecting.push_back({verbs[i], static_cast<int>(std::string(verbs[i]).find("___") ? 1 : 0), SlotClass::Verb});
    const auto w = split_whitespace(nonverbs[i]);
    s.nonverb_expecting.push_back({nonverbs[i], static_cast<int>(w.size() - 1), SlotClass::NonVerb});
  }
  double acc = 0.0;
  for (int seed = 0; seed < 10; ++seed) {
    auto m = LanguageModel::initialize(testing_helpers::tiny_config(tok.size(), 16, 2, 2, 32), static_cast<std::uint64_t>(seed));
    VerbhoodEvaluator ev(tok, s, m.config());
    acc += ev.accuracy(m, VerbhoodPairing::AllPairs);
  }
  acc /= 10.0;
  EXPECT_NEAR(acc, 0.5, 0.25);
}
