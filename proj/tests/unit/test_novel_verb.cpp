#include <gtest/gtest.h>

#include <cmath>

#include "dative/novel_verb.hpp"
#include "helpers.hpp"

using namespace dative;

namespace {

struct Fixture {
  SubwordTokenizer tok;
  LanguageModel model;
  VerbhoodSet vset;

  static Fixture make() {
    auto corpus = make_corpus({"she gave the ball to me", "he took a cookie", "you saw the dog", "the cat is here",
                               "mommy has a book", "look at the frog"},
                              Split::Train);
    auto tok = SubwordTokenizer::train(corpus, 48);
    tok.bind_novel_surface("[pilked]");
    auto cfg = testing_helpers::tiny_config(tok.size(), 8, 2, 2, 16, 32);
    auto m = LanguageModel::initialize(cfg, 17);
    VerbhoodSet v;
    v.verb_expecting = {{"she ___ the ball", 1, SlotClass::Verb}, {"you ___ a cookie", 1, SlotClass::Verb}};
    v.nonverb_expecting = {{"look at the ___", 3, SlotClass::NonVerb}, {"mommy has a ___", 3, SlotClass::NonVerb}};
    return {std::move(tok), std::move(m), std::move(v)};
  }
};

}  // namespace

TEST(NovelInit, IdenticalRowsGiveThatRow) {
  std::vector<double> rows;
  const std::vector<double> r{0.3, -1.2, 2.0};
  for (int i = 0; i < 5; ++i) rows.insert(rows.end(), r.begin(), r.end());
  auto g = fit_row_gaussian(rows, 5, 3);
  Rng rng(1);
  auto s = g.sample(rng);
  for (int d = 0; d < 3; ++d) EXPECT_NEAR(s[static_cast<std::size_t>(d)], r[static_cast<std::size_t>(d)], 0.02);
}

// 3 rows, 2 dims: mean and covariance computed by hand, checked by Monte Carlo.
TEST(NovelInit, MonteCarloMatchesHandMoments) {
  const std::vector<double> rows{1.0, 2.0, 3.0, 0.0, 2.0, 4.0};
  // column means: (1+3+2)/3 = 2, (2+0+4)/3 = 2
  // centered: (-1,0) (1,-2) (0,2); cov = [[2/3, -2/3], [-2/3, 8/3]] (+1e-5 ridge)
  auto g = fit_row_gaussian(rows, 3, 2);
  EXPECT_NEAR(g.mean[0], 2.0, 1e-12);
  EXPECT_NEAR(g.mean[1], 2.0, 1e-12);
  Rng rng(2024);
  const int n = 10000;
  double s0 = 0, s1 = 0, s00 = 0, s11 = 0, s01 = 0;
  for (int i = 0; i < n; ++i) {
    auto x = g.sample(rng);
    s0 += x[0];
    s1 += x[1];
    s00 += x[0] * x[0];
    s11 += x[1] * x[1];
    s01 += x[0] * x[1];
  }
  const double m0 = s0 / n, m1 = s1 / n;
  const double v0 = 2.0 / 3.0, v1 = 8.0 / 3.0;
  EXPECT_LT(std::abs(m0 - 2.0), 3.0 * std::sqrt(v0 / n));
  EXPECT_LT(std::abs(m1 - 2.0), 3.0 * std::sqrt(v1 / n));
  EXPECT_NEAR(s00 / n - m0 * m0, v0, 0.05);
  EXPECT_NEAR(s11 / n - m1 * m1, v1, 0.15);
  EXPECT_NEAR(s01 / n - m0 * m1, -2.0 / 3.0, 0.08);
}

TEST(NovelInit, ShapeAndFiniteOnModel) {
  auto f = Fixture::make();
  auto e = init_novel_embedding(f.model, 3);
  ASSERT_EQ(e.size(), f.model.dim());
  for (double v : e) EXPECT_TRUE(std::isfinite(v));
  EXPECT_EQ(init_novel_embedding(f.model, 3), e);
}

TEST(NovelInit, CholeskyRejectsIndefinite) {
  std::vector<double> a{1.0, 2.0, 2.0, 1.0};
  EXPECT_FALSE(cholesky(a, 2));
}

TEST(LearnExposure, FrozenBackboneAndSelection) {
  auto f = Fixture::make();
  f.model.set_embedding_row(SubwordTokenizer::kNovel, init_novel_embedding(f.model, 9));
  const auto before = f.model.params();
  VerbhoodEvaluator ev(f.tok, f.vset, f.model.config());
  ExposureTrial t{"t1", "s1", "she [pilked] the ball to me", {0.1, 0.01, 0.05}, 6, 0};
  auto st = learn_exposure(f.model, f.tok, t, ev);
  ASSERT_EQ(st.trace.size(), 18u);
  const std::size_t off = f.model.layout().tok_emb + SubwordTokenizer::kNovel * f.model.dim();
  for (std::size_t i = 0; i < before.size(); ++i)
    if (i < off || i >= off + f.model.dim()) {
      ASSERT_EQ(f.model.params()[i], before[i]) << i;
    }
  double best = -1e300;
  for (const auto& e : st.trace) best = std::max(best, e.verbhood_delta);
  EXPECT_EQ(st.verbhood_delta, best);
  // ties go to the smallest lr, then the earliest epoch; trace is ordered that way
  for (const auto& e : st.trace)
    if (e.verbhood_delta == best) {
      EXPECT_EQ(e.lr, st.best_lr);
      EXPECT_EQ(e.epoch, st.best_epoch);
      break;
    }
  EXPECT_LE(st.best_epoch, 6);
  auto row = f.model.embedding_row(SubwordTokenizer::kNovel);
  EXPECT_TRUE(std::equal(row.begin(), row.end(), st.embedding.begin()));
  EXPECT_DOUBLE_EQ(ev.delta(f.model), st.verbhood_delta);
}

TEST(LearnExposure, ZeroLearningRateLeavesRow) {
  auto f = Fixture::make();
  f.model.set_embedding_row(SubwordTokenizer::kNovel, init_novel_embedding(f.model, 4));
  const auto init = std::vector<double>(f.model.embedding_row(SubwordTokenizer::kNovel).begin(),
                                        f.model.embedding_row(SubwordTokenizer::kNovel).end());
  VerbhoodEvaluator ev(f.tok, f.vset, f.model.config());
  ExposureTrial t{"t", "s", "he [pilked] a cookie", {0.0}, 5, 0};
  auto st = learn_exposure(f.model, f.tok, t, ev);
  EXPECT_EQ(st.embedding, init);
  for (std::size_t i = 1; i < st.trace.size(); ++i) EXPECT_EQ(st.trace[i].verbhood_delta, st.trace[0].verbhood_delta);
}

TEST(LearnExposure, SingleStepMatchesFiniteDifference) {
  auto f = Fixture::make();
  const auto init = init_novel_embedding(f.model, 5);
  f.model.set_embedding_row(SubwordTokenizer::kNovel, init);
  const std::string text = "she [pilked] the ball to me";
  const auto ids = f.tok.encode(text);
  // central finite differences on the exposure loss w.r.t. the novel row
  std::vector<double> fd(init.size());
  for (std::size_t d = 0; d < init.size(); ++d) {
    const double h = 1e-5;
    auto r = init;
    r[d] = init[d] + h;
    f.model.set_embedding_row(SubwordTokenizer::kNovel, r);
    const double lp = exposure_loss(f.model, ids);
    r[d] = init[d] - h;
    f.model.set_embedding_row(SubwordTokenizer::kNovel, r);
    const double lm = exposure_loss(f.model, ids);
    fd[d] = (lp - lm) / (2 * h);
  }
  f.model.set_embedding_row(SubwordTokenizer::kNovel, init);
  VerbhoodEvaluator ev(f.tok, f.vset, f.model.config());
  const double lr = 0.05;
  auto st = learn_exposure(f.model, f.tok, {"t", "s", text, {lr}, 1, 0}, ev);
  for (std::size_t d = 0; d < init.size(); ++d) {
    const double expected = init[d] - lr * fd[d];
    EXPECT_NEAR(st.embedding[d], expected, 1e-4 * std::max(std::abs(expected), 1e-3));
  }
}

TEST(LearnExposure, StimulusValidation) {
  auto f = Fixture::make();
  VerbhoodEvaluator ev(f.tok, f.vset, f.model.config());
  EXPECT_THROW(learn_exposure(f.model, f.tok, {"t", "s", "she gave the ball", {0.1}, 2, 0}, ev), Error);
  EXPECT_THROW(learn_exposure(f.model, f.tok, {"t", "s", "[pilked] [pilked]", {0.1}, 2, 0}, ev), Error);
}

TEST(ResetTrial, RestoresSnapshotAndOrderIndependence) {
  auto f = Fixture::make();
  f.model.set_embedding_row(SubwordTokenizer::kNovel, init_novel_embedding(f.model, 6));
  std::optional<ModelSnapshot> none;
  EXPECT_THROW(reset_trial(f.model, none), Error);
  std::optional<ModelSnapshot> snap = take_snapshot(f.model);
  VerbhoodEvaluator ev(f.tok, f.vset, f.model.config());
  ExposureTrial a{"a", "a", "she [pilked] the ball to me", {0.01, 0.1}, 4, 0};
  ExposureTrial b{"b", "b", "he [pilked] me a cookie", {0.01, 0.1}, 4, 0};

  auto a1 = learn_exposure(f.model, f.tok, a, ev);
  reset_trial(f.model, snap);
  EXPECT_EQ(f.model.params(), snap->params);
  auto b1 = learn_exposure(f.model, f.tok, b, ev);
  reset_trial(f.model, snap);
  auto b2 = learn_exposure(f.model, f.tok, b, ev);
  reset_trial(f.model, snap);
  auto a2 = learn_exposure(f.model, f.tok, a, ev);
  reset_trial(f.model, snap);
  EXPECT_EQ(a1.embedding, a2.embedding);
  EXPECT_EQ(b1.embedding, b2.embedding);
  EXPECT_EQ(a1.verbhood_delta, a2.verbhood_delta);

  auto other_cfg = f.model.config();
  other_cfg.d_ff = 4;
  std::optional<ModelSnapshot> wrong = ModelSnapshot{other_cfg, snap->params};
  EXPECT_THROW(reset_trial(f.model, wrong), Error);
}
