#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "dative/model.hpp"
#include "dative/scoring.hpp"
#include "dative/tokenizer.hpp"
#include "dative/verbhood.hpp"

namespace dative {

struct NovelToken {
  std::string surface = "[pilked]";
  TokenId id = SubwordTokenizer::kNovel;
};

inline NovelToken install_novel_token(SubwordTokenizer& tok, const std::string& surface) {
  tok.bind_novel_surface(surface);
  auto ids = tok.encode_words(surface);
  if (ids.size() != 1 || ids[0] != SubwordTokenizer::kNovel)
    throw Error("novel surface does not map onto the reserved slot");
  return {surface, SubwordTokenizer::kNovel};
}

// Multivariate normal fitted to a set of row vectors.
struct RowGaussian {
  std::size_t dim = 0;
  std::vector<double> mean;
  std::vector<double> chol;  // lower-triangular factor, row-major dim x dim
  bool diagonal = false;     // chol holds only per-dimension std devs on the diagonal

  std::vector<double> sample(Rng& rng) const {
    NormalSampler normal;
    std::vector<double> z(dim);
    for (auto& v : z) v = normal(rng);
    std::vector<double> out = mean;
    for (std::size_t i = 0; i < dim; ++i) {
      if (diagonal) {
        out[i] += chol[i * dim + i] * z[i];
        continue;
      }
      double s = 0.0;
      for (std::size_t k = 0; k <= i; ++k) s += chol[i * dim + k] * z[k];
      out[i] += s;
    }
    return out;
  }
};

// In-place Cholesky of a symmetric matrix (row-major). Returns false if not positive definite.
inline bool cholesky(std::vector<double>& a, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
    if (!(d > 0.0) || !std::isfinite(d)) return false;
    d = std::sqrt(d);
    a[j * n + j] = d;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = s / d;
    }
    for (std::size_t k = j + 1; k < n; ++k) a[j * n + k] = 0.0;
  }
  return true;
}

// Mean and (biased) empirical covariance of `rows` (n x dim, row-major) plus ridge * I.
inline RowGaussian fit_row_gaussian(const std::vector<double>& rows, std::size_t n, std::size_t dim,
                                    double ridge = 1e-5) {
  if (n == 0 || dim == 0 || rows.size() != n * dim) throw Error("fit_row_gaussian: bad shape");
  RowGaussian g;
  g.dim = dim;
  g.mean.assign(dim, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t d = 0; d < dim; ++d) g.mean[d] += rows[r * dim + d];
  for (auto& m : g.mean) m /= static_cast<double>(n);
  std::vector<double> cov(dim * dim, 0.0), c(dim);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t d = 0; d < dim; ++d) c[d] = rows[r * dim + d] - g.mean[d];
    for (std::size_t i = 0; i < dim; ++i) {
      if (c[i] == 0.0) continue;
      double* ci = cov.data() + i * dim;
      for (std::size_t j = 0; j <= i; ++j) ci[j] += c[i] * c[j];
    }
  }
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      cov[i * dim + j] /= static_cast<double>(n);
      cov[j * dim + i] = cov[i * dim + j];
    }
  for (std::size_t i = 0; i < dim; ++i) cov[i * dim + i] += ridge;
  std::vector<double> diag(dim);
  for (std::size_t i = 0; i < dim; ++i) diag[i] = cov[i * dim + i];
  if (cholesky(cov, dim)) {
    g.chol = std::move(cov);
    return g;
  }
  log_warning("embedding covariance is not positive definite; falling back to a diagonal covariance");
  g.diagonal = true;
  g.chol.assign(dim * dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i) g.chol[i * dim + i] = std::sqrt(std::max(diag[i], ridge));
  return g;
}

// Gaussian over all embedding rows except the novel slot.
inline RowGaussian embedding_gaussian(const LanguageModel& model, TokenId novel = SubwordTokenizer::kNovel,
                                      double ridge = 1e-5) {
  const std::size_t D = model.dim(), V = model.vocab();
  std::vector<double> rows;
  rows.reserve((V - 1) * D);
  for (std::size_t v = 0; v < V; ++v) {
    if (static_cast<TokenId>(v) == novel) continue;
    auto r = model.embedding_row(static_cast<int>(v));
    rows.insert(rows.end(), r.begin(), r.end());
  }
  return fit_row_gaussian(rows, V - 1, D, ridge);
}

inline std::vector<double> init_novel_embedding(const LanguageModel& model, std::uint64_t seed,
                                                TokenId novel = SubwordTokenizer::kNovel) {
  Rng rng(derive_seed(seed, "novel-init"));
  return embedding_gaussian(model, novel).sample(rng);
}

// Full copy of the parameters taken before a trial.
struct ModelSnapshot {
  ModelConfig config;
  std::vector<double> params;
};

inline ModelSnapshot take_snapshot(const LanguageModel& m) { return {m.config(), m.params()}; }

inline void reset_trial(LanguageModel& m, const std::optional<ModelSnapshot>& snap) {
  if (!snap) throw Error("reset_trial: no snapshot was captured");
  if (!(snap->config == m.config()) || snap->params.size() != m.params().size())
    throw Error("reset_trial: snapshot does not match the model config");
  m.params() = snap->params;
}

// Mean negative log likelihood over every scored position of `ids`.
inline double exposure_loss(const LanguageModel& m, const std::vector<TokenId>& ids) {
  ForwardCache cache;
  m.forward(ids, cache);
  auto lps = m.target_logprobs(cache);
  double s = 0.0;
  for (double v : lps) s -= v;
  return s / static_cast<double>(lps.size());
}

// Gradient of exposure_loss with respect to the embedding row of `row` only.
inline std::vector<double> exposure_row_gradient(const LanguageModel& m, const std::vector<TokenId>& ids,
                                                 TokenId row) {
  if (ids.size() < 2) throw Error("exposure needs at least one scored token");
  ForwardCache cache;
  m.forward(ids, cache);
  std::vector<double> w(ids.size() - 1, 1.0 / static_cast<double>(ids.size() - 1));
  std::vector<double> grad(m.params().size(), 0.0);
  m.backward(cache, w, grad, GradMode::EmbeddingRow, row);
  const std::size_t off = m.layout().tok_emb + static_cast<std::size_t>(row) * m.dim();
  return {grad.begin() + static_cast<std::ptrdiff_t>(off),
          grad.begin() + static_cast<std::ptrdiff_t>(off + m.dim())};
}

struct ExposureTrial {
  std::string trial_id;
  std::string stimulus_id;
  std::string text;
  std::vector<double> lr_grid{0.001, 0.005, 0.01, 0.05, 0.1};
  int max_epochs = 70;
  std::uint64_t seed = 0;
};

struct TraceEntry {
  double lr = 0.0;
  int epoch = 0;
  double verbhood_delta = 0.0;
};

struct LearnedVerbState {
  std::vector<double> embedding;
  int best_epoch = 0;
  double best_lr = 0.0;
  double verbhood_delta = -std::numeric_limits<double>::infinity();
  std::vector<TraceEntry> trace;
  std::vector<double> skipped_lrs;  // abandoned after a non-finite gradient
};

inline json trial_result_json(const ExposureTrial& t, const LearnedVerbState& s) {
  return {{"trial_id", t.trial_id},          {"stimulus_id", t.stimulus_id}, {"seed", t.seed},
          {"best_lr", s.best_lr},            {"best_epoch", s.best_epoch},   {"verbhood_delta", s.verbhood_delta}};
}

// Learns the novel row from a single stimulus with plain SGD, one step per epoch, for each lr.
// The starting row is whatever the model holds on entry. On return the model holds the
// selected row; every other parameter is untouched.
inline LearnedVerbState learn_exposure(LanguageModel& model, const SubwordTokenizer& tok, const ExposureTrial& trial,
                                       const VerbhoodEvaluator& vset) {
  const std::string& surface = tok.novel_surface();
  if (surface.empty()) throw Error("learn_exposure: no novel surface bound");
  if (count_word(trial.text, surface) != 1)
    throw Error("exposure stimulus must contain the novel surface exactly once: " + trial.text);
  if (trial.max_epochs < 1 || trial.lr_grid.empty()) throw Error("learn_exposure: empty lr grid or epoch budget");
  auto ids = tok.encode(trial.text);
  if (fit_to_context(ids, model.config())) log_warning("exposure stimulus truncated: " + trial.text);

  const TokenId row = SubwordTokenizer::kNovel;
  const auto span0 = model.embedding_row(row);
  const std::vector<double> init(span0.begin(), span0.end());
  std::vector<double> lrs = trial.lr_grid;
  std::sort(lrs.begin(), lrs.end());

  LearnedVerbState best;
  best.embedding = init;
  std::vector<double> cur;
  for (double lr : lrs) {
    cur = init;
    bool failed = false;
    for (int epoch = 1; epoch <= trial.max_epochs; ++epoch) {
      model.set_embedding_row(row, cur);
      auto g = exposure_row_gradient(model, ids, row);
      if (!std::all_of(g.begin(), g.end(), [](double v) { return std::isfinite(v); })) {
        log_warning("non-finite gradient at lr " + format_double(lr) + ", epoch " + std::to_string(epoch) +
                    "; skipping this lr");
        failed = true;
        break;
      }
      for (std::size_t d = 0; d < cur.size(); ++d) cur[d] -= lr * g[d];
      model.set_embedding_row(row, cur);
      const double delta = vset.delta(model);
      best.trace.push_back({lr, epoch, delta});
      if (delta > best.verbhood_delta) {
        best.verbhood_delta = delta;
        best.best_lr = lr;
        best.best_epoch = epoch;
        best.embedding = cur;
      }
    }
    if (failed) best.skipped_lrs.push_back(lr);
  }
  if (best.trace.empty()) throw Error("learn_exposure: every learning rate produced a non-finite gradient");
  model.set_embedding_row(row, best.embedding);
  return best;
}

}  // namespace dative
