#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "dative/corpus.hpp"
#include "dative/model.hpp"
#include "dative/scoring.hpp"
#include "dative/tokenizer.hpp"

namespace dative {

struct TrainConfig {
  int epochs = 10;
  int batch_size = 16;
  double peak_lr = 0.003;
  int warmup_steps = 24000;
  std::string schedule = "linear";
  std::uint64_t seed = 0;
  double weight_decay = 0.0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double max_grad_norm = 1.0;  // <= 0 disables clipping
  bool eval_each_epoch = true;

  void validate() const {
    if (epochs < 1) throw Error("train config: epochs must be >= 1");
    if (batch_size < 1) throw Error("train config: batch size must be >= 1");
    if (warmup_steps < 0) throw Error("train config: warmup steps must be >= 0");
    if (!(peak_lr > 0.0)) throw Error("train config: peak learning rate must be > 0");
    if (schedule != "linear" && schedule != "constant")
      throw Error("train config: schedule must be 'linear' or 'constant'");
  }
};

inline void to_json(json& j, const TrainConfig& c) {
  j = json{{"epochs", c.epochs},
           {"batch_size", c.batch_size},
           {"peak_lr", c.peak_lr},
           {"warmup_steps", c.warmup_steps},
           {"schedule", c.schedule},
           {"seed", c.seed},
           {"weight_decay", c.weight_decay},
           {"adam_beta1", c.adam_beta1},
           {"adam_beta2", c.adam_beta2},
           {"adam_eps", c.adam_eps},
           {"max_grad_norm", c.max_grad_norm},
           {"eval_each_epoch", c.eval_each_epoch}};
}

inline void from_json(const json& j, TrainConfig& c) {
  TrainConfig d;
  c.epochs = j.value("epochs", d.epochs);
  c.batch_size = j.value("batch_size", d.batch_size);
  c.peak_lr = j.value("peak_lr", d.peak_lr);
  c.warmup_steps = j.value("warmup_steps", d.warmup_steps);
  c.schedule = j.value("schedule", d.schedule);
  c.seed = j.value("seed", d.seed);
  c.weight_decay = j.value("weight_decay", d.weight_decay);
  c.adam_beta1 = j.value("adam_beta1", d.adam_beta1);
  c.adam_beta2 = j.value("adam_beta2", d.adam_beta2);
  c.adam_eps = j.value("adam_eps", d.adam_eps);
  c.max_grad_norm = j.value("max_grad_norm", d.max_grad_norm);
  c.eval_each_epoch = j.value("eval_each_epoch", d.eval_each_epoch);
}

// Linear warmup to the peak over `warmup` steps, then linear decay to zero at `total`.
// `step` is the number of updates already applied.
inline double scheduled_lr(const TrainConfig& tc, long step, long total) {
  if (tc.schedule == "constant") return tc.peak_lr;
  if (step < tc.warmup_steps) return tc.peak_lr * static_cast<double>(step + 1) / static_cast<double>(tc.warmup_steps);
  if (total <= tc.warmup_steps) return tc.peak_lr;
  double frac = static_cast<double>(total - step) / static_cast<double>(total - tc.warmup_steps);
  return tc.peak_lr * std::max(0.0, frac);
}

struct TrainReport {
  // eval_loss[e] = mean per-token NLL on the training set after e epochs (index 0 = at init).
  std::vector<double> train_eval_loss;
  std::vector<double> valid_eval_loss;
  std::vector<double> epoch_running_loss;
  long steps = 0;
  std::size_t truncated = 0;
};

// Token-weighted mean negative log likelihood of a set of encoded sequences.
inline double mean_nll(const LanguageModel& m, const std::vector<std::vector<TokenId>>& seqs) {
  double nll = 0.0;
  std::size_t n = 0;
  ForwardCache cache;
  for (const auto& s : seqs) {
    if (s.size() < 2) continue;
    m.forward(s, cache);
    for (double lp : m.target_logprobs(cache)) nll -= lp;
    n += s.size() - 1;
  }
  return n ? nll / static_cast<double>(n) : 0.0;
}

inline std::vector<std::vector<TokenId>> encode_corpus(const UtteranceCorpus& corpus, const SubwordTokenizer& tok,
                                                       const ModelConfig& mc, std::size_t* truncated = nullptr) {
  std::vector<std::vector<TokenId>> seqs;
  seqs.reserve(corpus.size());
  std::size_t cut = 0;
  for (const auto& u : corpus.utterances) {
    auto ids = tok.encode(u);
    if (fit_to_context(ids, mc)) ++cut;
    seqs.push_back(std::move(ids));
  }
  if (cut) log_warning(std::to_string(cut) + " utterances truncated to max_seq_len");
  if (truncated) *truncated = cut;
  return seqs;
}

class AdamW {
 public:
  explicit AdamW(std::size_t n) : m_(n, 0.0), v_(n, 0.0) {}

  void step(std::vector<double>& params, const std::vector<double>& grad, double lr, const TrainConfig& tc) {
    ++t_;
    const double b1 = tc.adam_beta1, b2 = tc.adam_beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double g = grad[i];
      m_[i] = b1 * m_[i] + (1.0 - b1) * g;
      v_[i] = b2 * v_[i] + (1.0 - b2) * g * g;
      if (tc.weight_decay > 0.0) params[i] -= lr * tc.weight_decay * params[i];
      params[i] -= lr * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + tc.adam_eps);
    }
  }

 private:
  std::vector<double> m_, v_;
  long t_ = 0;
};

using EpochCallback = std::function<void(int epoch, const TrainReport&)>;

// Next-token training from scratch. Deterministic given the seed on one platform.
inline LanguageModel train_lm(const UtteranceCorpus& corpus, const SubwordTokenizer& tok, const ModelConfig& mc,
                              const TrainConfig& tc, const UtteranceCorpus* validation = nullptr,
                              TrainReport* report = nullptr, const EpochCallback& on_epoch = {}) {
  mc.validate();
  tc.validate();
  if (tok.size() != mc.vocab_size)
    throw Error("tokenizer vocab size (" + std::to_string(tok.size()) + ") != model vocab size (" +
                std::to_string(mc.vocab_size) + ")");
  TrainReport local;
  TrainReport& rep = report ? *report : local;
  rep = TrainReport{};

  auto seqs = encode_corpus(corpus, tok, mc, &rep.truncated);
  std::vector<std::vector<TokenId>> valid;
  if (validation) valid = encode_corpus(*validation, tok, mc);

  LanguageModel model = LanguageModel::initialize(mc, tc.seed);
  if (tc.eval_each_epoch) {
    rep.train_eval_loss.push_back(mean_nll(model, seqs));
    if (validation) rep.valid_eval_loss.push_back(mean_nll(model, valid));
  }

  const long steps_per_epoch = static_cast<long>((seqs.size() + static_cast<std::size_t>(tc.batch_size) - 1) /
                                                 static_cast<std::size_t>(tc.batch_size));
  const long total_steps = steps_per_epoch * tc.epochs;
  AdamW opt(model.params().size());
  std::vector<double> grad(model.params().size(), 0.0);
  std::vector<double> weights;
  ForwardCache cache;
  Rng dropout_rng(derive_seed(tc.seed, "dropout"));
  Rng* drop = mc.dropout > 0.0 ? &dropout_rng : nullptr;

  std::vector<std::size_t> order(seqs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 1; epoch <= tc.epochs; ++epoch) {
    Rng shuffle_rng(derive_seed(tc.seed, "epoch-" + std::to_string(epoch)));
    deterministic_shuffle(order, shuffle_rng);
    double epoch_nll = 0.0;
    std::size_t epoch_tokens = 0;
    for (std::size_t b = 0; b < order.size(); b += static_cast<std::size_t>(tc.batch_size)) {
      const std::size_t e = std::min(order.size(), b + static_cast<std::size_t>(tc.batch_size));
      std::size_t n_tok = 0;
      for (std::size_t i = b; i < e; ++i) n_tok += seqs[order[i]].size() - 1;
      if (n_tok == 0) continue;
      std::fill(grad.begin(), grad.end(), 0.0);
      double batch_nll = 0.0;
      for (std::size_t i = b; i < e; ++i) {
        const auto& s = seqs[order[i]];
        if (s.size() < 2) continue;
        model.forward(s, cache, drop);
        for (double lp : model.target_logprobs(cache)) batch_nll -= lp;
        weights.assign(s.size() - 1, 1.0 / static_cast<double>(n_tok));
        model.backward(cache, weights, grad);
      }
      if (!std::isfinite(batch_nll))
        throw Error("non-finite training loss at epoch " + std::to_string(epoch) + ", step " +
                    std::to_string(rep.steps));
      if (tc.max_grad_norm > 0.0) {
        double sq = 0.0;
        for (double g : grad) sq += g * g;
        const double norm = std::sqrt(sq);
        if (!std::isfinite(norm)) throw Error("non-finite gradient norm at step " + std::to_string(rep.steps));
        if (norm > tc.max_grad_norm) {
          const double s = tc.max_grad_norm / (norm + 1e-6);
          for (double& g : grad) g *= s;
        }
      }
      opt.step(model.params(), grad, scheduled_lr(tc, rep.steps, total_steps), tc);
      ++rep.steps;
      epoch_nll += batch_nll;
      epoch_tokens += n_tok;
    }
    rep.epoch_running_loss.push_back(epoch_tokens ? epoch_nll / static_cast<double>(epoch_tokens) : 0.0);
    if (tc.eval_each_epoch) {
      rep.train_eval_loss.push_back(mean_nll(model, seqs));
      if (validation) rep.valid_eval_loss.push_back(mean_nll(model, valid));
    }
    if (on_epoch) on_epoch(epoch, rep);
  }
  return model;
}

}  // namespace dative
