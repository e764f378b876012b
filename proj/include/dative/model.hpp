#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "dative/tokenizer.hpp"
#include "dative/util.hpp"

namespace dative {

// Architecture hyperparameters. Defaults give ~8.45M trainable parameters.
struct ModelConfig {
  int layers = 8;
  int heads = 8;
  int d_model = 256;
  int d_ff = 1024;
  int vocab_size = 8192;
  int max_seq_len = 128;
  double layer_norm_eps = 1e-5;
  double init_std = 0.02;
  double dropout = 0.0;

  void validate() const {
    if (layers < 1) throw Error("model config: layers must be >= 1");
    if (heads < 1) throw Error("model config: heads must be >= 1");
    if (d_model < 1 || d_model % heads != 0)
      throw Error("model config: embedding size must be a positive multiple of the head count");
    if (d_ff < 1) throw Error("model config: feedforward size must be >= 1");
    if (vocab_size < SubwordTokenizer::kNumSpecials) throw Error("model config: vocab size too small");
    if (max_seq_len < 2) throw Error("model config: max sequence length must be >= 2");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw Error("model config: dropout must be in [0, 1)");
  }

  std::size_t parameter_count() const {
    const std::size_t D = static_cast<std::size_t>(d_model), F = static_cast<std::size_t>(d_ff);
    std::size_t per_layer = 4 * (D * D + D) + (D * F + F) + (F * D + D) + 4 * D;
    return static_cast<std::size_t>(vocab_size) * D + static_cast<std::size_t>(max_seq_len) * D +
           static_cast<std::size_t>(layers) * per_layer + 2 * D;
  }

  bool operator==(const ModelConfig&) const = default;
};

inline void to_json(json& j, const ModelConfig& c) {
  j = json{{"layers", c.layers},         {"heads", c.heads},
           {"d_model", c.d_model},       {"d_ff", c.d_ff},
           {"vocab_size", c.vocab_size}, {"max_seq_len", c.max_seq_len},
           {"layer_norm_eps", c.layer_norm_eps}, {"init_std", c.init_std},
           {"dropout", c.dropout}};
}

inline void from_json(const json& j, ModelConfig& c) {
  ModelConfig d;
  c.layers = j.value("layers", d.layers);
  c.heads = j.value("heads", d.heads);
  c.d_model = j.value("d_model", d.d_model);
  c.d_ff = j.value("d_ff", d.d_ff);
  c.vocab_size = j.value("vocab_size", d.vocab_size);
  c.max_seq_len = j.value("max_seq_len", d.max_seq_len);
  c.layer_norm_eps = j.value("layer_norm_eps", d.layer_norm_eps);
  c.init_std = j.value("init_std", d.init_std);
  c.dropout = j.value("dropout", d.dropout);
}

struct TensorSpec {
  std::string name;
  std::size_t offset;
  std::size_t rows;
  std::size_t cols;
  std::size_t size() const { return rows * cols; }
};

struct LayerOffsets {
  std::size_t ln1_g, ln1_b, wq, bq, wk, bk, wv, bv, wo, bo, ln2_g, ln2_b, w1, b1, w2, b2;
};

// Flat parameter layout. Linear weights are stored [in x out], row-major.
struct ParamLayout {
  std::size_t tok_emb = 0, pos_emb = 0, lnf_g = 0, lnf_b = 0, total = 0;
  std::vector<LayerOffsets> layers;
  std::vector<TensorSpec> tensors;

  explicit ParamLayout(const ModelConfig& c) {
    const std::size_t D = static_cast<std::size_t>(c.d_model), F = static_cast<std::size_t>(c.d_ff);
    auto add = [&](const std::string& name, std::size_t rows, std::size_t cols) {
      tensors.push_back({name, total, rows, cols});
      std::size_t off = total;
      total += rows * cols;
      return off;
    };
    tok_emb = add("tok_emb", static_cast<std::size_t>(c.vocab_size), D);
    pos_emb = add("pos_emb", static_cast<std::size_t>(c.max_seq_len), D);
    for (int l = 0; l < c.layers; ++l) {
      std::string p = "layer" + std::to_string(l) + ".";
      LayerOffsets o{};
      o.ln1_g = add(p + "ln1.gamma", 1, D);
      o.ln1_b = add(p + "ln1.beta", 1, D);
      o.wq = add(p + "attn.wq", D, D);
      o.bq = add(p + "attn.bq", 1, D);
      o.wk = add(p + "attn.wk", D, D);
      o.bk = add(p + "attn.bk", 1, D);
      o.wv = add(p + "attn.wv", D, D);
      o.bv = add(p + "attn.bv", 1, D);
      o.wo = add(p + "attn.wo", D, D);
      o.bo = add(p + "attn.bo", 1, D);
      o.ln2_g = add(p + "ln2.gamma", 1, D);
      o.ln2_b = add(p + "ln2.beta", 1, D);
      o.w1 = add(p + "ffn.w1", D, F);
      o.b1 = add(p + "ffn.b1", 1, F);
      o.w2 = add(p + "ffn.w2", F, D);
      o.b2 = add(p + "ffn.b2", 1, D);
      layers.push_back(o);
    }
    lnf_g = add("final_ln.gamma", 1, D);
    lnf_b = add("final_ln.beta", 1, D);
  }
};

// Per-sequence activations kept for the backward pass.
struct LayerCache {
  std::vector<double> x_in, ln1, ln1_rstd, q, k, v, att, ctx, attn_out_mask, x_mid, ln2, ln2_rstd,
      ff_pre, ff_act, ff_out_mask;
};

struct ForwardCache {
  int T = 0;
  std::vector<int> tokens;
  std::vector<double> emb_mask;
  std::vector<double> x0;
  std::vector<LayerCache> layers;
  std::vector<double> x_final, lnf, lnf_rstd;
  std::vector<double> logp;  // T x V log-softmax
};

enum class GradMode {
  Full,        // gradients for every parameter
  EmbeddingRow // gradient only for one token-embedding row; all other tensors treated as constants
};

namespace kernels {

// y[T,N] = x[T,K] W[K,N] + b[N]
inline void linear(const double* x, const double* W, const double* b, double* y, std::size_t T, std::size_t K,
                   std::size_t N) {
  for (std::size_t t = 0; t < T; ++t) {
    double* yt = y + t * N;
    if (b)
      std::memcpy(yt, b, N * sizeof(double));
    else
      std::fill(yt, yt + N, 0.0);
    const double* xt = x + t * K;
    for (std::size_t k = 0; k < K; ++k) {
      const double xv = xt[k];
      const double* wk = W + k * N;
      for (std::size_t n = 0; n < N; ++n) yt[n] += xv * wk[n];
    }
  }
}

// dx[T,K] += dy[T,N] W^T ; dW[K,N] += x^T dy ; db[N] += sum_t dy
inline void linear_backward(const double* x, const double* W, const double* dy, double* dx, double* dW, double* db,
                            std::size_t T, std::size_t K, std::size_t N) {
  for (std::size_t t = 0; t < T; ++t) {
    const double* dyt = dy + t * N;
    if (dx) {
      double* dxt = dx + t * K;
      for (std::size_t k = 0; k < K; ++k) {
        const double* wk = W + k * N;
        double acc = 0.0;
        for (std::size_t n = 0; n < N; ++n) acc += dyt[n] * wk[n];
        dxt[k] += acc;
      }
    }
    if (dW) {
      const double* xt = x + t * K;
      for (std::size_t k = 0; k < K; ++k) {
        const double xv = xt[k];
        double* dwk = dW + k * N;
        for (std::size_t n = 0; n < N; ++n) dwk[n] += xv * dyt[n];
      }
    }
    if (db)
      for (std::size_t n = 0; n < N; ++n) db[n] += dyt[n];
  }
}

inline void layer_norm(const double* x, const double* g, const double* b, double* y, double* rstd, std::size_t T,
                       std::size_t D, double eps) {
  for (std::size_t t = 0; t < T; ++t) {
    const double* xt = x + t * D;
    double mean = 0.0;
    for (std::size_t d = 0; d < D; ++d) mean += xt[d];
    mean /= static_cast<double>(D);
    double var = 0.0;
    for (std::size_t d = 0; d < D; ++d) var += (xt[d] - mean) * (xt[d] - mean);
    var /= static_cast<double>(D);
    const double r = 1.0 / std::sqrt(var + eps);
    rstd[t] = r;
    double* yt = y + t * D;
    for (std::size_t d = 0; d < D; ++d) yt[d] = (xt[d] - mean) * r * g[d] + b[d];
  }
}

// dx += LN'(x)^T dy, with xhat recomputed from x.
inline void layer_norm_backward(const double* x, const double* g, const double* rstd, const double* dy, double* dx,
                                double* dg, double* db, std::size_t T, std::size_t D) {
  std::vector<double> xhat(D), dxhat(D);
  for (std::size_t t = 0; t < T; ++t) {
    const double* xt = x + t * D;
    const double* dyt = dy + t * D;
    double mean = 0.0;
    for (std::size_t d = 0; d < D; ++d) mean += xt[d];
    mean /= static_cast<double>(D);
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t d = 0; d < D; ++d) {
      xhat[d] = (xt[d] - mean) * rstd[t];
      dxhat[d] = dyt[d] * g[d];
      m1 += dxhat[d];
      m2 += dxhat[d] * xhat[d];
      if (dg) dg[d] += dyt[d] * xhat[d];
      if (db) db[d] += dyt[d];
    }
    m1 /= static_cast<double>(D);
    m2 /= static_cast<double>(D);
    if (dx) {
      double* dxt = dx + t * D;
      for (std::size_t d = 0; d < D; ++d) dxt[d] += rstd[t] * (dxhat[d] - m1 - xhat[d] * m2);
    }
  }
}

}  // namespace kernels

// Decoder-only Transformer with learned positions, pre-layer-norm blocks,
// ReLU feedforward, and input/output embeddings tied to one matrix.
class LanguageModel {
 public:
  explicit LanguageModel(const ModelConfig& cfg) : config_(cfg), layout_((cfg.validate(), cfg)) {
    params_.assign(layout_.total, 0.0);
    for (std::size_t l = 0; l < layout_.layers.size(); ++l) {
      const auto& o = layout_.layers[l];
      std::fill_n(params_.begin() + static_cast<std::ptrdiff_t>(o.ln1_g), cfg.d_model, 1.0);
      std::fill_n(params_.begin() + static_cast<std::ptrdiff_t>(o.ln2_g), cfg.d_model, 1.0);
    }
    std::fill_n(params_.begin() + static_cast<std::ptrdiff_t>(layout_.lnf_g), cfg.d_model, 1.0);
  }

  // Weights ~ N(0, init_std^2), biases 0, layer-norm gains 1.
  static LanguageModel initialize(const ModelConfig& cfg, std::uint64_t seed) {
    LanguageModel m(cfg);
    Rng rng(derive_seed(seed, "model-init"));
    NormalSampler normal;
    for (const auto& t : m.layout_.tensors) {
      bool is_weight = t.rows > 1 && t.name.find("gamma") == std::string::npos;
      if (!is_weight) continue;
      for (std::size_t i = 0; i < t.size(); ++i) m.params_[t.offset + i] = cfg.init_std * normal(rng);
    }
    return m;
  }

  const ModelConfig& config() const { return config_; }
  const ParamLayout& layout() const { return layout_; }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  std::span<double> embedding_row(int token) {
    check_token(token);
    return {params_.data() + layout_.tok_emb + static_cast<std::size_t>(token) * dim(), dim()};
  }
  std::span<const double> embedding_row(int token) const {
    check_token(token);
    return {params_.data() + layout_.tok_emb + static_cast<std::size_t>(token) * dim(), dim()};
  }
  void set_embedding_row(int token, std::span<const double> row) {
    if (row.size() != dim()) throw Error("embedding row has wrong dimension");
    auto dst = embedding_row(token);
    std::copy(row.begin(), row.end(), dst.begin());
  }

  std::size_t dim() const { return static_cast<std::size_t>(config_.d_model); }
  std::size_t vocab() const { return static_cast<std::size_t>(config_.vocab_size); }

  // Runs the network over `tokens` (length <= max_seq_len) and fills cache.logp.
  // A non-null rng enables dropout.
  void forward(const std::vector<int>& tokens, ForwardCache& cache, Rng* dropout_rng = nullptr) const;

  // Accumulates gradients of  sum_t weight_t * (-log p(tokens[t+1] | tokens[..t]))
  // into `grad` (same layout as params). In EmbeddingRow mode only the slice
  // for `row` is written.
  void backward(const ForwardCache& cache, std::span<const double> position_weights, std::vector<double>& grad,
                GradMode mode = GradMode::Full, int row = -1) const;

  // Per-position next-token log probability of the observed continuation.
  std::vector<double> target_logprobs(const ForwardCache& cache) const {
    std::vector<double> out;
    const std::size_t V = vocab();
    for (int t = 0; t + 1 < cache.T; ++t)
      out.push_back(cache.logp[static_cast<std::size_t>(t) * V + static_cast<std::size_t>(cache.tokens[static_cast<std::size_t>(t) + 1])]);
    return out;
  }

  void save(const std::string& path) const;
  static LanguageModel load(const std::string& path);

 private:
  void check_token(int token) const {
    if (token < 0 || token >= config_.vocab_size) throw Error("token id out of range");
  }

  ModelConfig config_;
  ParamLayout layout_;
  std::vector<double> params_;
};

inline void LanguageModel::forward(const std::vector<int>& tokens, ForwardCache& c, Rng* dropout_rng) const {
  const std::size_t T = tokens.size();
  if (T == 0) throw Error("forward: empty token sequence");
  if (T > static_cast<std::size_t>(config_.max_seq_len)) throw Error("forward: sequence longer than max_seq_len");
  for (int tkn : tokens) check_token(tkn);
  const std::size_t D = dim(), F = static_cast<std::size_t>(config_.d_ff), V = vocab();
  const std::size_t H = static_cast<std::size_t>(config_.heads), Dh = D / H;
  const double* P = params_.data();
  const double eps = config_.layer_norm_eps;
  const double p_drop = dropout_rng ? config_.dropout : 0.0;
  const double keep_scale = p_drop > 0.0 ? 1.0 / (1.0 - p_drop) : 1.0;
  auto make_mask = [&](std::vector<double>& mask, std::size_t n) {
    if (p_drop <= 0.0) {
      mask.clear();
      return;
    }
    mask.resize(n);
    for (auto& m : mask) m = uniform01(*dropout_rng) < p_drop ? 0.0 : keep_scale;
  };

  c.T = static_cast<int>(T);
  c.tokens = tokens;
  c.x0.assign(T * D, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    const double* e = P + layout_.tok_emb + static_cast<std::size_t>(tokens[t]) * D;
    const double* p = P + layout_.pos_emb + t * D;
    for (std::size_t d = 0; d < D; ++d) c.x0[t * D + d] = e[d] + p[d];
  }
  make_mask(c.emb_mask, T * D);
  if (!c.emb_mask.empty())
    for (std::size_t i = 0; i < T * D; ++i) c.x0[i] *= c.emb_mask[i];

  c.layers.resize(layout_.layers.size());
  std::vector<double> x = c.x0;
  const double scale = 1.0 / std::sqrt(static_cast<double>(Dh));
  std::vector<double> tmp(T * std::max(D, F));
  for (std::size_t l = 0; l < layout_.layers.size(); ++l) {
    const auto& o = layout_.layers[l];
    auto& L = c.layers[l];
    L.x_in = x;
    L.ln1.resize(T * D);
    L.ln1_rstd.resize(T);
    kernels::layer_norm(x.data(), P + o.ln1_g, P + o.ln1_b, L.ln1.data(), L.ln1_rstd.data(), T, D, eps);
    L.q.resize(T * D);
    L.k.resize(T * D);
    L.v.resize(T * D);
    kernels::linear(L.ln1.data(), P + o.wq, P + o.bq, L.q.data(), T, D, D);
    kernels::linear(L.ln1.data(), P + o.wk, P + o.bk, L.k.data(), T, D, D);
    kernels::linear(L.ln1.data(), P + o.wv, P + o.bv, L.v.data(), T, D, D);
    L.att.assign(H * T * T, 0.0);
    L.ctx.assign(T * D, 0.0);
    for (std::size_t h = 0; h < H; ++h) {
      for (std::size_t i = 0; i < T; ++i) {
        double* a = L.att.data() + (h * T + i) * T;
        const double* qi = L.q.data() + i * D + h * Dh;
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j <= i; ++j) {
          const double* kj = L.k.data() + j * D + h * Dh;
          double s = 0.0;
          for (std::size_t d = 0; d < Dh; ++d) s += qi[d] * kj[d];
          a[j] = s * scale;
          mx = std::max(mx, a[j]);
        }
        double z = 0.0;
        for (std::size_t j = 0; j <= i; ++j) {
          a[j] = std::exp(a[j] - mx);
          z += a[j];
        }
        double* ci = L.ctx.data() + i * D + h * Dh;
        for (std::size_t j = 0; j <= i; ++j) {
          a[j] /= z;
          const double* vj = L.v.data() + j * D + h * Dh;
          for (std::size_t d = 0; d < Dh; ++d) ci[d] += a[j] * vj[d];
        }
      }
    }
    kernels::linear(L.ctx.data(), P + o.wo, P + o.bo, tmp.data(), T, D, D);
    make_mask(L.attn_out_mask, T * D);
    L.x_mid.resize(T * D);
    for (std::size_t i = 0; i < T * D; ++i)
      L.x_mid[i] = x[i] + (L.attn_out_mask.empty() ? tmp[i] : tmp[i] * L.attn_out_mask[i]);

    L.ln2.resize(T * D);
    L.ln2_rstd.resize(T);
    kernels::layer_norm(L.x_mid.data(), P + o.ln2_g, P + o.ln2_b, L.ln2.data(), L.ln2_rstd.data(), T, D, eps);
    L.ff_pre.resize(T * F);
    L.ff_act.resize(T * F);
    kernels::linear(L.ln2.data(), P + o.w1, P + o.b1, L.ff_pre.data(), T, D, F);
    for (std::size_t i = 0; i < T * F; ++i) L.ff_act[i] = L.ff_pre[i] > 0.0 ? L.ff_pre[i] : 0.0;
    kernels::linear(L.ff_act.data(), P + o.w2, P + o.b2, tmp.data(), T, F, D);
    make_mask(L.ff_out_mask, T * D);
    for (std::size_t i = 0; i < T * D; ++i)
      x[i] = L.x_mid[i] + (L.ff_out_mask.empty() ? tmp[i] : tmp[i] * L.ff_out_mask[i]);
  }
  c.x_final = x;
  c.lnf.resize(T * D);
  c.lnf_rstd.resize(T);
  kernels::layer_norm(x.data(), P + layout_.lnf_g, P + layout_.lnf_b, c.lnf.data(), c.lnf_rstd.data(), T, D, eps);

  c.logp.resize(T * V);
  const double* E = P + layout_.tok_emb;
  for (std::size_t t = 0; t < T; ++t) {
    const double* ht = c.lnf.data() + t * D;
    double* lt = c.logp.data() + t * V;
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t v = 0; v < V; ++v) {
      const double* ev = E + v * D;
      double s = 0.0;
      for (std::size_t d = 0; d < D; ++d) s += ht[d] * ev[d];
      lt[v] = s;
      mx = std::max(mx, s);
    }
    double z = 0.0;
    for (std::size_t v = 0; v < V; ++v) z += std::exp(lt[v] - mx);
    const double lse = mx + std::log(z);
    for (std::size_t v = 0; v < V; ++v) lt[v] -= lse;
  }
}

inline void LanguageModel::backward(const ForwardCache& c, std::span<const double> w, std::vector<double>& grad,
                                    GradMode mode, int row) const {
  const std::size_t T = static_cast<std::size_t>(c.T);
  if (w.size() + 1 != T && !(T == 0 && w.empty())) throw Error("backward: need one weight per predicted position");
  if (grad.size() != params_.size()) grad.assign(params_.size(), 0.0);
  const bool full = mode == GradMode::Full;
  if (!full) check_token(row);
  const std::size_t D = dim(), F = static_cast<std::size_t>(config_.d_ff), V = vocab();
  const std::size_t H = static_cast<std::size_t>(config_.heads), Dh = D / H;
  const double* P = params_.data();
  double* G = grad.data();
  const double* E = P + layout_.tok_emb;
  auto pick = [&](std::size_t off) -> double* { return full ? G + off : nullptr; };

  // Output projection (tied to the embedding matrix).
  std::vector<double> dh(T * D, 0.0);
  std::vector<double> dlog(V);
  const std::size_t urow = full ? 0 : static_cast<std::size_t>(row);
  for (std::size_t t = 0; t + 1 < T; ++t) {
    if (w[t] == 0.0) continue;
    const double* lt = c.logp.data() + t * V;
    for (std::size_t v = 0; v < V; ++v) dlog[v] = w[t] * std::exp(lt[v]);
    dlog[static_cast<std::size_t>(c.tokens[t + 1])] -= w[t];
    const double* ht = c.lnf.data() + t * D;
    double* dht = dh.data() + t * D;
    for (std::size_t v = 0; v < V; ++v) {
      const double g = dlog[v];
      const double* ev = E + v * D;
      for (std::size_t d = 0; d < D; ++d) dht[d] += g * ev[d];
    }
    if (full) {
      for (std::size_t v = 0; v < V; ++v) {
        double* gv = G + layout_.tok_emb + v * D;
        const double g = dlog[v];
        for (std::size_t d = 0; d < D; ++d) gv[d] += g * ht[d];
      }
    } else {
      double* gv = G + layout_.tok_emb + urow * D;
      const double g = dlog[urow];
      for (std::size_t d = 0; d < D; ++d) gv[d] += g * ht[d];
    }
  }

  std::vector<double> dx(T * D, 0.0);
  kernels::layer_norm_backward(c.x_final.data(), P + layout_.lnf_g, c.lnf_rstd.data(), dh.data(), dx.data(),
                               pick(layout_.lnf_g), pick(layout_.lnf_b), T, D);

  const double scale = 1.0 / std::sqrt(static_cast<double>(Dh));
  std::vector<double> dy(T * D), dff(T * F), dln(T * D), dctx(T * D), dq(T * D), dk(T * D), dv(T * D), datt(T);
  for (std::size_t li = layout_.layers.size(); li-- > 0;) {
    const auto& o = layout_.layers[li];
    const auto& L = c.layers[li];

    // Feedforward branch: x = x_mid + W2 relu(W1 ln2(x_mid) + b1) + b2
    for (std::size_t i = 0; i < T * D; ++i) dy[i] = L.ff_out_mask.empty() ? dx[i] : dx[i] * L.ff_out_mask[i];
    std::fill(dff.begin(), dff.end(), 0.0);
    kernels::linear_backward(L.ff_act.data(), P + o.w2, dy.data(), dff.data(), pick(o.w2), pick(o.b2), T, F, D);
    for (std::size_t i = 0; i < T * F; ++i)
      if (L.ff_pre[i] <= 0.0) dff[i] = 0.0;
    std::fill(dln.begin(), dln.end(), 0.0);
    kernels::linear_backward(L.ln2.data(), P + o.w1, dff.data(), dln.data(), pick(o.w1), pick(o.b1), T, D, F);
    kernels::layer_norm_backward(L.x_mid.data(), P + o.ln2_g, L.ln2_rstd.data(), dln.data(), dx.data(),
                                 pick(o.ln2_g), pick(o.ln2_b), T, D);

    // Attention branch: x_mid = x_in + Wo ctx + bo
    for (std::size_t i = 0; i < T * D; ++i) dy[i] = L.attn_out_mask.empty() ? dx[i] : dx[i] * L.attn_out_mask[i];
    std::fill(dctx.begin(), dctx.end(), 0.0);
    kernels::linear_backward(L.ctx.data(), P + o.wo, dy.data(), dctx.data(), pick(o.wo), pick(o.bo), T, D, D);
    std::fill(dq.begin(), dq.end(), 0.0);
    std::fill(dk.begin(), dk.end(), 0.0);
    std::fill(dv.begin(), dv.end(), 0.0);
    for (std::size_t h = 0; h < H; ++h) {
      for (std::size_t i = 0; i < T; ++i) {
        const double* a = L.att.data() + (h * T + i) * T;
        const double* dci = dctx.data() + i * D + h * Dh;
        double dot = 0.0;
        for (std::size_t j = 0; j <= i; ++j) {
          const double* vj = L.v.data() + j * D + h * Dh;
          double* dvj = dv.data() + j * D + h * Dh;
          double s = 0.0;
          for (std::size_t d = 0; d < Dh; ++d) {
            s += dci[d] * vj[d];
            dvj[d] += a[j] * dci[d];
          }
          datt[j] = s;
          dot += a[j] * s;
        }
        const double* qi = L.q.data() + i * D + h * Dh;
        double* dqi = dq.data() + i * D + h * Dh;
        for (std::size_t j = 0; j <= i; ++j) {
          const double ds = a[j] * (datt[j] - dot) * scale;
          if (ds == 0.0) continue;
          const double* kj = L.k.data() + j * D + h * Dh;
          double* dkj = dk.data() + j * D + h * Dh;
          for (std::size_t d = 0; d < Dh; ++d) {
            dqi[d] += ds * kj[d];
            dkj[d] += ds * qi[d];
          }
        }
      }
    }
    std::fill(dln.begin(), dln.end(), 0.0);
    kernels::linear_backward(L.ln1.data(), P + o.wq, dq.data(), dln.data(), pick(o.wq), pick(o.bq), T, D, D);
    kernels::linear_backward(L.ln1.data(), P + o.wk, dk.data(), dln.data(), pick(o.wk), pick(o.bk), T, D, D);
    kernels::linear_backward(L.ln1.data(), P + o.wv, dv.data(), dln.data(), pick(o.wv), pick(o.bv), T, D, D);
    kernels::layer_norm_backward(L.x_in.data(), P + o.ln1_g, L.ln1_rstd.data(), dln.data(), dx.data(),
                                 pick(o.ln1_g), pick(o.ln1_b), T, D);
  }

  // Input embeddings.
  for (std::size_t t = 0; t < T; ++t) {
    const double* dxt = dx.data() + t * D;
    const double* mk = c.emb_mask.empty() ? nullptr : c.emb_mask.data() + t * D;
    const auto tok = static_cast<std::size_t>(c.tokens[t]);
    if (full || tok == urow) {
      double* ge = G + layout_.tok_emb + tok * D;
      for (std::size_t d = 0; d < D; ++d) ge[d] += mk ? dxt[d] * mk[d] : dxt[d];
    }
    if (full) {
      double* gp = G + layout_.pos_emb + t * D;
      for (std::size_t d = 0; d < D; ++d) gp[d] += mk ? dxt[d] * mk[d] : dxt[d];
    }
  }
}

// Checkpoint: "DATIVELM" | u32 version | u64 header length | JSON header | float64 LE parameters.
inline void LanguageModel::save(const std::string& path) const {
  json header;
  header["config"] = config_;
  json tensors = json::array();
  for (const auto& t : layout_.tensors)
    tensors.push_back({{"name", t.name}, {"offset", t.offset}, {"rows", t.rows}, {"cols", t.cols}});
  header["tensors"] = tensors;
  header["dtype"] = "float64-le";
  std::string h = header.dump();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write checkpoint: " + path);
  out.write("DATIVELM", 8);
  std::uint32_t version = 1;
  std::uint64_t hl = h.size(), n = params_.size();
  out.write(reinterpret_cast<const char*>(&version), sizeof(version));
  out.write(reinterpret_cast<const char*>(&hl), sizeof(hl));
  out.write(h.data(), static_cast<std::streamsize>(h.size()));
  out.write(reinterpret_cast<const char*>(&n), sizeof(n));
  out.write(reinterpret_cast<const char*>(params_.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (!out) throw Error("checkpoint write failed: " + path);
}

inline LanguageModel LanguageModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::string(magic, 8) != "DATIVELM") throw Error("not a dative checkpoint: " + path);
  std::uint32_t version = 0;
  std::uint64_t hl = 0, n = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  if (version != 1) throw Error("unsupported checkpoint version");
  in.read(reinterpret_cast<char*>(&hl), sizeof(hl));
  std::string h(hl, '\0');
  in.read(h.data(), static_cast<std::streamsize>(hl));
  json header = json::parse(h);
  LanguageModel m(header.at("config").get<ModelConfig>());
  in.read(reinterpret_cast<char*>(&n), sizeof(n));
  if (n != m.params_.size()) throw Error("checkpoint parameter count does not match its config");
  in.read(reinterpret_cast<char*>(m.params_.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw Error("truncated checkpoint: " + path);
  return m;
}

}  // namespace dative
