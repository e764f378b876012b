#pragma once

#include <string>
#include <vector>

#include "dative/model.hpp"
#include "dative/tokenizer.hpp"

namespace dative {

// Log probabilities (nats) of every scored position of one sentence.
struct SentenceScore {
  std::vector<double> per_token_logprobs;
  double total = 0.0;
  double mean_per_token = 0.0;
  int n_scored = 0;
};

inline SentenceScore make_score(std::vector<double> lps) {
  SentenceScore s;
  s.per_token_logprobs = std::move(lps);
  s.n_scored = static_cast<int>(s.per_token_logprobs.size());
  for (double v : s.per_token_logprobs) s.total += v;
  // Shifted mean: exact when every entry is equal, so uniform scores tie exactly.
  if (s.n_scored) {
    const double x0 = s.per_token_logprobs[0];
    double dev = 0.0;
    for (double v : s.per_token_logprobs) dev += v - x0;
    s.mean_per_token = x0 + dev / s.n_scored;
  }
  return s;
}

// Truncates to the model context, keeping the leading tokens. Returns true if truncated.
inline bool fit_to_context(std::vector<TokenId>& ids, const ModelConfig& cfg) {
  if (ids.size() <= static_cast<std::size_t>(cfg.max_seq_len)) return false;
  ids.resize(static_cast<std::size_t>(cfg.max_seq_len));
  return true;
}

// Scores an id sequence that already carries its boundary tokens; position 0 is context only.
inline SentenceScore score_ids(const LanguageModel& model, const std::vector<TokenId>& ids) {
  if (ids.size() < 2) throw Error("score: need at least one scored token");
  ForwardCache cache;
  model.forward(ids, cache);
  return make_score(model.target_logprobs(cache));
}

inline SentenceScore score_sentence(const LanguageModel& model, const SubwordTokenizer& tok, std::string_view text) {
  if (split_whitespace(text).empty()) throw Error("score_sentence: empty text");
  auto ids = tok.encode(text);
  if (fit_to_context(ids, model.config()))
    log_warning("sentence truncated to " + std::to_string(model.config().max_seq_len) + " tokens for scoring");
  return score_ids(model, ids);
}

inline double mean_of(const std::vector<double>& v) {
  if (v.empty()) throw Error("mean of empty list");
  double dev = 0.0;
  for (double x : v) dev += x - v[0];
  return v[0] + dev / static_cast<double>(v.size());
}

// Arithmetic mean of per-sentence mean-per-token log probabilities.
inline double mean_logprob_per_token(const LanguageModel& model, const SubwordTokenizer& tok,
                                     const std::vector<std::string>& texts) {
  if (texts.empty()) throw Error("mean_logprob_per_token: empty sentence list");
  std::vector<double> means;
  for (const auto& t : texts) means.push_back(score_sentence(model, tok, t).mean_per_token);
  return mean_of(means);
}

// Pre-encoded sentence list, reused across many evaluations of a changing model.
class EncodedSet {
 public:
  EncodedSet() = default;
  EncodedSet(const SubwordTokenizer& tok, const std::vector<std::string>& texts, const ModelConfig& cfg) {
    for (const auto& t : texts) {
      if (split_whitespace(t).empty()) throw Error("empty sentence in evaluation set");
      auto ids = tok.encode(t);
      if (fit_to_context(ids, cfg)) log_warning("evaluation sentence truncated: " + t);
      ids_.push_back(std::move(ids));
    }
  }
  std::size_t size() const { return ids_.size(); }
  const std::vector<TokenId>& operator[](std::size_t i) const { return ids_[i]; }

  std::vector<double> mean_scores(const LanguageModel& m) const {
    std::vector<double> out;
    out.reserve(ids_.size());
    for (const auto& ids : ids_) out.push_back(score_ids(m, ids).mean_per_token);
    return out;
  }
  std::vector<double> total_scores(const LanguageModel& m) const {
    std::vector<double> out;
    out.reserve(ids_.size());
    for (const auto& ids : ids_) out.push_back(score_ids(m, ids).total);
    return out;
  }

 private:
  std::vector<std::vector<TokenId>> ids_;
};


}  // namespace dative
