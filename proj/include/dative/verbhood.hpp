#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "dative/conllu.hpp"
#include "dative/scoring.hpp"

namespace dative {

inline const std::string kSlotMarker = "___";

enum class SlotClass { Verb, NonVerb };

inline std::string to_string(SlotClass c) { return c == SlotClass::Verb ? "verb" : "nonverb"; }

struct VerbhoodItem {
  std::string text;  // contains kSlotMarker exactly once
  int slot_index = 0;  // 0-based word index of the slot
  SlotClass cls = SlotClass::Verb;
};

struct VerbhoodSet {
  std::vector<VerbhoodItem> verb_expecting;
  std::vector<VerbhoodItem> nonverb_expecting;

  void validate(std::size_t expected_per_class = 0) const {
    for (const auto* items : {&verb_expecting, &nonverb_expecting})
      for (const auto& it : *items) {
        if (count_word(it.text, kSlotMarker) != 1)
          throw Error("verbhood item must contain exactly one slot marker: " + it.text);
        auto words = split_whitespace(it.text);
        if (it.slot_index < 0 || static_cast<std::size_t>(it.slot_index) >= words.size() ||
            words[static_cast<std::size_t>(it.slot_index)] != kSlotMarker)
          throw Error("verbhood slot index does not point at the marker: " + it.text);
      }
    if (verb_expecting.empty() || nonverb_expecting.empty()) throw Error("verbhood set needs both classes");
    if (expected_per_class &&
        (verb_expecting.size() != expected_per_class || nonverb_expecting.size() != expected_per_class))
      throw Error("verbhood set must have exactly " + std::to_string(expected_per_class) + " items per class");
  }
};

inline std::string fill_slot(const std::string& text, const std::string& surface) {
  auto words = split_whitespace(text);
  for (auto& w : words)
    if (w == kSlotMarker) w = surface;
  return join(words, " ");
}

namespace detail {
inline VerbhoodItem slot_item(const ParsedUtterance& u, int token_id, SlotClass cls) {
  std::vector<std::string> words;
  for (const auto& t : u.tokens) words.push_back(t.id == token_id ? kSlotMarker : t.form);
  for (auto& w : words)
    for (auto& ch : w)
      if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
  return {join(words, " "), token_id - 1, cls};
}
}  // namespace detail

// Every token tagged VBD is a verb-expecting candidate.
inline std::vector<VerbhoodItem> verb_candidates(const std::vector<ParsedUtterance>& parses) {
  std::vector<VerbhoodItem> out;
  for (const auto& u : parses)
    for (const auto& t : u.tokens)
      if (t.xpos == "VBD") out.push_back(detail::slot_item(u, t.id, SlotClass::Verb));
  return out;
}

// Curated ids have the form "<sent_id>:<token_id>" with 1-based token ids.
inline std::vector<VerbhoodItem> nonverb_candidates(const std::vector<ParsedUtterance>& parses,
                                                    const std::vector<std::string>& curated_ids) {
  std::vector<VerbhoodItem> out;
  for (const auto& cid : curated_ids) {
    auto colon = cid.rfind(':');
    if (colon == std::string::npos) throw Error("malformed non-verb slot id '" + cid + "'");
    std::string sid = cid.substr(0, colon);
    int tid = static_cast<int>(parse_int(cid.substr(colon + 1)));
    auto it = std::find_if(parses.begin(), parses.end(), [&](const ParsedUtterance& u) { return u.id == sid; });
    if (it == parses.end()) throw Error("non-verb slot id refers to unknown utterance '" + sid + "'");
    if (tid < 1 || tid > static_cast<int>(it->tokens.size()))
      throw Error("non-verb slot id refers to a missing token: " + cid);
    if (it->at(tid).xpos.rfind("VB", 0) == 0) throw Error("curated non-verb slot is tagged as a verb: " + cid);
    out.push_back(detail::slot_item(*it, tid, SlotClass::NonVerb));
  }
  return out;
}

// Samples n items per class with a seeded shuffle.
inline VerbhoodSet build_verbhood_set(const std::vector<ParsedUtterance>& parses,
                                      const std::vector<std::string>& curated_nonverb_ids, std::size_t n_per_class,
                                      std::uint64_t seed) {
  auto verbs = verb_candidates(parses);
  auto nonverbs = nonverb_candidates(parses, curated_nonverb_ids);
  if (verbs.size() < n_per_class)
    throw Error("only " + std::to_string(verbs.size()) + " verb-expecting candidates, need " +
                std::to_string(n_per_class));
  if (nonverbs.size() < n_per_class)
    throw Error("only " + std::to_string(nonverbs.size()) + " non-verb-expecting candidates, need " +
                std::to_string(n_per_class));
  Rng rv(derive_seed(seed, "verbhood-verb")), rn(derive_seed(seed, "verbhood-nonverb"));
  deterministic_shuffle(verbs, rv);
  deterministic_shuffle(nonverbs, rn);
  verbs.resize(n_per_class);
  nonverbs.resize(n_per_class);
  VerbhoodSet s{std::move(verbs), std::move(nonverbs)};
  s.validate(n_per_class);
  return s;
}

inline std::vector<json> verbhood_to_jsonl(const VerbhoodSet& s) {
  std::vector<json> rows;
  for (const auto* items : {&s.verb_expecting, &s.nonverb_expecting})
    for (const auto& it : *items)
      rows.push_back({{"text", it.text}, {"slot_index", it.slot_index}, {"class", to_string(it.cls)}});
  return rows;
}

inline VerbhoodSet verbhood_from_jsonl(const std::vector<json>& rows) {
  VerbhoodSet s;
  for (const auto& r : rows) {
    VerbhoodItem it{r.at("text").get<std::string>(), r.at("slot_index").get<int>(), SlotClass::Verb};
    const auto cls = r.at("class").get<std::string>();
    if (cls == "verb") {
      s.verb_expecting.push_back(it);
    } else if (cls == "nonverb") {
      it.cls = SlotClass::NonVerb;
      s.nonverb_expecting.push_back(it);
    } else {
      throw Error("unknown verbhood class '" + cls + "'");
    }
  }
  s.validate();
  return s;
}

inline void save_verbhood_set(const std::string& path, const VerbhoodSet& s) { write_jsonl(path, verbhood_to_jsonl(s)); }
inline VerbhoodSet load_verbhood_set(const std::string& path) { return verbhood_from_jsonl(read_jsonl(path)); }

enum class VerbhoodMeasure { MeanPerToken, SentenceTotal };
enum class VerbhoodPairing { IndexPaired, AllPairs };

inline double verbhood_delta_from_scores(const std::vector<double>& verb, const std::vector<double>& nonverb) {
  return mean_of(verb) - mean_of(nonverb);
}

// Strict comparison: ties count as failures.
inline double verbhood_accuracy_from_scores(const std::vector<double>& verb, const std::vector<double>& nonverb,
                                            VerbhoodPairing pairing = VerbhoodPairing::IndexPaired,
                                            std::uint64_t seed = 0) {
  if (verb.empty() || nonverb.empty()) throw Error("verbhood accuracy on an empty set");
  if (pairing == VerbhoodPairing::AllPairs) {
    std::size_t wins = 0;
    for (double v : verb)
      for (double n : nonverb) wins += v > n;
    return static_cast<double>(wins) / static_cast<double>(verb.size() * nonverb.size());
  }
  const std::size_t n = std::min(verb.size(), nonverb.size());
  std::vector<std::size_t> pv(verb.size()), pn(nonverb.size());
  for (std::size_t i = 0; i < pv.size(); ++i) pv[i] = i;
  for (std::size_t i = 0; i < pn.size(); ++i) pn[i] = i;
  Rng r1(derive_seed(seed, "pair-verb")), r2(derive_seed(seed, "pair-nonverb"));
  deterministic_shuffle(pv, r1);
  deterministic_shuffle(pn, r2);
  std::size_t wins = 0;
  for (std::size_t i = 0; i < n; ++i) wins += verb[pv[i]] > nonverb[pn[i]];
  return static_cast<double>(wins) / static_cast<double>(n);
}

// Pre-encoded verbhood set with the slot filled by the novel surface.
class VerbhoodEvaluator {
 public:
  VerbhoodEvaluator(const SubwordTokenizer& tok, const VerbhoodSet& vset, const ModelConfig& cfg,
                    VerbhoodMeasure measure = VerbhoodMeasure::MeanPerToken)
      : measure_(measure) {
    if (tok.novel_surface().empty()) throw Error("verbhood evaluation needs a bound novel surface");
    std::vector<std::string> v, n;
    for (const auto& it : vset.verb_expecting) v.push_back(fill_slot(it.text, tok.novel_surface()));
    for (const auto& it : vset.nonverb_expecting) n.push_back(fill_slot(it.text, tok.novel_surface()));
    verb_ = EncodedSet(tok, v, cfg);
    nonverb_ = EncodedSet(tok, n, cfg);
  }

  std::vector<double> verb_scores(const LanguageModel& m) const { return scores(verb_, m); }
  std::vector<double> nonverb_scores(const LanguageModel& m) const { return scores(nonverb_, m); }

  double delta(const LanguageModel& m) const { return verbhood_delta_from_scores(verb_scores(m), nonverb_scores(m)); }

  double accuracy(const LanguageModel& m, VerbhoodPairing pairing = VerbhoodPairing::IndexPaired,
                  std::uint64_t seed = 0) const {
    return verbhood_accuracy_from_scores(verb_scores(m), nonverb_scores(m), pairing, seed);
  }

 private:
  std::vector<double> scores(const EncodedSet& s, const LanguageModel& m) const {
    return measure_ == VerbhoodMeasure::MeanPerToken ? s.mean_scores(m) : s.total_scores(m);
  }
  VerbhoodMeasure measure_;
  EncodedSet verb_, nonverb_;
};

}  // namespace dative
