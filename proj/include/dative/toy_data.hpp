#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "dative/conllu.hpp"
#include "dative/stimuli.hpp"

// Synthetic child-directed-style corpus with gold parses, used for smoke-scale runs and tests.
// Single-construction dative verbs only ever follow "mommy"/"daddy" and precede "the", so the
// shipped known-verb pools (other agents, "a"/"some" themes, bare recipients) satisfy the bigram constraints.

namespace dative {

struct ToyDataset {
  std::vector<ParsedUtterance> train, validation, test;
  std::vector<std::string> nonverb_ids;  // curated non-verb slots in validation+test, "<sent_id>:<token_id>"

  static std::vector<std::string> texts(const std::vector<ParsedUtterance>& ps) {
    std::vector<std::string> out;
    out.reserve(ps.size());
    for (const auto& p : ps) out.push_back(p.text);
    return out;
  }
  std::vector<ParsedUtterance> heldout() const {
    auto out = validation;
    out.insert(out.end(), test.begin(), test.end());
    return out;
  }
};

namespace toy {

struct Word {
  std::string form, lemma, upos, xpos;
};

struct Phrase {
  std::vector<Word> words;
  std::size_t head = 0;
  std::string text() const {
    std::vector<std::string> f;
    for (const auto& w : words) f.push_back(w.form);
    return join(f, " ");
  }
};

inline Phrase pron(const std::string& w) { return {{{w, w, "PRON", "PRP"}}, 0}; }
inline Phrase name(const std::string& w) { return {{{w, w, "PROPN", "NNP"}}, 0}; }
inline Phrase nom(const std::string& det, const std::string& noun, const std::string& adj = "") {
  Phrase p;
  p.words.push_back({det, det, "DET", "DT"});
  if (!adj.empty()) p.words.push_back({adj, adj, "ADJ", "JJ"});
  p.words.push_back({noun, noun, "NOUN", "NN"});
  p.head = p.words.size() - 1;
  return p;
}

// Tokens reference heads by symbolic key; keys are resolved to ids in finish().
class Sentence {
 public:
  std::string w(const Word& x, const std::string& head_key, const std::string& rel, std::string key = "") {
    if (key.empty()) key = "#" + std::to_string(items_.size());
    items_.push_back({x, key, head_key, rel});
    return key;
  }
  std::string w(const std::string& form, const std::string& lemma, const std::string& upos, const std::string& xpos,
                const std::string& head_key, const std::string& rel, std::string key = "") {
    return w(Word{form, lemma, upos, xpos}, head_key, rel, std::move(key));
  }
  std::string p(const Phrase& ph, const std::string& head_key, const std::string& rel) {
    const std::string hk = "#np" + std::to_string(items_.size() + ph.head);
    for (std::size_t i = 0; i < ph.words.size(); ++i) {
      const auto& x = ph.words[i];
      if (i == ph.head) w(x, head_key, rel, hk);
      else w(x, hk, x.upos == "ADJ" ? "amod" : x.upos == "DET" ? "det" : "compound");
    }
    return hk;
  }
  int id_of(const std::string& key) const {
    for (std::size_t i = 0; i < items_.size(); ++i)
      if (items_[i].key == key) return static_cast<int>(i) + 1;
    throw Error("toy sentence: unknown key " + key);
  }
  ParsedUtterance finish(const std::string& id) const {
    ParsedUtterance u;
    u.id = id;
    for (std::size_t i = 0; i < items_.size(); ++i) {
      const auto& it = items_[i];
      ConllToken t;
      t.id = static_cast<int>(i) + 1;
      t.form = it.word.form;
      t.lemma = it.word.lemma;
      t.upos = it.word.upos;
      t.xpos = it.word.xpos;
      t.head = it.head_key.empty() ? 0 : id_of(it.head_key);
      t.deprel = it.head_key.empty() ? "ROOT" : it.rel;
      u.tokens.push_back(std::move(t));
    }
    u.text = u.surface();
    u.validate();
    return u;
  }

 private:
  struct Item {
    Word word;
    std::string key, head_key, rel;
  };
  std::vector<Item> items_;
};

struct VerbForm {
  std::string lemma, past;
};

inline const std::vector<std::string>& subjects() {
  static const std::vector<std::string> v{"you", "we", "they", "she", "he", "i", "sam", "lucy", "mommy", "daddy", "nonna"};
  return v;
}
inline const std::vector<std::string>& nouns() {
  static const std::vector<std::string> v{"ball", "cookie", "juice", "book", "toy", "milk",   "spoon", "cup",
                                          "truck", "apple", "hat",   "shoe", "car", "box",    "block", "cake",
                                          "story", "letter", "picture", "train", "bowl", "blanket", "crayon", "sock"};
  return v;
}
inline const std::vector<std::string>& animate_nouns() {
  static const std::vector<std::string> v{"dog", "cat", "baby", "doggy", "bunny", "bird", "duck", "bear", "girl", "boy", "kitty", "puppy"};
  return v;
}
inline const std::vector<std::string>& adjectives() {
  static const std::vector<std::string> v{"big", "little", "red", "blue", "nice", "yellow", "funny", "new"};
  return v;
}
inline const std::vector<std::string>& recipient_words() {
  static const std::vector<std::string> v{"me", "him", "her", "us", "them", "papa", "grandma", "nonna", "elmo", "bert"};
  return v;
}
inline const std::vector<VerbForm>& transitive() {
  static const std::vector<VerbForm> v{{"eat", "ate"},   {"find", "found"}, {"see", "saw"},     {"take", "took"},
                                       {"get", "got"},   {"make", "made"},  {"break", "broke"}, {"like", "liked"},
                                       {"hold", "held"}, {"wash", "washed"}, {"open", "opened"}, {"fix", "fixed"},
                                       {"hug", "hugged"}, {"push", "pushed"}, {"want", "wanted"}};
  return v;
}
inline const std::vector<VerbForm>& intransitive() {
  static const std::vector<VerbForm> v{{"run", "ran"},     {"fall", "fell"},     {"sleep", "slept"}, {"jump", "jumped"},
                                       {"cry", "cried"},   {"laugh", "laughed"}, {"sit", "sat"},     {"walk", "walked"}};
  return v;
}
inline const std::vector<VerbForm>& alternating() {
  static const std::vector<VerbForm> v{{"give", "gave"},   {"send", "sent"},    {"hand", "handed"}, {"read", "read"},
                                       {"show", "showed"}, {"throw", "threw"},  {"pass", "passed"}, {"bring", "brought"},
                                       {"tell", "told"},   {"toss", "tossed"},  {"sell", "sold"},   {"offer", "offered"}};
  return v;
}

inline const std::string& pick(const std::vector<std::string>& v, Rng& rng) { return v[rng() % v.size()]; }

inline Phrase subject_phrase(const std::string& s) {
  static const std::set<std::string> pr{"you", "we", "they", "she", "he", "i"};
  return pr.count(s) ? pron(s) : name(s);
}

inline Phrase object_phrase(Rng& rng) {
  static const std::vector<std::string> dets{"the", "a", "my", "your", "that", "some"};
  const auto& det = pick(dets, rng);
  const std::string adj = rng() % 4 == 0 ? pick(adjectives(), rng) : "";
  return nom(det, pick(nouns(), rng), adj);
}

inline Phrase recipient_phrase(Rng& rng) {
  if (rng() % 2 == 0) {
    const auto& r = pick(recipient_words(), rng);
    static const std::set<std::string> pr{"me", "him", "her", "us", "them"};
    return pr.count(r) ? pron(r) : name(r);
  }
  const char* det = rng() % 2 ? "the" : "a";
  return nom(det, pick(animate_nouns(), rng));
}

}  // namespace toy

struct ToyDataConfig {
  std::size_t train_words = 50000;
  std::size_t heldout_utterances = 600;  // split evenly into validation and test
  std::uint64_t seed = 0;
  std::vector<KnownVerb> single_construction;  // NABA/NANA verbs, placed only in their observed construction
  std::vector<std::string> extra_phrases;      // e.g. lexicon surfaces, mentioned in "do you see ..." frames
};

inline ToyDataset make_toy_dataset(const ToyDataConfig& cfg) {
  using namespace toy;
  Rng rng(derive_seed(cfg.seed, "toy-data"));
  ToyDataset ds;
  std::size_t extra_i = 0;

  // For non-verb frames, *nonverb_tid receives the token id of the curated slot.
  auto make = [&](const std::string& id, int* nonverb_tid) -> ParsedUtterance {
    Sentence s;
    std::string nvk;
    const auto r = rng() % 100;
    if (r < 22) {  // transitive past
      const auto& v = transitive()[rng() % transitive().size()];
      s.p(subject_phrase(pick(subjects(), rng)), "V", "nsubj");
      s.w(v.past, v.lemma, "VERB", "VBD", "", "ROOT", "V");
      s.p(object_phrase(rng), "V", "dobj");
      s.w(".", ".", "PUNCT", ".", "V", "punct");
    } else if (r < 30) {  // intransitive past
      const auto& v = intransitive()[rng() % intransitive().size()];
      s.p(subject_phrase(pick(subjects(), rng)), "V", "nsubj");
      s.w(v.past, v.lemma, "VERB", "VBD", "", "ROOT", "V");
      if (rng() % 2) {
        s.w("to", "to", "ADP", "IN", "V", "prep", "TO");
        s.p(nom("the", rng() % 2 ? "park" : "store"), "TO", "pobj");
      }
      s.w(".", ".", "PUNCT", ".", "V", "punct");
    } else if (r < 44) {  // alternating dative, either construction
      const auto& v = alternating()[rng() % alternating().size()];
      s.p(subject_phrase(pick(subjects(), rng)), "V", "nsubj");
      s.w(v.past, v.lemma, "VERB", "VBD", "", "ROOT", "V");
      if (rng() % 2) {
        s.p(recipient_phrase(rng), "V", "dative");
        s.p(object_phrase(rng), "V", "dobj");
      } else {
        s.p(object_phrase(rng), "V", "dobj");
        s.w("to", "to", "ADP", "IN", "V", "prep", "TO");
        s.p(recipient_phrase(rng), "TO", "pobj");
      }
      s.w(".", ".", "PUNCT", ".", "V", "punct");
    } else if (r < 50 && !cfg.single_construction.empty()) {
      const auto& v = cfg.single_construction[rng() % cfg.single_construction.size()];
      s.p(name(rng() % 2 ? "mommy" : "daddy"), "V", "nsubj");
      s.w(v.past, v.lemma, "VERB", "VBD", "", "ROOT", "V");
      if (v.observed == Construction::DO) {
        s.p(nom("the", pick(animate_nouns(), rng)), "V", "dative");
        s.p(nom("the", pick(nouns(), rng)), "V", "dobj");
      } else {
        s.p(nom("the", pick(nouns(), rng)), "V", "dobj");
        s.w("to", "to", "ADP", "IN", "V", "prep", "TO");
        s.p(nom("the", pick(animate_nouns(), rng)), "TO", "pobj");
      }
      s.w(".", ".", "PUNCT", ".", "V", "punct");
    } else if (r < 70) {  // non-verb frames
      switch (rng() % 5) {
        case 0: {
          s.w("where", "where", "ADV", "WRB", "IS", "advmod");
          s.w("is", "be", "AUX", "VBZ", "", "ROOT", "IS");
          nvk = s.p(nom("the", pick(rng() % 3 ? nouns() : animate_nouns(), rng)), "IS", "nsubj");
          s.w("?", "?", "PUNCT", ".", "IS", "punct");
          break;
        }
        case 1: {
          s.w("that", "that", "PRON", "DT", "IS", "nsubj");
          s.w("is", "be", "AUX", "VBZ", "", "ROOT", "IS");
          const auto& noun = pick(nouns(), rng);
          nvk = s.p(nom("a", noun, pick(adjectives(), rng)), "IS", "attr");
          s.w(".", ".", "PUNCT", ".", "IS", "punct");
          break;
        }
        case 2: {
          s.w("look", "look", "VERB", "VB", "", "ROOT", "L");
          s.w("at", "at", "ADP", "IN", "L", "prep", "AT");
          nvk = s.p(nom("the", pick(animate_nouns(), rng)), "AT", "pobj");
          s.w(".", ".", "PUNCT", ".", "L", "punct");
          break;
        }
        case 3: {
          s.w("do", "do", "AUX", "VBP", "W", "aux");
          s.w("you", "you", "PRON", "PRP", "W", "nsubj");
          s.w("want", "want", "VERB", "VB", "", "ROOT", "W");
          nvk = s.p(nom("some", pick(nouns(), rng)), "W", "dobj");
          s.w("?", "?", "PUNCT", ".", "W", "punct");
          break;
        }
        default: {
          s.w("it", "it", "PRON", "PRP", "IS", "nsubj");
          s.w("is", "be", "AUX", "VBZ", "", "ROOT", "IS");
          const auto& adj = pick(adjectives(), rng);
          nvk = s.w(adj, adj, "ADJ", "JJ", "IS", "acomp");
          s.w(".", ".", "PUNCT", ".", "IS", "punct");
          break;
        }
      }
    } else if (r < 80) {  // imperatives and present-tense questions
      const auto& v = alternating()[rng() % alternating().size()];
      if (rng() % 2) {
        s.w(v.lemma, v.lemma, "VERB", "VB", "", "ROOT", "V");
        s.p(recipient_phrase(rng), "V", "dative");
        s.p(object_phrase(rng), "V", "dobj");
        s.w(".", ".", "PUNCT", ".", "V", "punct");
      } else {
        s.w("can", "can", "AUX", "MD", "V", "aux");
        s.w("you", "you", "PRON", "PRP", "V", "nsubj");
        s.w(v.lemma, v.lemma, "VERB", "VB", "", "ROOT", "V");
        s.p(object_phrase(rng), "V", "dobj");
        s.w("to", "to", "ADP", "IN", "V", "prep", "TO");
        s.p(recipient_phrase(rng), "TO", "pobj");
        s.w("?", "?", "PUNCT", ".", "V", "punct");
      }
    } else {  // discourse frames of the kind used in preambles
      auto mention = [&]() -> Phrase {
        if (!cfg.extra_phrases.empty() && rng() % 2) {
          const auto& e = cfg.extra_phrases[extra_i++ % cfg.extra_phrases.size()];
          auto ws = split_whitespace(e);
          Phrase p;
          for (const auto& x : ws) p.words.push_back({x, x, ws.size() == 1 ? "PRON" : "NOUN", "NN"});
          p.head = p.words.size() - 1;
          for (std::size_t i = 0; i + 1 < p.words.size(); ++i) p.words[i].upos = "DET";
          return p;
        }
        return rng() % 2 ? recipient_phrase(rng) : object_phrase(rng);
      };
      switch (rng() % 4) {
        case 0:
          s.w("do", "do", "AUX", "VBP", "SEE", "aux");
          s.w("you", "you", "PRON", "PRP", "SEE", "nsubj");
          s.w("see", "see", "VERB", "VB", "", "ROOT", "SEE");
          s.p(mention(), "SEE", "dobj");
          if (rng() % 2) {
            s.w("and", "and", "CCONJ", "CC", "SEE", "cc");
            s.p(mention(), "SEE", "conj");
          }
          s.w("?", "?", "PUNCT", ".", "SEE", "punct");
          break;
        case 1:
          s.w("look", "look", "VERB", "VB", "", "ROOT", "L");
          s.w(rng() % 2 ? "it's" : "there's", "be", "AUX", "VBZ", "L", "ccomp", "IS");
          s.p(mention(), "IS", "attr");
          s.w(".", ".", "PUNCT", ".", "L", "punct");
          break;
        case 2:
          s.p(subject_phrase(pick(subjects(), rng)), "WAS", "nsubj");
          s.w("was", "be", "AUX", "VBD", "", "ROOT", "WAS");
          s.w("with", "with", "ADP", "IN", "WAS", "prep", "WITH");
          s.p(mention(), "WITH", "pobj");
          s.w(".", ".", "PUNCT", ".", "WAS", "punct");
          break;
        default:
          s.w("who", "who", "PRON", "WP", "IS", "nsubj");
          s.w("is", "be", "AUX", "VBZ", "", "ROOT", "IS");
          s.w("someone", "someone", "PRON", "NN", "IS", "attr");
          s.w("?", "?", "PUNCT", ".", "IS", "punct");
          break;
      }
    }
    auto u = s.finish(id);
    if (!nvk.empty()) *nonverb_tid = s.id_of(nvk);
    return u;
  };

  std::size_t words = 0, n = 0;
  while (words < cfg.train_words) {
    int nv = 0;
    auto u = make("train-" + std::to_string(++n), &nv);
    words += u.tokens.size();
    ds.train.push_back(std::move(u));
  }
  for (std::size_t i = 0; i < cfg.heldout_utterances; ++i) {
    const bool valid = i < cfg.heldout_utterances / 2;
    int nv = 0;
    auto u = make((valid ? "valid-" : "test-") + std::to_string(i + 1), &nv);
    if (nv > 0) ds.nonverb_ids.push_back(u.id + ":" + std::to_string(nv));
    (valid ? ds.validation : ds.test).push_back(std::move(u));
  }
  return ds;
}

}  // namespace dative
