#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dative/conllu.hpp"
#include "dative/stimuli.hpp"

namespace dative {

struct TokenSpan {
  int start = 0, end = 0;  // 1-based, inclusive
  bool operator==(const TokenSpan&) const = default;
};

struct DativeInstance {
  std::string utterance_id;
  std::string lemma;
  Construction construction = Construction::DO;
  int verb_index = 0;  // 1-based token id
  TokenSpan theme, recipient;
  std::string text;

  std::string id() const { return utterance_id + ":" + std::to_string(verb_index) + ":" + to_string(construction); }
  bool operator==(const DativeInstance&) const = default;
};

namespace detail {

inline std::string lower(std::string s) {
  for (auto& ch : s)
    if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
  return s;
}

inline bool is_nominal(const ConllToken& t) { return t.upos == "NOUN" || t.upos == "PROPN" || t.upos == "PRON"; }
inline bool is_iobj(const std::string& r) { return r == "iobj" || r == "dative"; }
inline bool is_dobj(const std::string& r) { return r == "dobj" || r == "obj"; }

inline void check_heads(const ParsedUtterance& p) {
  const int n = static_cast<int>(p.tokens.size());
  for (int i = 0; i < n; ++i) {
    const auto& t = p.tokens[static_cast<std::size_t>(i)];
    if (t.id != i + 1 || t.head < 0 || t.head > n)
      throw Error("utterance " + p.id + ": malformed head index at token " + std::to_string(i + 1));
  }
}

inline std::vector<std::vector<int>> children(const ParsedUtterance& p) {
  std::vector<std::vector<int>> ch(p.tokens.size() + 1);
  for (const auto& t : p.tokens) ch[static_cast<std::size_t>(t.head)].push_back(t.id);
  return ch;
}

// Smallest and largest token id in the dependency subtree of `head`.
inline TokenSpan subtree_span(const std::vector<std::vector<int>>& ch, int head) {
  TokenSpan s{head, head};
  std::vector<int> stack{head};
  std::set<int> seen;
  while (!stack.empty()) {
    int x = stack.back();
    stack.pop_back();
    if (!seen.insert(x).second) continue;
    s.start = std::min(s.start, x);
    s.end = std::max(s.end, x);
    for (int c : ch[static_cast<std::size_t>(x)]) stack.push_back(c);
  }
  return s;
}

inline bool is_dative_verb(const ConllToken& t, const std::set<std::string>& lemmas) {
  return (t.upos == "VERB" || t.xpos.rfind("VB", 0) == 0) && lemmas.count(lower(t.lemma)) > 0;
}

}  // namespace detail

// "to" headed by a dative verb, with a nominal pobj, and a separate nominal dobj of the same verb.
inline std::vector<DativeInstance> detect_pp(const ParsedUtterance& p, const std::set<std::string>& dative_lemmas) {
  detail::check_heads(p);
  std::vector<DativeInstance> out;
  const auto ch = detail::children(p);
  for (const auto& to : p.tokens) {
    if (detail::lower(to.form) != "to" || to.head == 0) continue;
    const auto& verb = p.at(to.head);
    if (!detail::is_dative_verb(verb, dative_lemmas)) continue;
    const ConllToken* pobj = nullptr;
    for (int c : ch[static_cast<std::size_t>(to.id)])
      if (p.at(c).deprel == "pobj" && detail::is_nominal(p.at(c))) {
        pobj = &p.at(c);
        break;
      }
    if (!pobj) continue;
    const ConllToken* dobj = nullptr;
    for (int c : ch[static_cast<std::size_t>(verb.id)])
      if (detail::is_dobj(p.at(c).deprel) && detail::is_nominal(p.at(c)) && c != pobj->id) {
        dobj = &p.at(c);
        break;
      }
    if (!dobj) continue;
    DativeInstance d;
    d.utterance_id = p.id;
    d.lemma = detail::lower(verb.lemma);
    d.construction = Construction::PP;
    d.verb_index = verb.id;
    d.theme = detail::subtree_span(ch, dobj->id);
    d.recipient = detail::subtree_span(ch, pobj->id);
    if (d.theme.end >= to.id) continue;
    d.text = p.surface();
    out.push_back(std::move(d));
  }
  return out;
}

// A dative verb with a nominal iobj/dative and a distinct nominal dobj to its right, recipient first.
inline std::vector<DativeInstance> detect_do(const ParsedUtterance& p, const std::set<std::string>& dative_lemmas) {
  detail::check_heads(p);
  std::vector<DativeInstance> out;
  const auto ch = detail::children(p);
  for (const auto& verb : p.tokens) {
    if (!detail::is_dative_verb(verb, dative_lemmas)) continue;
    const ConllToken *iobj = nullptr, *dobj = nullptr;
    for (int c : ch[static_cast<std::size_t>(verb.id)]) {
      const auto& t = p.at(c);
      if (!detail::is_nominal(t)) continue;
      if (!iobj && detail::is_iobj(t.deprel)) iobj = &t;
      else if (!dobj && detail::is_dobj(t.deprel) && t.id > verb.id) dobj = &t;
    }
    if (!iobj || !dobj || iobj->id == dobj->id) continue;
    DativeInstance d;
    d.utterance_id = p.id;
    d.lemma = detail::lower(verb.lemma);
    d.construction = Construction::DO;
    d.verb_index = verb.id;
    d.theme = detail::subtree_span(ch, dobj->id);
    d.recipient = detail::subtree_span(ch, iobj->id);
    if (d.recipient.end >= d.theme.start) continue;
    d.text = p.surface();
    out.push_back(std::move(d));
  }
  return out;
}

inline std::vector<DativeInstance> detect_datives(const std::vector<ParsedUtterance>& parses,
                                                  const std::set<std::string>& dative_lemmas) {
  std::vector<DativeInstance> out;
  for (const auto& p : parses) {
    auto d = detect_do(p, dative_lemmas);
    auto q = detect_pp(p, dative_lemmas);
    out.insert(out.end(), d.begin(), d.end());
    out.insert(out.end(), q.begin(), q.end());
  }
  return out;
}

inline std::string span_text(const std::string& text, const TokenSpan& s) {
  auto w = split_whitespace(text);
  std::vector<std::string> part(w.begin() + s.start - 1, w.begin() + s.end);
  return join(part, " ");
}

inline json to_json(const DativeInstance& d) {
  return {{"id", d.id()},
          {"utterance_id", d.utterance_id},
          {"lemma", d.lemma},
          {"construction", to_string(d.construction)},
          {"verb_index", d.verb_index},
          {"theme_span", {d.theme.start, d.theme.end}},
          {"recipient_span", {d.recipient.start, d.recipient.end}},
          {"theme", span_text(d.text, d.theme)},
          {"recipient", span_text(d.text, d.recipient)},
          {"text", d.text}};
}

inline DativeInstance dative_from_json(const json& j) {
  DativeInstance d;
  d.utterance_id = j.at("utterance_id");
  d.lemma = j.at("lemma");
  d.construction = parse_construction(j.at("construction").get<std::string>());
  d.verb_index = j.at("verb_index");
  d.theme = {j.at("theme_span").at(0), j.at("theme_span").at(1)};
  d.recipient = {j.at("recipient_span").at(0), j.at("recipient_span").at(1)};
  d.text = j.at("text");
  return d;
}

struct AlternationProfile {
  std::string lemma;
  int do_count = 0, pp_count = 0;
  AlternationClass cls = AlternationClass::Other;
};

inline std::vector<AlternationProfile> profile_alternation(const std::vector<DativeInstance>& instances,
                                                           const std::set<std::string>& alternating,
                                                           const std::set<std::string>& nonalternating) {
  for (const auto& l : alternating)
    if (nonalternating.count(l)) throw Error("lemma '" + l + "' is listed as both alternating and non-alternating");
  std::map<std::string, AlternationProfile> by;
  for (const auto& d : instances) {
    auto& p = by[d.lemma];
    p.lemma = d.lemma;
    (d.construction == Construction::DO ? p.do_count : p.pp_count)++;
  }
  std::vector<AlternationProfile> out;
  for (auto& [l, p] : by) {
    const bool single = (p.do_count == 0) != (p.pp_count == 0);
    if (p.do_count > 0 && p.pp_count > 0) p.cls = AlternationClass::AlternatingInData;
    else if (single && alternating.count(l)) p.cls = AlternationClass::NABA;
    else if (single && nonalternating.count(l)) p.cls = AlternationClass::NANA;
    out.push_back(p);
  }
  return out;
}

inline std::string profiles_csv(const std::vector<AlternationProfile>& ps) {
  std::ostringstream os;
  os << "lemma,do_count,pp_count,class\n";
  for (const auto& p : ps) os << p.lemma << ',' << p.do_count << ',' << p.pp_count << ',' << to_string(p.cls) << '\n';
  return os.str();
}

// Replaces the dative verb of each kept detection with the novel surface.
inline std::vector<GeneralizationItem> assemble_natural_generalization(const std::vector<DativeInstance>& detected,
                                                                       const std::vector<std::string>& keep_ids,
                                                                       const std::string& novel_surface) {
  std::map<std::string, const DativeInstance*> by_id;
  for (const auto& d : detected) by_id[d.id()] = &d;
  std::vector<GeneralizationItem> out;
  for (const auto& id : keep_ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw Error("curation id '" + id + "' is not among the detections");
    const auto& d = *it->second;
    auto w = split_whitespace(d.text);
    if (d.verb_index < 1 || static_cast<std::size_t>(d.verb_index) > w.size())
      throw Error("detection " + id + " has a verb index outside its text");
    w[static_cast<std::size_t>(d.verb_index - 1)] = novel_surface;
    out.push_back({"nat-" + id, d.construction, "natural", join(w, " "), "", ""});
  }
  return out;
}

}  // namespace dative
