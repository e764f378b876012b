#pragma once

#include <map>
#include <queue>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "dative/corpus.hpp"
#include "dative/util.hpp"

namespace dative {

using TokenId = int;

// Byte-pair encoding over Unicode code points with an explicit end-of-word
// symbol. Words are whitespace-delimited; a word that equals a special
// surface (the bound novel-token surface) maps to its reserved id unsplit.
class SubwordTokenizer {
 public:
  static constexpr TokenId kBos = 0;
  static constexpr TokenId kEos = 1;
  static constexpr TokenId kUnk = 2;
  static constexpr TokenId kNovel = 3;
  static constexpr int kNumSpecials = 4;
  static inline const std::string kEndOfWord = "</w>";

  SubwordTokenizer() = default;

  static SubwordTokenizer train(const UtteranceCorpus& corpus, int vocab_size);
  static SubwordTokenizer from_json(const json& j);
  static SubwordTokenizer load(const std::string& path) {
    return from_json(json::parse(read_file(path)));
  }

  json to_json() const;
  void save(const std::string& path) const { write_file(path, to_json().dump(1) + "\n"); }

  int size() const { return static_cast<int>(id_to_token_.size()); }
  int num_base_symbols() const { return num_base_; }
  const std::vector<std::pair<std::string, std::string>>& merges() const { return merges_; }
  const std::string& token(TokenId id) const { return id_to_token_.at(static_cast<std::size_t>(id)); }
  TokenId id_of(const std::string& tok) const {
    auto it = token_to_id_.find(tok);
    return it == token_to_id_.end() ? kUnk : it->second;
  }

  const std::string& novel_surface() const { return novel_surface_; }
  // Binds the surface form that maps onto the reserved novel slot.
  void bind_novel_surface(const std::string& surface) {
    if (surface.empty() || split_whitespace(surface).size() != 1)
      throw Error("novel surface must be a single non-empty word");
    novel_surface_ = surface;
  }

  // Token ids of `text` without sequence boundaries.
  std::vector<TokenId> encode_words(std::string_view text) const;
  // Scoring convention: <s> + words + </s>.
  std::vector<TokenId> encode(std::string_view text) const {
    std::vector<TokenId> ids{kBos};
    auto body = encode_words(text);
    ids.insert(ids.end(), body.begin(), body.end());
    ids.push_back(kEos);
    return ids;
  }
  std::string decode(const std::vector<TokenId>& ids) const;

 private:
  std::vector<TokenId> encode_word(const std::string& word) const;
  void rebuild_index();

  std::vector<std::string> id_to_token_;
  std::unordered_map<std::string, TokenId> token_to_id_;
  std::vector<std::pair<std::string, std::string>> merges_;
  std::unordered_map<std::string, int> merge_rank_;
  int num_base_ = 0;
  std::string novel_surface_ = "[novel]";
};

namespace detail {

inline std::string merge_key(const std::string& a, const std::string& b) {
  std::string k = a;
  k += '\x1f';
  k += b;
  return k;
}

}  // namespace detail

inline void SubwordTokenizer::rebuild_index() {
  token_to_id_.clear();
  for (std::size_t i = 0; i < id_to_token_.size(); ++i)
    token_to_id_.emplace(id_to_token_[i], static_cast<TokenId>(i));
  merge_rank_.clear();
  for (std::size_t r = 0; r < merges_.size(); ++r)
    merge_rank_.emplace(detail::merge_key(merges_[r].first, merges_[r].second), static_cast<int>(r));
}

inline SubwordTokenizer SubwordTokenizer::train(const UtteranceCorpus& corpus, int vocab_size) {
  SubwordTokenizer tok;
  tok.id_to_token_ = {"<s>", "</s>", "<unk>", "<novel>"};

  std::map<std::string, long long> word_freq;
  for (const auto& u : corpus.utterances)
    for (auto& w : split_whitespace(u)) ++word_freq[w];

  std::set<std::string> alphabet;
  for (const auto& [w, f] : word_freq)
    for (auto& cp : utf8_codepoints(w)) alphabet.insert(cp);
  alphabet.insert(kEndOfWord);

  tok.num_base_ = static_cast<int>(alphabet.size());
  if (vocab_size < kNumSpecials + tok.num_base_)
    throw Error("vocab_size " + std::to_string(vocab_size) + " is smaller than base alphabet (" +
                std::to_string(tok.num_base_) + ") plus " + std::to_string(kNumSpecials) +
                " special tokens");
  for (const auto& s : alphabet) tok.id_to_token_.push_back(s);

  std::unordered_map<std::string, int> sym_id;
  for (std::size_t i = 0; i < tok.id_to_token_.size(); ++i)
    sym_id[tok.id_to_token_[i]] = static_cast<int>(i);

  struct Word {
    std::vector<int> syms;
    long long freq;
  };
  std::vector<Word> words;
  words.reserve(word_freq.size());
  for (const auto& [w, f] : word_freq) {
    Word wd{{}, f};
    for (auto& cp : utf8_codepoints(w)) wd.syms.push_back(sym_id.at(cp));
    wd.syms.push_back(sym_id.at(kEndOfWord));
    words.push_back(std::move(wd));
  }

  auto pkey = [](int a, int b) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
  };
  std::unordered_map<std::uint64_t, long long> pair_count;
  std::unordered_map<std::uint64_t, std::unordered_set<std::size_t>> pair_words;
  auto add_word_pairs = [&](std::size_t wi, long long sign) {
    const auto& s = words[wi].syms;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
      auto k = pkey(s[i], s[i + 1]);
      pair_count[k] += sign * words[wi].freq;
      if (sign > 0) pair_words[k].insert(wi);
    }
  };
  for (std::size_t wi = 0; wi < words.size(); ++wi) add_word_pairs(wi, +1);

  // Max-heap on count; ties go to the lexicographically smallest (left, right).
  const auto& names = tok.id_to_token_;
  struct Entry {
    long long count;
    int a, b;
  };
  auto cmp = [&names](const Entry& x, const Entry& y) {
    if (x.count != y.count) return x.count < y.count;
    const auto& xa = names[static_cast<std::size_t>(x.a)];
    const auto& ya = names[static_cast<std::size_t>(y.a)];
    if (xa != ya) return xa > ya;
    return names[static_cast<std::size_t>(x.b)] > names[static_cast<std::size_t>(y.b)];
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(cmp)> heap(cmp);
  for (const auto& [k, c] : pair_count)
    if (c > 0) heap.push({c, static_cast<int>(k >> 32), static_cast<int>(k & 0xffffffffu)});

  const auto target_size = static_cast<std::size_t>(vocab_size);
  while (tok.id_to_token_.size() < target_size && !heap.empty()) {
    Entry top = heap.top();
    heap.pop();
    auto k = pkey(top.a, top.b);
    auto it = pair_count.find(k);
    if (it == pair_count.end() || it->second != top.count || top.count <= 0) continue;

    const std::string merged = names[static_cast<std::size_t>(top.a)] + names[static_cast<std::size_t>(top.b)];
    // Different merge paths can spell the same string ("a"+"bc", "ab"+"c"); reuse its id.
    int new_id = 0;
    if (auto found = sym_id.find(merged); found != sym_id.end()) {
      new_id = found->second;
    } else {
      new_id = static_cast<int>(tok.id_to_token_.size());
      tok.id_to_token_.push_back(merged);
      sym_id[merged] = new_id;
    }
    tok.merges_.emplace_back(names[static_cast<std::size_t>(top.a)], names[static_cast<std::size_t>(top.b)]);

    std::vector<std::size_t> affected(pair_words[k].begin(), pair_words[k].end());
    std::sort(affected.begin(), affected.end());
    std::set<std::uint64_t> touched;
    for (auto wi : affected) {
      auto& s = words[wi].syms;
      for (std::size_t i = 0; i + 1 < s.size(); ++i) touched.insert(pkey(s[i], s[i + 1]));
      add_word_pairs(wi, -1);
      std::vector<int> ns;
      ns.reserve(s.size());
      for (std::size_t i = 0; i < s.size();) {
        if (i + 1 < s.size() && s[i] == top.a && s[i + 1] == top.b) {
          ns.push_back(new_id);
          i += 2;
        } else {
          ns.push_back(s[i]);
          ++i;
        }
      }
      s = std::move(ns);
      add_word_pairs(wi, +1);
      for (std::size_t i = 0; i + 1 < s.size(); ++i) touched.insert(pkey(s[i], s[i + 1]));
    }
    pair_words.erase(k);
    pair_count.erase(k);
    for (auto tk : touched) {
      auto pc = pair_count.find(tk);
      if (pc != pair_count.end() && pc->second > 0)
        heap.push({pc->second, static_cast<int>(tk >> 32), static_cast<int>(tk & 0xffffffffu)});
    }
  }
  tok.rebuild_index();
  return tok;
}

inline std::vector<TokenId> SubwordTokenizer::encode_word(const std::string& word) const {
  std::vector<std::string> syms = utf8_codepoints(word);
  syms.push_back(kEndOfWord);
  while (syms.size() > 1) {
    int best_rank = -1;
    for (std::size_t i = 0; i + 1 < syms.size(); ++i) {
      auto it = merge_rank_.find(detail::merge_key(syms[i], syms[i + 1]));
      if (it != merge_rank_.end() && (best_rank < 0 || it->second < best_rank)) best_rank = it->second;
    }
    if (best_rank < 0) break;
    const auto& [a, b] = merges_[static_cast<std::size_t>(best_rank)];
    std::vector<std::string> ns;
    ns.reserve(syms.size());
    for (std::size_t i = 0; i < syms.size();) {
      if (i + 1 < syms.size() && syms[i] == a && syms[i + 1] == b) {
        ns.push_back(a + b);
        i += 2;
      } else {
        ns.push_back(std::move(syms[i]));
        ++i;
      }
    }
    syms = std::move(ns);
  }
  std::vector<TokenId> ids;
  ids.reserve(syms.size());
  for (const auto& s : syms) ids.push_back(id_of(s));
  return ids;
}

inline std::vector<TokenId> SubwordTokenizer::encode_words(std::string_view text) const {
  std::vector<TokenId> ids;
  for (const auto& w : split_whitespace(text)) {
    if (w == novel_surface_) {
      ids.push_back(kNovel);
      continue;
    }
    auto wi = encode_word(w);
    ids.insert(ids.end(), wi.begin(), wi.end());
  }
  return ids;
}

inline std::string SubwordTokenizer::decode(const std::vector<TokenId>& ids) const {
  std::string out;
  for (auto id : ids) {
    if (id == kBos || id == kEos) continue;
    if (id == kNovel) {
      out += novel_surface_;
      out += ' ';
      continue;
    }
    const std::string& t = token(id);
    if (t.size() >= kEndOfWord.size() && t.compare(t.size() - kEndOfWord.size(), kEndOfWord.size(), kEndOfWord) == 0) {
      out.append(t, 0, t.size() - kEndOfWord.size());
      out += ' ';
    } else {
      out += t;
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

inline json SubwordTokenizer::to_json() const {
  json j;
  j["format"] = "dative-bpe";
  j["version"] = 1;
  j["base_symbols"] = "unicode-codepoints";
  j["end_of_word"] = kEndOfWord;
  j["num_base_symbols"] = num_base_;
  j["specials"] = {{"bos", kBos}, {"eos", kEos}, {"unk", kUnk}, {"novel", kNovel}};
  j["novel_surface"] = novel_surface_;
  json vocab = json::object();
  for (std::size_t i = 0; i < id_to_token_.size(); ++i) vocab[id_to_token_[i]] = i;
  j["vocab"] = vocab;
  json merges = json::array();
  for (const auto& [a, b] : merges_) merges.push_back({a, b});
  j["merges"] = merges;
  return j;
}

inline SubwordTokenizer SubwordTokenizer::from_json(const json& j) {
  if (j.value("format", "") != "dative-bpe") throw Error("not a dative-bpe tokenizer file");
  SubwordTokenizer tok;
  const auto& vocab = j.at("vocab");
  tok.id_to_token_.assign(vocab.size(), {});
  for (auto it = vocab.begin(); it != vocab.end(); ++it) {
    auto id = it.value().get<std::size_t>();
    if (id >= vocab.size()) throw Error("tokenizer vocab id out of range");
    tok.id_to_token_[id] = it.key();
  }
  for (const auto& m : j.at("merges")) tok.merges_.emplace_back(m.at(0).get<std::string>(), m.at(1).get<std::string>());
  tok.num_base_ = j.at("num_base_symbols").get<int>();
  tok.novel_surface_ = j.value("novel_surface", std::string("[novel]"));
  tok.rebuild_index();
  return tok;
}

}  // namespace dative
