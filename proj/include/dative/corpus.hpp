#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "dative/util.hpp"

namespace dative {

enum class Split { Train, Validation, Test };

inline std::string to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Validation: return "validation";
    case Split::Test: return "test";
  }
  return "?";
}

inline Split parse_split(std::string_view s) {
  if (s == "train") return Split::Train;
  if (s == "validation" || s == "valid" || s == "dev") return Split::Validation;
  if (s == "test") return Split::Test;
  throw Error("unknown split '" + std::string(s) + "'");
}

inline bool is_valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > s.size()) return false;
    for (std::size_t k = 1; k < len; ++k) {
      auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // overlong encodings and surrogates
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
        (cp >= 0xD800 && cp <= 0xDFFF) || cp > 0x10FFFF)
      return false;
    i += len;
  }
  return true;
}

// Splits a valid UTF-8 string into code points, each kept as its byte string.
inline std::vector<std::string> utf8_codepoints(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = c < 0x80 ? 1 : (c & 0xE0) == 0xC0 ? 2 : (c & 0xF0) == 0xE0 ? 3 : 4;
    len = std::min(len, s.size() - i);
    out.emplace_back(s.substr(i, len));
    i += len;
  }
  return out;
}

// Lowercases ASCII letters and collapses whitespace runs to one space.
inline std::string normalize_utterance(std::string_view raw) {
  auto words = split_whitespace(raw);
  for (auto& w : words)
    for (auto& ch : w)
      if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
  return join(words, " ");
}

struct UtteranceCorpus {
  std::vector<std::string> utterances;
  Split split = Split::Train;
  std::size_t word_count = 0;

  std::size_t size() const { return utterances.size(); }

  std::string fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& u : utterances) {
      h = fnv1a64(u, h);
      h = fnv1a64("\n", h);
    }
    return hex64(h);
  }
};

inline UtteranceCorpus make_corpus(std::vector<std::string> lines, Split split) {
  UtteranceCorpus c;
  c.split = split;
  for (auto& l : lines) {
    auto u = normalize_utterance(l);
    if (u.empty()) continue;
    c.word_count += count_words(u);
    c.utterances.push_back(std::move(u));
  }
  if (c.utterances.empty()) throw Error("corpus has zero non-empty lines");
  return c;
}

inline UtteranceCorpus load_corpus(const std::string& path, Split split) {
  std::string content = read_file(path);
  if (!is_valid_utf8(content)) throw Error("corpus is not valid UTF-8: " + path);
  std::vector<std::string> lines;
  std::istringstream in(content);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  try {
    return make_corpus(std::move(lines), split);
  } catch (const Error&) {
    throw Error("corpus has zero non-empty lines: " + path);
  }
}

}  // namespace dative
