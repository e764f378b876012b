#pragma once

#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "dative/util.hpp"

namespace dative {

struct ConllToken {
  int id = 0;  // 1-based
  std::string form, lemma, upos, xpos;
  int head = 0;  // 0 = root
  std::string deprel;
};

struct ParsedUtterance {
  std::string id;
  std::string text;
  std::vector<ConllToken> tokens;

  const ConllToken& at(int id1) const { return tokens.at(static_cast<std::size_t>(id1 - 1)); }
  std::string surface() const {
    std::vector<std::string> forms;
    forms.reserve(tokens.size());
    for (const auto& t : tokens) forms.push_back(t.form);
    return join(forms, " ");
  }

  // Heads in range, ids consecutive, exactly one root.
  void validate() const {
    int roots = 0;
    const int n = static_cast<int>(tokens.size());
    for (int i = 0; i < n; ++i) {
      const auto& t = tokens[static_cast<std::size_t>(i)];
      if (t.id != i + 1) throw Error("utterance " + id + ": token ids are not consecutive");
      if (t.head < 0 || t.head > n) throw Error("utterance " + id + ": head index out of range");
      if (t.head == t.id) throw Error("utterance " + id + ": token is its own head");
      if (t.head == 0) ++roots;
    }
    if (roots != 1) throw Error("utterance " + id + ": expected exactly one root, found " + std::to_string(roots));
  }
};

namespace detail {
inline void finish_sentence(std::vector<ParsedUtterance>& out, ParsedUtterance& cur, std::size_t& counter) {
  if (cur.tokens.empty()) {
    cur = ParsedUtterance{};
    return;
  }
  ++counter;
  if (cur.id.empty()) cur.id = std::to_string(counter);
  if (cur.text.empty()) cur.text = cur.surface();
  out.push_back(std::move(cur));
  cur = ParsedUtterance{};
}
}  // namespace detail

// Multiword ranges (1-2) and empty nodes (1.1) are skipped.
inline std::vector<ParsedUtterance> parse_conllu(std::istream& in, bool validate = true) {
  std::vector<ParsedUtterance> out;
  ParsedUtterance cur;
  std::size_t counter = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) {
      detail::finish_sentence(out, cur, counter);
      continue;
    }
    if (line[0] == '#') {
      auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      auto key = trim(std::string_view(line).substr(1, eq - 1));
      auto val = trim(std::string_view(line).substr(eq + 1));
      if (key == "sent_id") cur.id = val;
      else if (key == "text") cur.text = val;
      continue;
    }
    auto cols = split(line, '\t');
    if (cols.size() != 10)
      throw Error("CoNLL-U line " + std::to_string(lineno) + ": expected 10 tab-separated columns");
    if (cols[0].find('-') != std::string::npos || cols[0].find('.') != std::string::npos) continue;
    ConllToken t;
    try {
      t.id = static_cast<int>(parse_int(cols[0]));
      t.head = cols[6] == "_" ? -1 : static_cast<int>(parse_int(cols[6]));
    } catch (const Error&) {
      throw Error("CoNLL-U line " + std::to_string(lineno) + ": malformed id or head");
    }
    t.form = cols[1];
    t.lemma = cols[2];
    t.upos = cols[3];
    t.xpos = cols[4];
    t.deprel = cols[7];
    cur.tokens.push_back(std::move(t));
  }
  detail::finish_sentence(out, cur, counter);
  if (validate)
    for (const auto& u : out) u.validate();
  return out;
}

inline std::vector<ParsedUtterance> parse_conllu_string(const std::string& s, bool validate = true) {
  std::istringstream in(s);
  return parse_conllu(in, validate);
}

inline std::vector<ParsedUtterance> load_conllu(const std::string& path, bool validate = true) {
  std::istringstream in(read_file(path));
  return parse_conllu(in, validate);
}

inline std::string to_conllu(const std::vector<ParsedUtterance>& utts) {
  std::ostringstream os;
  for (const auto& u : utts) {
    os << "# sent_id = " << u.id << "\n# text = " << u.text << "\n";
    for (const auto& t : u.tokens)
      os << t.id << '\t' << t.form << '\t' << t.lemma << '\t' << t.upos << '\t' << t.xpos << "\t_\t" << t.head
         << '\t' << t.deprel << "\t_\t_\n";
    os << "\n";
  }
  return os.str();
}

}  // namespace dative
