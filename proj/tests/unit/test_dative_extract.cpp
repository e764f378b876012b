#include <gtest/gtest.h>

#include <map>

#include "dative/dative_extract.hpp"

using namespace dative;

namespace {

std::string src(const std::string& rel) { return std::string(DATIVE_SOURCE_DIR) + "/" + rel; }

std::set<std::string> lemma_set(const std::string& rel) {
  auto v = read_list_file(src(rel));
  return {v.begin(), v.end()};
}

struct Gold {
  std::string construction, theme, recipient;
};

std::map<std::string, Gold> load_gold() {
  std::map<std::string, Gold> g;
  auto lines = read_lines(src("tests/fixtures/datives_gold.tsv"));
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    auto c = split(lines[i], '\t');
    c.resize(4);
    g[c[0]] = {c[1], c[2], c[3]};
  }
  return g;
}

}  // namespace

TEST(DativeExtract, FixtureSuitePrecisionRecall) {
  auto parses = load_conllu(src("tests/fixtures/datives.conllu"));
  auto gold = load_gold();
  ASSERT_EQ(parses.size(), 20u);
  ASSERT_EQ(gold.size(), 20u);
  auto found = detect_datives(parses, lemma_set("data/dative_lemmas.txt"));
  int tp = 0, fp = 0, fn = 0;
  std::set<std::string> hit;
  for (const auto& d : found) {
    const auto& g = gold.at(d.utterance_id);
    if (g.construction == to_string(d.construction) && g.theme == span_text(d.text, d.theme) &&
        g.recipient == span_text(d.text, d.recipient)) {
      ++tp;
      hit.insert(d.utterance_id);
    } else {
      ++fp;
      ADD_FAILURE() << "spurious detection " << d.id();
    }
  }
  for (const auto& [id, g] : gold)
    if (g.construction != "none" && !hit.count(id)) ++fn;
  EXPECT_EQ(tp, 10);
  EXPECT_EQ(fp, 0);
  EXPECT_EQ(fn, 0);
}

TEST(DativeExtract, HandFixtures) {
  const std::set<std::string> lemmas{"give"};
  auto pp = parse_conllu_string(
      "# sent_id = a\n1\tshe\tshe\tPRON\tPRP\t_\t2\tnsubj\t_\t_\n2\tgave\tgive\tVERB\tVBD\t_\t0\tROOT\t_\t_\n"
      "3\tthe\tthe\tDET\tDT\t_\t4\tdet\t_\t_\n4\tball\tball\tNOUN\tNN\t_\t2\tdobj\t_\t_\n"
      "5\tto\tto\tADP\tIN\t_\t2\tprep\t_\t_\n6\tme\tI\tPRON\tPRP\t_\t5\tpobj\t_\t_\n\n");
  auto d = detect_pp(pp[0], lemmas);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].theme, (TokenSpan{3, 4}));
  EXPECT_EQ(d[0].recipient, (TokenSpan{6, 6}));
  EXPECT_EQ(d[0].id(), "a:2:PP");
  EXPECT_TRUE(detect_do(pp[0], lemmas).empty());
  // Out-of-list verb: nothing.
  EXPECT_TRUE(detect_pp(pp[0], {"send"}).empty());
}

TEST(DativeExtract, MalformedHeadsThrow) {
  ParsedUtterance p;
  p.id = "bad";
  p.tokens = {{1, "gave", "give", "VERB", "VBD", 5, "ROOT"}};
  EXPECT_THROW(detect_do(p, {"give"}), Error);
  EXPECT_THROW(detect_pp(p, {"give"}), Error);
}

TEST(DativeExtract, OrderInvariantsAndIdempotence) {
  auto parses = load_conllu(src("tests/fixtures/datives.conllu"));
  auto lemmas = lemma_set("data/dative_lemmas.txt");
  auto a = detect_datives(parses, lemmas);
  auto b = detect_datives(parses, lemmas);
  EXPECT_EQ(a, b);
  for (const auto& d : a) {
    if (d.construction == Construction::DO) EXPECT_LT(d.recipient.end, d.theme.start);
    else EXPECT_LT(d.theme.end, d.recipient.start);
    EXPECT_EQ(dative_from_json(to_json(d)), d);
  }
}

TEST(DativeExtract, ProfileHandTally) {
  auto mk = [](std::string lemma, Construction c) {
    DativeInstance d;
    d.lemma = lemma;
    d.construction = c;
    return d;
  };
  using C = Construction;
  std::vector<DativeInstance> xs{mk("give", C::DO), mk("give", C::PP), mk("owe", C::DO), mk("carry", C::PP),
                                 mk("carry", C::PP)};
  auto ps = profile_alternation(xs, {"give", "owe"}, {"carry"});
  ASSERT_EQ(ps.size(), 3u);
  std::map<std::string, AlternationProfile> by;
  for (const auto& p : ps) by[p.lemma] = p;
  EXPECT_EQ(by["give"].cls, AlternationClass::AlternatingInData);
  EXPECT_EQ(by["owe"].cls, AlternationClass::NABA);
  EXPECT_EQ(by["owe"].do_count, 1);
  EXPECT_EQ(by["carry"].cls, AlternationClass::NANA);
  EXPECT_EQ(by["carry"].pp_count, 2);
  EXPECT_EQ(profiles_csv(ps), "lemma,do_count,pp_count,class\ncarry,0,2,NANA\ngive,1,1,alternating-in-data\nowe,1,0,NABA\n");

  std::vector<DativeInstance> mixed;
  for (int i = 0; i < 3; ++i) mixed.push_back(mk("send", C::DO));
  for (int i = 0; i < 2; ++i) mixed.push_back(mk("send", C::PP));
  EXPECT_EQ(profile_alternation(mixed, {}, {})[0].cls, AlternationClass::AlternatingInData);
  EXPECT_EQ(profile_alternation({mk("fling", C::DO)}, {}, {})[0].cls, AlternationClass::Other);
  EXPECT_THROW(profile_alternation(xs, {"give"}, {"give"}), Error);
}

TEST(DativeExtract, ShippedListsAreDisjoint) {
  auto alt = lemma_set("data/alternating.txt");
  auto non = lemma_set("data/nonalternating.txt");
  auto all = lemma_set("data/dative_lemmas.txt");
  for (const auto& l : alt) EXPECT_FALSE(non.count(l)) << l;
  for (const auto& l : alt) EXPECT_TRUE(all.count(l)) << l;
  for (const auto& l : non) EXPECT_TRUE(all.count(l)) << l;
}

TEST(DativeExtract, NaturalGeneralizationSubstitution) {
  auto parses = load_conllu(src("tests/fixtures/datives.conllu"));
  auto found = detect_datives(parses, lemma_set("data/dative_lemmas.txt"));
  auto items = assemble_natural_generalization(found, {"pos01:2:DO"}, "[pilked]");
  ASSERT_EQ(items.size(), 1u);
  EXPECT_EQ(items[0].text, "you [pilked] papa an apple");
  EXPECT_EQ(items[0].construction, Construction::DO);
  EXPECT_EQ(items[0].source, "natural");
  EXPECT_TRUE(assemble_natural_generalization(found, {}, "[pilked]").empty());
  EXPECT_THROW(assemble_natural_generalization(found, {"nope:1:DO"}, "[pilked]"), Error);
}
