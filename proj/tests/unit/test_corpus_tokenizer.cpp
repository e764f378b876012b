#include <gtest/gtest.h>

#include <fstream>

#include "dative/corpus.hpp"
#include "dative/tokenizer.hpp"
#include "helpers.hpp"

using namespace dative;

TEST(Corpus, WordCountMatchesHandCount) {
  testing_helpers::TempDir dir;
  auto path = dir.file("c.txt");
  write_file(path, "Look at the Ball\n\nyou gave papa an apple\n  what's   that ?\n");
  auto c = load_corpus(path, Split::Train);
  ASSERT_EQ(c.size(), 3u);
  // 4 + 5 + 3 words, counted by hand
  EXPECT_EQ(c.word_count, 12u);
  EXPECT_EQ(c.utterances[0], "look at the ball");
  EXPECT_EQ(c.utterances[2], "what's that ?");
}

TEST(Corpus, Errors) {
  testing_helpers::TempDir dir;
  EXPECT_THROW(load_corpus(dir.file("missing.txt"), Split::Train), Error);
  write_file(dir.file("empty.txt"), "\n  \n");
  try {
    load_corpus(dir.file("empty.txt"), Split::Train);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("zero non-empty lines"), std::string::npos);
  }
  write_file(dir.file("bad.txt"), std::string("ok\n\xff\xfe\n"));
  EXPECT_THROW(load_corpus(dir.file("bad.txt"), Split::Train), Error);
}

TEST(Corpus, Utf8Validation) {
  EXPECT_TRUE(is_valid_utf8("caf\xc3\xa9"));
  EXPECT_FALSE(is_valid_utf8("\xc0\xaf"));  // overlong
  EXPECT_FALSE(is_valid_utf8("\xed\xa0\x80"));  // surrogate
  EXPECT_FALSE(is_valid_utf8("\xe2\x82"));  // truncated
}

TEST(Tokenizer, ZeroMergesAtMinimumVocab) {
  auto c = make_corpus({"a b"}, Split::Train);
  // base: a, b, </w>
  auto tok = SubwordTokenizer::train(c, 4 + 3);
  EXPECT_EQ(tok.num_base_symbols(), 3);
  EXPECT_TRUE(tok.merges().empty());
  EXPECT_EQ(tok.size(), 7);
  EXPECT_THROW(SubwordTokenizer::train(c, 6), Error);
}

// Hand simulation for the word "abab" (x3) and "ba" (x1):
//   symbols a b a b </w>  /  b a </w>
//   counts: (a,b)=6 (b,a)=3+1=4 (b,</w>)=3 (a,</w>)=1  -> merge 1: a+b
//   abab -> ab ab </w>; counts: (ab,ab)=3 (ab,</w>)=3 (b,a)=1 (a,</w>)=1
//   tie at 3: smallest (left,right) is (ab,</w>) since '<' < 'a'  -> merge 2: ab+</w>
//   abab -> ab ab</w>; counts: (ab,ab</w>)=3 ...  -> merge 3: ab+ab</w>
TEST(Tokenizer, HandSimulatedMerges) {
  auto c = make_corpus({"abab abab abab ba"}, Split::Train);
  auto tok = SubwordTokenizer::train(c, 7 + 3);
  ASSERT_EQ(tok.merges().size(), 3u);
  EXPECT_EQ(tok.merges()[0], (std::pair<std::string, std::string>{"a", "b"}));
  EXPECT_EQ(tok.merges()[1], (std::pair<std::string, std::string>{"ab", "</w>"}));
  EXPECT_EQ(tok.merges()[2], (std::pair<std::string, std::string>{"ab", "ab</w>"}));
  EXPECT_EQ(tok.size(), 10);
  // Base ids follow the sorted alphabet: </w>=4, a=5, b=6; merges get 7, 8, 9.
  EXPECT_EQ(tok.id_of("</w>"), 4);
  EXPECT_EQ(tok.id_of("a"), 5);
  EXPECT_EQ(tok.id_of("b"), 6);
  EXPECT_EQ(tok.id_of("abab</w>"), 9);
  EXPECT_EQ(tok.encode("abab ba"), (std::vector<TokenId>{0, 9, 6, 5, 4, 1}));
  EXPECT_EQ(tok.encode("ab"), (std::vector<TokenId>{0, 8, 1}));
}

TEST(Tokenizer, EmptyStringIsBoundaryOnly) {
  auto tok = SubwordTokenizer::train(make_corpus({"hello there"}, Split::Train), 20);
  EXPECT_EQ(tok.encode(""), (std::vector<TokenId>{SubwordTokenizer::kBos, SubwordTokenizer::kEos}));
}

TEST(Tokenizer, RoundtripDeterminismAndRange) {
  std::vector<std::string> lines = {"you gave papa an apple", "do you want the ball ?", "caf\xc3\xa9 au lait",
                                    "mommy is here", "look at the doggy", "what's that ?"};
  auto c = make_corpus(lines, Split::Train);
  auto tok = SubwordTokenizer::train(c, 60);
  auto tok2 = SubwordTokenizer::train(c, 60);
  EXPECT_EQ(tok.merges(), tok2.merges());
  for (const auto& u : c.utterances) {
    auto ids = tok.encode(u);
    for (auto id : ids) EXPECT_LT(id, tok.size());
    EXPECT_EQ(tok.decode(ids), u);
  }
}

TEST(Tokenizer, NovelSurfaceIsOneToken) {
  auto tok = SubwordTokenizer::train(make_corpus({"she gave it to me"}, Split::Train), 40);
  tok.bind_novel_surface("[pilked]");
  auto ids = tok.encode_words("she [pilked] it");
  EXPECT_EQ(std::count(ids.begin(), ids.end(), SubwordTokenizer::kNovel), 1);
  EXPECT_EQ(tok.decode(tok.encode("she [pilked] it to me")), "she [pilked] it to me");
  EXPECT_THROW(tok.bind_novel_surface("two words"), Error);
}

TEST(Tokenizer, SaveLoadPreservesEncoding) {
  testing_helpers::TempDir dir;
  auto c = make_corpus({"the cat sat on the mat", "the dog ate the bone"}, Split::Train);
  auto tok = SubwordTokenizer::train(c, 45);
  tok.bind_novel_surface("[pilked]");
  tok.save(dir.file("tok.json"));
  auto back = SubwordTokenizer::load(dir.file("tok.json"));
  EXPECT_EQ(back.size(), tok.size());
  EXPECT_EQ(back.merges(), tok.merges());
  EXPECT_EQ(back.novel_surface(), "[pilked]");
  for (const auto& u : c.utterances) EXPECT_EQ(back.encode(u), tok.encode(u));
  auto j = json::parse(read_file(dir.file("tok.json")));
  EXPECT_EQ(j["base_symbols"], "unicode-codepoints");
}

// Property: random corpora over a small alphabet always roundtrip and respect the vocab bound.
TEST(Tokenizer, RandomCorporaProperty) {
  Rng rng(12345);
  const std::string alpha = "abcde";
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<std::string> lines;
    const int n_lines = 1 + static_cast<int>(rng() % 8);
    for (int l = 0; l < n_lines; ++l) {
      std::string line;
      const int n_words = 1 + static_cast<int>(rng() % 6);
      for (int w = 0; w < n_words; ++w) {
        if (w) line += ' ';
        const int len = 1 + static_cast<int>(rng() % 7);
        for (int k = 0; k < len; ++k) line += alpha[rng() % alpha.size()];
      }
      lines.push_back(line);
    }
    auto c = make_corpus(lines, Split::Train);
    const int vocab = 10 + static_cast<int>(rng() % 40);
    auto tok = SubwordTokenizer::train(c, vocab);
    EXPECT_LE(tok.size(), vocab);
    for (const auto& u : c.utterances) {
      auto ids = tok.encode(u);
      for (auto id : ids) ASSERT_LT(id, tok.size());
      ASSERT_EQ(tok.decode(ids), u);
    }
    EXPECT_EQ(SubwordTokenizer::train(c, vocab).merges(), tok.merges());
  }
}
