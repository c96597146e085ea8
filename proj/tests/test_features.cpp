#include <doctest.h>

#include <set>

#include "csrnn/error.hpp"
#include "csrnn/features.hpp"
#include "csrnn/random.hpp"
#include "csrnn/text.hpp"

using namespace csrnn;

namespace {

std::vector<std::string> flat(const NgramSlots& s) {
  std::vector<std::string> out;
  for (const auto& g : s) out.push_back(g.value_or("<PAD>"));
  return out;
}

}  // namespace

TEST_CASE("char_ngrams: architecture") {
  CHECK(flat(char_ngrams("architecture")) ==
        std::vector<std::string>{"arc", "rch", "chi", "ar", "rc", "ch", "ure", "tur", "ctu", "re", "ur", "tu"});
}

TEST_CASE("char_ngrams: short words") {
  const std::string P = "<PAD>";
  CHECK(flat(char_ngrams("ab")) == std::vector<std::string>{P, P, P, "ab", P, P, P, P, P, "ab", P, P});
  // Windows enumerated by hand from the slot layout.
  CHECK(flat(char_ngrams("abcd")) ==
        std::vector<std::string>{"abc", "bcd", P, "ab", "bc", "cd", "bcd", "abc", P, "cd", "bc", "ab"});
  CHECK(flat(char_ngrams("a")) == std::vector<std::string>(12, P));
  CHECK_THROWS_AS(char_ngrams(""), FeatureError);
}

TEST_CASE("char_ngrams: operates on scalar values, not bytes") {
  const auto g = flat(char_ngrams("नमस्ते"));
  CHECK(g[0] == "नमस");
  CHECK(g[3] == "नम");
  CHECK(g[9] == "ते");
}

TEST_CASE("char_ngrams: slot validity depends only on length") {
  Rng rng(42);
  const std::u32string alphabet = U"abcxyzéñعन";
  for (int trial = 0; trial < 500; ++trial) {
    std::u32string w;
    const auto n = 1 + static_cast<long>(rng.index(9));
    for (long i = 0; i < n; ++i) w.push_back(alphabet[rng.index(alphabet.size())]);
    const auto slots = char_ngrams(encode_utf8(w));
    for (long i = 0; i < 3; ++i) {
      CHECK(slots[static_cast<std::size_t>(i)].has_value() == (i + 3 <= n));
      CHECK(slots[static_cast<std::size_t>(3 + i)].has_value() == (i + 2 <= n));
      CHECK(slots[static_cast<std::size_t>(6 + i)].has_value() == (n - 3 - i >= 0));
      CHECK(slots[static_cast<std::size_t>(9 + i)].has_value() == (n - 2 - i >= 0));
    }
    if (n >= 5) {
      for (const auto& s : slots) CHECK(s.has_value());
    }
  }
}

TEST_CASE("build_ngram_vocab") {
  Dataset single;
  single.scheme = LabelScheme::cs6();
  single.sentences.push_back(Sentence{{Token{"architecture", 0}}, ""});
  const NgramVocab nv = build_ngram_vocab(single);
  CHECK(nv.size() == NgramVocab::kReserved + 12);
  for (const auto& g : char_ngrams("architecture")) CHECK(nv.contains(*g));

  Dataset ds = parse_token_string("hola\tlang2\nhello\tlang1\n\nab\tlang1\nx\tother\n", LabelScheme::cs6());
  std::set<std::string> oracle;
  for (const auto& s : ds.sentences) {
    for (const auto& t : s.tokens) {
      for (const auto& g : char_ngrams(t.text)) {
        if (g) oracle.insert(*g);
      }
    }
  }
  const NgramVocab v2 = build_ngram_vocab(ds);
  std::set<std::string> got;
  for (std::int32_t i = NgramVocab::kReserved; i < v2.size(); ++i) got.insert(v2.word(i));
  CHECK(got == oracle);
}

TEST_CASE("encode_position: window padding") {
  const auto cs6 = LabelScheme::cs6();
  const Dataset one = parse_token_string("w\tlang1\n", cs6);
  const Vocab v = build_vocab(one);
  const NgramVocab nv = build_ngram_vocab(one);
  const auto idx = encode_position(one.sentences[0], 0, v, nv);
  const std::int32_t w = v.lookup("w");
  CHECK(idx.word_slots == std::array<std::int32_t, 7>{0, 0, 0, w, 0, 0, 0});
  CHECK(idx.ngram_slots == std::array<std::int32_t, 12>{});
  CHECK_THROWS_AS(encode_position(one.sentences[0], 1, v, nv), BoundsError);

  const Dataset seven = parse_token_string("a\tlang1\nb\tlang1\nc\tlang1\nd\tlang1\ne\tlang1\nf\tlang1\ng\tlang1\n", cs6);
  const Vocab v7 = build_vocab(seven);
  const auto first = encode_position(seven.sentences[0], 0, v7, nv);
  CHECK(first.word_slots[0] == Vocab::kPad);
  CHECK(first.word_slots[2] == Vocab::kPad);
  for (int k = 3; k < 7; ++k) CHECK(first.word_slots[static_cast<std::size_t>(k)] == v7.lookup(std::string(1, static_cast<char>('a' + k - 3))));
}

TEST_CASE("encode_position: random sentences match direct slicing; indices in range") {
  Rng rng(5);
  const auto cs6 = LabelScheme::cs6();
  Dataset train;
  train.scheme = cs6;
  Sentence s;
  for (int i = 0; i < 20; ++i) s.tokens.push_back(Token{"tok" + std::to_string(rng.index(12)), 0});
  train.sentences.push_back(s);
  // Vocabulary from half the words so UNK appears.
  Dataset half;
  half.scheme = cs6;
  half.sentences.push_back(Sentence{std::vector<Token>(s.tokens.begin(), s.tokens.begin() + 6), ""});
  const Vocab v = build_vocab(half);
  const NgramVocab nv = build_ngram_vocab(half);
  for (std::size_t t = 0; t < s.size(); ++t) {
    const auto idx = encode_position(s, t, v, nv);
    for (int k = 0; k < 7; ++k) {
      const long pos = static_cast<long>(t) + k - 3;
      const std::int32_t expect = (pos < 0 || pos >= 20) ? Vocab::kPad : v.lookup(s.tokens[static_cast<std::size_t>(pos)].text);
      CHECK(idx.word_slots[static_cast<std::size_t>(k)] == expect);
      CHECK(idx.word_slots[static_cast<std::size_t>(k)] < v.size());
    }
    for (auto g : idx.ngram_slots) {
      CHECK(g >= 0);
      CHECK(g < nv.size());
    }
    CHECK(encode_position(s, t, v, nv) == idx);
  }
}

TEST_CASE("encode_position: lowercase option") {
  const auto cs6 = LabelScheme::cs6();
  const Dataset ds = parse_token_string("Hola\tlang2\n", cs6);
  const Vocab exact = build_vocab(ds);
  const Vocab folded = build_vocab(ds, 1, true);
  const NgramVocab nv;
  const Dataset q = parse_token_string("hola\tlang2\n", cs6);
  CHECK(encode_position(q.sentences[0], 0, exact, nv).word_slots[3] == Vocab::kUnk);
  CHECK(encode_position(ds.sentences[0], 0, folded, nv, {true}).word_slots[3] == folded.lookup("hola"));
}
