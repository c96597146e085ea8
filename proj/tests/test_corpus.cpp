#include <doctest.h>

#include <set>
#include <sstream>

#include "csrnn/corpus.hpp"
#include "csrnn/error.hpp"
#include "oracles.hpp"

using namespace csrnn;

TEST_CASE("parse: minimal two-sentence stream") {
  const Dataset ds = parse_token_string("hola\tlang2\n\nhi\tlang1", LabelScheme::cs6());
  REQUIRE(ds.sentences.size() == 2);
  CHECK(ds.sentences[0].tokens == std::vector<Token>{{"hola", 1}});
  CHECK(ds.sentences[1].tokens == std::vector<Token>{{"hi", 0}});
  CHECK(ds.sentences[0].author.empty());
}

TEST_CASE("parse: author header and CRLF") {
  const Dataset ds = parse_token_string("# author=u1\r\na\tlang1\r\nb\tne\r\n", LabelScheme::cs6());
  REQUIRE(ds.sentences.size() == 1);
  CHECK(ds.sentences[0].author == "u1");
  CHECK(ds.sentences[0].tokens[1].label == LabelScheme::cs6().id("ne"));
}

TEST_CASE("parse: '#' token is a token, not a header") {
  const Dataset ds = parse_token_string("#\tother\n#tag\tother\n", LabelScheme::cs6());
  REQUIRE(ds.sentences.size() == 1);
  CHECK(ds.sentences[0].tokens[0].text == "#");
}

TEST_CASE("parse: errors") {
  const auto cs6 = LabelScheme::cs6();
  SUBCASE("unknown label names the label") {
    try {
      parse_token_string("word\txyz\n", cs6);
      FAIL("expected LabelError");
    } catch (const LabelError& e) {
      CHECK(e.label() == "xyz");
    }
  }
  SUBCASE("wrong field count carries the line number") {
    try {
      parse_token_string("a\tlang1\nb\tlang1\textra\n", cs6);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS(parse_token_string("lonely\n", cs6), ParseError);
  }
  SUBCASE("header in the middle of a block") {
    CHECK_THROWS_AS(parse_token_string("a\tlang1\n# author=x\n", cs6), ParseError);
  }
  SUBCASE("invalid utf-8") { CHECK_THROWS_AS(parse_token_string("\xff\tlang1\n", cs6), ParseError); }
  SUBCASE("optional labels") {
    const Dataset ds = parse_token_string("a\nb\tlang2\n", cs6, LabelPolicy::kOptional);
    CHECK(ds.sentences[0].tokens[0].label == kNoLabel);
    CHECK_FALSE(ds.labeled());
  }
}

TEST_CASE("parse/serialize round trip over random datasets") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto scheme = seed % 2 ? LabelScheme::cs6() : LabelScheme::langid();
    const Dataset ds = oracle::random_dataset(seed, scheme);
    const std::string text = to_token_string(ds);
    const Dataset back = parse_token_string(text, scheme);
    REQUIRE(back == ds);
    CHECK(to_token_string(back) == text);
  }
}

TEST_CASE("parse tolerates missing trailing newline and repeated blank lines") {
  const auto cs6 = LabelScheme::cs6();
  const Dataset a = parse_token_string("x\tlang1\n\n\ny\tlang2", cs6);
  CHECK(to_token_string(a) == "x\tlang1\n\ny\tlang2\n");
}

namespace {

Dataset authored(int authors, int sentences_per_author) {
  Dataset ds;
  ds.scheme = LabelScheme::cs6();
  for (int a = 0; a < authors; ++a) {
    for (int k = 0; k < sentences_per_author; ++k) {
      ds.sentences.push_back(Sentence{{Token{"w" + std::to_string(k), 0}}, "auth" + std::to_string(a)});
    }
  }
  return ds;
}

std::set<std::string> authors_of(const Dataset& ds) {
  std::set<std::string> out;
  for (const auto& s : ds.sentences) out.insert(s.author);
  return out;
}

}  // namespace

TEST_CASE("split_by_author: three authors, equal ratios") {
  const Dataset ds = authored(3, 4);
  const auto parts = split_by_author(ds, {1.0 / 3, 1.0 / 3, 1.0 / 3}, 0);
  CHECK(authors_of(parts.train).size() == 1);
  CHECK(authors_of(parts.val).size() == 1);
  CHECK(authors_of(parts.test).size() == 1);
}

TEST_CASE("split_by_author: disjoint, covering, deterministic") {
  const Dataset ds = authored(100, 3);
  const auto a = split_by_author(ds, {0.8, 0.1, 0.1}, 7);
  const auto b = split_by_author(ds, {0.8, 0.1, 0.1}, 7);
  CHECK(a.train == b.train);
  CHECK(a.val == b.val);
  CHECK(a.test == b.test);
  const auto tr = authors_of(a.train), va = authors_of(a.val), te = authors_of(a.test);
  std::set<std::string> all;
  for (const auto* s : {&tr, &va, &te}) {
    for (const auto& x : *s) CHECK(all.insert(x).second);
  }
  CHECK(all == authors_of(ds));
  CHECK(a.train.sentences.size() + a.val.sentences.size() + a.test.sentences.size() == ds.sentences.size());
  CHECK(a.train.sentences.size() == 240);
  CHECK(a.val.sentences.size() == 30);
}

TEST_CASE("split_by_author: skewed author sizes keep all splits non-empty") {
  Dataset ds = authored(3, 1);
  for (int k = 0; k < 50; ++k) ds.sentences.push_back(Sentence{{Token{"x", 0}}, "auth0"});
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto p = split_by_author(ds, {0.8, 0.1, 0.1}, seed);
    CHECK_FALSE(p.train.sentences.empty());
    CHECK_FALSE(p.val.sentences.empty());
    CHECK_FALSE(p.test.sentences.empty());
  }
}

TEST_CASE("split_by_author: errors") {
  CHECK_THROWS_AS(split_by_author(authored(2, 5), {0.8, 0.1, 0.1}, 0), SplitError);
  CHECK_THROWS_AS(split_by_author(authored(5, 1), {0.8, 0.1, 0.2}, 0), SplitError);
  CHECK_THROWS_AS(split_by_author(authored(5, 1), {1.0, 0.0, 0.0}, 0), SplitError);
}

TEST_CASE("build_vocab: ordering, threshold, reserved indices") {
  const Dataset ds = parse_token_string("a\tlang1\na\tlang1\nb\tlang1\n", LabelScheme::cs6());
  const Vocab v1 = build_vocab(ds, 1);
  CHECK(v1.lookup("a") == 2);
  CHECK(v1.lookup("b") == 3);
  CHECK(v1.size() == 4);
  const Vocab v2 = build_vocab(ds, 2);
  CHECK(v2.lookup("b") == Vocab::kUnk);
  CHECK_FALSE(v2.contains("b"));

  // Literal reserved-looking strings get ordinary indices.
  const Dataset odd = parse_token_string("<pad>\tother\n<unk>\tother\n", LabelScheme::cs6());
  const Vocab v3 = build_vocab(odd);
  CHECK(v3.lookup("<pad>") >= Vocab::kReserved);
  CHECK(v3.lookup("<unk>") >= Vocab::kReserved);
}

TEST_CASE("build_vocab: counts equal brute-force recount; indices bijective") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Dataset ds = oracle::random_dataset(seed + 500, LabelScheme::cs6());
    const Vocab v = build_vocab(ds);
    std::set<std::int32_t> seen;
    for (const auto& s : ds.sentences) {
      for (const auto& t : s.tokens) {
        std::int64_t n = 0;
        for (const auto& s2 : ds.sentences) {
          for (const auto& t2 : s2.tokens) n += t2.text == t.text;
        }
        CHECK(v.count(t.text) == n);
        const auto idx = v.lookup(t.text);
        CHECK(v.word(idx) == t.text);
      }
    }
    for (std::int32_t i = Vocab::kReserved; i < v.size(); ++i) CHECK(seen.insert(v.lookup(v.word(i))).second);
    // Descending count, ties lexicographic.
    for (std::int32_t i = Vocab::kReserved + 1; i < v.size(); ++i) {
      const auto ca = v.count(v.word(i - 1)), cb = v.count(v.word(i));
      CHECK((ca > cb || (ca == cb && v.word(i - 1) < v.word(i))));
    }
  }
}

namespace {

SynthSpec two_language_spec(double p) {
  SynthSpec spec;
  spec.num_sentences = 50;
  spec.mean_length = 8;
  spec.switch_probability = p;
  spec.languages = {SynthLanguage{"lang1", "", {"the", "cat", "sat"}, {}, 0, 2, 8},
                    SynthLanguage{"lang2", "", {"el", "gato", "come"}, {}, 0, 2, 8}};
  return spec;
}

}  // namespace

TEST_CASE("synth_corpus: degenerate switch probabilities") {
  const Dataset mono = synth_corpus(two_language_spec(0.0), 1);
  for (const auto& s : mono.sentences) {
    for (const auto& t : s.tokens) CHECK(t.label == s.tokens[0].label);
  }
  const Dataset alt = synth_corpus(two_language_spec(1.0), 1);
  for (const auto& s : alt.sentences) {
    for (std::size_t t = 1; t < s.size(); ++t) CHECK(s.tokens[t].label != s.tokens[t - 1].label);
  }
}

TEST_CASE("synth_corpus: labels match generating language and output is pure in (spec, seed)") {
  const Dataset ds = synth_corpus(two_language_spec(0.3), 4);
  const std::set<std::string> l1{"the", "cat", "sat"};
  for (const auto& s : ds.sentences) {
    for (const auto& t : s.tokens) CHECK((ds.scheme.name(t.label) == "lang1") == (l1.count(t.text) == 1));
  }
  CHECK(synth_corpus(two_language_spec(0.3), 4) == ds);
  CHECK_FALSE(synth_corpus(two_language_spec(0.3), 5) == ds);
}

TEST_CASE("synth_corpus: empirical switch rate") {
  SynthSpec spec = two_language_spec(0.3);
  spec.num_sentences = 2000;
  spec.mean_length = 6;
  const Dataset ds = synth_corpus(spec, 13);
  long transitions = 0, switches = 0;
  for (const auto& s : ds.sentences) {
    for (std::size_t t = 1; t < s.size(); ++t) {
      ++transitions;
      switches += s.tokens[t].label != s.tokens[t - 1].label;
    }
  }
  REQUIRE(ds.num_tokens() >= 10000);
  CHECK(std::abs(static_cast<double>(switches) / transitions - 0.3) <= 0.02);
}

TEST_CASE("synth_corpus: errors") {
  SynthSpec spec = two_language_spec(0.3);
  spec.languages[1].words.clear();
  CHECK_THROWS_AS(synth_corpus(spec), GeneratorError);
  spec = two_language_spec(1.5);
  CHECK_THROWS_AS(synth_corpus(spec), GeneratorError);
  spec = two_language_spec(0.2);
  spec.languages.pop_back();
  CHECK_THROWS_AS(synth_corpus(spec), GeneratorError);
}

TEST_CASE("synth spec file parsing with word-shape grammar") {
  std::istringstream in(
      "# generator\nnum_sentences = 20\nmean_length = 5\nswitch_probability = 0.25\nseed = 9\n"
      "[language en]\nwords = the cat sat\n"
      "[language es]\nalphabet = a b c d e f\nword_count = 30\nmin_len = 3\nmax_len = 6\n");
  const SynthSpec spec = parse_synth_spec(in);
  CHECK(spec.num_sentences == 20);
  CHECK(spec.seed == 9);
  REQUIRE(spec.languages.size() == 2);
  CHECK(spec.languages[0].words.size() == 3);
  CHECK(spec.languages[1].alphabet == U"abcdef");
  const Dataset ds = synth_corpus(spec);
  CHECK(ds.scheme.labels() == std::vector<std::string>{"en", "es"});
  CHECK(ds.sentences.size() == 20);

  std::istringstream bad("num_sentences = lots\n");
  CHECK_THROWS_AS(parse_synth_spec(bad), ParseError);
  std::istringstream bad_key("colour = blue\n");
  CHECK_THROWS_AS(parse_synth_spec(bad_key), ParseError);
}

TEST_CASE("generate_word_inventory: distinct, in range, deterministic") {
  const auto words = generate_word_inventory(U"абв", 20, 2, 4, 3);
  CHECK(words.size() == 20);
  CHECK(std::set<std::string>(words.begin(), words.end()).size() == 20);
  CHECK(words == generate_word_inventory(U"абв", 20, 2, 4, 3));
  CHECK_THROWS_AS(generate_word_inventory(U"ab", 100, 1, 2, 0), GeneratorError);
}
