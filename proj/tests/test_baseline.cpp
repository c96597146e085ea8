#include <doctest.h>

#include <sstream>

#include "csrnn/baseline.hpp"
#include "csrnn/error.hpp"
#include "oracles.hpp"

using namespace csrnn;

TEST_CASE("fit_baseline: counting") {
  const auto ds = parse_token_string(
      "w\tlang1\nw\tlang1\nw\tlang1\nw\tlang2\nn\tne\nt\tlang1\nt\tlang2\nx\tlang2\nx\tlang2\n", LabelScheme::cs6());
  const auto m = fit_baseline(ds);
  CHECK(m.counts.at("w") == std::pair<std::int64_t, std::int64_t>{3, 1});
  CHECK(m.counts.at("n") == std::pair<std::int64_t, std::int64_t>{0, 0});
  CHECK(m.scheme.name(predict_baseline(m, "w")) == "lang1");
  CHECK(m.scheme.name(predict_baseline(m, "n")) == "other");
  CHECK(m.scheme.name(predict_baseline(m, "unseen")) == "other");
  // lang1 4 tokens vs lang2 4 tokens: corpus tie goes to lang1.
  CHECK(m.scheme.name(predict_baseline(m, "t")) == "lang1");
}

TEST_CASE("predict_baseline: word tie goes to the corpus majority") {
  const auto ds = parse_token_string("t\tlang1\nt\tlang1\nt\tlang2\nt\tlang2\nx\tlang2\n", LabelScheme::cs6());
  const auto m = fit_baseline(ds);
  CHECK(m.counts.at("t") == std::pair<std::int64_t, std::int64_t>{2, 2});
  CHECK(m.scheme.name(m.majority) == "lang2");
  CHECK(m.scheme.name(predict_baseline(m, "t")) == "lang2");
}

TEST_CASE("fit_baseline: matches a brute-force rescan and never emits meta labels") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    Dataset ds;
    ds.scheme = LabelScheme::cs6();
    Sentence s;
    for (int i = 0; i < 400; ++i) {
      s.tokens.push_back(Token{"w" + std::to_string(rng.index(40)), static_cast<LabelId>(rng.index(6))});
    }
    ds.sentences.push_back(s);
    const auto m = fit_baseline(ds);
    for (int w = 0; w < 50; ++w) {
      const std::string word = "w" + std::to_string(w);
      const auto got = m.scheme.name(predict_baseline(m, word));
      CHECK(got == oracle::brute_force_baseline(ds, word));
      CHECK(got != "ne");
      CHECK(got != "mixed");
      CHECK(got != "ambiguous");
    }
  }
}

TEST_CASE("baseline: scheme requirements and langid mapping") {
  const auto ds = parse_token_string("hola\tes\nhi\ten\n@x\tother\nnamaste\tne\n", LabelScheme::langid());
  CHECK_THROWS_AS(fit_baseline(ds), SchemeError);
  const auto cs = to_code_switch_labels(ds, "en", "es");
  const auto m = fit_baseline(cs);
  CHECK(m.scheme.name(predict_baseline(m, "hi")) == "lang1");
  CHECK(m.scheme.name(predict_baseline(m, "hola")) == "lang2");
  CHECK(m.scheme.name(predict_baseline(m, "@x")) == "other");
  CHECK(m.scheme.name(predict_baseline(m, "namaste")) == "other");
}

TEST_CASE("baseline serialization round trip") {
  const auto ds = parse_token_string("b\tlang2\na\tlang1\nb\tlang2\n", LabelScheme::cs6());
  const auto m = fit_baseline(ds);
  std::stringstream buf;
  save_baseline(buf, m);
  CHECK(buf.str() == "# majority=lang2\na\t1\t0\nb\t0\t2\n");
  const auto back = load_baseline(buf);
  CHECK(back.counts == m.counts);
  CHECK(back.majority == m.majority);
  std::istringstream bad("# majority=ne\n");
  CHECK_THROWS_AS(load_baseline(bad), FormatError);
}
