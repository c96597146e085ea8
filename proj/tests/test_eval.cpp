#include <doctest.h>

#include <json.hpp>
#include <sstream>

#include "csrnn/error.hpp"
#include "csrnn/eval.hpp"
#include "oracles.hpp"

using namespace csrnn;

namespace {

std::vector<std::vector<LabelId>> gold_labels(const Dataset& ds) {
  std::vector<std::vector<LabelId>> out;
  for (const auto& s : ds.sentences) {
    auto& v = out.emplace_back();
    for (const auto& t : s.tokens) v.push_back(t.label);
  }
  return out;
}

}  // namespace

TEST_CASE("evaluate: perfect and wrong predictions") {
  const Dataset ds = parse_token_string("a\tlang1\nb\tlang2\n\nc\tother\n", LabelScheme::cs6());
  const auto perfect = gold_labels(ds);
  const auto r = evaluate(std::span<const std::vector<LabelId>>(perfect), ds);
  CHECK(r.accuracy == 1.0);
  CHECK(r.micro_f1 == 1.0);
  CHECK(r.macro_f1 == 1.0);
  for (auto l : {0, 1, 4}) CHECK(r.per_label[static_cast<std::size_t>(l)].f1 == 1.0);
  CHECK(r.per_label[3].f1 == 0.0);  // mixed: no support, 0/0 -> 0

  const Dataset one = parse_token_string("a\tlang1\n", LabelScheme::cs6());
  const std::vector<std::vector<LabelId>> wrong{{1}};
  CHECK(evaluate(std::span<const std::vector<LabelId>>(wrong), one).accuracy == 0.0);
}

TEST_CASE("evaluate: matches the counting oracle on random data") {
  Rng rng(77);
  Dataset ds;
  ds.scheme = LabelScheme::cs6();
  std::vector<std::vector<LabelId>> pred;
  std::vector<std::pair<int, int>> pairs;
  while (pairs.size() < 500) {
    Sentence s;
    auto& p = pred.emplace_back();
    const auto len = 1 + rng.index(12);
    for (std::uint64_t t = 0; t < len && pairs.size() < 500; ++t) {
      // Skewed so some labels are rare.
      const auto g = static_cast<LabelId>(rng.index(rng.bernoulli(0.7) ? 2 : 6));
      const auto q = rng.bernoulli(0.6) ? g : static_cast<LabelId>(rng.index(5));
      s.tokens.push_back(Token{"t", g});
      p.push_back(q);
      pairs.emplace_back(g, q);
    }
    ds.sentences.push_back(s);
  }
  const auto r = evaluate(std::span<const std::vector<LabelId>>(pred), ds);
  const auto o = oracle::counting_eval(pairs, 6);
  CHECK(r.tokens == 500);
  CHECK(r.accuracy == doctest::Approx(o.accuracy).epsilon(1e-15));
  CHECK(r.micro_f1 == doctest::Approx(r.accuracy).epsilon(1e-12));
  for (std::size_t l = 0; l < 6; ++l) {
    CHECK(r.per_label[l].precision == doctest::Approx(o.precision[l]).epsilon(1e-15));
    CHECK(r.per_label[l].recall == doctest::Approx(o.recall[l]).epsilon(1e-15));
    CHECK(r.per_label[l].f1 == doctest::Approx(o.f1[l]).epsilon(1e-15));
    CHECK(r.per_label[l].support == o.support[l]);
    CHECK(r.confusion.row(static_cast<Index>(l)).sum() == o.support[l]);
    for (std::size_t p = 0; p < 6; ++p) CHECK(r.confusion(static_cast<Index>(l), static_cast<Index>(p)) == o.confusion[l][p]);
  }

  // Sentence order does not matter.
  Dataset shuffled = ds;
  auto spred = pred;
  std::vector<std::size_t> order(ds.sentences.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(std::span<std::size_t>(order));
  for (std::size_t i = 0; i < order.size(); ++i) {
    shuffled.sentences[i] = ds.sentences[order[i]];
    spred[i] = pred[order[i]];
  }
  const auto r2 = evaluate(std::span<const std::vector<LabelId>>(spred), shuffled);
  CHECK(r2.confusion == r.confusion);
  CHECK(r2.macro_f1 == r.macro_f1);
}

TEST_CASE("evaluate: alignment errors name the sentence") {
  const Dataset ds = parse_token_string("a\tlang1\n\nb\tlang1\nc\tlang1\n", LabelScheme::cs6());
  const std::vector<std::vector<LabelId>> bad{{0}, {0}};
  try {
    evaluate(std::span<const std::vector<LabelId>>(bad), ds);
    FAIL("expected AlignmentError");
  } catch (const AlignmentError& e) {
    CHECK(e.sentence() == 1);
  }
  const std::vector<std::vector<LabelId>> short_list{{0}};
  CHECK_THROWS_AS(evaluate(std::span<const std::vector<LabelId>>(short_list), ds), AlignmentError);
}

TEST_CASE("error_rate_reduction") {
  CHECK(error_rate_reduction(0.942, 0.952) == doctest::Approx(0.1724).epsilon(0.0005 / 0.1724));
  CHECK(std::abs(error_rate_reduction(0.963, 0.966) - 0.0811) <= 0.0005);
  for (double x : {0.0, 0.3, 0.99}) CHECK(error_rate_reduction(x, x) == 0.0);
  CHECK_THROWS(error_rate_reduction(1.0, 1.0));
}

TEST_CASE("report writers") {
  const Dataset ds = parse_token_string("a\tlang1\nb\tlang2\n", LabelScheme::cs6());
  const std::vector<std::vector<LabelId>> pred{{0, 0}};
  const auto r = evaluate(std::span<const std::vector<LabelId>>(pred), ds);
  std::ostringstream text, json, tsv;
  write_report_text(text, r);
  write_report_json(json, r);
  write_confusion_tsv(tsv, r);
  CHECK(text.str().find("accuracy = 0.500000\n") != std::string::npos);
  const auto j = nlohmann::json::parse(json.str());
  CHECK(j["accuracy"].get<double>() == 0.5);
  CHECK(j["per_label"]["lang1"]["precision"].get<double>() == 0.5);
  CHECK(j["confusion"][1][0].get<int>() == 1);
  CHECK(tsv.str().rfind("gold\\predicted\tlang1\tlang2", 0) == 0);
}
