#include "csrnn/baseline.hpp"

#include <charconv>

#include "csrnn/error.hpp"
#include "csrnn/text.hpp"

namespace csrnn {

namespace {

LexiconBaseline empty_model(const LabelScheme& scheme) {
  const auto l1 = scheme.find("lang1");
  const auto l2 = scheme.find("lang2");
  const auto other = scheme.find("other");
  if (!l1 || !l2 || !other) throw SchemeError("baseline needs a scheme with lang1, lang2 and other");
  LexiconBaseline m;
  m.scheme = scheme;
  m.lang1 = *l1;
  m.lang2 = *l2;
  m.other = *other;
  m.majority = *l1;
  return m;
}

}  // namespace

LexiconBaseline fit_baseline(const Dataset& train) {
  LexiconBaseline m = empty_model(train.scheme);
  std::int64_t total1 = 0;
  std::int64_t total2 = 0;
  for (const auto& s : train.sentences) {
    for (const auto& t : s.tokens) {
      if (t.label == m.lang1) {
        ++m.counts[t.text].first;
        ++total1;
      } else if (t.label == m.lang2) {
        ++m.counts[t.text].second;
        ++total2;
      } else {
        m.counts.try_emplace(t.text, 0, 0);
      }
    }
  }
  m.majority = total2 > total1 ? m.lang2 : m.lang1;
  return m;
}

LabelId predict_baseline(const LexiconBaseline& m, std::string_view word) {
  const auto it = m.counts.find(std::string(word));
  if (it == m.counts.end()) return m.other;
  const auto [c1, c2] = it->second;
  if (c1 == 0 && c2 == 0) return m.other;
  if (c1 > c2) return m.lang1;
  if (c2 > c1) return m.lang2;
  return m.majority;
}

Dataset to_code_switch_labels(const Dataset& ds, std::string_view pair_first, std::string_view pair_second) {
  const LabelId first = ds.scheme.id(pair_first);
  const LabelId second = ds.scheme.id(pair_second);
  Dataset out;
  out.scheme = LabelScheme::cs6();
  const LabelId cs_l1 = out.scheme.id("lang1");
  const LabelId cs_l2 = out.scheme.id("lang2");
  const LabelId cs_other = out.scheme.id("other");
  for (const auto& s : ds.sentences) {
    Sentence r{{}, s.author};
    for (const auto& t : s.tokens) {
      LabelId l = cs_other;
      if (t.label == kNoLabel) l = kNoLabel;
      else if (t.label == first) l = cs_l1;
      else if (t.label == second) l = cs_l2;
      r.tokens.push_back(Token{t.text, l});
    }
    out.sentences.push_back(std::move(r));
  }
  return out;
}

void save_baseline(std::ostream& out, const LexiconBaseline& m) {
  out << "# majority=" << m.scheme.name(m.majority) << '\n';
  for (const auto& [w, c] : m.counts) out << w << '\t' << c.first << '\t' << c.second << '\n';
}

LexiconBaseline load_baseline(std::istream& in) {
  LexiconBaseline m = empty_model(LabelScheme::cs6());
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw FormatError(1, "missing '# majority=' header");
  ++lineno;
  constexpr std::string_view prefix = "# majority=";
  if (!std::string_view(line).starts_with(prefix)) throw FormatError(1, "missing '# majority=' header");
  const auto maj = std::string_view(line).substr(prefix.size());
  if (maj == "lang1") m.majority = m.lang1;
  else if (maj == "lang2") m.majority = m.lang2;
  else throw FormatError(1, "majority must be lang1 or lang2");
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line, '\t');
    std::int64_t c1 = 0;
    std::int64_t c2 = 0;
    auto num = [&](std::string_view s, std::int64_t& v) {
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || p != s.data() + s.size() || v < 0) throw FormatError(lineno, "bad count");
    };
    if (f.size() != 3 || f[0].empty()) throw FormatError(lineno, "expected word<TAB>count1<TAB>count2");
    num(f[1], c1);
    num(f[2], c2);
    if (!m.counts.emplace(std::string(f[0]), std::make_pair(c1, c2)).second) {
      throw FormatError(lineno, "duplicate word");
    }
  }
  return m;
}

}  // namespace csrnn
