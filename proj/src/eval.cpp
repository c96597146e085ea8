#include "csrnn/eval.hpp"

#include <cstdio>
#include <json.hpp>

#include "csrnn/error.hpp"

namespace csrnn {

namespace {

double ratio(std::int64_t num, std::int64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double harmonic(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

}  // namespace

EvalReport evaluate(std::span<const std::vector<LabelId>> predicted, const Dataset& gold) {
  if (predicted.size() != gold.sentences.size()) {
    throw AlignmentError(std::min(predicted.size(), gold.sentences.size()),
                         "prediction has " + std::to_string(predicted.size()) + " sentences, gold has " +
                             std::to_string(gold.sentences.size()));
  }
  const auto L = static_cast<Index>(gold.scheme.size());
  EvalReport r;
  r.scheme = gold.scheme;
  r.confusion = ConfusionMatrix::Zero(L, L);
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const auto& toks = gold.sentences[i].tokens;
    if (predicted[i].size() != toks.size()) {
      throw AlignmentError(i, "prediction has " + std::to_string(predicted[i].size()) + " tokens, gold has " +
                                  std::to_string(toks.size()));
    }
    for (std::size_t t = 0; t < toks.size(); ++t) {
      const LabelId g = toks[t].label;
      const LabelId p = predicted[i][t];
      if (g < 0 || g >= L) throw AlignmentError(i, "gold token " + std::to_string(t) + " is unlabeled");
      if (p < 0 || p >= L) throw AlignmentError(i, "prediction " + std::to_string(t) + " outside the scheme");
      ++r.confusion(g, p);
    }
  }
  r.tokens = r.confusion.sum();
  r.accuracy = ratio(r.confusion.trace(), r.tokens);

  std::int64_t tp_all = 0;
  std::int64_t fp_all = 0;
  std::int64_t fn_all = 0;
  double macro = 0;
  int present = 0;
  for (Index l = 0; l < L; ++l) {
    LabelScores s;
    const std::int64_t tp = r.confusion(l, l);
    s.support = r.confusion.row(l).sum();
    s.predicted = r.confusion.col(l).sum();
    s.precision = ratio(tp, s.predicted);
    s.recall = ratio(tp, s.support);
    s.f1 = harmonic(s.precision, s.recall);
    tp_all += tp;
    fp_all += s.predicted - tp;
    fn_all += s.support - tp;
    if (s.support + s.predicted > 0) {
      macro += s.f1;
      ++present;
    }
    r.per_label.push_back(s);
  }
  r.macro_f1 = present == 0 ? 0.0 : macro / present;
  r.micro_f1 = harmonic(ratio(tp_all, tp_all + fp_all), ratio(tp_all, tp_all + fn_all));
  return r;
}

EvalReport evaluate(std::span<const Prediction> predictions, const Dataset& gold) {
  std::vector<std::vector<LabelId>> labels;
  labels.reserve(predictions.size());
  for (const auto& p : predictions) labels.push_back(p.labels);
  return evaluate(std::span<const std::vector<LabelId>>(labels), gold);
}

double error_rate_reduction(double acc_base, double acc_new) {
  if (!(acc_base >= 0.0 && acc_base < 1.0) || !(acc_new >= 0.0 && acc_new <= 1.0)) {
    throw Error("error-rate reduction needs 0 <= acc_base < 1 and 0 <= acc_new <= 1");
  }
  return ((1.0 - acc_base) - (1.0 - acc_new)) / (1.0 - acc_base);
}

void write_report_text(std::ostream& out, const EvalReport& r) {
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return std::string(buf);
  };
  out << "# token-level scores over the full label scheme:";
  for (const auto& l : r.scheme.labels()) out << ' ' << l;
  out << '\n';
  out << "tokens = " << r.tokens << '\n';
  out << "accuracy = " << num(r.accuracy) << '\n';
  out << "micro_f1 = " << num(r.micro_f1) << '\n';
  out << "macro_f1 = " << num(r.macro_f1) << '\n';
  for (std::size_t l = 0; l < r.per_label.size(); ++l) {
    const auto& name = r.scheme.labels()[l];
    const auto& s = r.per_label[l];
    out << "precision." << name << " = " << num(s.precision) << '\n';
    out << "recall." << name << " = " << num(s.recall) << '\n';
    out << "f1." << name << " = " << num(s.f1) << '\n';
    out << "support." << name << " = " << s.support << '\n';
  }
}

void write_report_json(std::ostream& out, const EvalReport& r) {
  nlohmann::ordered_json j;
  j["labels"] = r.scheme.labels();
  j["tokens"] = r.tokens;
  j["accuracy"] = r.accuracy;
  j["micro_f1"] = r.micro_f1;
  j["macro_f1"] = r.macro_f1;
  auto& per = j["per_label"];
  per = nlohmann::ordered_json::object();
  for (std::size_t l = 0; l < r.per_label.size(); ++l) {
    const auto& s = r.per_label[l];
    per[r.scheme.labels()[l]] = {
        {"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}, {"support", s.support}};
  }
  auto& conf = j["confusion"];
  conf = nlohmann::ordered_json::array();
  for (Index g = 0; g < r.confusion.rows(); ++g) {
    std::vector<std::int64_t> row(static_cast<std::size_t>(r.confusion.cols()));
    for (Index p = 0; p < r.confusion.cols(); ++p) row[static_cast<std::size_t>(p)] = r.confusion(g, p);
    conf.push_back(row);
  }
  out << j.dump(2) << '\n';
}

void write_confusion_tsv(std::ostream& out, const EvalReport& r) {
  out << "gold\\predicted";
  for (const auto& l : r.scheme.labels()) out << '\t' << l;
  out << '\n';
  for (Index g = 0; g < r.confusion.rows(); ++g) {
    out << r.scheme.labels()[static_cast<std::size_t>(g)];
    for (Index p = 0; p < r.confusion.cols(); ++p) out << '\t' << r.confusion(g, p);
    out << '\n';
  }
}

}  // namespace csrnn
