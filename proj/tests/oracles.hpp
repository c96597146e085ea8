#pragma once

// Independent reference implementations used only by tests. None of these
// call into the library code path they are checking.

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "csrnn/corpus.hpp"
#include "csrnn/random.hpp"

namespace csrnn::oracle {

// Random dataset whose tokens are drawn from a small alphabet, including
// UTF-8 multi-byte characters and '#'-prefixed tokens.
inline Dataset random_dataset(std::uint64_t seed, const LabelScheme& scheme) {
  static const std::vector<std::string> pieces{"a", "b", "z", "#", "é", "ñ", "न", "ع", "1", "-", "<", ">"};
  Rng rng(seed);
  Dataset ds;
  ds.scheme = scheme;
  const auto n = 1 + rng.index(6);
  for (std::uint64_t i = 0; i < n; ++i) {
    Sentence s;
    if (rng.bernoulli(0.6)) s.author = "user" + std::to_string(rng.index(50));
    const auto len = 1 + rng.index(8);
    for (std::uint64_t t = 0; t < len; ++t) {
      std::string w;
      const auto wl = 1 + rng.index(5);
      for (std::uint64_t k = 0; k < wl; ++k) w += pieces[rng.index(pieces.size())];
      s.tokens.push_back(Token{w, static_cast<LabelId>(rng.index(scheme.size()))});
    }
    ds.sentences.push_back(std::move(s));
  }
  return ds;
}

// Baseline by rescanning the whole training set for every query.
inline std::string brute_force_baseline(const Dataset& train, const std::string& word) {
  long c1 = 0, c2 = 0, total1 = 0, total2 = 0;
  bool seen = false;
  for (const auto& s : train.sentences) {
    for (const auto& t : s.tokens) {
      const std::string& lab = train.scheme.labels()[static_cast<std::size_t>(t.label)];
      if (lab == "lang1") ++total1;
      if (lab == "lang2") ++total2;
      if (t.text != word) continue;
      seen = true;
      if (lab == "lang1") ++c1;
      if (lab == "lang2") ++c2;
    }
  }
  if (!seen || (c1 == 0 && c2 == 0)) return "other";
  if (c1 > c2) return "lang1";
  if (c2 > c1) return "lang2";
  return total2 > total1 ? "lang2" : "lang1";
}

struct CountingReport {
  double accuracy = 0;
  std::vector<double> precision, recall, f1;
  std::vector<long> support;
  std::vector<std::vector<long>> confusion;
};

// Per-label metrics from raw token pairs by direct counting.
inline CountingReport counting_eval(const std::vector<std::pair<int, int>>& gold_pred, int labels) {
  CountingReport r;
  r.confusion.assign(static_cast<std::size_t>(labels), std::vector<long>(static_cast<std::size_t>(labels), 0));
  long correct = 0;
  for (auto [g, p] : gold_pred) {
    r.confusion[static_cast<std::size_t>(g)][static_cast<std::size_t>(p)]++;
    correct += g == p;
  }
  r.accuracy = gold_pred.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(gold_pred.size());
  for (int l = 0; l < labels; ++l) {
    long tp = 0, fp = 0, fn = 0;
    for (auto [g, p] : gold_pred) {
      tp += g == l && p == l;
      fp += g != l && p == l;
      fn += g == l && p != l;
    }
    const double prec = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double rec = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
    r.precision.push_back(prec);
    r.recall.push_back(rec);
    r.f1.push_back(prec + rec == 0 ? 0.0 : 2 * prec * rec / (prec + rec));
    r.support.push_back(tp + fn);
  }
  return r;
}

// Elman step with plain loops over row-major nested vectors.
using Mat = std::vector<std::vector<double>>;
inline std::vector<double> plain_elman_step(const Mat& w_in, const Mat& w_rec, const std::vector<double>& b_h,
                                            const std::vector<double>& x, const std::vector<double>& s_prev) {
  std::vector<double> h(b_h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    double a = b_h[i];
    for (std::size_t j = 0; j < x.size(); ++j) a += w_in[i][j] * x[j];
    for (std::size_t j = 0; j < s_prev.size(); ++j) a += w_rec[i][j] * s_prev[j];
    h[i] = 1.0 / (1.0 + std::exp(-a));
  }
  return h;
}

}  // namespace csrnn::oracle
