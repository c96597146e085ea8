#include "csrnn/gradcheck.hpp"

#include <cstdio>
#include <functional>
#include <numeric>

namespace csrnn {

double relative_error(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-5});
  return std::abs(analytic - numeric) / scale;
}

namespace {

struct TensorView {
  const char* name;
  double* data;
  Index size;
  const double* analytic;
  std::vector<Index> skip;  // flat indices excluded (PAD rows)
};

std::vector<Index> choose_entries(Index size, const std::vector<Index>& skip, Index limit, Rng& rng) {
  std::vector<Index> all;
  all.reserve(static_cast<std::size_t>(size));
  for (Index i = 0; i < size; ++i) {
    if (std::find(skip.begin(), skip.end(), i) == skip.end()) all.push_back(i);
  }
  if (limit > 0 && static_cast<Index>(all.size()) > limit) {
    rng.shuffle(std::span<Index>(all));
    all.resize(static_cast<std::size_t>(limit));
    std::sort(all.begin(), all.end());
  }
  return all;
}

}  // namespace

GradCheckReport check_gradients(const RnnParams<double>& p0, const RnnConfig& cfg, const EncodedSentence& s,
                                const GradCheckOptions& opts) {
  RnnParams<double> p = p0;
  RnnGradients<double> g = bptt_sentence(p, cfg, s);
  GradCheckReport report;

  RowMatrixX<double> table_grad = g.dense_table(p.table.num_entries(), p.table.dim());
  for (Index r : p.table.pad_rows) report.pad_gradient_norm += table_grad.row(r).norm();
  if (opts.corrupt_gradient) g.W_out(0, 0) += 1e-3 * (1.0 + std::abs(g.W_out(0, 0)));

  std::vector<Index> pad_entries;
  for (Index r : p.table.pad_rows) {
    for (Index c = 0; c < p.table.dim(); ++c) pad_entries.push_back(r * p.table.dim() + c);
  }
  std::vector<TensorView> views{
      {"table", p.table.weights.data(), p.table.weights.size(), table_grad.data(), pad_entries},
      {"W_in", p.W_in.data(), p.W_in.size(), g.W_in.data(), {}},
      {"W_rec", p.W_rec.data(), p.W_rec.size(), g.W_rec.data(), {}},
      {"b_h", p.b_h.data(), p.b_h.size(), g.b_h.data(), {}},
      {"W_out", p.W_out.data(), p.W_out.size(), g.W_out.data(), {}},
      {"b_o", p.b_o.data(), p.b_o.size(), g.b_o.data(), {}},
  };

  auto loss = [&] { return sentence_loss(forward_sentence(p, cfg, s), s.gold); };
  Rng rng(derive_seed(opts.sample_seed, "gradcheck:sample"));
  for (auto& v : views) {
    TensorCheck tc;
    tc.name = v.name;
    for (Index i : choose_entries(v.size, v.skip, opts.max_entries_per_tensor, rng)) {
      const double saved = v.data[i];
      v.data[i] = saved + opts.epsilon;
      const double up = loss();
      v.data[i] = saved - opts.epsilon;
      const double down = loss();
      v.data[i] = saved;
      const double numeric = (up - down) / (2.0 * opts.epsilon);
      tc.max_rel_error = std::max(tc.max_rel_error, relative_error(v.analytic[i], numeric));
      ++tc.entries;
    }
    tc.passed = tc.max_rel_error < opts.tolerance;
    report.max_rel_error = std::max(report.max_rel_error, tc.max_rel_error);
    report.passed = report.passed && tc.passed;
    report.tensors.push_back(tc);
  }
  report.passed = report.passed && report.pad_gradient_norm == 0.0;
  return report;
}

GradCheckInstance random_instance(RnnConfig cfg, Index length, TableLayout layout, std::uint64_t seed) {
  cfg.seed = seed;
  GradCheckInstance inst;
  if (!cfg.use_ngrams) layout.ngram_entries = 0;
  inst.params = init_params<double>(cfg, layout);
  inst.config = cfg;

  Rng rng(derive_seed(seed, "gradcheck:instance"));
  auto jitter = [&](auto& m, double scale) {
    for (Index i = 0; i < m.size(); ++i) m.data()[i] += rng.uniform(-scale, scale);
  };
  auto& tbl = inst.params.table;
  jitter(tbl.weights, 0.3);
  for (Index r : tbl.pad_rows) tbl.weights.row(r).setZero();
  jitter(inst.params.W_in, 0.3);
  jitter(inst.params.W_rec, 0.5);
  jitter(inst.params.b_h, 0.5);
  jitter(inst.params.W_out, 0.5);
  jitter(inst.params.b_o, 0.5);

  auto& s = inst.sentence;
  s.rows.resize(length, cfg.embedding_slots());
  for (Index t = 0; t < length; ++t) {
    for (Index k = 0; k < kWordSlots; ++k) {
      const Index pos = t - kWindowRadius + k;
      s.rows(t, k) = (pos < 0 || pos >= length) ? Index{Vocab::kPad}
                                                : static_cast<Index>(1 + rng.index(static_cast<std::uint64_t>(layout.word_entries - 1)));
    }
    for (Index k = 0; k < (cfg.use_ngrams ? kNgramSlots : 0); ++k) {
      // Roughly one slot in four is PAD to exercise masking.
      const bool pad = rng.bernoulli(0.25);
      s.rows(t, kWordSlots + k) =
          layout.word_entries + (pad ? Index{NgramVocab::kPad}
                                     : static_cast<Index>(1 + rng.index(static_cast<std::uint64_t>(layout.ngram_entries - 1))));
    }
  }
  if (cfg.use_pretrained) {
    s.pretrained.resize(length, cfg.pretrained_dim);
    for (Index i = 0; i < s.pretrained.size(); ++i) s.pretrained.data()[i] = rng.uniform(-1.0, 1.0);
  }
  s.gold.resize(static_cast<std::size_t>(length));
  for (auto& g : s.gold) g = static_cast<LabelId>(rng.index(static_cast<std::uint64_t>(cfg.num_labels)));
  return inst;
}

void write_grad_check_report(std::ostream& out, const GradCheckReport& r) {
  char buf[160];
  for (const auto& t : r.tensors) {
    std::snprintf(buf, sizeof buf, "%-6s entries=%-6lld max_rel_error=%.3e %s\n", t.name.c_str(),
                  static_cast<long long>(t.entries), t.max_rel_error, t.passed ? "ok" : "FAIL");
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "pad_gradient_norm=%.3e\nmax_rel_error=%.3e\nresult=%s\n", r.pad_gradient_norm,
                r.max_rel_error, r.passed ? "pass" : "fail");
  out << buf;
}

}  // namespace csrnn
