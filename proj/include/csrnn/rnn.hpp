#pragma once

// Elman- and Jordan-type recurrent taggers over a shared word/n-gram
// embedding table, with an optional pretrained vector appended to the
// hidden-layer input.
//
//   x_t = [E[w_{t-3}] .. E[w_{t+3}] | E[g_0] .. E[g_11] | pre(w_t)]
//   h_t = sigmoid(W_in x_t + W_rec s_{t-1} + b_h)
//   y_t = softmax(W_out h_t + b_o)
//   s_t = h_t (Elman) or y_t (Jordan), s_{-1} = 0 at every sentence start

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "csrnn/corpus.hpp"
#include "csrnn/embeddings.hpp"
#include "csrnn/error.hpp"
#include "csrnn/features.hpp"
#include "csrnn/random.hpp"

namespace csrnn {

enum class Arch { kElman, kJordan };

std::string to_string(Arch arch);
Arch parse_arch(std::string_view name);

struct RnnConfig {
  Arch arch = Arch::kElman;
  int dim_emb = 100;
  int hidden = 100;
  int bptt_depth = 9;
  bool use_ngrams = false;
  bool use_pretrained = false;
  int pretrained_dim = 0;
  double learning_rate = 0.1;
  double lr_decay = 0.95;
  int max_epochs = 50;
  int patience = 10;
  std::uint64_t seed = 0;
  int num_labels = 0;
  std::int64_t min_count = 1;
  bool lowercase = false;

  Index embedding_slots() const { return kWordSlots + (use_ngrams ? kNgramSlots : 0); }
  Index input_dim() const { return embedding_slots() * dim_emb + (use_pretrained ? pretrained_dim : 0); }
  Index state_dim() const { return arch == Arch::kElman ? hidden : num_labels; }
  // Throws DimensionError when a size is non-positive.
  void validate() const;

  bool operator==(const RnnConfig&) const = default;
};

template <class Scalar>
struct RnnParams {
  EmbeddingTable<Scalar> table;
  MatrixX<Scalar> W_in;
  MatrixX<Scalar> W_rec;
  VectorX<Scalar> b_h;
  MatrixX<Scalar> W_out;
  VectorX<Scalar> b_o;
};

// Embedding-table gradient is kept sparse, keyed by row.
template <class Scalar>
struct RnnGradients {
  std::map<Index, VectorX<Scalar>> table_rows;
  MatrixX<Scalar> W_in;
  MatrixX<Scalar> W_rec;
  VectorX<Scalar> b_h;
  MatrixX<Scalar> W_out;
  VectorX<Scalar> b_o;

  RowMatrixX<Scalar> dense_table(Index rows, Index cols) const {
    RowMatrixX<Scalar> out = RowMatrixX<Scalar>::Zero(rows, cols);
    for (const auto& [r, g] : table_rows) out.row(r) = g.transpose();
    return out;
  }
};

inline constexpr const char* kTensorNames[] = {"table", "W_in", "W_rec", "b_h", "W_out", "b_o"};

// Table row indices per token (T x embedding_slots) plus the pretrained
// vector of the current word (T x pretrained_dim, empty when unused).
struct EncodedSentence {
  Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows;
  MatrixX<double> pretrained;
  std::vector<LabelId> gold;

  Index length() const { return rows.rows(); }
};

// Word rows occupy [0, word_entries); n-gram rows follow at word_entries.
struct TableLayout {
  Index word_entries = 0;
  Index ngram_entries = 0;

  Index rows() const { return word_entries + ngram_entries; }
  std::vector<Index> pad_rows() const {
    std::vector<Index> pads{Vocab::kPad};
    if (ngram_entries > 0) pads.push_back(word_entries + NgramVocab::kPad);
    return pads;
  }
};

template <class Scalar>
struct ForwardStep {
  VectorX<Scalar> a;
  VectorX<Scalar> h;
  VectorX<Scalar> y;
};

// Columns are positions.
template <class Scalar>
struct ForwardTrace {
  MatrixX<Scalar> x;
  MatrixX<Scalar> a;
  MatrixX<Scalar> h;
  MatrixX<Scalar> y;
  MatrixX<Scalar> s_prev;

  Index length() const { return y.cols(); }
};

struct Prediction {
  std::vector<LabelId> labels;
  MatrixX<double> probabilities;  // T x num_labels
};

template <class Scalar>
Scalar sigmoid(Scalar x) {
  if (x >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-x));
  const Scalar e = std::exp(x);
  return e / (Scalar(1) + e);
}

template <class Derived>
VectorX<typename Derived::Scalar> softmax(const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  VectorX<Scalar> e = (logits.array() - logits.maxCoeff()).exp().matrix();
  return e / e.sum();
}

// Lowest index wins ties.
template <class Derived>
LabelId argmax(const Eigen::MatrixBase<Derived>& v) {
  Index best = 0;
  for (Index i = 1; i < v.size(); ++i) {
    if (v(i) > v(best)) best = i;
  }
  return static_cast<LabelId>(best);
}

template <class Scalar>
MatrixX<Scalar> glorot_uniform(Index rows, Index cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  MatrixX<Scalar> m(rows, cols);
  for (Index c = 0; c < cols; ++c) {
    for (Index r = 0; r < rows; ++r) m(r, c) = static_cast<Scalar>(rng.uniform(-limit, limit));
  }
  return m;
}

template <class Scalar = double>
RnnParams<Scalar> init_params(const RnnConfig& cfg, TableLayout layout) {
  cfg.validate();
  if (!cfg.use_ngrams) layout.ngram_entries = 0;
  RnnParams<Scalar> p;
  p.table = init_embedding<Scalar>(layout.rows(), cfg.dim_emb, derive_seed(cfg.seed, "init:table"), layout.pad_rows());
  Rng rng(derive_seed(cfg.seed, "init:weights"));
  p.W_in = glorot_uniform<Scalar>(cfg.hidden, cfg.input_dim(), rng);
  p.W_rec = glorot_uniform<Scalar>(cfg.hidden, cfg.state_dim(), rng);
  p.b_h = VectorX<Scalar>::Zero(cfg.hidden);
  p.W_out = glorot_uniform<Scalar>(cfg.num_labels, cfg.hidden, rng);
  p.b_o = VectorX<Scalar>::Zero(cfg.num_labels);
  return p;
}

template <class Scalar>
void check_shapes(const RnnParams<Scalar>& p, const RnnConfig& cfg) {
  const Index H = cfg.hidden;
  if (p.table.dim() != cfg.dim_emb || p.W_in.rows() != H || p.W_in.cols() != cfg.input_dim() ||
      p.W_rec.rows() != H || p.W_rec.cols() != cfg.state_dim() || p.b_h.size() != H ||
      p.W_out.rows() != cfg.num_labels || p.W_out.cols() != H || p.b_o.size() != cfg.num_labels) {
    throw DimensionError("parameter shapes do not match the network configuration");
  }
}

template <class Scalar>
ForwardStep<Scalar> forward_token(const RnnParams<Scalar>& p, const Eigen::Ref<const VectorX<Scalar>>& x,
                                  const Eigen::Ref<const VectorX<Scalar>>& s_prev) {
  if (x.size() != p.W_in.cols()) {
    throw DimensionError("input has " + std::to_string(x.size()) + " entries, expected " +
                         std::to_string(p.W_in.cols()));
  }
  if (s_prev.size() != p.W_rec.cols()) {
    throw DimensionError("recurrent state has " + std::to_string(s_prev.size()) + " entries, expected " +
                         std::to_string(p.W_rec.cols()));
  }
  ForwardStep<Scalar> step;
  step.a = p.W_in * x + p.W_rec * s_prev + p.b_h;
  step.h = step.a.unaryExpr([](Scalar v) { return sigmoid(v); });
  step.y = softmax(p.W_out * step.h + p.b_o);
  if (!step.y.allFinite() || !step.h.allFinite()) throw NumericError("non-finite activation in forward pass");
  return step;
}

template <class Scalar>
VectorX<Scalar> assemble_input(const RnnParams<Scalar>& p, const RnnConfig& cfg, const EncodedSentence& s, Index t) {
  if (s.rows.cols() != cfg.embedding_slots()) throw DimensionError("encoded sentence has wrong slot count");
  VectorX<Scalar> x(cfg.input_dim());
  const Index emb = cfg.embedding_slots() * cfg.dim_emb;
  const auto row = s.rows.row(t);
  x.head(emb) = lookup_concat(p.table, std::span<const Index>(row.data(), static_cast<std::size_t>(row.size())));
  if (cfg.use_pretrained) {
    if (s.pretrained.rows() != s.length() || s.pretrained.cols() != cfg.pretrained_dim) {
      throw DimensionError("pretrained features have wrong shape");
    }
    x.tail(cfg.pretrained_dim) = s.pretrained.row(t).transpose().template cast<Scalar>();
  }
  return x;
}

template <class Scalar>
ForwardTrace<Scalar> forward_sentence(const RnnParams<Scalar>& p, const RnnConfig& cfg, const EncodedSentence& s,
                                      Prediction* prediction = nullptr) {
  check_shapes(p, cfg);
  const Index T = s.length();
  ForwardTrace<Scalar> tr;
  tr.x.resize(cfg.input_dim(), T);
  tr.a.resize(cfg.hidden, T);
  tr.h.resize(cfg.hidden, T);
  tr.y.resize(cfg.num_labels, T);
  tr.s_prev.resize(cfg.state_dim(), T);
  VectorX<Scalar> state = VectorX<Scalar>::Zero(cfg.state_dim());
  for (Index t = 0; t < T; ++t) {
    tr.x.col(t) = assemble_input(p, cfg, s, t);
    tr.s_prev.col(t) = state;
    ForwardStep<Scalar> step = forward_token<Scalar>(p, tr.x.col(t), state);
    tr.a.col(t) = step.a;
    tr.h.col(t) = step.h;
    tr.y.col(t) = step.y;
    state = cfg.arch == Arch::kElman ? step.h : step.y;
  }
  if (prediction != nullptr) {
    prediction->labels.resize(static_cast<std::size_t>(T));
    prediction->probabilities = tr.y.transpose().template cast<double>();
    for (Index t = 0; t < T; ++t) prediction->labels[static_cast<std::size_t>(t)] = argmax(tr.y.col(t));
  }
  return tr;
}

template <class Scalar>
Scalar sentence_loss(const ForwardTrace<Scalar>& tr, const std::vector<LabelId>& gold) {
  if (static_cast<Index>(gold.size()) != tr.length()) throw DimensionError("gold labels do not cover the trace");
  Scalar loss(0);
  for (Index t = 0; t < tr.length(); ++t) {
    loss -= std::log(std::max(tr.y(gold[static_cast<std::size_t>(t)], t), Scalar(1e-12)));
  }
  return loss;
}

template <class Scalar>
void check_finite(const RnnGradients<Scalar>& g) {
  auto fail = [](const char* name) { throw NumericError(std::string("non-finite gradient in ") + name); };
  for (const auto& [r, v] : g.table_rows) {
    if (!v.allFinite()) fail("table");
  }
  if (!g.W_in.allFinite()) fail("W_in");
  if (!g.W_rec.allFinite()) fail("W_rec");
  if (!g.b_h.allFinite()) fail("b_h");
  if (!g.W_out.allFinite()) fail("W_out");
  if (!g.b_o.allFinite()) fail("b_o");
}

// Gradients of sentence_loss where the error of each position crosses at
// most cfg.bptt_depth recurrent edges backwards. Pretrained inputs are
// constants; PAD rows of the table get no gradient.
template <class Scalar>
RnnGradients<Scalar> bptt_sentence(const RnnParams<Scalar>& p, const RnnConfig& cfg, const EncodedSentence& s,
                                   const ForwardTrace<Scalar>& tr) {
  const Index T = tr.length();
  if (static_cast<Index>(s.gold.size()) != T) throw DimensionError("gold labels do not cover the sentence");
  const Index depth = cfg.bptt_depth;
  const bool jordan = cfg.arch == Arch::kJordan;

  // Summed error signals at each position's logits and hidden pre-activations.
  MatrixX<Scalar> dz = MatrixX<Scalar>::Zero(cfg.num_labels, T);
  MatrixX<Scalar> da = MatrixX<Scalar>::Zero(cfg.hidden, T);
  VectorX<Scalar> dh;
  VectorX<Scalar> d;
  for (Index t = 0; t < T; ++t) {
    VectorX<Scalar> dz_t = tr.y.col(t);
    dz_t(s.gold[static_cast<std::size_t>(t)]) -= Scalar(1);
    dz.col(t) += dz_t;
    dh.noalias() = p.W_out.transpose() * dz_t;
    for (Index k = t;; --k) {
      d = dh.cwiseProduct(tr.h.col(k).cwiseProduct((Scalar(1) - tr.h.col(k).array()).matrix()));
      da.col(k) += d;
      if (k == 0 || t - k >= depth) break;
      VectorX<Scalar> ds = p.W_rec.transpose() * d;
      if (jordan) {
        const auto y = tr.y.col(k - 1);
        VectorX<Scalar> dz_prev = y.cwiseProduct((ds.array() - y.dot(ds)).matrix());
        dz.col(k - 1) += dz_prev;
        dh.noalias() = p.W_out.transpose() * dz_prev;
      } else {
        dh = std::move(ds);
      }
    }
  }

  RnnGradients<Scalar> g;
  g.W_out.noalias() = dz * tr.h.transpose();
  g.b_o = dz.rowwise().sum();
  g.W_in.noalias() = da * tr.x.transpose();
  g.W_rec.noalias() = da * tr.s_prev.transpose();
  g.b_h = da.rowwise().sum();

  const Index dim = cfg.dim_emb;
  const Index slots = cfg.embedding_slots();
  const MatrixX<Scalar> dx = p.W_in.leftCols(slots * dim).transpose() * da;
  for (Index t = 0; t < T; ++t) {
    for (Index k = 0; k < slots; ++k) {
      const Index row = s.rows(t, k);
      if (p.table.is_pad(row)) continue;
      auto [it, fresh] = g.table_rows.try_emplace(row, VectorX<Scalar>::Zero(dim));
      it->second += dx.col(t).segment(k * dim, dim);
    }
  }
  check_finite(g);
  return g;
}

template <class Scalar>
RnnGradients<Scalar> bptt_sentence(const RnnParams<Scalar>& p, const RnnConfig& cfg, const EncodedSentence& s) {
  return bptt_sentence(p, cfg, s, forward_sentence(p, cfg, s));
}

template <class Scalar>
void sgd_step(RnnParams<Scalar>& p, const RnnGradients<Scalar>& g, Scalar lr) {
  for (const auto& [r, v] : g.table_rows) p.table.weights.row(r) -= lr * v.transpose();
  p.W_in -= lr * g.W_in;
  p.W_rec -= lr * g.W_rec;
  p.b_h -= lr * g.b_h;
  p.W_out -= lr * g.W_out;
  p.b_o -= lr * g.b_o;
}

}  // namespace csrnn
