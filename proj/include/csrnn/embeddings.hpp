#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "csrnn/corpus.hpp"
#include "csrnn/error.hpp"
#include "csrnn/random.hpp"

namespace csrnn {

template <class Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <class Scalar>
using RowMatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Eigen::Index;

// Trainable lookup table, one row per entry. Rows listed in pad_rows are zero
// and never receive gradient.
template <class Scalar>
struct EmbeddingTable {
  RowMatrixX<Scalar> weights;
  std::vector<Index> pad_rows{0};

  Index num_entries() const { return weights.rows(); }
  Index dim() const { return weights.cols(); }
  bool is_pad(Index row) const { return std::find(pad_rows.begin(), pad_rows.end(), row) != pad_rows.end(); }
};

// Non-PAD rows uniform on [-0.2, 0.2].
template <class Scalar = double>
EmbeddingTable<Scalar> init_embedding(Index num_entries, Index dim, std::uint64_t seed,
                                      std::vector<Index> pad_rows = {0}) {
  if (num_entries < 2 || dim < 1) throw DimensionError("embedding table needs >= 2 entries and dim >= 1");
  EmbeddingTable<Scalar> tbl;
  tbl.pad_rows = std::move(pad_rows);
  tbl.weights.resize(num_entries, dim);
  Rng rng(seed);
  for (Index r = 0; r < num_entries; ++r) {
    for (Index c = 0; c < dim; ++c) tbl.weights(r, c) = static_cast<Scalar>(rng.uniform(-0.2, 0.2));
  }
  for (Index r : tbl.pad_rows) {
    if (r < 0 || r >= num_entries) throw BoundsError("pad row outside table");
    tbl.weights.row(r).setZero();
  }
  return tbl;
}

template <class Scalar>
VectorX<Scalar> lookup_concat(const EmbeddingTable<Scalar>& tbl, std::span<const Index> rows) {
  const Index d = tbl.dim();
  VectorX<Scalar> out(static_cast<Index>(rows.size()) * d);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const Index r = rows[k];
    if (r < 0 || r >= tbl.num_entries()) {
      throw BoundsError("embedding index " + std::to_string(r) + " outside table of " +
                        std::to_string(tbl.num_entries()) + " rows");
    }
    out.segment(static_cast<Index>(k) * d, d) = tbl.weights.row(r).transpose();
  }
  return out;
}

// Externally trained word vectors keyed by exact string.
class PretrainedEmbeddings {
 public:
  PretrainedEmbeddings() = default;
  explicit PretrainedEmbeddings(Index dim) : vectors_(0, dim) {}

  Index dim() const { return vectors_.cols(); }
  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }
  const RowMatrixX<double>& vectors() const { return vectors_; }

  // Throws Error on duplicate word or dimension mismatch.
  void add(std::string word, const Eigen::Ref<const VectorX<double>>& v);
  // Row index or -1.
  Index find(std::string_view word) const;

  bool operator==(const PretrainedEmbeddings& o) const {
    return words_ == o.words_ && vectors_.rows() == o.vectors_.rows() && vectors_.cols() == o.vectors_.cols() &&
           (vectors_.array() == o.vectors_.array()).all();
  }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, Index> index_;
  RowMatrixX<double> vectors_;
};

// Header `<count> <dim>`, then `<token> <v1> ... <vdim>` per line.
PretrainedEmbeddings load_embeddings_text(std::istream& in);
PretrainedEmbeddings read_embeddings_text(const std::string& path);
// 17 significant digits, so reading back is bit-exact.
void save_embeddings_text(std::ostream& out, const PretrainedEmbeddings& pe);

// Stored vector, or zeros for absent words. fold_lowercase retries with
// ASCII-lowercased text on a miss.
VectorX<double> lookup_pretrained(const PretrainedEmbeddings& pe, std::string_view word, bool fold_lowercase = false);

struct SgnsParams {
  int dim = 100;
  int window = 5;
  int negatives = 5;
  double learning_rate = 0.025;
  double min_learning_rate = 1e-4;
  int epochs = 5;
  std::uint64_t seed = 0;
  std::int64_t min_count = 1;
};

inline double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double clamped_log(double p) { return std::log(std::max(p, 1e-12)); }

struct SgnsGradients {
  VectorX<double> center;    // d/d v_w
  VectorX<double> context;   // d/d u_c
  MatrixX<double> negatives; // row i: d/d u_{n_i}
};

// -log s(u_c . v_w) - sum_i log s(-u_{n_i} . v_w); negatives as rows.
double sgns_pair_loss(const Eigen::Ref<const VectorX<double>>& center, const Eigen::Ref<const VectorX<double>>& context,
                      const Eigen::Ref<const MatrixX<double>>& negatives);
SgnsGradients sgns_pair_gradients(const Eigen::Ref<const VectorX<double>>& center,
                                  const Eigen::Ref<const VectorX<double>>& context,
                                  const Eigen::Ref<const MatrixX<double>>& negatives);

// Skip-gram with negative sampling over tokenized sentences. Negatives come
// from the unigram distribution raised to 0.75; the learning rate decays
// linearly to min_learning_rate over all pairs. Returns input vectors.
PretrainedEmbeddings train_skipgram(const std::vector<std::vector<std::string>>& sentences, const SgnsParams& p);
std::vector<std::vector<std::string>> sentence_words(const Dataset& ds);

}  // namespace csrnn
