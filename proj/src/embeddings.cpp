#include "csrnn/embeddings.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>

#include "csrnn/text.hpp"

namespace csrnn {

void PretrainedEmbeddings::add(std::string word, const Eigen::Ref<const VectorX<double>>& v) {
  if (v.size() != dim()) throw DimensionError("vector for '" + word + "' has wrong dimension");
  if (!v.allFinite()) throw NumericError("vector for '" + word + "' is not finite");
  const auto row = vectors_.rows();
  if (!index_.emplace(word, row).second) throw Error("duplicate embedding for '" + word + "'");
  vectors_.conservativeResize(row + 1, Eigen::NoChange);
  vectors_.row(row) = v.transpose();
  words_.push_back(std::move(word));
}

Index PretrainedEmbeddings::find(std::string_view word) const {
  const auto it = index_.find(std::string(word));
  return it == index_.end() ? -1 : it->second;
}

namespace {

bool parse_double(std::string_view s, double& out) {
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

bool parse_int(std::string_view s, long long& out) {
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::vector<std::string_view> fields_of(std::string_view line) {
  std::vector<std::string_view> out;
  for (auto f : split(line, ' ')) {
    if (!f.empty()) out.push_back(f);
  }
  return out;
}

}  // namespace

PretrainedEmbeddings load_embeddings_text(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError(1, "missing '<count> <dim>' header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = fields_of(line);
  long long count = 0;
  long long dim = 0;
  if (header.size() != 2 || !parse_int(header[0], count) || !parse_int(header[1], dim) || count < 0 || dim < 1) {
    throw FormatError(1, "malformed header, expected '<count> <dim>'");
  }
  // Reserving count rows up front would trust an unchecked header.
  PretrainedEmbeddings pe(static_cast<Index>(dim));
  VectorX<double> v(dim);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = fields_of(line);
    if (static_cast<long long>(f.size()) != dim + 1) {
      throw FormatError(lineno, "expected token and " + std::to_string(dim) + " values, got " +
                                    std::to_string(f.size()) + " fields");
    }
    if (static_cast<long long>(pe.size()) >= count) throw FormatError(lineno, "more rows than header count");
    for (long long k = 0; k < dim; ++k) {
      if (!parse_double(f[static_cast<std::size_t>(k + 1)], v(k))) {
        throw FormatError(lineno, "non-numeric value '" + std::string(f[static_cast<std::size_t>(k + 1)]) + "'");
      }
    }
    if (pe.find(f[0]) >= 0) throw FormatError(lineno, "duplicate token '" + std::string(f[0]) + "'");
    pe.add(std::string(f[0]), v);
  }
  if (static_cast<long long>(pe.size()) != count) {
    throw FormatError(lineno, "header declares " + std::to_string(count) + " rows, found " + std::to_string(pe.size()));
  }
  return pe;
}

PretrainedEmbeddings read_embeddings_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return load_embeddings_text(in);
}

void save_embeddings_text(std::ostream& out, const PretrainedEmbeddings& pe) {
  out << pe.size() << ' ' << pe.dim() << '\n';
  char buf[32];
  for (std::size_t i = 0; i < pe.size(); ++i) {
    out << pe.words()[i];
    for (Index k = 0; k < pe.dim(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", pe.vectors()(static_cast<Index>(i), k));
      out << ' ' << buf;
    }
    out << '\n';
  }
}

VectorX<double> lookup_pretrained(const PretrainedEmbeddings& pe, std::string_view word, bool fold_lowercase) {
  Index row = pe.find(word);
  if (row < 0 && fold_lowercase) row = pe.find(ascii_lower(word));
  if (row < 0) return VectorX<double>::Zero(pe.dim());
  return pe.vectors().row(row).transpose();
}

double sgns_pair_loss(const Eigen::Ref<const VectorX<double>>& center, const Eigen::Ref<const VectorX<double>>& context,
                      const Eigen::Ref<const MatrixX<double>>& negatives) {
  double loss = -clamped_log(stable_sigmoid(context.dot(center)));
  for (Index i = 0; i < negatives.rows(); ++i) {
    loss -= clamped_log(stable_sigmoid(-negatives.row(i).dot(center)));
  }
  return loss;
}

SgnsGradients sgns_pair_gradients(const Eigen::Ref<const VectorX<double>>& center,
                                  const Eigen::Ref<const VectorX<double>>& context,
                                  const Eigen::Ref<const MatrixX<double>>& negatives) {
  SgnsGradients g;
  const double pos = stable_sigmoid(context.dot(center)) - 1.0;
  g.center = pos * context;
  g.context = pos * center;
  g.negatives.resize(negatives.rows(), center.size());
  for (Index i = 0; i < negatives.rows(); ++i) {
    const double neg = stable_sigmoid(negatives.row(i).dot(center));
    g.center += neg * negatives.row(i).transpose();
    g.negatives.row(i) = neg * center.transpose();
  }
  return g;
}

std::vector<std::vector<std::string>> sentence_words(const Dataset& ds) {
  std::vector<std::vector<std::string>> out;
  out.reserve(ds.sentences.size());
  for (const auto& s : ds.sentences) {
    auto& words = out.emplace_back();
    for (const auto& t : s.tokens) words.push_back(t.text);
  }
  return out;
}

PretrainedEmbeddings train_skipgram(const std::vector<std::vector<std::string>>& sentences, const SgnsParams& p) {
  if (p.dim < 1 || p.window < 1 || p.negatives < 0 || p.epochs < 1 || p.min_count < 1 || !(p.learning_rate > 0) ||
      !(p.min_learning_rate > 0) || p.min_learning_rate > p.learning_rate) {
    throw TrainingError("invalid skip-gram parameters");
  }
  std::map<std::string, std::int64_t> counts;
  for (const auto& s : sentences) {
    for (const auto& w : s) ++counts[w];
  }
  const Vocab vocab = Vocab::from_counts(counts, p.min_count);
  const Index n = vocab.size() - Vocab::kReserved;
  if (n < 2) throw TrainingError("skip-gram needs at least 2 distinct retained words");

  std::vector<std::vector<Index>> corpus;
  std::size_t total_pairs = 0;
  for (const auto& s : sentences) {
    auto& ids = corpus.emplace_back();
    for (const auto& w : s) {
      if (vocab.contains(w)) ids.push_back(vocab.lookup(w) - Vocab::kReserved);
    }
    const auto len = static_cast<long>(ids.size());
    for (long i = 0; i < len; ++i) {
      total_pairs += static_cast<std::size_t>(std::min<long>(len - 1, i + p.window) - std::max<long>(0, i - p.window));
    }
  }
  if (total_pairs == 0) throw TrainingError("skip-gram corpus has no context pairs");
  total_pairs *= static_cast<std::size_t>(p.epochs);

  std::vector<double> cumulative(static_cast<std::size_t>(n));
  double acc = 0;
  for (Index i = 0; i < n; ++i) {
    acc += std::pow(static_cast<double>(vocab.count(vocab.word(static_cast<std::int32_t>(i + Vocab::kReserved)))), 0.75);
    cumulative[static_cast<std::size_t>(i)] = acc;
  }

  Rng rng(derive_seed(p.seed, "sgns"));
  RowMatrixX<double> in_vecs(n, p.dim);
  for (Index r = 0; r < n; ++r) {
    for (Index c = 0; c < p.dim; ++c) in_vecs(r, c) = rng.uniform(-0.5, 0.5) / p.dim;
  }
  RowMatrixX<double> out_vecs = RowMatrixX<double>::Zero(n, p.dim);

  auto draw_negative = [&] {
    const double u = rng.uniform() * acc;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    return static_cast<Index>(std::min<std::ptrdiff_t>(it - cumulative.begin(), n - 1));
  };

  std::vector<Index> neg_ids(static_cast<std::size_t>(p.negatives));
  MatrixX<double> neg(p.negatives, p.dim);
  std::size_t done = 0;
  for (int epoch = 0; epoch < p.epochs; ++epoch) {
    for (const auto& ids : corpus) {
      const auto len = static_cast<long>(ids.size());
      for (long i = 0; i < len; ++i) {
        const Index w = ids[static_cast<std::size_t>(i)];
        for (long j = std::max<long>(0, i - p.window); j <= std::min<long>(len - 1, i + p.window); ++j) {
          if (j == i) continue;
          const Index c = ids[static_cast<std::size_t>(j)];
          const double progress = static_cast<double>(done++) / static_cast<double>(total_pairs);
          const double lr = p.learning_rate - (p.learning_rate - p.min_learning_rate) * progress;
          for (std::size_t k = 0; k < neg_ids.size(); ++k) {
            neg_ids[k] = draw_negative();
            neg.row(static_cast<Index>(k)) = out_vecs.row(neg_ids[k]);
          }
          const VectorX<double> center = in_vecs.row(w).transpose();
          const VectorX<double> context = out_vecs.row(c).transpose();
          const SgnsGradients g = sgns_pair_gradients(center, context, neg);
          in_vecs.row(w) -= lr * g.center.transpose();
          out_vecs.row(c) -= lr * g.context.transpose();
          for (std::size_t k = 0; k < neg_ids.size(); ++k) {
            out_vecs.row(neg_ids[k]) -= lr * g.negatives.row(static_cast<Index>(k));
          }
        }
      }
    }
  }

  PretrainedEmbeddings pe(p.dim);
  for (Index i = 0; i < n; ++i) {
    pe.add(vocab.word(static_cast<std::int32_t>(i + Vocab::kReserved)), in_vecs.row(i).transpose());
  }
  return pe;
}

}  // namespace csrnn
