#include "csrnn/model.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "csrnn/text.hpp"

namespace csrnn {

EncodedSentence encode_sentence(const Model& m, const Sentence& s) {
  const RnnConfig& cfg = m.config;
  const FeatureOptions opts{cfg.lowercase};
  EncodedSentence enc;
  const auto T = static_cast<Index>(s.size());
  enc.rows.resize(T, cfg.embedding_slots());
  enc.gold.resize(s.size());
  if (cfg.use_pretrained) enc.pretrained.resize(T, cfg.pretrained_dim);
  const Index ngram_offset = m.vocab.size();
  for (Index t = 0; t < T; ++t) {
    const auto idx = encode_position(s, static_cast<std::size_t>(t), m.vocab, m.ngrams, opts);
    for (int k = 0; k < kWordSlots; ++k) enc.rows(t, k) = idx.word_slots[static_cast<std::size_t>(k)];
    if (cfg.use_ngrams) {
      for (int k = 0; k < kNgramSlots; ++k) {
        enc.rows(t, kWordSlots + k) = ngram_offset + idx.ngram_slots[static_cast<std::size_t>(k)];
      }
    }
    if (cfg.use_pretrained) {
      enc.pretrained.row(t) = lookup_pretrained(m.pretrained, s.tokens[static_cast<std::size_t>(t)].text).transpose();
    }
    enc.gold[static_cast<std::size_t>(t)] = s.tokens[static_cast<std::size_t>(t)].label;
  }
  return enc;
}

std::vector<Prediction> tag(const Model& m, const Dataset& ds) {
  std::vector<Prediction> out;
  out.reserve(ds.sentences.size());
  for (const auto& s : ds.sentences) {
    Prediction pred;
    forward_sentence(m.params, m.config, encode_sentence(m, s), &pred);
    out.push_back(std::move(pred));
  }
  return out;
}

double token_accuracy(const std::vector<Prediction>& preds, const Dataset& gold) {
  std::size_t correct = 0;
  std::size_t total = 0;
  for (std::size_t i = 0; i < gold.sentences.size(); ++i) {
    const auto& toks = gold.sentences[i].tokens;
    for (std::size_t t = 0; t < toks.size(); ++t) {
      correct += preds[i].labels[t] == toks[t].label;
      ++total;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

TrainResult train(RnnConfig cfg, const Dataset& train_set, const Dataset& val_set,
                  const PretrainedEmbeddings* pretrained) {
  if (train_set.sentences.empty()) throw TrainingError("training set is empty");
  if (val_set.sentences.empty()) throw TrainingError("validation set is empty");
  if (!train_set.labeled() || !val_set.labeled()) throw TrainingError("training data must be fully labeled");
  if (!(train_set.scheme == val_set.scheme)) throw TrainingError("train and validation schemes differ");
  const auto labels = static_cast<int>(train_set.scheme.size());
  if (cfg.num_labels == 0) cfg.num_labels = labels;
  if (cfg.num_labels != labels) throw TrainingError("num_labels does not match the label scheme");
  if (cfg.use_pretrained) {
    if (pretrained == nullptr) throw TrainingError("use_pretrained set but no pretrained embeddings given");
    cfg.pretrained_dim = static_cast<int>(pretrained->dim());
  } else {
    cfg.pretrained_dim = 0;
  }
  if (cfg.max_epochs < 1 || cfg.patience < 1) throw TrainingError("max_epochs and patience must be positive");
  cfg.validate();

  TrainResult result;
  Model& m = result.model;
  m.config = cfg;
  m.scheme = train_set.scheme;
  m.vocab = build_vocab(train_set, cfg.min_count, cfg.lowercase);
  if (cfg.use_ngrams) m.ngrams = build_ngram_vocab(train_set, FeatureOptions{cfg.lowercase});
  if (cfg.use_pretrained) m.pretrained = *pretrained;
  m.params = init_params<double>(cfg, m.layout());

  std::vector<EncodedSentence> encoded;
  encoded.reserve(train_set.sentences.size());
  for (const auto& s : train_set.sentences) encoded.push_back(encode_sentence(m, s));
  const double train_tokens = static_cast<double>(train_set.num_tokens());

  RnnParams<double> best = m.params;
  double best_acc = -1.0;
  double lr = cfg.learning_rate;
  int stale = 0;
  std::vector<std::size_t> order(encoded.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(cfg.seed, "train:shuffle"));

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double loss = 0;
    for (std::size_t i : order) {
      const auto& enc = encoded[i];
      const auto trace = forward_sentence(m.params, cfg, enc);
      loss += sentence_loss(trace, enc.gold);
      sgd_step(m.params, bptt_sentence(m.params, cfg, enc, trace), lr);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss / train_tokens;
    rec.learning_rate = lr;
    rec.val_accuracy = token_accuracy(tag(m, val_set), val_set);
    rec.improved = rec.val_accuracy > best_acc;
    if (rec.improved) {
      best_acc = rec.val_accuracy;
      best = m.params;
      result.best_epoch = epoch;
      stale = 0;
    } else {
      ++stale;
      lr *= cfg.lr_decay;
    }
    result.history.push_back(rec);
    if (stale >= cfg.patience) break;
  }
  m.params = std::move(best);
  return result;
}

void write_history_tsv(std::ostream& out, const std::vector<EpochRecord>& history) {
  out << "epoch\ttrain_loss\tval_accuracy\tlearning_rate\timproved\n";
  char buf[128];
  for (const auto& r : history) {
    std::snprintf(buf, sizeof buf, "%d\t%.17g\t%.17g\t%.17g\t%d\n", r.epoch, r.train_loss, r.val_accuracy,
                  r.learning_rate, r.improved ? 1 : 0);
    out << buf;
  }
}

// ---- model file ----

namespace {

void put_double(std::ostream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

template <class Derived>
void put_tensor(std::ostream& out, const char* name, const Eigen::DenseBase<Derived>& t) {
  out << "tensor " << name << ' ' << t.rows() << ' ' << t.cols() << '\n';
  for (Index r = 0; r < t.rows(); ++r) {
    for (Index c = 0; c < t.cols(); ++c) {
      if (c) out << ' ';
      put_double(out, t(r, c));
    }
    out << '\n';
  }
}

template <class V>
void put_vocab(std::ostream& out, const char* name, const V& v) {
  const auto entries = v.to_entries();
  out << name << ' ' << entries.size() << '\n';
  for (const auto& [w, c] : entries) out << w << '\t' << c << '\n';
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::string line() {
    std::string s;
    if (!std::getline(in_, s)) throw FormatError(lineno_ + 1, "unexpected end of model file");
    ++lineno_;
    return s;
  }

  // `<keyword> <ints...>` header line.
  std::vector<long long> header(std::string_view keyword, std::size_t nints, std::string* name = nullptr) {
    const std::string s = line();
    std::vector<std::string_view> f = split(s, ' ');
    const std::size_t extra = name ? 1 : 0;
    if (f.empty() || f[0] != keyword || f.size() != 1 + extra + nints) {
      fail("expected '" + std::string(keyword) + "' header");
    }
    if (name) *name = std::string(f[1]);
    std::vector<long long> out;
    for (std::size_t i = 1 + extra; i < f.size(); ++i) out.push_back(to_int(f[i]));
    return out;
  }

  long long to_int(std::string_view s) {
    long long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) fail("expected integer, got '" + std::string(s) + "'");
    return v;
  }

  double to_double(std::string_view s) {
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) {
      fail("expected finite number, got '" + std::string(s) + "'");
    }
    return v;
  }

  template <class M>
  void tensor(const char* name, M& out, Index rows, Index cols) {
    std::string got;
    const auto dims = header("tensor", 2, &got);
    if (got != name) fail("expected tensor '" + std::string(name) + "', got '" + got + "'");
    if (dims[0] != rows || dims[1] != cols) fail(std::string("tensor '") + name + "' has unexpected shape");
    out.resize(rows, cols);
    for (Index r = 0; r < rows; ++r) {
      const std::string s = line();
      const auto f = split(s, ' ');
      if (static_cast<Index>(f.size()) != cols) fail(std::string("tensor '") + name + "' row has wrong width");
      for (Index c = 0; c < cols; ++c) out(r, c) = to_double(f[static_cast<std::size_t>(c)]);
    }
  }

  template <class V>
  V vocab(const char* name) {
    const auto n = header(name, 1)[0];
    std::vector<std::pair<std::string, std::int64_t>> entries;
    for (long long i = 0; i < n; ++i) {
      const std::string s = line();
      const auto f = split(s, '\t');
      if (f.size() != 2 || f[0].empty()) fail("malformed vocabulary entry");
      entries.emplace_back(std::string(f[0]), to_int(f[1]));
    }
    try {
      return V::from_entries(std::move(entries));
    } catch (const FormatError&) {
      throw;
    } catch (const Error& e) {
      fail(e.what());
    }
  }

  [[noreturn]] void fail(const std::string& what) const { throw FormatError(lineno_, what); }

 private:
  std::istream& in_;
  std::size_t lineno_ = 0;
};

}  // namespace

void save_model(std::ostream& out, const Model& m) {
  const RnnConfig& c = m.config;
  out << kModelFormatTag << '\n';
  out << "config 16\n";
  out << "arch " << to_string(c.arch) << '\n';
  out << "dim_emb " << c.dim_emb << '\n';
  out << "hidden " << c.hidden << '\n';
  out << "bptt_depth " << c.bptt_depth << '\n';
  out << "use_ngrams " << c.use_ngrams << '\n';
  out << "use_pretrained " << c.use_pretrained << '\n';
  out << "pretrained_dim " << c.pretrained_dim << '\n';
  out << "learning_rate ";
  put_double(out, c.learning_rate);
  out << "\nlr_decay ";
  put_double(out, c.lr_decay);
  out << "\nmax_epochs " << c.max_epochs << '\n';
  out << "patience " << c.patience << '\n';
  out << "seed " << c.seed << '\n';
  out << "num_labels " << c.num_labels << '\n';
  out << "min_count " << c.min_count << '\n';
  out << "lowercase " << c.lowercase << '\n';
  out << "window_radius " << kWindowRadius << '\n';
  out << "scheme " << m.scheme.size() << '\n';
  for (const auto& l : m.scheme.labels()) out << l << '\n';
  put_vocab(out, "vocab", m.vocab);
  put_vocab(out, "ngrams", m.ngrams);
  out << "pretrained " << m.pretrained.size() << ' ' << m.pretrained.dim() << '\n';
  for (std::size_t i = 0; i < m.pretrained.size(); ++i) {
    out << m.pretrained.words()[i];
    for (Index k = 0; k < m.pretrained.dim(); ++k) {
      out << ' ';
      put_double(out, m.pretrained.vectors()(static_cast<Index>(i), k));
    }
    out << '\n';
  }
  put_tensor(out, "table", m.params.table.weights);
  put_tensor(out, "W_in", m.params.W_in);
  put_tensor(out, "W_rec", m.params.W_rec);
  put_tensor(out, "b_h", m.params.b_h);
  put_tensor(out, "W_out", m.params.W_out);
  put_tensor(out, "b_o", m.params.b_o);
  out << "end\n";
}

Model load_model(std::istream& in) {
  Reader rd(in);
  if (rd.line() != kModelFormatTag) rd.fail(std::string("not a ") + kModelFormatTag + " model file");
  Model m;
  RnnConfig& c = m.config;
  const auto nconf = rd.header("config", 1)[0];
  for (long long i = 0; i < nconf; ++i) {
    const std::string s = rd.line();
    const auto f = split(s, ' ');
    if (f.size() != 2) rd.fail("malformed config line");
    const auto key = f[0];
    const auto val = f[1];
    if (key == "arch") c.arch = parse_arch(val);
    else if (key == "dim_emb") c.dim_emb = static_cast<int>(rd.to_int(val));
    else if (key == "hidden") c.hidden = static_cast<int>(rd.to_int(val));
    else if (key == "bptt_depth") c.bptt_depth = static_cast<int>(rd.to_int(val));
    else if (key == "use_ngrams") c.use_ngrams = rd.to_int(val) != 0;
    else if (key == "use_pretrained") c.use_pretrained = rd.to_int(val) != 0;
    else if (key == "pretrained_dim") c.pretrained_dim = static_cast<int>(rd.to_int(val));
    else if (key == "learning_rate") c.learning_rate = rd.to_double(val);
    else if (key == "lr_decay") c.lr_decay = rd.to_double(val);
    else if (key == "max_epochs") c.max_epochs = static_cast<int>(rd.to_int(val));
    else if (key == "patience") c.patience = static_cast<int>(rd.to_int(val));
    else if (key == "seed") c.seed = static_cast<std::uint64_t>(rd.to_int(val));
    else if (key == "num_labels") c.num_labels = static_cast<int>(rd.to_int(val));
    else if (key == "min_count") c.min_count = rd.to_int(val);
    else if (key == "lowercase") c.lowercase = rd.to_int(val) != 0;
    else if (key == "window_radius") {
      if (rd.to_int(val) != kWindowRadius) rd.fail("unsupported window radius");
    } else {
      rd.fail("unknown config key '" + std::string(key) + "'");
    }
  }
  try {
    c.validate();
  } catch (const Error& e) {
    rd.fail(e.what());
  }
  const auto nlabels = rd.header("scheme", 1)[0];
  std::vector<std::string> labels;
  for (long long i = 0; i < nlabels; ++i) labels.push_back(rd.line());
  m.scheme = LabelScheme(std::move(labels));
  if (static_cast<int>(m.scheme.size()) != c.num_labels) rd.fail("scheme size does not match num_labels");
  m.vocab = rd.vocab<Vocab>("vocab");
  m.ngrams = rd.vocab<NgramVocab>("ngrams");

  const auto pre = rd.header("pretrained", 2);
  m.pretrained = PretrainedEmbeddings(static_cast<Index>(pre[1]));
  VectorX<double> v(pre[1]);
  for (long long i = 0; i < pre[0]; ++i) {
    const std::string s = rd.line();
    const auto f = split(s, ' ');
    if (static_cast<long long>(f.size()) != pre[1] + 1) rd.fail("malformed pretrained row");
    for (long long k = 0; k < pre[1]; ++k) v(k) = rd.to_double(f[static_cast<std::size_t>(k + 1)]);
    if (m.pretrained.find(f[0]) >= 0) rd.fail("duplicate pretrained token");
    m.pretrained.add(std::string(f[0]), v);
  }
  if (c.use_pretrained && m.pretrained.dim() != c.pretrained_dim) rd.fail("pretrained dimension mismatch");

  const TableLayout layout = m.layout();
  rd.tensor("table", m.params.table.weights, layout.rows(), c.dim_emb);
  m.params.table.pad_rows = layout.pad_rows();
  rd.tensor("W_in", m.params.W_in, c.hidden, c.input_dim());
  rd.tensor("W_rec", m.params.W_rec, c.hidden, c.state_dim());
  rd.tensor("b_h", m.params.b_h, c.hidden, 1);
  rd.tensor("W_out", m.params.W_out, c.num_labels, c.hidden);
  rd.tensor("b_o", m.params.b_o, c.num_labels, 1);
  if (rd.line() != "end") rd.fail("missing 'end' marker");
  return m;
}

void save_model_file(const std::string& path, const Model& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  save_model(out, m);
  if (!out) throw IoError("failed writing '" + path + "'");
}

Model load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return load_model(in);
}

}  // namespace csrnn
