#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "csrnn/corpus.hpp"
#include "csrnn/embeddings.hpp"
#include "csrnn/rnn.hpp"

namespace csrnn {

inline constexpr const char* kModelFormatTag = "csrnn/1";

// Everything needed to tag new text: configuration, vocabularies, label
// scheme, the trained tensors, and the pretrained vectors when enabled.
struct Model {
  RnnConfig config;
  LabelScheme scheme;
  Vocab vocab;
  NgramVocab ngrams;
  PretrainedEmbeddings pretrained;
  RnnParams<double> params;

  TableLayout layout() const {
    return TableLayout{vocab.size(), config.use_ngrams ? ngrams.size() : 0};
  }
};

EncodedSentence encode_sentence(const Model& m, const Sentence& s);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0;  // mean per-token cross-entropy during the epoch
  double val_accuracy = 0;
  double learning_rate = 0;  // rate used during the epoch
  bool improved = false;
};

struct TrainResult {
  Model model;  // parameters of the best validation epoch
  std::vector<EpochRecord> history;
  int best_epoch = 0;
};

// Plain per-sentence SGD. The rate decays by cfg.lr_decay after each epoch
// that fails to beat the best validation accuracy; training stops after
// cfg.patience such epochs in a row or at cfg.max_epochs.
TrainResult train(RnnConfig cfg, const Dataset& train_set, const Dataset& val_set,
                  const PretrainedEmbeddings* pretrained = nullptr);

std::vector<Prediction> tag(const Model& m, const Dataset& ds);
// Fraction of tokens whose prediction equals gold.
double token_accuracy(const std::vector<Prediction>& preds, const Dataset& gold);

void write_history_tsv(std::ostream& out, const std::vector<EpochRecord>& history);

void save_model(std::ostream& out, const Model& m);
Model load_model(std::istream& in);
void save_model_file(const std::string& path, const Model& m);
Model load_model_file(const std::string& path);

}  // namespace csrnn
