#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "csrnn/corpus.hpp"
#include "csrnn/rnn.hpp"

namespace csrnn {

using ConfusionMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;  // (gold, predicted)

struct LabelScores {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::int64_t support = 0;    // gold tokens
  std::int64_t predicted = 0;  // predicted tokens
};

struct EvalReport {
  LabelScheme scheme;
  std::int64_t tokens = 0;
  double accuracy = 0;
  std::vector<LabelScores> per_label;
  // Mean f1 over labels occurring in gold or predictions.
  double macro_f1 = 0;
  double micro_f1 = 0;
  ConfusionMatrix confusion;
};

// 0/0 is scored as 0 for precision, recall and f1. Throws AlignmentError
// naming the first sentence whose lengths disagree.
EvalReport evaluate(std::span<const std::vector<LabelId>> predicted, const Dataset& gold);
EvalReport evaluate(std::span<const Prediction> predictions, const Dataset& gold);

// Relative drop in error rate going from acc_base to acc_new.
double error_rate_reduction(double acc_base, double acc_new);

// One `key = value` metric per line.
void write_report_text(std::ostream& out, const EvalReport& r);
void write_report_json(std::ostream& out, const EvalReport& r);
void write_confusion_tsv(std::ostream& out, const EvalReport& r);

}  // namespace csrnn
