#pragma once

#include <string>
#include <vector>

#include "csrnn/rnn.hpp"

namespace csrnn {

struct GradCheckOptions {
  double epsilon = 1e-5;
  double tolerance = 1e-4;
  // 0 checks every entry; otherwise a seeded sample per tensor.
  Index max_entries_per_tensor = 0;
  std::uint64_t sample_seed = 0;
  // Fault injection: perturbs one analytic W_out entry before comparing.
  bool corrupt_gradient = false;
};

struct TensorCheck {
  std::string name;
  Index entries = 0;
  double max_rel_error = 0;
  bool passed = true;
};

struct GradCheckReport {
  std::vector<TensorCheck> tensors;
  double max_rel_error = 0;
  // Analytic gradient on table rows flagged as PAD, which must be zero.
  double pad_gradient_norm = 0;
  bool passed = true;
};

// |a - n| / max(|a|, |n|, 1e-5)
double relative_error(double analytic, double numeric);

// Compares bptt_sentence against central differences of the untruncated
// sentence loss. PAD rows are excluded from the table comparison and checked
// for exactly zero gradient instead.
GradCheckReport check_gradients(const RnnParams<double>& p, const RnnConfig& cfg, const EncodedSentence& s,
                                const GradCheckOptions& opts = {});

struct GradCheckInstance {
  RnnConfig config;
  RnnParams<double> params;
  EncodedSentence sentence;
};

// Random parameters (every tensor, biases included, perturbed away from its
// initialization) and a random sentence of `length` tokens that also
// exercises PAD rows.
GradCheckInstance random_instance(RnnConfig cfg, Index length, TableLayout layout, std::uint64_t seed);

void write_grad_check_report(std::ostream& out, const GradCheckReport& r);

}  // namespace csrnn
