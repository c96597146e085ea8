#include "csrnn/rnn.hpp"

namespace csrnn {

std::string to_string(Arch arch) { return arch == Arch::kElman ? "elman" : "jordan"; }

Arch parse_arch(std::string_view name) {
  if (name == "elman") return Arch::kElman;
  if (name == "jordan") return Arch::kJordan;
  throw Error("unknown architecture '" + std::string(name) + "' (expected elman or jordan)");
}

void RnnConfig::validate() const {
  if (dim_emb < 1 || hidden < 1 || num_labels < 1 || bptt_depth < 1) {
    throw DimensionError("dim_emb, hidden, num_labels and bptt_depth must be positive");
  }
  if (use_pretrained && pretrained_dim < 1) throw DimensionError("pretrained_dim must be positive");
}

}  // namespace csrnn
