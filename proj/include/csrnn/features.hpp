#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "csrnn/corpus.hpp"

namespace csrnn {

inline constexpr int kWindowRadius = 3;
inline constexpr int kWordSlots = 2 * kWindowRadius + 1;
inline constexpr int kNgramSlots = 12;

// Slot value; nullopt marks a window that does not fit inside the word.
using NgramSlots = std::array<std::optional<std::string>, kNgramSlots>;

// Fixed 12-slot layout over Unicode scalars of a word of length n:
//   0-2   trigrams starting at 0, 1, 2
//   3-5   bigrams starting at 0, 1, 2
//   6-8   trigrams ending at n, n-1, n-2
//   9-11  bigrams ending at n, n-1, n-2
// "architecture" -> arc rch chi ar rc ch ure tur ctu re ur tu
NgramSlots char_ngrams(std::string_view word);

struct FeatureOptions {
  bool lowercase = false;
};

std::map<std::string, std::int64_t> count_ngrams(const Dataset& ds, FeatureOptions opts = {});
NgramVocab build_ngram_vocab(const Dataset& ds, FeatureOptions opts = {});

struct TokenFeatureIndices {
  std::array<std::int32_t, kWordSlots> word_slots{};
  std::array<std::int32_t, kNgramSlots> ngram_slots{};

  bool operator==(const TokenFeatureIndices&) const = default;
};

TokenFeatureIndices encode_position(const Sentence& s, std::size_t t, const Vocab& v, const NgramVocab& nv,
                                    FeatureOptions opts = {});
std::vector<TokenFeatureIndices> encode_sentence(const Sentence& s, const Vocab& v, const NgramVocab& nv,
                                                 FeatureOptions opts = {});

}  // namespace csrnn
