#include "csrnn/features.hpp"

#include "csrnn/error.hpp"
#include "csrnn/text.hpp"

namespace csrnn {

NgramSlots char_ngrams(std::string_view word) {
  if (word.empty()) throw FeatureError("cannot extract n-grams from an empty word");
  const std::u32string w = decode_utf8(word);
  const auto n = static_cast<long>(w.size());
  NgramSlots slots;
  auto take = [&](long begin, long len) -> std::optional<std::string> {
    if (begin < 0 || begin + len > n) return std::nullopt;
    return encode_utf8(std::u32string_view(w).substr(static_cast<std::size_t>(begin), static_cast<std::size_t>(len)));
  };
  for (long i = 0; i < 3; ++i) {
    slots[static_cast<std::size_t>(i)] = take(i, 3);
    slots[static_cast<std::size_t>(3 + i)] = take(i, 2);
    slots[static_cast<std::size_t>(6 + i)] = take(n - 3 - i, 3);
    slots[static_cast<std::size_t>(9 + i)] = take(n - 2 - i, 2);
  }
  return slots;
}

std::map<std::string, std::int64_t> count_ngrams(const Dataset& ds, FeatureOptions opts) {
  std::map<std::string, std::int64_t> counts;
  for (const auto& s : ds.sentences) {
    for (const auto& t : s.tokens) {
      for (auto& g : char_ngrams(opts.lowercase ? ascii_lower(t.text) : t.text)) {
        if (g) ++counts[*g];
      }
    }
  }
  return counts;
}

NgramVocab build_ngram_vocab(const Dataset& ds, FeatureOptions opts) {
  return NgramVocab::from_counts(count_ngrams(ds, opts));
}

TokenFeatureIndices encode_position(const Sentence& s, std::size_t t, const Vocab& v, const NgramVocab& nv,
                                    FeatureOptions opts) {
  if (t >= s.size()) {
    throw BoundsError("position " + std::to_string(t) + " outside sentence of length " + std::to_string(s.size()));
  }
  auto norm = [&](const std::string& w) { return opts.lowercase ? ascii_lower(w) : w; };
  TokenFeatureIndices out;
  const auto len = static_cast<long>(s.size());
  for (int k = 0; k < kWordSlots; ++k) {
    const long pos = static_cast<long>(t) - kWindowRadius + k;
    out.word_slots[static_cast<std::size_t>(k)] =
        (pos < 0 || pos >= len) ? Vocab::kPad : v.lookup(norm(s.tokens[static_cast<std::size_t>(pos)].text));
  }
  const auto grams = char_ngrams(norm(s.tokens[t].text));
  for (int k = 0; k < kNgramSlots; ++k) {
    const auto& g = grams[static_cast<std::size_t>(k)];
    out.ngram_slots[static_cast<std::size_t>(k)] = g ? nv.lookup(*g) : NgramVocab::kPad;
  }
  return out;
}

std::vector<TokenFeatureIndices> encode_sentence(const Sentence& s, const Vocab& v, const NgramVocab& nv,
                                                 FeatureOptions opts) {
  std::vector<TokenFeatureIndices> out;
  out.reserve(s.size());
  for (std::size_t t = 0; t < s.size(); ++t) out.push_back(encode_position(s, t, v, nv, opts));
  return out;
}

}  // namespace csrnn
