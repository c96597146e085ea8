#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace csrnn {

using LabelId = std::int32_t;
inline constexpr LabelId kNoLabel = -1;

class LabelScheme {
 public:
  LabelScheme() = default;
  explicit LabelScheme(std::vector<std::string> labels);

  // lang1, lang2, ambiguous, mixed, other, ne
  static LabelScheme cs6();
  // en, msa, ne, es, arz, other
  static LabelScheme langid();
  // "cs6" or "langid"
  static LabelScheme by_name(std::string_view name);

  std::size_t size() const noexcept { return labels_.size(); }
  const std::string& name(LabelId id) const { return labels_.at(static_cast<std::size_t>(id)); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::optional<LabelId> find(std::string_view label) const;
  // Throws LabelError when absent.
  LabelId id(std::string_view label) const;

  bool operator==(const LabelScheme&) const = default;

 private:
  std::vector<std::string> labels_;
};

struct Token {
  std::string text;
  LabelId label = kNoLabel;

  bool operator==(const Token&) const = default;
};

struct Sentence {
  std::vector<Token> tokens;
  std::string author;

  std::size_t size() const noexcept { return tokens.size(); }
  bool operator==(const Sentence&) const = default;
};

struct Dataset {
  std::vector<Sentence> sentences;
  LabelScheme scheme;

  std::size_t num_tokens() const;
  // True when every token carries a gold label.
  bool labeled() const;
  bool operator==(const Dataset&) const = default;
};

enum class LabelPolicy { kRequired, kOptional };

// Reads `token<TAB>label` lines; blank lines end a sentence and a leading
// `# author=<id>` line names the sentence author. Under kOptional a line may
// hold the token alone, in which case the token is left unlabeled.
Dataset parse_token_file(std::istream& in, const LabelScheme& scheme,
                         LabelPolicy policy = LabelPolicy::kRequired);
Dataset parse_token_string(std::string_view text, const LabelScheme& scheme,
                           LabelPolicy policy = LabelPolicy::kRequired);
Dataset read_token_file(const std::string& path, const LabelScheme& scheme,
                        LabelPolicy policy = LabelPolicy::kRequired);

// Canonical form: author header only when non-empty, one blank line between
// sentences, trailing newline after the last token line.
void write_token_file(std::ostream& out, const Dataset& ds);
std::string to_token_string(const Dataset& ds);

struct SplitRatios {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

struct DatasetSplit {
  Dataset train;
  Dataset val;
  Dataset test;
};

// Authors are shuffled under `seed` then each is assigned whole to the split
// furthest below its sentence-count target. Sentence order inside a split
// follows the input.
DatasetSplit split_by_author(const Dataset& ds, SplitRatios ratios, std::uint64_t seed);

// Token -> index bijection with PAD (0) and UNK (1) reserved. Corpus strings
// never occupy the reserved indices, including literal "<pad>"/"<unk>".
template <class Tag>
class BasicVocab {
 public:
  static constexpr std::int32_t kPad = 0;
  static constexpr std::int32_t kUnk = 1;
  static constexpr std::int32_t kReserved = 2;

  BasicVocab() = default;

  // Retains entries with count >= min_count ordered by descending count,
  // ties lexicographic.
  static BasicVocab from_counts(const std::map<std::string, std::int64_t>& counts,
                                std::int64_t min_count = 1);
  // Entries in index order starting at kReserved, as written by to_entries().
  static BasicVocab from_entries(std::vector<std::pair<std::string, std::int64_t>> entries);

  std::int32_t size() const noexcept { return static_cast<std::int32_t>(words_.size()) + kReserved; }
  std::int32_t lookup(std::string_view s) const;
  bool contains(std::string_view s) const { return index_.count(std::string(s)) != 0; }
  // Entry at idx >= kReserved.
  const std::string& word(std::int32_t idx) const { return words_.at(static_cast<std::size_t>(idx - kReserved)); }
  std::int64_t count(std::string_view s) const;
  std::vector<std::pair<std::string, std::int64_t>> to_entries() const;

  bool operator==(const BasicVocab& o) const { return words_ == o.words_ && counts_ == o.counts_; }

 private:
  std::vector<std::string> words_;
  std::vector<std::int64_t> counts_;
  std::unordered_map<std::string, std::int32_t> index_;
};

struct WordTag {};
struct NgramTag {};
using Vocab = BasicVocab<WordTag>;
using NgramVocab = BasicVocab<NgramTag>;

// Word counts over every token; `lowercase` applies ASCII folding first.
std::map<std::string, std::int64_t> count_words(const Dataset& ds, bool lowercase = false);
Vocab build_vocab(const Dataset& ds, std::int64_t min_count = 1, bool lowercase = false);

struct SynthLanguage {
  std::string name;
  std::string label;  // defaults to name
  std::vector<std::string> words;
  // Word-shape grammar, used when `words` is empty: word_count distinct
  // words with lengths in [min_len, max_len] over the alphabet.
  std::u32string alphabet;
  int word_count = 0;
  int min_len = 2;
  int max_len = 8;
};

struct SynthSpec {
  int num_sentences = 100;
  double mean_length = 10.0;
  double switch_probability = 0.2;
  int num_authors = 0;  // 0 -> max(3, num_sentences / 5)
  std::uint64_t seed = 0;
  // "auto" builds a scheme from the language labels in declaration order.
  std::string scheme = "auto";
  std::vector<SynthLanguage> languages;
};

// Parses the `key = value` generator description; languages are introduced
// by `[language <name>]` section lines.
SynthSpec parse_synth_spec(std::istream& in);
SynthSpec read_synth_spec(const std::string& path);

// Generates `count` distinct words from the alphabet, lengths uniform in
// [min_len, max_len].
std::vector<std::string> generate_word_inventory(std::u32string_view alphabet, int count, int min_len,
                                                 int max_len, std::uint64_t seed);

// Labels follow a first-order chain: the first token's language is uniform,
// and each next token switches to a uniformly chosen other language with
// probability switch_probability. Sentence lengths are uniform on
// [1, 2 * mean_length - 1]. Uses spec.seed unless `seed` is given.
Dataset synth_corpus(const SynthSpec& spec, std::optional<std::uint64_t> seed = std::nullopt);

}  // namespace csrnn
