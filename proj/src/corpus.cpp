#include "csrnn/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "csrnn/error.hpp"
#include "csrnn/random.hpp"
#include "csrnn/text.hpp"

namespace csrnn {

// ---- LabelScheme ----

LabelScheme::LabelScheme(std::vector<std::string> labels) : labels_(std::move(labels)) {
  std::set<std::string> seen;
  for (const auto& l : labels_) {
    if (l.empty()) throw SchemeError("empty label in scheme");
    if (!seen.insert(l).second) throw SchemeError("duplicate label '" + l + "' in scheme");
  }
}

LabelScheme LabelScheme::cs6() { return LabelScheme({"lang1", "lang2", "ambiguous", "mixed", "other", "ne"}); }

LabelScheme LabelScheme::langid() { return LabelScheme({"en", "msa", "ne", "es", "arz", "other"}); }

LabelScheme LabelScheme::by_name(std::string_view name) {
  if (name == "cs6") return cs6();
  if (name == "langid") return langid();
  throw SchemeError("unknown scheme '" + std::string(name) + "' (expected cs6 or langid)");
}

std::optional<LabelId> LabelScheme::find(std::string_view label) const {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] == label) return static_cast<LabelId>(i);
  }
  return std::nullopt;
}

LabelId LabelScheme::id(std::string_view label) const {
  if (auto id = find(label)) return *id;
  throw LabelError(std::string(label));
}

// ---- Dataset ----

std::size_t Dataset::num_tokens() const {
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.size();
  return n;
}

bool Dataset::labeled() const {
  for (const auto& s : sentences) {
    for (const auto& t : s.tokens) {
      if (t.label == kNoLabel) return false;
    }
  }
  return true;
}

// ---- token file ----

namespace {

constexpr std::string_view kAuthorPrefix = "# author=";

}  // namespace

Dataset parse_token_file(std::istream& in, const LabelScheme& scheme, LabelPolicy policy) {
  Dataset ds;
  ds.scheme = scheme;
  Sentence current;
  bool have_header = false;
  auto flush = [&] {
    if (!current.tokens.empty()) ds.sentences.push_back(std::move(current));
    current = Sentence{};
    have_header = false;
  };

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!is_valid_utf8(line)) throw ParseError(lineno, "invalid UTF-8");
    if (line.empty()) {
      if (have_header && current.tokens.empty()) {
        throw ParseError(lineno, "author header without tokens");
      }
      flush();
      continue;
    }
    std::string_view view(line);
    if (view.starts_with(kAuthorPrefix) && view.find('\t') == std::string_view::npos) {
      if (!current.tokens.empty() || have_header) {
        throw ParseError(lineno, "author header must open a sentence block");
      }
      current.author = std::string(view.substr(kAuthorPrefix.size()));
      have_header = true;
      continue;
    }
    const auto fields = split(view, '\t');
    if (fields.size() > 2 || (fields.size() == 1 && policy == LabelPolicy::kRequired)) {
      throw ParseError(lineno, "expected 2 tab-separated fields, got " + std::to_string(fields.size()));
    }
    Token tok;
    tok.text = std::string(fields[0]);
    if (tok.text.empty()) throw ParseError(lineno, "empty token");
    if (tok.text.find_first_of(" \t\r\n\v\f") != std::string::npos) {
      throw ParseError(lineno, "token contains whitespace");
    }
    if (fields.size() == 2) {
      if (fields[1].empty() && policy == LabelPolicy::kOptional) {
        tok.label = kNoLabel;
      } else {
        tok.label = scheme.id(fields[1]);
      }
    }
    current.tokens.push_back(std::move(tok));
  }
  if (have_header && current.tokens.empty()) throw ParseError(lineno, "author header without tokens");
  flush();
  return ds;
}

Dataset parse_token_string(std::string_view text, const LabelScheme& scheme, LabelPolicy policy) {
  std::istringstream in{std::string(text)};
  return parse_token_file(in, scheme, policy);
}

Dataset read_token_file(const std::string& path, const LabelScheme& scheme, LabelPolicy policy) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return parse_token_file(in, scheme, policy);
}

void write_token_file(std::ostream& out, const Dataset& ds) {
  bool first = true;
  for (const auto& s : ds.sentences) {
    if (!first) out << '\n';
    first = false;
    if (!s.author.empty()) out << kAuthorPrefix << s.author << '\n';
    for (const auto& t : s.tokens) {
      out << t.text;
      if (t.label != kNoLabel) out << '\t' << ds.scheme.name(t.label);
      out << '\n';
    }
  }
}

std::string to_token_string(const Dataset& ds) {
  std::ostringstream out;
  write_token_file(out, ds);
  return out.str();
}

// ---- author split ----

DatasetSplit split_by_author(const Dataset& ds, SplitRatios ratios, std::uint64_t seed) {
  const std::array<double, 3> r{ratios.train, ratios.val, ratios.test};
  for (double x : r) {
    if (!(x > 0.0)) throw SplitError("split ratios must be positive");
  }
  if (std::abs(r[0] + r[1] + r[2] - 1.0) > 1e-9) throw SplitError("split ratios must sum to 1");

  std::vector<std::string> authors;
  std::map<std::string, std::size_t> sentence_count;
  for (const auto& s : ds.sentences) {
    if (sentence_count[s.author]++ == 0) authors.push_back(s.author);
  }
  if (authors.size() < 3) {
    throw SplitError("need at least 3 distinct authors, found " + std::to_string(authors.size()));
  }
  std::sort(authors.begin(), authors.end());
  Rng rng(derive_seed(seed, "split_by_author"));
  rng.shuffle(std::span<std::string>(authors));

  const double total = static_cast<double>(ds.sentences.size());
  std::array<double, 3> filled{0, 0, 0};
  std::array<std::size_t, 3> members{0, 0, 0};
  std::map<std::string, int> assignment;
  for (std::size_t a = 0; a < authors.size(); ++a) {
    const std::size_t remaining = authors.size() - a;
    const auto empty = static_cast<std::size_t>(std::count(members.begin(), members.end(), 0));
    int best = -1;
    double best_deficit = 0;
    for (int k = 0; k < 3; ++k) {
      // Keep every split non-empty once the authors left just cover the gaps.
      if (remaining <= empty && members[k] != 0) continue;
      const double deficit = r[k] * total - filled[k];
      if (best < 0 || deficit > best_deficit) {
        best = k;
        best_deficit = deficit;
      }
    }
    assignment[authors[a]] = best;
    filled[best] += static_cast<double>(sentence_count[authors[a]]);
    ++members[best];
  }

  DatasetSplit out;
  std::array<Dataset*, 3> parts{&out.train, &out.val, &out.test};
  for (auto* p : parts) p->scheme = ds.scheme;
  for (const auto& s : ds.sentences) parts[assignment[s.author]]->sentences.push_back(s);
  return out;
}

// ---- vocabularies ----

template <class Tag>
BasicVocab<Tag> BasicVocab<Tag>::from_counts(const std::map<std::string, std::int64_t>& counts,
                                             std::int64_t min_count) {
  std::vector<std::pair<std::string, std::int64_t>> kept;
  for (const auto& [w, c] : counts) {
    if (c >= min_count) kept.emplace_back(w, c);
  }
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return from_entries(std::move(kept));
}

template <class Tag>
BasicVocab<Tag> BasicVocab<Tag>::from_entries(std::vector<std::pair<std::string, std::int64_t>> entries) {
  BasicVocab v;
  v.words_.reserve(entries.size());
  v.counts_.reserve(entries.size());
  for (auto& [w, c] : entries) {
    if (c < 0) throw Error("negative vocabulary count for '" + w + "'");
    const auto idx = static_cast<std::int32_t>(v.words_.size()) + kReserved;
    if (!v.index_.emplace(w, idx).second) throw Error("duplicate vocabulary entry '" + w + "'");
    v.words_.push_back(std::move(w));
    v.counts_.push_back(c);
  }
  return v;
}

template <class Tag>
std::int32_t BasicVocab<Tag>::lookup(std::string_view s) const {
  const auto it = index_.find(std::string(s));
  return it == index_.end() ? kUnk : it->second;
}

template <class Tag>
std::int64_t BasicVocab<Tag>::count(std::string_view s) const {
  const auto it = index_.find(std::string(s));
  return it == index_.end() ? 0 : counts_[static_cast<std::size_t>(it->second - kReserved)];
}

template <class Tag>
std::vector<std::pair<std::string, std::int64_t>> BasicVocab<Tag>::to_entries() const {
  std::vector<std::pair<std::string, std::int64_t>> out;
  out.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) out.emplace_back(words_[i], counts_[i]);
  return out;
}

template class BasicVocab<WordTag>;
template class BasicVocab<NgramTag>;

std::map<std::string, std::int64_t> count_words(const Dataset& ds, bool lowercase) {
  std::map<std::string, std::int64_t> counts;
  for (const auto& s : ds.sentences) {
    for (const auto& t : s.tokens) ++counts[lowercase ? ascii_lower(t.text) : t.text];
  }
  return counts;
}

Vocab build_vocab(const Dataset& ds, std::int64_t min_count, bool lowercase) {
  if (min_count < 1) throw Error("min_count must be >= 1");
  return Vocab::from_counts(count_words(ds, lowercase), min_count);
}

// ---- synthetic corpora ----

std::vector<std::string> generate_word_inventory(std::u32string_view alphabet, int count, int min_len,
                                                 int max_len, std::uint64_t seed) {
  if (alphabet.empty()) throw GeneratorError("empty alphabet");
  if (count <= 0) throw GeneratorError("word_count must be positive");
  if (min_len < 1 || max_len < min_len) throw GeneratorError("invalid word length range");
  double capacity = 0;
  for (int len = min_len; len <= max_len && capacity < 1e18; ++len) {
    capacity += std::pow(static_cast<double>(alphabet.size()), len);
  }
  if (capacity < count) throw GeneratorError("alphabet too small for requested word_count");

  Rng rng(seed);
  std::set<std::string> seen;
  std::vector<std::string> words;
  const auto span = static_cast<std::uint64_t>(max_len - min_len + 1);
  while (static_cast<int>(words.size()) < count) {
    const auto len = min_len + static_cast<int>(rng.index(span));
    std::u32string w;
    for (int i = 0; i < len; ++i) w.push_back(alphabet[rng.index(alphabet.size())]);
    auto bytes = encode_utf8(w);
    if (seen.insert(bytes).second) words.push_back(std::move(bytes));
  }
  return words;
}

namespace {

std::u32string parse_alphabet(std::string_view value) {
  std::u32string out;
  for (char32_t c : decode_utf8(value)) {
    if (c != U' ' && c != U'\t' && out.find(c) == std::u32string::npos) out.push_back(c);
  }
  return out;
}

}  // namespace

SynthSpec parse_synth_spec(std::istream& in) {
  SynthSpec spec;
  SynthLanguage* lang = nullptr;
  std::string line;
  std::size_t lineno = 0;
  auto to_int = [&](std::string_view v) {
    try {
      std::size_t pos = 0;
      const long long x = std::stoll(std::string(v), &pos);
      if (pos != v.size()) throw std::invalid_argument("trailing");
      return x;
    } catch (const std::exception&) {
      throw ParseError(lineno, "expected integer, got '" + std::string(v) + "'");
    }
  };
  auto to_double = [&](std::string_view v) {
    try {
      std::size_t pos = 0;
      const double x = std::stod(std::string(v), &pos);
      if (pos != v.size()) throw std::invalid_argument("trailing");
      return x;
    } catch (const std::exception&) {
      throw ParseError(lineno, "expected number, got '" + std::string(v) + "'");
    }
  };

  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    if (view.front() == '[') {
      if (view.back() != ']') throw ParseError(lineno, "unterminated section header");
      const auto inner = trim(view.substr(1, view.size() - 2));
      if (!inner.starts_with("language")) throw ParseError(lineno, "unknown section '" + std::string(inner) + "'");
      const auto name = trim(inner.substr(8));
      if (name.empty()) throw ParseError(lineno, "language section needs a name");
      spec.languages.push_back(SynthLanguage{});
      lang = &spec.languages.back();
      lang->name = std::string(name);
      continue;
    }
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) throw ParseError(lineno, "expected 'key = value'");
    const auto key = trim(view.substr(0, eq));
    const auto value = trim(view.substr(eq + 1));
    if (lang == nullptr) {
      if (key == "num_sentences") spec.num_sentences = static_cast<int>(to_int(value));
      else if (key == "mean_length") spec.mean_length = to_double(value);
      else if (key == "switch_probability") spec.switch_probability = to_double(value);
      else if (key == "num_authors") spec.num_authors = static_cast<int>(to_int(value));
      else if (key == "seed") spec.seed = static_cast<std::uint64_t>(to_int(value));
      else if (key == "scheme") spec.scheme = std::string(value);
      else throw ParseError(lineno, "unknown key '" + std::string(key) + "'");
    } else {
      if (key == "label") {
        lang->label = std::string(value);
      } else if (key == "words") {
        for (auto w : split(value, ' ')) {
          if (!trim(w).empty()) lang->words.emplace_back(trim(w));
        }
      } else if (key == "alphabet") {
        lang->alphabet = parse_alphabet(value);
      } else if (key == "word_count") {
        lang->word_count = static_cast<int>(to_int(value));
      } else if (key == "min_len") {
        lang->min_len = static_cast<int>(to_int(value));
      } else if (key == "max_len") {
        lang->max_len = static_cast<int>(to_int(value));
      } else {
        throw ParseError(lineno, "unknown language key '" + std::string(key) + "'");
      }
    }
  }
  return spec;
}

SynthSpec read_synth_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return parse_synth_spec(in);
}

Dataset synth_corpus(const SynthSpec& spec, std::optional<std::uint64_t> seed_override) {
  const std::uint64_t seed = seed_override.value_or(spec.seed);
  if (spec.languages.size() < 2) throw GeneratorError("need at least 2 languages");
  if (!(spec.switch_probability >= 0.0 && spec.switch_probability <= 1.0)) {
    throw GeneratorError("switch_probability must lie in [0, 1]");
  }
  if (spec.num_sentences < 0) throw GeneratorError("num_sentences must be non-negative");
  if (!(spec.mean_length >= 1.0)) throw GeneratorError("mean_length must be >= 1");

  std::vector<std::string> label_names;
  for (const auto& l : spec.languages) label_names.push_back(l.label.empty() ? l.name : l.label);
  Dataset ds;
  if (spec.scheme == "auto") {
    ds.scheme = LabelScheme(label_names);
  } else {
    ds.scheme = LabelScheme::by_name(spec.scheme);
  }

  std::vector<std::vector<std::string>> inventories;
  std::vector<LabelId> labels;
  for (std::size_t k = 0; k < spec.languages.size(); ++k) {
    const auto& l = spec.languages[k];
    std::vector<std::string> words = l.words;
    if (words.empty() && l.word_count > 0 && !l.alphabet.empty()) {
      words = generate_word_inventory(l.alphabet, l.word_count, l.min_len, l.max_len,
                                      derive_seed(seed, "inventory:" + l.name));
    }
    if (words.empty()) throw GeneratorError("language '" + l.name + "' has an empty word inventory");
    for (const auto& w : words) {
      if (w.empty() || w.find_first_of(" \t\r\n") != std::string::npos) {
        throw GeneratorError("language '" + l.name + "' has an invalid word '" + w + "'");
      }
    }
    inventories.push_back(std::move(words));
    labels.push_back(ds.scheme.id(label_names[k]));
  }

  const int num_authors = spec.num_authors > 0 ? spec.num_authors : std::max(3, spec.num_sentences / 5);
  const auto max_len = static_cast<std::uint64_t>(std::llround(2.0 * spec.mean_length - 1.0));
  const std::uint64_t nlang = inventories.size();
  Rng rng(derive_seed(seed, "synth_corpus"));
  for (int i = 0; i < spec.num_sentences; ++i) {
    Sentence s;
    s.author = "a" + std::to_string(rng.index(static_cast<std::uint64_t>(num_authors)));
    const auto len = 1 + rng.index(max_len);
    auto lang = rng.index(nlang);
    for (std::uint64_t t = 0; t < len; ++t) {
      if (t > 0 && rng.bernoulli(spec.switch_probability)) {
        lang = (lang + 1 + rng.index(nlang - 1)) % nlang;
      }
      const auto& inv = inventories[lang];
      s.tokens.push_back(Token{inv[rng.index(inv.size())], labels[lang]});
    }
    ds.sentences.push_back(std::move(s));
  }
  return ds;
}

}  // namespace csrnn
