#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>

#include "csrnn/corpus.hpp"

namespace csrnn {

// Dictionary baseline over the code-switch labels: each word gets whichever
// of lang1/lang2 it carried more often in training, unseen words get `other`,
// and ties go to the corpus-wide majority language.
struct LexiconBaseline {
  LabelScheme scheme;
  std::map<std::string, std::pair<std::int64_t, std::int64_t>> counts;  // (lang1, lang2)
  LabelId lang1 = 0;
  LabelId lang2 = 1;
  LabelId other = 4;
  LabelId majority = 0;
};

// Throws SchemeError unless the scheme has lang1, lang2 and other.
LexiconBaseline fit_baseline(const Dataset& train);
LabelId predict_baseline(const LexiconBaseline& m, std::string_view word);

// Rewrites a per-language dataset into the code-switch labels: pair_first
// becomes lang1, pair_second lang2, the scheme's `other` stays `other`, and
// any remaining language label becomes `other`.
Dataset to_code_switch_labels(const Dataset& ds, std::string_view pair_first, std::string_view pair_second);

// `# majority=<label>` header, then sorted `word<TAB>count1<TAB>count2` lines.
void save_baseline(std::ostream& out, const LexiconBaseline& m);
LexiconBaseline load_baseline(std::istream& in);

}  // namespace csrnn
