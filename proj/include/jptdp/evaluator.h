#pragma once

#include <cstdint>
#include <vector>

#include "jptdp/conllu.h"
#include "jptdp/tensor.h"

namespace jptdp {

struct Metrics {
  real upos_acc = 1;
  real uas = 1;
  real las = 1;
  real mixed = 1;  // UPOS, head, and deprel all correct
  std::int64_t token_count = 0;
};

struct EvalOptions {
  bool include_punct = true;           // Table-style scoring counts punctuation
  bool strip_deprel_subtypes = false;  // compare deprels up to the first ':'
};

// Token-level accuracy of pred against gold. Sentences and forms must align
// positionally; mismatch throws EvalError naming the sentence. An empty
// denominator yields all-ones metrics.
Metrics evaluate(const std::vector<Sentence>& gold, const std::vector<Sentence>& pred,
                 const EvalOptions& opts = {});

// Fraction of test tokens whose lowercased form never occurs in train.
real oov_rate(const std::vector<Sentence>& train, const std::vector<Sentence>& test);

}  // namespace jptdp
