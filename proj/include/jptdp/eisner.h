#pragma once

#include <vector>

#include "jptdp/tensor.h"

namespace jptdp {

// Projective maximum spanning tree over arc scores. scores is an
// (n+1)x(n+1) matrix with scores(h, m) the score of head h -> modifier m;
// row/column 0 is the artificial root. Returns heads of size n+1 with
// heads[0] = -1 and heads[m] in [0, n] for m >= 1.
//
// single_root restricts node 0 to exactly one child. Ties break toward the
// tree found first when split points and roots are scanned in ascending
// order, so equal-score inputs decode deterministically.
std::vector<int> eisner_decode(const Tensor& scores, bool single_root = true);

// Sum of scores(heads[m], m) over m in [1, n].
real tree_score(const Tensor& scores, const std::vector<int>& heads);

// Adds margin to scores(h, m) for every candidate arc (h != m, m >= 1)
// whose head differs from gold[m]. Decoding the result performs
// loss-augmented inference for the structured hinge.
void loss_augment(Tensor& scores, const std::vector<int>& gold, real margin);

// True when no two arcs cross: there is no pair of arcs spanning (a, b) and
// (c, d) with a < c < b < d. heads as returned by eisner_decode.
bool is_projective(const std::vector<int>& heads);

}  // namespace jptdp
