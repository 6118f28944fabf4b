#include "jptdp/eisner.h"

#include <cstdint>
#include <limits>
#include <tuple>

#include "jptdp/errors.h"

namespace jptdp {

namespace {

constexpr real kNegInf = -std::numeric_limits<real>::infinity();

// Span charts for first-order projective parsing: complete (cl/cr) and
// incomplete (il/ir) items per direction, plus split backpointers. Both
// incomplete directions share a split point, so one bi chart suffices.
struct Chart {
  enum class Kind : std::uint8_t { kCL, kCR, kIL, kIR };

  int stride;
  std::vector<real> cl, cr, il, ir;
  std::vector<int> bcl, bcr, bi;

  explicit Chart(int n1)
      : stride(n1),
        cl(n1 * n1, kNegInf),
        cr(n1 * n1, kNegInf),
        il(n1 * n1, kNegInf),
        ir(n1 * n1, kNegInf),
        bcl(n1 * n1, -1),
        bcr(n1 * n1, -1),
        bi(n1 * n1, -1) {}

  int at(int s, int t) const { return s * stride + t; }

  void run(const Tensor& scores, int lo, int hi) {
    for (int i = lo; i <= hi; ++i) {
      cl[at(i, i)] = 0;
      cr[at(i, i)] = 0;
    }
    for (int len = 1; len <= hi - lo; ++len) {
      for (int s = lo; s + len <= hi; ++s) {
        int t = s + len;
        real best = kNegInf;
        int bestr = -1;
        for (int r = s; r < t; ++r) {
          real cand = cr[at(s, r)] + cl[at(r + 1, t)];
          if (cand > best) {
            best = cand;
            bestr = r;
          }
        }
        bi[at(s, t)] = bestr;
        ir[at(s, t)] = best + scores(s, t);
        il[at(s, t)] = best + scores(t, s);

        best = kNegInf;
        bestr = -1;
        for (int r = s + 1; r <= t; ++r) {
          real cand = ir[at(s, r)] + cr[at(r, t)];
          if (cand > best) {
            best = cand;
            bestr = r;
          }
        }
        cr[at(s, t)] = best;
        bcr[at(s, t)] = bestr;

        best = kNegInf;
        bestr = -1;
        for (int r = s; r < t; ++r) {
          real cand = cl[at(s, r)] + il[at(r, t)];
          if (cand > best) {
            best = cand;
            bestr = r;
          }
        }
        cl[at(s, t)] = best;
        bcl[at(s, t)] = bestr;
      }
    }
  }

  void backtrack(Kind k0, int s0, int t0, std::vector<int>& heads) const {
    std::vector<std::tuple<Kind, int, int>> stack{{k0, s0, t0}};
    while (!stack.empty()) {
      auto [k, s, t] = stack.back();
      stack.pop_back();
      if (s == t) continue;
      switch (k) {
        case Kind::kCR: {
          int r = bcr[at(s, t)];
          stack.emplace_back(Kind::kIR, s, r);
          stack.emplace_back(Kind::kCR, r, t);
          break;
        }
        case Kind::kCL: {
          int r = bcl[at(s, t)];
          stack.emplace_back(Kind::kCL, s, r);
          stack.emplace_back(Kind::kIL, r, t);
          break;
        }
        case Kind::kIR: {
          heads[t] = s;
          int r = bi[at(s, t)];
          stack.emplace_back(Kind::kCR, s, r);
          stack.emplace_back(Kind::kCL, r + 1, t);
          break;
        }
        case Kind::kIL: {
          heads[s] = t;
          int r = bi[at(s, t)];
          stack.emplace_back(Kind::kCR, s, r);
          stack.emplace_back(Kind::kCL, r + 1, t);
          break;
        }
      }
    }
  }
};

void check_square(const Tensor& scores, const char* who) {
  if (scores.rank() != 2 || scores.rows() != scores.cols() || scores.rows() < 1)
    throw DimensionError(std::string(who) + ": expected square score matrix, got " +
                         scores.shape_str());
}

}  // namespace

std::vector<int> eisner_decode(const Tensor& scores, bool single_root) {
  check_square(scores, "eisner_decode");
  int n = scores.rows() - 1;
  std::vector<int> heads(n + 1, -1);
  if (n == 0) return heads;
  Chart chart(n + 1);
  if (single_root) {
    chart.run(scores, 1, n);
    real best = kNegInf;
    int bestr = -1;
    for (int r = 1; r <= n; ++r) {
      real cand = scores(0, r) + chart.cl[chart.at(1, r)] + chart.cr[chart.at(r, n)];
      if (cand > best) {
        best = cand;
        bestr = r;
      }
    }
    heads[bestr] = 0;
    chart.backtrack(Chart::Kind::kCL, 1, bestr, heads);
    chart.backtrack(Chart::Kind::kCR, bestr, n, heads);
  } else {
    chart.run(scores, 0, n);
    chart.backtrack(Chart::Kind::kCR, 0, n, heads);
  }
  return heads;
}

real tree_score(const Tensor& scores, const std::vector<int>& heads) {
  check_square(scores, "tree_score");
  if (static_cast<int>(heads.size()) != scores.rows())
    throw ContractError("tree_score: heads size " + std::to_string(heads.size()) +
                        " does not match " + scores.shape_str());
  real total = 0;
  for (int m = 1; m < scores.rows(); ++m) {
    int h = heads[m];
    if (h < 0 || h >= scores.rows())
      throw ContractError("tree_score: head " + std::to_string(h) + " of token " +
                          std::to_string(m) + " out of range");
    total += scores(h, m);
  }
  return total;
}

void loss_augment(Tensor& scores, const std::vector<int>& gold, real margin) {
  check_square(scores, "loss_augment");
  if (static_cast<int>(gold.size()) != scores.rows())
    throw ContractError("loss_augment: gold size " + std::to_string(gold.size()) +
                        " does not match " + scores.shape_str());
  int n = scores.rows() - 1;
  for (int m = 1; m <= n; ++m)
    for (int h = 0; h <= n; ++h)
      if (h != m && h != gold[m]) scores(h, m) += margin;
}

bool is_projective(const std::vector<int>& heads) {
  int n = static_cast<int>(heads.size()) - 1;
  std::vector<std::pair<int, int>> arcs;
  arcs.reserve(n);
  for (int m = 1; m <= n; ++m) {
    int h = heads[m];
    if (h < 0 || h > n)
      throw ContractError("is_projective: head " + std::to_string(h) + " of token " +
                          std::to_string(m) + " out of range");
    arcs.emplace_back(std::min(h, m), std::max(h, m));
  }
  for (std::size_t i = 0; i < arcs.size(); ++i)
    for (std::size_t j = i + 1; j < arcs.size(); ++j) {
      auto [a, b] = arcs[i];
      auto [c, d] = arcs[j];
      if ((a < c && c < b && b < d) || (c < a && a < d && d < b)) return false;
    }
  return true;
}

}  // namespace jptdp
