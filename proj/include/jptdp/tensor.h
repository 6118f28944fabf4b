#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "jptdp/errors.h"

namespace jptdp {

#ifdef JPTDP_SINGLE_PRECISION
using real = float;
#else
using real = double;
#endif

// Dense rank-1 or rank-2 tensor. Rank-2 data is row-major.
struct Tensor {
  std::vector<int> shape;
  std::vector<real> data;

  Tensor() = default;

  static Tensor vec(int n, real fill = 0) {
    Tensor t;
    t.shape = {n};
    t.data.assign(static_cast<std::size_t>(n), fill);
    return t;
  }

  static Tensor mat(int rows, int cols, real fill = 0) {
    Tensor t;
    t.shape = {rows, cols};
    t.data.assign(static_cast<std::size_t>(rows) * cols, fill);
    return t;
  }

  static Tensor zeros_like(const Tensor& o) {
    Tensor t;
    t.shape = o.shape;
    t.data.assign(o.data.size(), 0);
    return t;
  }

  int rank() const { return static_cast<int>(shape.size()); }
  int rows() const { return shape.empty() ? 0 : shape[0]; }
  int cols() const { return rank() == 2 ? shape[1] : 1; }
  int size() const { return static_cast<int>(data.size()); }

  real& operator()(int i) { return data[static_cast<std::size_t>(i)]; }
  real operator()(int i) const { return data[static_cast<std::size_t>(i)]; }
  real& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols() + c]; }
  real operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols() + c]; }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
  void fill(real v) { std::fill(data.begin(), data.end(), v); }

  std::string shape_str() const {
    if (rank() == 2) {
      return "[" + std::to_string(shape[0]) + "x" + std::to_string(shape[1]) + "]";
    }
    if (rank() == 1) {
      return "[" + std::to_string(shape[0]) + "]";
    }
    return "[]";
  }
};

}  // namespace jptdp
