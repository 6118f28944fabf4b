#include "jptdp/graph.h"

#include <cmath>

#include "jptdp/errors.h"

namespace jptdp {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw DimensionError(msg);
}

}  // namespace

NodeRef Graph::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<NodeRef>(nodes_.size() - 1);
}

NodeRef Graph::check(NodeRef n) const {
  if (n < 0 || static_cast<std::size_t>(n) >= nodes_.size())
    throw ContractError("graph: node reference " + std::to_string(n) + " out of range");
  return n;
}

void Graph::ensure_grad(Node& n) {
  if (!n.has_grad) {
    n.grad = Tensor::zeros_like(n.value);
    n.has_grad = true;
  }
}

NodeRef Graph::input(Tensor v) {
  Node n;
  n.op = Op::kInput;
  n.value = std::move(v);
  return push(std::move(n));
}

NodeRef Graph::constant(real c) {
  Node n;
  n.op = Op::kInput;
  n.value = Tensor::vec(1, c);
  return push(std::move(n));
}

NodeRef Graph::param(ParamTensor& p) {
  auto it = param_nodes_.find(&p);
  if (it != param_nodes_.end()) return it->second;
  Node n;
  n.op = Op::kParam;
  n.value = p.value;
  n.param = &p;
  NodeRef ref = push(std::move(n));
  param_nodes_.emplace(&p, ref);
  return ref;
}

NodeRef Graph::matvec(NodeRef w, NodeRef x) {
  const Tensor& W = value(check(w));
  const Tensor& v = value(check(x));
  require(W.rank() == 2 && v.rank() == 1 && W.cols() == v.size(),
          "matvec: shape mismatch " + W.shape_str() + " * " + v.shape_str());
  Node n;
  n.op = Op::kMatVec;
  n.a = w;
  n.b = x;
  n.value = Tensor::vec(W.rows());
  for (int i = 0; i < W.rows(); ++i) {
    real acc = 0;
    for (int j = 0; j < W.cols(); ++j) acc += W(i, j) * v(j);
    n.value(i) = acc;
  }
  return push(std::move(n));
}

NodeRef Graph::matvec_cols(NodeRef w, NodeRef x, int col_begin) {
  const Tensor& W = value(check(w));
  const Tensor& v = value(check(x));
  require(W.rank() == 2 && v.rank() == 1 && col_begin >= 0 &&
              col_begin + v.size() <= W.cols(),
          "matvec_cols: columns [" + std::to_string(col_begin) + ", " +
              std::to_string(col_begin + v.size()) + ") out of " + W.shape_str());
  Node n;
  n.op = Op::kMatVecCols;
  n.a = w;
  n.b = x;
  n.index = col_begin;
  n.value = Tensor::vec(W.rows());
  for (int i = 0; i < W.rows(); ++i) {
    real acc = 0;
    for (int j = 0; j < v.size(); ++j) acc += W(i, col_begin + j) * v(j);
    n.value(i) = acc;
  }
  return push(std::move(n));
}

NodeRef Graph::add(NodeRef a, NodeRef b) {
  const Tensor& va = value(check(a));
  const Tensor& vb = value(check(b));
  require(va.same_shape(vb), "add: shape mismatch " + va.shape_str() + " + " + vb.shape_str());
  Node n;
  n.op = Op::kAdd;
  n.a = a;
  n.b = b;
  n.value = va;
  for (int i = 0; i < va.size(); ++i) n.value.data[i] += vb.data[i];
  return push(std::move(n));
}

NodeRef Graph::sub(NodeRef a, NodeRef b) {
  const Tensor& va = value(check(a));
  const Tensor& vb = value(check(b));
  require(va.same_shape(vb), "sub: shape mismatch " + va.shape_str() + " - " + vb.shape_str());
  Node n;
  n.op = Op::kSub;
  n.a = a;
  n.b = b;
  n.value = va;
  for (int i = 0; i < va.size(); ++i) n.value.data[i] -= vb.data[i];
  return push(std::move(n));
}

NodeRef Graph::concat(NodeRef a, NodeRef b) {
  const Tensor& va = value(check(a));
  const Tensor& vb = value(check(b));
  require(va.rank() == 1 && vb.rank() == 1,
          "concat: expected vectors, got " + va.shape_str() + " and " + vb.shape_str());
  Node n;
  n.op = Op::kConcat;
  n.a = a;
  n.b = b;
  n.value = Tensor::vec(va.size() + vb.size());
  for (int i = 0; i < va.size(); ++i) n.value(i) = va.data[i];
  for (int i = 0; i < vb.size(); ++i) n.value(va.size() + i) = vb.data[i];
  return push(std::move(n));
}

NodeRef Graph::tanh(NodeRef x) {
  Node n;
  n.op = Op::kTanh;
  n.a = check(x);
  n.value = value(x);
  for (real& v : n.value.data) v = std::tanh(v);
  return push(std::move(n));
}

NodeRef Graph::logistic(NodeRef x) {
  Node n;
  n.op = Op::kLogistic;
  n.a = check(x);
  n.value = value(x);
  for (real& v : n.value.data) v = real(1) / (real(1) + std::exp(-v));
  return push(std::move(n));
}

NodeRef Graph::mul(NodeRef a, NodeRef b) {
  const Tensor& va = value(check(a));
  const Tensor& vb = value(check(b));
  require(va.same_shape(vb), "mul: shape mismatch " + va.shape_str() + " * " + vb.shape_str());
  Node n;
  n.op = Op::kMul;
  n.a = a;
  n.b = b;
  n.value = va;
  for (int i = 0; i < va.size(); ++i) n.value.data[i] *= vb.data[i];
  return push(std::move(n));
}

NodeRef Graph::pick_row(NodeRef m, int row) {
  const Tensor& M = value(check(m));
  require(M.rank() == 2 && row >= 0 && row < M.rows(),
          "pick_row: row " + std::to_string(row) + " out of " + M.shape_str());
  Node n;
  n.op = Op::kPickRow;
  n.a = m;
  n.index = row;
  n.value = Tensor::vec(M.cols());
  for (int j = 0; j < M.cols(); ++j) n.value(j) = M(row, j);
  return push(std::move(n));
}

NodeRef Graph::pick(NodeRef v, int index) {
  const Tensor& x = value(check(v));
  require(x.rank() == 1 && index >= 0 && index < x.size(),
          "pick: index " + std::to_string(index) + " out of " + x.shape_str());
  Node n;
  n.op = Op::kPick;
  n.a = v;
  n.index = index;
  n.value = Tensor::vec(1, x(index));
  return push(std::move(n));
}

NodeRef Graph::neg_log_softmax(NodeRef logits, int gold_index) {
  const Tensor& x = value(check(logits));
  require(x.rank() == 1 && gold_index >= 0 && gold_index < x.size(),
          "neg_log_softmax: gold " + std::to_string(gold_index) + " out of " + x.shape_str());
  Node n;
  n.op = Op::kNegLogSoftmax;
  n.a = logits;
  n.index = gold_index;
  real mx = x(0);
  for (int i = 1; i < x.size(); ++i) mx = std::max(mx, x(i));
  real z = 0;
  for (int i = 0; i < x.size(); ++i) z += std::exp(x(i) - mx);
  n.aux = Tensor::vec(x.size());
  for (int i = 0; i < x.size(); ++i) n.aux(i) = std::exp(x(i) - mx) / z;
  n.value = Tensor::vec(1, -(x(gold_index) - mx - std::log(z)));
  return push(std::move(n));
}

NodeRef Graph::max(NodeRef a, real floor) {
  Node n;
  n.op = Op::kMaxScalar;
  n.a = check(a);
  n.scalar = floor;
  n.value = value(a);
  for (real& v : n.value.data) v = std::max(v, floor);
  return push(std::move(n));
}

NodeRef Graph::sum(NodeRef v) {
  const Tensor& x = value(check(v));
  Node n;
  n.op = Op::kSum;
  n.a = v;
  real acc = 0;
  for (real e : x.data) acc += e;
  n.value = Tensor::vec(1, acc);
  return push(std::move(n));
}

NodeRef Graph::gaussian_noise(NodeRef x, real sigma, bool training, std::mt19937_64& rng) {
  if (!training || sigma <= 0) return check(x);
  std::normal_distribution<real> dist(0, sigma);
  Tensor noise = Tensor::zeros_like(value(x));
  for (real& v : noise.data) v = dist(rng);
  return add(x, input(std::move(noise)));
}

const Tensor& Graph::gradient(NodeRef n) const {
  const Node& node = nodes_[check(n)];
  if (!node.has_grad)
    throw ContractError("graph: gradient queried before backward reached node " +
                        std::to_string(n));
  return node.grad;
}

void Graph::backward(NodeRef loss) {
  Node& top = nodes_[check(loss)];
  if (top.value.size() != 1)
    throw ContractError("backward: loss must be scalar, got " + top.value.shape_str());
  for (Node& n : nodes_) {
    n.has_grad = false;
  }
  ensure_grad(top);
  top.grad(0) = 1;

  for (NodeRef i = static_cast<NodeRef>(nodes_.size()) - 1; i >= 0; --i) {
    Node& n = nodes_[i];
    if (!n.has_grad) continue;
    const Tensor& g = n.grad;
    switch (n.op) {
      case Op::kInput:
        break;
      case Op::kParam:
        for (int k = 0; k < g.size(); ++k) n.param->grad.data[k] += g.data[k];
        break;
      case Op::kMatVec: {
        Node& w = nodes_[n.a];
        Node& x = nodes_[n.b];
        ensure_grad(w);
        ensure_grad(x);
        const Tensor& W = w.value;
        const Tensor& v = x.value;
        for (int r = 0; r < W.rows(); ++r) {
          real gr = g(r);
          if (gr == 0) continue;
          for (int c = 0; c < W.cols(); ++c) {
            w.grad(r, c) += gr * v(c);
            x.grad(c) += gr * W(r, c);
          }
        }
        break;
      }
      case Op::kMatVecCols: {
        Node& w = nodes_[n.a];
        Node& x = nodes_[n.b];
        ensure_grad(w);
        ensure_grad(x);
        const Tensor& W = w.value;
        const Tensor& v = x.value;
        for (int r = 0; r < W.rows(); ++r) {
          real gr = g(r);
          if (gr == 0) continue;
          for (int c = 0; c < v.size(); ++c) {
            w.grad(r, n.index + c) += gr * v(c);
            x.grad(c) += gr * W(r, n.index + c);
          }
        }
        break;
      }
      case Op::kAdd: {
        Node& a = nodes_[n.a];
        Node& b = nodes_[n.b];
        ensure_grad(a);
        ensure_grad(b);
        for (int k = 0; k < g.size(); ++k) {
          a.grad.data[k] += g.data[k];
          b.grad.data[k] += g.data[k];
        }
        break;
      }
      case Op::kSub: {
        Node& a = nodes_[n.a];
        Node& b = nodes_[n.b];
        ensure_grad(a);
        ensure_grad(b);
        for (int k = 0; k < g.size(); ++k) {
          a.grad.data[k] += g.data[k];
          b.grad.data[k] -= g.data[k];
        }
        break;
      }
      case Op::kConcat: {
        Node& a = nodes_[n.a];
        Node& b = nodes_[n.b];
        ensure_grad(a);
        ensure_grad(b);
        int na = a.value.size();
        for (int k = 0; k < na; ++k) a.grad.data[k] += g.data[k];
        for (int k = 0; k < b.value.size(); ++k) b.grad.data[k] += g.data[na + k];
        break;
      }
      case Op::kTanh: {
        Node& a = nodes_[n.a];
        ensure_grad(a);
        for (int k = 0; k < g.size(); ++k) {
          real t = n.value.data[k];
          a.grad.data[k] += g.data[k] * (real(1) - t * t);
        }
        break;
      }
      case Op::kLogistic: {
        Node& a = nodes_[n.a];
        ensure_grad(a);
        for (int k = 0; k < g.size(); ++k) {
          real s = n.value.data[k];
          a.grad.data[k] += g.data[k] * s * (real(1) - s);
        }
        break;
      }
      case Op::kMul: {
        Node& a = nodes_[n.a];
        Node& b = nodes_[n.b];
        ensure_grad(a);
        ensure_grad(b);
        for (int k = 0; k < g.size(); ++k) {
          a.grad.data[k] += g.data[k] * b.value.data[k];
          b.grad.data[k] += g.data[k] * a.value.data[k];
        }
        break;
      }
      case Op::kPickRow: {
        Node& m = nodes_[n.a];
        ensure_grad(m);
        for (int c = 0; c < n.value.size(); ++c) m.grad(n.index, c) += g(c);
        break;
      }
      case Op::kPick: {
        Node& a = nodes_[n.a];
        ensure_grad(a);
        a.grad(n.index) += g(0);
        break;
      }
      case Op::kNegLogSoftmax: {
        Node& a = nodes_[n.a];
        ensure_grad(a);
        real gs = g(0);
        for (int k = 0; k < a.value.size(); ++k) {
          real p = n.aux(k);
          a.grad(k) += gs * (p - (k == n.index ? real(1) : real(0)));
        }
        break;
      }
      case Op::kMaxScalar: {
        Node& a = nodes_[n.a];
        ensure_grad(a);
        for (int k = 0; k < g.size(); ++k)
          if (a.value.data[k] > n.scalar) a.grad.data[k] += g.data[k];
        break;
      }
      case Op::kSum: {
        Node& a = nodes_[n.a];
        ensure_grad(a);
        real gs = g(0);
        for (int k = 0; k < a.value.size(); ++k) a.grad.data[k] += gs;
        break;
      }
    }
  }
}

}  // namespace jptdp
