#pragma once

#include <cstdint>
#include <random>
#include <unordered_map>
#include <vector>

#include "jptdp/optim.h"
#include "jptdp/tensor.h"

namespace jptdp {

using NodeRef = std::int32_t;

// Dynamically built reverse-mode computation graph over Tensors. Values are
// computed eagerly as nodes are appended; backward() walks the tape in
// reverse and accumulates parameter gradients into ParamTensor::grad.
// One graph per sentence, single-threaded.
class Graph {
 public:
  enum class Op : std::uint8_t {
    kInput,
    kParam,
    kMatVec,
    kMatVecCols,
    kAdd,
    kSub,
    kConcat,
    kTanh,
    kLogistic,
    kMul,
    kPickRow,
    kPick,
    kNegLogSoftmax,
    kMaxScalar,
    kSum,
  };

  // Leaves.
  NodeRef input(Tensor v);
  NodeRef constant(real c);
  // One leaf per distinct ParamTensor per graph; repeated calls return the
  // cached node so fan-out accumulation covers every use site.
  NodeRef param(ParamTensor& p);

  // Ops. All compute eagerly and throw DimensionError on shape mismatch.
  NodeRef matvec(NodeRef w, NodeRef x);
  // W[:, col_begin : col_begin + len(x)] * x, used to split a concatenated
  // MLP input into per-position halves without materializing the concat.
  NodeRef matvec_cols(NodeRef w, NodeRef x, int col_begin);
  NodeRef add(NodeRef a, NodeRef b);
  NodeRef sub(NodeRef a, NodeRef b);
  NodeRef concat(NodeRef a, NodeRef b);
  NodeRef tanh(NodeRef x);
  NodeRef logistic(NodeRef x);
  NodeRef mul(NodeRef a, NodeRef b);
  NodeRef pick_row(NodeRef m, int row);
  NodeRef pick(NodeRef v, int index);
  NodeRef neg_log_softmax(NodeRef logits, int gold_index);
  NodeRef max(NodeRef a, real floor);
  NodeRef sum(NodeRef v);

  // Adds N(0, sigma^2) elementwise in training mode, identity otherwise.
  // The noise is a constant leaf, so gradients pass through unchanged.
  NodeRef gaussian_noise(NodeRef x, real sigma, bool training, std::mt19937_64& rng);

  const Tensor& value(NodeRef n) const { return nodes_[check(n)].value; }
  // Gradient of the most recent backward() target w.r.t. this node.
  const Tensor& gradient(NodeRef n) const;

  // Seeds d(loss)/d(loss)=1 and accumulates into every trainable ancestor's
  // ParamTensor::grad. May be called repeatedly (e.g. once per loss term);
  // parameter gradients add up across calls.
  void backward(NodeRef loss);

  std::size_t num_nodes() const { return nodes_.size(); }

 private:
  struct Node {
    Op op;
    Tensor value;
    Tensor grad;
    bool has_grad = false;
    NodeRef a = -1;
    NodeRef b = -1;
    int index = 0;    // row / element / gold index / col_begin
    real scalar = 0;  // floor for kMaxScalar
    ParamTensor* param = nullptr;
    Tensor aux;  // cached softmax for kNegLogSoftmax
  };

  NodeRef push(Node n);
  NodeRef check(NodeRef n) const;
  void ensure_grad(Node& n);

  std::vector<Node> nodes_;
  std::unordered_map<const ParamTensor*, NodeRef> param_nodes_;
};

}  // namespace jptdp
