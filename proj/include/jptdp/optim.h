#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "jptdp/tensor.h"

namespace jptdp {

// A trainable tensor plus its Adam state. Gradients accumulate across
// backward passes and are cleared by adam_update.
struct ParamTensor {
  std::string name;
  Tensor value;
  Tensor grad;
  Tensor adam_m;
  Tensor adam_v;
  std::int64_t step_count = 0;

  ParamTensor() = default;
  ParamTensor(std::string name_, Tensor value_)
      : name(std::move(name_)),
        value(std::move(value_)),
        grad(Tensor::zeros_like(value)),
        adam_m(Tensor::zeros_like(value)),
        adam_v(Tensor::zeros_like(value)) {}

  void clear_grad() { grad.fill(0); }
};

struct AdamConfig {
  real lr = static_cast<real>(0.001);
  real beta1 = static_cast<real>(0.9);
  real beta2 = static_cast<real>(0.999);
  real eps = static_cast<real>(1e-8);
};

// One Adam step with bias correction over all parameters; clears gradients.
// Throws NumericError naming the parameter if any gradient is non-finite.
void adam_update(const std::vector<ParamTensor*>& params, const AdamConfig& cfg = {});

// Glorot-uniform fill: U(-sqrt(6/(fan_in+fan_out)), +...). Rank-1 tensors
// use fan_out = 1.
void glorot_init(Tensor& t, std::mt19937_64& rng);

}  // namespace jptdp
