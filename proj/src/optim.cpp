#include "jptdp/optim.h"

#include <cmath>

#include "jptdp/errors.h"

namespace jptdp {

void adam_update(const std::vector<ParamTensor*>& params, const AdamConfig& cfg) {
  for (ParamTensor* p : params) {
    p->step_count += 1;
    real bc1 = real(1) - std::pow(cfg.beta1, static_cast<real>(p->step_count));
    real bc2 = real(1) - std::pow(cfg.beta2, static_cast<real>(p->step_count));
    for (int i = 0; i < p->value.size(); ++i) {
      real g = p->grad.data[i];
      if (!std::isfinite(g))
        throw NumericError("adam_update: non-finite gradient in parameter " + p->name);
      real& m = p->adam_m.data[i];
      real& v = p->adam_v.data[i];
      m = cfg.beta1 * m + (real(1) - cfg.beta1) * g;
      v = cfg.beta2 * v + (real(1) - cfg.beta2) * g * g;
      real mhat = m / bc1;
      real vhat = v / bc2;
      p->value.data[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
    p->clear_grad();
  }
}

void glorot_init(Tensor& t, std::mt19937_64& rng) {
  int fan_in = t.rank() == 2 ? t.cols() : t.size();
  int fan_out = t.rank() == 2 ? t.rows() : 1;
  real limit = std::sqrt(real(6) / static_cast<real>(fan_in + fan_out));
  std::uniform_real_distribution<real> dist(-limit, limit);
  for (real& v : t.data) v = dist(rng);
}

}  // namespace jptdp
