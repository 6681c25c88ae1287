#include "rstdp/optim.hpp"

#include <cmath>

namespace rstdp {

void adam_step(Parameter& p, const AdamConfig& cfg) {
  if (!p.grad.all_finite()) {
    throw NumericError("non-finite gradient in parameter '" + p.name + "'");
  }
  p.step_count += 1;
  double t = static_cast<double>(p.step_count);
  double bc1 = 1.0 - std::pow(cfg.beta1, t);
  double bc2 = 1.0 - std::pow(cfg.beta2, t);
  for (long i = 0; i < p.value.size(); ++i) {
    auto k = static_cast<std::size_t>(i);
    double g = p.grad.data[k];
    double m = cfg.beta1 * p.adam_m.data[k] + (1.0 - cfg.beta1) * g;
    double v = cfg.beta2 * p.adam_v.data[k] + (1.0 - cfg.beta2) * g * g;
    p.adam_m.data[k] = m;
    p.adam_v.data[k] = v;
    double m_hat = m / bc1;
    double v_hat = v / bc2;
    p.value.data[k] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
  }
  p.zero_grad();
}

void adam_step(ParameterStore& store, const AdamConfig& cfg) {
  for (Parameter* p : store.all()) adam_step(*p, cfg);
}

}  // namespace rstdp
