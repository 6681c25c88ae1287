#pragma once

#include "rstdp/autodiff.hpp"

namespace rstdp {

struct AdamConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-6;
};

/// Bias-corrected Adam update from the accumulated gradient:
///   θ ← θ − lr · m̂ / (√v̂ + eps)
/// The gradient is zeroed afterwards. Throws NumericError when the gradient
/// holds non-finite values.
void adam_step(Parameter& p, const AdamConfig& cfg);
void adam_step(ParameterStore& store, const AdamConfig& cfg);

}  // namespace rstdp
