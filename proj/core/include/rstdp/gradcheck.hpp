#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rstdp/autodiff.hpp"

namespace rstdp {

struct GradCheckOptions {
  double tolerance = 1e-4;
  double epsilon = 1e-5;
  /// 0 checks every coordinate; otherwise this many sampled per tensor.
  long max_coords_per_tensor = 0;
  std::uint64_t sample_seed = 42;
};

struct GradCheckFailure {
  std::string param;
  long index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

struct GradCheckReport {
  long coords_checked = 0;
  std::vector<GradCheckFailure> failures;
  bool ok() const { return failures.empty(); }
  std::string summary() const;
};

/// Central-difference check of reverse-mode gradients. fn(true) must run
/// forward and backward (accumulating into Parameter::grad) and return the
/// loss; fn(false) must run only the forward pass with identical
/// randomness. A coordinate fails when
///   |analytic − numeric| / max(1, |analytic|) ≥ tolerance.
GradCheckReport finite_difference_check(const std::function<double(bool)>& fn,
                                        const std::vector<Parameter*>& params,
                                        const GradCheckOptions& options = {});

}  // namespace rstdp
