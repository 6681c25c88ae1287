#include "rstdp/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "rstdp/rng.hpp"

namespace rstdp {

std::string GradCheckReport::summary() const {
  std::ostringstream out;
  out << "checked " << coords_checked << " coordinates, " << failures.size() << " failed";
  for (std::size_t i = 0; i < failures.size() && i < 8; ++i) {
    const GradCheckFailure& f = failures[i];
    out << "\n  " << f.param << "[" << f.index << "]: analytic " << f.analytic << " vs numeric "
        << f.numeric << " (rel " << f.rel_error << ")";
  }
  if (failures.size() > 8) out << "\n  ... " << failures.size() - 8 << " more";
  return out.str();
}

GradCheckReport finite_difference_check(const std::function<double(bool)>& fn,
                                        const std::vector<Parameter*>& params,
                                        const GradCheckOptions& options) {
  if (options.epsilon <= 0.0) throw ArgumentError("epsilon must be positive");
  for (Parameter* p : params) p->zero_grad();
  fn(true);

  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (Parameter* p : params) analytic.push_back(p->grad.data);

  std::mt19937_64 rng(options.sample_seed);
  GradCheckReport report;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Parameter& p = *params[pi];
    std::vector<long> coords;
    long n = p.value.size();
    if (options.max_coords_per_tensor <= 0 || options.max_coords_per_tensor >= n) {
      coords.resize(static_cast<std::size_t>(n));
      for (long i = 0; i < n; ++i) coords[static_cast<std::size_t>(i)] = i;
    } else {
      std::set<long> picked;
      while (static_cast<long>(picked.size()) < options.max_coords_per_tensor) {
        picked.insert(uniform_int(rng, 0, n - 1));
      }
      coords.assign(picked.begin(), picked.end());
    }
    for (long idx : coords) {
      auto k = static_cast<std::size_t>(idx);
      double saved = p.value.data[k];
      p.value.data[k] = saved + options.epsilon;
      double plus = fn(false);
      p.value.data[k] = saved - options.epsilon;
      double minus = fn(false);
      p.value.data[k] = saved;
      double numeric = (plus - minus) / (2.0 * options.epsilon);
      double a = analytic[pi][k];
      double rel = std::fabs(a - numeric) / std::max(1.0, std::fabs(a));
      ++report.coords_checked;
      if (rel >= options.tolerance) {
        report.failures.push_back(GradCheckFailure{p.name, idx, a, numeric, rel});
      }
    }
  }
  for (Parameter* p : params) p->zero_grad();
  return report;
}

}  // namespace rstdp
