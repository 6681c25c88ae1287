#pragma once

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "rstdp/errors.hpp"

namespace rstdp {

/// Dense row-major tensor of doubles. Rank 0 (shape {}) is a scalar.
struct Tensor {
  std::vector<long> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<long> s) : shape(std::move(s)) {
    data.assign(static_cast<std::size_t>(element_count(shape)), 0.0);
  }
  Tensor(std::vector<long> s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {
    if (static_cast<long>(data.size()) != element_count(shape)) {
      throw ShapeError("tensor data size " + std::to_string(data.size()) +
                       " does not match shape (" + shape_string() + ")");
    }
  }

  static Tensor zeros(std::vector<long> s) { return Tensor(std::move(s)); }
  static Tensor scalar(double v) { return Tensor({}, {v}); }
  static Tensor vector(std::vector<double> d) {
    long n = static_cast<long>(d.size());
    return Tensor({n}, std::move(d));
  }

  static long element_count(const std::vector<long>& s) {
    long n = 1;
    for (long d : s) {
      if (d < 0) throw ShapeError("negative dimension");
      n *= d;
    }
    return n;
  }

  long size() const { return static_cast<long>(data.size()); }
  int rank() const { return static_cast<int>(shape.size()); }
  long dim(int i) const { return shape[static_cast<std::size_t>(i)]; }
  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  double& at(long r, long c) { return data[static_cast<std::size_t>(r * shape[1] + c)]; }
  double at(long r, long c) const { return data[static_cast<std::size_t>(r * shape[1] + c)]; }

  bool all_finite() const {
    for (double v : data) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  std::string shape_string() const {
    std::string s;
    for (std::size_t i = 0; i < shape.size(); ++i) {
      if (i) s += "x";
      s += std::to_string(shape[i]);
    }
    return s.empty() ? "scalar" : s;
  }
};

}  // namespace rstdp
