#include "rstdp/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include "rstdp/rng.hpp"

namespace rstdp {

namespace {
constexpr double kProbFloor = 1e-12;
}

Parameter& ParameterStore::create(const std::string& name, std::vector<long> shape) {
  if (by_name_.count(name) != 0) {
    throw ArgumentError("parameter '" + name + "' already exists");
  }
  params_.push_back(std::make_unique<Parameter>(name, Tensor(std::move(shape))));
  Parameter* p = params_.back().get();
  by_name_[name] = p;
  return *p;
}

Parameter* ParameterStore::find(const std::string& name) {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? nullptr : it->second;
}

const Parameter* ParameterStore::find(const std::string& name) const {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? nullptr : it->second;
}

std::vector<Parameter*> ParameterStore::all() {
  std::vector<Parameter*> out;
  out.reserve(params_.size());
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<const Parameter*> ParameterStore::all() const {
  std::vector<const Parameter*> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p.get());
  return out;
}

long ParameterStore::total_size() const {
  long n = 0;
  for (const auto& p : params_) n += p->value.size();
  return n;
}

void ParameterStore::zero_grads() {
  for (auto& p : params_) p->zero_grad();
}

Graph::Node& Graph::node(Value v) {
  if (!v.valid() || v.id >= static_cast<int>(nodes_.size())) {
    throw ArgumentError("invalid graph value");
  }
  return nodes_[static_cast<std::size_t>(v.id)];
}

const Graph::Node& Graph::node(Value v) const {
  if (!v.valid() || v.id >= static_cast<int>(nodes_.size())) {
    throw ArgumentError("invalid graph value");
  }
  return nodes_[static_cast<std::size_t>(v.id)];
}

Value Graph::make(Tensor value, bool needs_grad, std::function<void(Graph&)> back) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = needs_grad;
  if (needs_grad) {
    n.grad = Tensor(n.value.shape);
    n.backward = std::move(back);
  }
  nodes_.push_back(std::move(n));
  return Value{static_cast<int>(nodes_.size()) - 1};
}

double Graph::scalar(Value v) const {
  const Tensor& t = node(v).value;
  if (t.size() != 1) throw ShapeError("scalar() on tensor of size " + std::to_string(t.size()));
  return t.data[0];
}

Value Graph::constant(Tensor t) { return make(std::move(t), false, nullptr); }

Value Graph::param(Parameter& p) {
  auto it = param_cache_.find(&p);
  if (it != param_cache_.end()) return Value{it->second};
  Value v = make(p.value, true, nullptr);
  param_cache_[&p] = v.id;
  param_nodes_.emplace_back(&p, v.id);
  return v;
}

Value Graph::row(Value matrix, long r) {
  const Tensor& m = value(matrix);
  if (m.rank() != 2) throw ShapeError("row() expects a rank-2 tensor");
  if (r < 0 || r >= m.dim(0)) throw ArgumentError("row index out of range");
  long cols = m.dim(1);
  Tensor out({cols});
  std::copy_n(m.data.begin() + r * cols, cols, out.data.begin());
  bool ng = needs(matrix);
  Value v = make(std::move(out), ng, nullptr);
  if (ng) {
    node(v).backward = [matrix, r, cols, v](Graph& g) {
      const Tensor& gv = g.grad_ref(v);
      Tensor& gm = g.grad_ref(matrix);
      for (long c = 0; c < cols; ++c) gm.data[static_cast<std::size_t>(r * cols + c)] += gv.data[static_cast<std::size_t>(c)];
    };
  }
  return v;
}

Value Graph::affine(Value x, Value W, Value b) {
  const Tensor& xt = value(x);
  const Tensor& wt = value(W);
  const Tensor& bt = value(b);
  if (wt.rank() != 2) throw ShapeError("affine: W must be rank 2, is " + wt.shape_string());
  long in = wt.dim(0), out = wt.dim(1);
  if (bt.rank() != 1 || bt.dim(0) != out) {
    throw ShapeError("affine: b must be rank 1 of size " + std::to_string(out) + ", is " +
                     bt.shape_string());
  }
  bool batched = xt.rank() == 2;
  if (!batched && xt.rank() != 1) throw ShapeError("affine: x must be rank 1 or 2");
  long rows = batched ? xt.dim(0) : 1;
  long xin = batched ? xt.dim(1) : xt.dim(0);
  if (xin != in) {
    throw ShapeError("affine: x has inner dimension " + std::to_string(xin) + ", W expects " +
                     std::to_string(in));
  }

  Tensor y(batched ? std::vector<long>{rows, out} : std::vector<long>{out});
  for (long r = 0; r < rows; ++r) {
    const double* xrow = xt.data.data() + r * in;
    double* yrow = y.data.data() + r * out;
    std::copy_n(bt.data.begin(), out, yrow);
    for (long i = 0; i < in; ++i) {
      double xv = xrow[i];
      if (xv == 0.0) continue;
      const double* wrow = wt.data.data() + i * out;
      for (long o = 0; o < out; ++o) yrow[o] += xv * wrow[o];
    }
  }

  bool ng = needs(x) || needs(W) || needs(b);
  Value v = make(std::move(y), ng, nullptr);
  if (ng) {
    node(v).backward = [x, W, b, v, rows, in, out](Graph& g) {
      const Tensor& gy = g.grad_ref(v);
      const Tensor& xt2 = g.value(x);
      const Tensor& wt2 = g.value(W);
      if (g.needs(x)) {
        Tensor& gx = g.grad_ref(x);
        for (long r = 0; r < rows; ++r) {
          const double* gyrow = gy.data.data() + r * out;
          double* gxrow = gx.data.data() + r * in;
          for (long i = 0; i < in; ++i) {
            const double* wrow = wt2.data.data() + i * out;
            double acc = 0.0;
            for (long o = 0; o < out; ++o) acc += gyrow[o] * wrow[o];
            gxrow[i] += acc;
          }
        }
      }
      if (g.needs(W)) {
        Tensor& gw = g.grad_ref(W);
        for (long r = 0; r < rows; ++r) {
          const double* xrow = xt2.data.data() + r * in;
          const double* gyrow = gy.data.data() + r * out;
          for (long i = 0; i < in; ++i) {
            double xv = xrow[i];
            if (xv == 0.0) continue;
            double* gwrow = gw.data.data() + i * out;
            for (long o = 0; o < out; ++o) gwrow[o] += xv * gyrow[o];
          }
        }
      }
      if (g.needs(b)) {
        Tensor& gb = g.grad_ref(b);
        for (long r = 0; r < rows; ++r) {
          const double* gyrow = gy.data.data() + r * out;
          for (long o = 0; o < out; ++o) gb.data[static_cast<std::size_t>(o)] += gyrow[o];
        }
      }
    };
  }
  return v;
}

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(op) + ": shapes (" + a.shape_string() + ") and (" +
                     b.shape_string() + ") differ");
  }
}

}  // namespace

Value Graph::add(Value a, Value b) {
  const Tensor& at = value(a);
  const Tensor& bt = value(b);
  require_same_shape(at, bt, "add");
  Tensor y = at;
  for (long i = 0; i < y.size(); ++i) y.data[static_cast<std::size_t>(i)] += bt.data[static_cast<std::size_t>(i)];
  bool ng = needs(a) || needs(b);
  Value v = make(std::move(y), ng, nullptr);
  if (ng) {
    node(v).backward = [a, b, v](Graph& g) {
      const Tensor& gy = g.grad_ref(v);
      for (Value src : {a, b}) {
        if (!g.needs(src)) continue;
        Tensor& gs = g.grad_ref(src);
        for (long i = 0; i < gy.size(); ++i) gs.data[static_cast<std::size_t>(i)] += gy.data[static_cast<std::size_t>(i)];
      }
    };
  }
  return v;
}

Value Graph::sub(Value a, Value b) {
  const Tensor& at = value(a);
  const Tensor& bt = value(b);
  require_same_shape(at, bt, "sub");
  Tensor y = at;
  for (long i = 0; i < y.size(); ++i) y.data[static_cast<std::size_t>(i)] -= bt.data[static_cast<std::size_t>(i)];
  bool ng = needs(a) || needs(b);
  Value v = make(std::move(y), ng, nullptr);
  if (ng) {
    node(v).backward = [a, b, v](Graph& g) {
      const Tensor& gy = g.grad_ref(v);
      if (g.needs(a)) {
        Tensor& ga = g.grad_ref(a);
        for (long i = 0; i < gy.size(); ++i) ga.data[static_cast<std::size_t>(i)] += gy.data[static_cast<std::size_t>(i)];
      }
      if (g.needs(b)) {
        Tensor& gb = g.grad_ref(b);
        for (long i = 0; i < gy.size(); ++i) gb.data[static_cast<std::size_t>(i)] -= gy.data[static_cast<std::size_t>(i)];
      }
    };
  }
  return v;
}

Value Graph::mul(Value a, Value b) {
  const Tensor& at = value(a);
  const Tensor& bt = value(b);
  require_same_shape(at, bt, "mul");
  Tensor y = at;
  for (long i = 0; i < y.size(); ++i) y.data[static_cast<std::size_t>(i)] *= bt.data[static_cast<std::size_t>(i)];
  bool ng = needs(a) || needs(b);
  Value v = make(std::move(y), ng, nullptr);
  if (ng) {
    node(v).backward = [a, b, v](Graph& g) {
      const Tensor& gy = g.grad_ref(v);
      const Tensor& at2 = g.value(a);
      const Tensor& bt2 = g.value(b);
      if (g.needs(a)) {
        Tensor& ga = g.grad_ref(a);
        for (long i = 0; i < gy.size(); ++i) {
          ga.data[static_cast<std::size_t>(i)] += gy.data[static_cast<std::size_t>(i)] * bt2.data[static_cast<std::size_t>(i)];
        }
      }
      if (g.needs(b)) {
        Tensor& gb = g.grad_ref(b);
        for (long i = 0; i < gy.size(); ++i) {
          gb.data[static_cast<std::size_t>(i)] += gy.data[static_cast<std::size_t>(i)] * at2.data[static_cast<std::size_t>(i)];
        }
      }
    };
  }
  return v;
}

Value Graph::scale(Value a, double s) {
  Tensor y = value(a);
  for (double& d : y.data) d *= s;
  bool ng = needs(a);
  Value v = make(std::move(y), ng, nullptr);
  if (ng) {
    node(v).backward = [a, s, v](Graph& g) {
      const Tensor& gy = g.grad_ref(v);
      Tensor& ga = g.grad_ref(a);
      for (long i = 0; i < gy.size(); ++i) ga.data[static_cast<std::size_t>(i)] += s * gy.data[static_cast<std::size_t>(i)];
    };
  }
  return v;
}

Value Graph::add_many(const std::vector<Value>& parts) {
  if (parts.empty()) throw ArgumentError("add_many over empty list");
  Tensor y = value(parts[0]);
  for (std::size_t k = 1; k < parts.size(); ++k) {
    const Tensor& t = value(parts[k]);
    require_same_shape(y, t, "add_many");
    for (long i = 0; i < y.size(); ++i) y.data[static_cast<std::size_t>(i)] += t.data[static_cast<std::size_t>(i)];
  }
  bool ng = false;
  for (Value p : parts) ng = ng || needs(p);
  Value v = make(std::move(y), ng, nullptr);
  if (ng) {
    node(v).backward = [parts, v](Graph& g) {
      const Tensor& gy = g.grad_ref(v);
      for (Value p : parts) {
        if (!g.needs(p)) continue;
        Tensor& gp = g.grad_ref(p);
        for (long i = 0; i < gy.size(); ++i) gp.data[static_cast<std::size_t>(i)] += gy.data[static_cast<std::size_t>(i)];
      }
    };
  }
  return v;
}

Value Graph::concat(const std::vector<Value>& parts) {
  if (parts.empty()) throw ArgumentError("concat over empty list");
  long total = 0;
  bool ng = false;
  for (Value p : parts) {
    const Tensor& t = value(p);
    if (t.rank() != 1) throw ShapeError("concat expects rank-1 tensors");
    total += t.dim(0);
    ng = ng || needs(p);
  }
  Tensor y({total});
  long off = 0;
  for (Value p : parts) {
    const Tensor& t = value(p);
    std::copy(t.data.begin(), t.data.end(), y.data.begin() + off);
    off += t.dim(0);
  }
  Value v = make(std::move(y), ng, nullptr);
  if (ng) {
    node(v).backward = [parts, v](Graph& g) {
      const Tensor& gy = g.grad_ref(v);
      long off2 = 0;
      for (Value p : parts) {
        long n = g.value(p).dim(0);
        if (g.needs(p)) {
          Tensor& gp = g.grad_ref(p);
          for (long i = 0; i < n; ++i) gp.data[static_cast<std::size_t>(i)] += gy.data[static_cast<std::size_t>(off2 + i)];
        }
        off2 += n;
      }
    };
  }
  return v;
}

Value Graph::mean(const std::vector<Value>& parts) {
  if (parts.empty()) throw ArgumentError("mean over empty list");
  Value total = parts.size() == 1 ? parts[0] : add_many(parts);
  return parts.size() == 1 ? total : scale(total, 1.0 / static_cast<double>(parts.size()));
}

Value Graph::sum(Value x) {
  const Tensor& xt = value(x);
  double total = 0.0;
  for (double d : xt.data) total += d;
  bool ng = needs(x);
  Value v = make(Tensor::scalar(total), ng, nullptr);
  if (ng) {
    node(v).backward = [x, v](Graph& g) {
      double gy = g.grad_ref(v).data[0];
      Tensor& gx = g.grad_ref(x);
      for (double& d : gx.data) d += gy;
    };
  }
  return v;
}

Value Graph::sigmoid(Value x) {
  Tensor y = value(x);
  for (double& d : y.data) d = 1.0 / (1.0 + std::exp(-d));
  bool ng = needs(x);
  Value v = make(std::move(y), ng, nullptr);
  if (ng) {
    node(v).backward = [x, v](Graph& g) {
      const Tensor& gy = g.grad_ref(v);
      const Tensor& yv = g.value(v);
      Tensor& gx = g.grad_ref(x);
      for (long i = 0; i < gy.size(); ++i) {
        double s = yv.data[static_cast<std::size_t>(i)];
        gx.data[static_cast<std::size_t>(i)] += gy.data[static_cast<std::size_t>(i)] * s * (1.0 - s);
      }
    };
  }
  return v;
}

Value Graph::tanh_fn(Value x) {
  Tensor y = value(x);
  for (double& d : y.data) d = std::tanh(d);
  bool ng = needs(x);
  Value v = make(std::move(y), ng, nullptr);
  if (ng) {
    node(v).backward = [x, v](Graph& g) {
      const Tensor& gy = g.grad_ref(v);
      const Tensor& yv = g.value(v);
      Tensor& gx = g.grad_ref(x);
      for (long i = 0; i < gy.size(); ++i) {
        double t = yv.data[static_cast<std::size_t>(i)];
        gx.data[static_cast<std::size_t>(i)] += gy.data[static_cast<std::size_t>(i)] * (1.0 - t * t);
      }
    };
  }
  return v;
}

Value Graph::softmax(Value x) {
  const Tensor& xt = value(x);
  if (xt.rank() != 1) throw ShapeError("softmax expects a rank-1 tensor");
  Tensor y = xt;
  double mx = *std::max_element(y.data.begin(), y.data.end());
  double sum = 0.0;
  for (double& d : y.data) {
    d = std::exp(d - mx);
    sum += d;
  }
  for (double& d : y.data) d /= sum;
  bool ng = needs(x);
  Value v = make(std::move(y), ng, nullptr);
  if (ng) {
    node(v).backward = [x, v](Graph& g) {
      const Tensor& gy = g.grad_ref(v);
      const Tensor& yv = g.value(v);
      Tensor& gx = g.grad_ref(x);
      double dot = 0.0;
      for (long i = 0; i < gy.size(); ++i) dot += gy.data[static_cast<std::size_t>(i)] * yv.data[static_cast<std::size_t>(i)];
      for (long i = 0; i < gy.size(); ++i) {
        gx.data[static_cast<std::size_t>(i)] += yv.data[static_cast<std::size_t>(i)] * (gy.data[static_cast<std::size_t>(i)] - dot);
      }
    };
  }
  return v;
}

Value Graph::cross_entropy(Value probs, long target) {
  const Tensor& p = value(probs);
  if (p.rank() != 1) throw ShapeError("cross_entropy expects rank-1 probabilities");
  if (target < 0 || target >= p.dim(0)) throw ArgumentError("cross_entropy target out of range");
  double pt = std::max(p.data[static_cast<std::size_t>(target)], kProbFloor);
  Tensor y = Tensor::scalar(-std::log(pt));
  bool ng = needs(probs);
  Value v = make(std::move(y), ng, nullptr);
  if (ng) {
    node(v).backward = [probs, target, v](Graph& g) {
      double gy = g.grad_ref(v).data[0];
      const Tensor& p2 = g.value(probs);
      double pt2 = std::max(p2.data[static_cast<std::size_t>(target)], kProbFloor);
      g.grad_ref(probs).data[static_cast<std::size_t>(target)] += gy * (-1.0 / pt2);
    };
  }
  return v;
}

Value Graph::bce_sum(const std::vector<Value>& probs, const std::vector<double>& targets) {
  if (probs.empty()) throw ArgumentError("bce_sum over empty list");
  if (probs.size() != targets.size()) {
    throw ShapeError("bce_sum: " + std::to_string(probs.size()) + " probabilities vs " +
                     std::to_string(targets.size()) + " targets");
  }
  double loss = 0.0;
  bool ng = false;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const Tensor& t = value(probs[i]);
    if (t.size() != 1) throw ShapeError("bce_sum expects size-1 probability nodes");
    double y = targets[i];
    if (y != 0.0 && y != 1.0) throw ArgumentError("bce_sum targets must be 0 or 1");
    double p = std::min(std::max(t.data[0], kProbFloor), 1.0 - kProbFloor);
    loss -= y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
    ng = ng || needs(probs[i]);
  }
  Value v = make(Tensor::scalar(loss), ng, nullptr);
  if (ng) {
    std::vector<Value> ps = probs;
    std::vector<double> ys = targets;
    node(v).backward = [ps, ys, v](Graph& g) {
      double gy = g.grad_ref(v).data[0];
      for (std::size_t i = 0; i < ps.size(); ++i) {
        if (!g.needs(ps[i])) continue;
        double p = std::min(std::max(g.value(ps[i]).data[0], kProbFloor), 1.0 - kProbFloor);
        double d = -ys[i] / p + (1.0 - ys[i]) / (1.0 - p);
        g.grad_ref(ps[i]).data[0] += gy * d;
      }
    };
  }
  return v;
}

Value Graph::dropout(Value x, double p) {
  if (p < 0.0 || p >= 1.0) throw ArgumentError("dropout probability must be in [0, 1)");
  if (!training_ || p == 0.0) return x;
  const Tensor& xt = value(x);
  auto mask = std::make_shared<std::vector<double>>(static_cast<std::size_t>(xt.size()));
  double keep_scale = 1.0 / (1.0 - p);
  Tensor y = xt;
  for (long i = 0; i < xt.size(); ++i) {
    double m = uniform_unit(rng_) < p ? 0.0 : keep_scale;
    (*mask)[static_cast<std::size_t>(i)] = m;
    y.data[static_cast<std::size_t>(i)] *= m;
  }
  bool ng = needs(x);
  Value v = make(std::move(y), ng, nullptr);
  if (ng) {
    node(v).backward = [x, mask, v](Graph& g) {
      const Tensor& gy = g.grad_ref(v);
      Tensor& gx = g.grad_ref(x);
      for (long i = 0; i < gy.size(); ++i) gx.data[static_cast<std::size_t>(i)] += gy.data[static_cast<std::size_t>(i)] * (*mask)[static_cast<std::size_t>(i)];
    };
  }
  return v;
}

void Graph::backward(Value loss) {
  if (backward_done_) throw ArgumentError("backward() may run only once per graph");
  backward_done_ = true;
  Node& ln = node(loss);
  if (ln.value.size() != 1) throw ShapeError("backward expects a scalar loss");
  if (!ln.needs_grad) return;  // loss does not depend on any parameter
  ln.grad.data[0] = 1.0;
  for (int id = loss.id; id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.needs_grad && n.backward) n.backward(*this);
  }
  for (auto& [p, id] : param_nodes_) {
    const Tensor& g = nodes_[static_cast<std::size_t>(id)].grad;
    for (long i = 0; i < g.size(); ++i) p->grad.data[static_cast<std::size_t>(i)] += g.data[static_cast<std::size_t>(i)];
  }
}

}  // namespace rstdp
