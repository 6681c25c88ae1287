#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "rstdp/tensor.hpp"

namespace rstdp {

/// A trainable tensor with its gradient and Adam moment buffers.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  Tensor adam_m;
  Tensor adam_v;
  long step_count = 0;

  Parameter(std::string n, Tensor v)
      : name(std::move(n)),
        value(std::move(v)),
        grad(value.shape),
        adam_m(value.shape),
        adam_v(value.shape) {}

  void zero_grad() { std::fill(grad.data.begin(), grad.data.end(), 0.0); }
};

/// Owns parameters at stable addresses, looked up by unique name.
class ParameterStore {
 public:
  Parameter& create(const std::string& name, std::vector<long> shape);
  Parameter* find(const std::string& name);
  const Parameter* find(const std::string& name) const;
  std::vector<Parameter*> all();
  std::vector<const Parameter*> all() const;
  long total_size() const;
  void zero_grads();

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::unordered_map<std::string, Parameter*> by_name_;
};

/// Handle to a node inside a Graph.
struct Value {
  int id = -1;
  bool valid() const { return id >= 0; }
};

/// Reverse-mode tape. Build a forward expression with the ops below, then
/// call backward(loss) once; parameter gradients are accumulated (+=) into
/// each touched Parameter::grad. A graph instance is single-use and
/// single-threaded; the embedded RNG drives dropout masks.
class Graph {
 public:
  explicit Graph(std::uint64_t dropout_seed = 0) : rng_(dropout_seed) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  void set_training(bool training) { training_ = training; }
  bool training() const { return training_; }
  std::mt19937_64& rng() { return rng_; }

  Value constant(Tensor t);
  Value param(Parameter& p);  // one node per parameter, cached

  /// Row r of a rank-2 node, as a rank-1 vector (embedding lookup).
  Value row(Value matrix, long r);
  /// y = xW + b with x of rank 1 [in] or rank 2 [batch, in].
  Value affine(Value x, Value W, Value b);
  Value add(Value a, Value b);
  Value sub(Value a, Value b);
  Value mul(Value a, Value b);  // elementwise
  Value scale(Value a, double s);
  Value add_many(const std::vector<Value>& parts);
  Value concat(const std::vector<Value>& parts);  // rank-1 inputs
  Value mean(const std::vector<Value>& parts);    // same-shape inputs
  Value sum(Value x);  // total over all elements, as a scalar
  Value sigmoid(Value x);
  Value tanh_fn(Value x);
  Value softmax(Value x);  // rank-1
  /// −log p[target], probabilities clamped at 1e-12.
  Value cross_entropy(Value probs, long target);
  /// −Σ_i (y_i log p_i + (1−y_i) log(1−p_i)); each prob is a size-1 node.
  Value bce_sum(const std::vector<Value>& probs, const std::vector<double>& targets);
  /// Training: zero units with probability p and scale survivors by 1/(1−p).
  Value dropout(Value x, double p);

  const Tensor& value(Value v) const { return node(v).value; }
  const Tensor& grad(Value v) const { return node(v).grad; }
  double scalar(Value v) const;
  std::size_t node_count() const { return nodes_.size(); }

  void backward(Value loss);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool needs_grad = false;
    std::function<void(Graph&)> backward;
  };

  Value make(Tensor value, bool needs_grad, std::function<void(Graph&)> back);
  Node& node(Value v);
  const Node& node(Value v) const;
  Tensor& grad_ref(Value v) { return node(v).grad; }
  bool needs(Value v) const { return node(v).needs_grad; }

  std::vector<Node> nodes_;
  std::unordered_map<Parameter*, int> param_cache_;
  std::vector<std::pair<Parameter*, int>> param_nodes_;
  std::mt19937_64 rng_;
  bool training_ = false;
  bool backward_done_ = false;
};

}  // namespace rstdp
