#include "rstdp/layers.hpp"

#include <algorithm>
#include <cmath>

#include "rstdp/rng.hpp"

namespace rstdp {

void init_uniform(Parameter& p, double bound, std::mt19937_64& rng) {
  for (double& v : p.value.data) v = (2.0 * uniform_unit(rng) - 1.0) * bound;
}

void init_glorot(Parameter& p, long fan_in, long fan_out, std::mt19937_64& rng) {
  init_uniform(p, std::sqrt(6.0 / static_cast<double>(fan_in + fan_out)), rng);
}

LstmDirection make_lstm_direction(ParameterStore& store, const std::string& prefix, int input_dim,
                                  int hidden_dim, std::mt19937_64& rng) {
  if (input_dim < 1 || hidden_dim < 1) throw ArgumentError("lstm dims must be positive");
  LstmDirection lstm;
  lstm.input_dim = input_dim;
  lstm.hidden_dim = hidden_dim;
  long in = input_dim + hidden_dim;
  auto weight = [&](const char* gate) -> Parameter* {
    Parameter& p = store.create(prefix + ".W" + gate, {in, hidden_dim});
    init_glorot(p, in, hidden_dim, rng);
    return &p;
  };
  auto bias = [&](const char* gate, double fill) -> Parameter* {
    Parameter& p = store.create(prefix + ".b" + gate, {hidden_dim});
    std::fill(p.value.data.begin(), p.value.data.end(), fill);
    return &p;
  };
  lstm.Wi = weight("i");
  lstm.Wf = weight("f");
  lstm.Wo = weight("o");
  lstm.Wg = weight("g");
  lstm.bi = bias("i", 0.0);
  lstm.bf = bias("f", 1.0);
  lstm.bo = bias("o", 0.0);
  lstm.bg = bias("g", 0.0);
  return lstm;
}

std::pair<Value, Value> lstm_cell(Graph& g, const LstmDirection& lstm, Value x, Value h_prev,
                                  Value c_prev) {
  Value z = g.concat({x, h_prev});
  Value i = g.sigmoid(g.affine(z, g.param(*lstm.Wi), g.param(*lstm.bi)));
  Value f = g.sigmoid(g.affine(z, g.param(*lstm.Wf), g.param(*lstm.bf)));
  Value o = g.sigmoid(g.affine(z, g.param(*lstm.Wo), g.param(*lstm.bo)));
  Value gg = g.tanh_fn(g.affine(z, g.param(*lstm.Wg), g.param(*lstm.bg)));
  Value c = g.add(g.mul(f, c_prev), g.mul(i, gg));
  Value h = g.mul(o, g.tanh_fn(c));
  return {h, c};
}

std::vector<Value> lstm_run(Graph& g, const LstmDirection& lstm, const std::vector<Value>& xs,
                            bool reverse) {
  if (xs.empty()) throw ArgumentError("lstm_run over empty sequence");
  Value h = g.constant(Tensor::zeros({lstm.hidden_dim}));
  Value c = g.constant(Tensor::zeros({lstm.hidden_dim}));
  std::vector<Value> out(xs.size());
  for (std::size_t step = 0; step < xs.size(); ++step) {
    std::size_t t = reverse ? xs.size() - 1 - step : step;
    auto [h2, c2] = lstm_cell(g, lstm, xs[t], h, c);
    h = h2;
    c = c2;
    out[t] = h;
  }
  return out;
}

BiLstm make_bilstm(ParameterStore& store, const std::string& prefix, int input_dim, int hidden_dim,
                   std::mt19937_64& rng) {
  BiLstm lstm;
  lstm.fwd = make_lstm_direction(store, prefix + ".fwd", input_dim, hidden_dim, rng);
  lstm.bwd = make_lstm_direction(store, prefix + ".bwd", input_dim, hidden_dim, rng);
  return lstm;
}

std::vector<Value> bidirectional_encode(Graph& g, const BiLstm& lstm,
                                        const std::vector<Value>& xs) {
  if (xs.empty()) throw ArgumentError("bidirectional_encode over empty sequence");
  std::vector<Value> fwd = lstm_run(g, lstm.fwd, xs, false);
  std::vector<Value> bwd = lstm_run(g, lstm.bwd, xs, true);
  std::vector<Value> out(xs.size());
  for (std::size_t t = 0; t < xs.size(); ++t) out[t] = g.concat({fwd[t], bwd[t]});
  return out;
}

Mlp make_mlp(ParameterStore& store, const std::string& prefix, int input_dim, int hidden_dim,
             int output_dim, std::mt19937_64& rng) {
  if (input_dim < 1 || hidden_dim < 1 || output_dim < 1) {
    throw ArgumentError("mlp dims must be positive");
  }
  Mlp mlp;
  mlp.input_dim = input_dim;
  mlp.output_dim = output_dim;
  Parameter& w1 = store.create(prefix + ".W1", {input_dim, hidden_dim});
  init_glorot(w1, input_dim, hidden_dim, rng);
  Parameter& b1 = store.create(prefix + ".b1", {hidden_dim});
  Parameter& w2 = store.create(prefix + ".W2", {hidden_dim, output_dim});
  init_glorot(w2, hidden_dim, output_dim, rng);
  Parameter& b2 = store.create(prefix + ".b2", {output_dim});
  mlp.W1 = &w1;
  mlp.b1 = &b1;
  mlp.W2 = &w2;
  mlp.b2 = &b2;
  return mlp;
}

Value mlp_apply(Graph& g, const Mlp& mlp, Value x) {
  Value h = g.tanh_fn(g.affine(x, g.param(*mlp.W1), g.param(*mlp.b1)));
  return g.affine(h, g.param(*mlp.W2), g.param(*mlp.b2));
}

}  // namespace rstdp
