#pragma once

#include <random>
#include <string>
#include <utility>
#include <vector>

#include "rstdp/autodiff.hpp"

namespace rstdp {

void init_uniform(Parameter& p, double bound, std::mt19937_64& rng);
/// uniform(−√(6/(fan_in+fan_out)), +√(6/(fan_in+fan_out)))
void init_glorot(Parameter& p, long fan_in, long fan_out, std::mt19937_64& rng);

/// One direction of an LSTM. Each gate has a weight over the concatenated
/// [input, previous hidden] vector. The forget-gate bias starts at 1.
struct LstmDirection {
  int input_dim = 0;
  int hidden_dim = 0;
  Parameter* Wi = nullptr;
  Parameter* Wf = nullptr;
  Parameter* Wo = nullptr;
  Parameter* Wg = nullptr;
  Parameter* bi = nullptr;
  Parameter* bf = nullptr;
  Parameter* bo = nullptr;
  Parameter* bg = nullptr;
};

LstmDirection make_lstm_direction(ParameterStore& store, const std::string& prefix, int input_dim,
                                  int hidden_dim, std::mt19937_64& rng);

/// One step: gates i,f,o = σ(affine), g = tanh(affine) over x_t ⊕ h_prev;
/// c_t = f⊙c_prev + i⊙g; h_t = o⊙tanh(c_t).
std::pair<Value, Value> lstm_cell(Graph& g, const LstmDirection& lstm, Value x, Value h_prev,
                                  Value c_prev);

/// Runs the direction over a sequence (reversed when reverse is true);
/// outputs are in input order either way.
std::vector<Value> lstm_run(Graph& g, const LstmDirection& lstm, const std::vector<Value>& xs,
                            bool reverse);

struct BiLstm {
  LstmDirection fwd;
  LstmDirection bwd;
  int input_dim() const { return fwd.input_dim; }
  int output_dim() const { return fwd.hidden_dim + bwd.hidden_dim; }
};

BiLstm make_bilstm(ParameterStore& store, const std::string& prefix, int input_dim, int hidden_dim,
                   std::mt19937_64& rng);

/// output_t = forward_h_t ⊕ backward_h_t, one per input position.
std::vector<Value> bidirectional_encode(Graph& g, const BiLstm& lstm, const std::vector<Value>& xs);

/// Two affine layers with a tanh between them.
struct Mlp {
  Parameter* W1 = nullptr;
  Parameter* b1 = nullptr;
  Parameter* W2 = nullptr;
  Parameter* b2 = nullptr;
  int input_dim = 0;
  int output_dim = 0;
};

Mlp make_mlp(ParameterStore& store, const std::string& prefix, int input_dim, int hidden_dim,
             int output_dim, std::mt19937_64& rng);
Value mlp_apply(Graph& g, const Mlp& mlp, Value x);

}  // namespace rstdp
