#pragma once

#include <cstdint>
#include <string>

#include "selfmap/common.hpp"

namespace selfmap {

// Two-layer perceptron with tanh units on hidden and output layers. Biases
// are a constant-1 input appended to each layer, stored as the last row of
// the weight matrices: w_hidden is (n_in+1) x n_hidden, w_output is
// (n_hidden+1) x n_out.
struct NetworkParams {
  MatX w_hidden;
  MatX w_output;

  int n_in() const { return static_cast<int>(w_hidden.rows()) - 1; }
  int n_hidden() const { return static_cast<int>(w_hidden.cols()); }
  int n_out() const { return static_cast<int>(w_output.cols()); }
};

struct ForwardTrace {
  VecX input;
  VecX hidden_pre;
  VecX hidden_act;
  VecX output_pre;
  VecX output_act;
};

inline double activation(double e) { return std::tanh(e); }
// Derivative from the activation value: d tanh(e)/de = 1 - tanh(e)^2.
inline double activation_deriv(double act) { return 1.0 - act * act; }

// All weights i.i.d. uniform on [-1, 1].
NetworkParams init_weights(int n_in, int n_hidden, int n_out,
                           std::uint64_t seed);

ForwardTrace forward(const NetworkParams& params, const VecX& p_norm);

VecX evaluate(const NetworkParams& params, const VecX& p_norm);

// Versioned JSON with layer shapes and row-major weight arrays.
std::string network_to_json(const NetworkParams& params);
NetworkParams network_from_json(const std::string& text);
void save_network(const NetworkParams& params, const std::string& path);
NetworkParams load_network(const std::string& path);

}  // namespace selfmap
