#pragma once

#include "selfmap/common.hpp"
#include "selfmap/mlp.hpp"

namespace selfmap {

struct RpropSettings {
  double eta_plus = 1.2;
  double eta_minus = 0.5;
  double delta_init = 0.1;
  double delta_min = 1e-6;
  double delta_max = 50.0;
};

// Full-batch gradient, same shapes as the weight matrices.
struct Gradients {
  MatX d_hidden;
  MatX d_output;

  explicit Gradients(const NetworkParams& params)
      : d_hidden(MatX::Zero(params.w_hidden.rows(), params.w_hidden.cols())),
        d_output(MatX::Zero(params.w_output.rows(), params.w_output.cols())) {}
};

// Sign-based per-weight step adaptation without backtracking. On a sign flip
// the step shrinks and the stored gradient is zeroed, so the next iteration
// sees a neutral comparison.
class RpropState {
 public:
  RpropState(const NetworkParams& params, const RpropSettings& settings);

  void apply(NetworkParams& params, const Gradients& grads);

  const MatX& steps_hidden() const { return step_hidden_; }
  const MatX& steps_output() const { return step_output_; }

 private:
  void apply_layer(MatX& w, const MatX& g, MatX& step, MatX& prev);

  RpropSettings settings_;
  MatX step_hidden_, step_output_;
  MatX prev_hidden_, prev_output_;
};

// Backpropagates one sample's cost gradient w.r.t. the network outputs
// (dCost/dxi) into the weight-gradient accumulator. Both trainers reduce to
// this once their per-sample output gradients are known.
void accumulate_sample_gradient(const NetworkParams& params,
                                const ForwardTrace& trace,
                                const VecX& output_grad, Gradients& acc);

}  // namespace selfmap
