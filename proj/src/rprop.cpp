#include "selfmap/rprop.hpp"

#include <cmath>

namespace selfmap {

RpropState::RpropState(const NetworkParams& params,
                       const RpropSettings& settings)
    : settings_(settings),
      step_hidden_(MatX::Constant(params.w_hidden.rows(),
                                  params.w_hidden.cols(), settings.delta_init)),
      step_output_(MatX::Constant(params.w_output.rows(),
                                  params.w_output.cols(), settings.delta_init)),
      prev_hidden_(MatX::Zero(params.w_hidden.rows(), params.w_hidden.cols())),
      prev_output_(MatX::Zero(params.w_output.rows(), params.w_output.cols())) {
  if (!(settings.eta_plus > 1.0 && settings.eta_minus > 0.0 &&
        settings.eta_minus < 1.0))
    throw std::invalid_argument("rprop factors need eta_plus > 1 > eta_minus");
}

void RpropState::apply_layer(MatX& w, const MatX& g, MatX& step, MatX& prev) {
  for (int r = 0; r < w.rows(); ++r) {
    for (int c = 0; c < w.cols(); ++c) {
      double grad = g(r, c);
      const double agree = prev(r, c) * grad;
      if (agree > 0.0) {
        step(r, c) = std::min(step(r, c) * settings_.eta_plus,
                              settings_.delta_max);
      } else if (agree < 0.0) {
        step(r, c) = std::max(step(r, c) * settings_.eta_minus,
                              settings_.delta_min);
        grad = 0.0;  // neutral comparison next iteration, no backtracking
      }
      if (grad > 0.0)
        w(r, c) -= step(r, c);
      else if (grad < 0.0)
        w(r, c) += step(r, c);
      prev(r, c) = grad;
    }
  }
}

void RpropState::apply(NetworkParams& params, const Gradients& grads) {
  apply_layer(params.w_hidden, grads.d_hidden, step_hidden_, prev_hidden_);
  apply_layer(params.w_output, grads.d_output, step_output_, prev_output_);
}

void accumulate_sample_gradient(const NetworkParams& params,
                                const ForwardTrace& trace,
                                const VecX& output_grad, Gradients& acc) {
  const int n_in = params.n_in();
  const int n_h = params.n_hidden();

  VecX delta_out(output_grad.size());
  for (int k = 0; k < delta_out.size(); ++k)
    delta_out[k] = output_grad[k] * activation_deriv(trace.output_act[k]);

  acc.d_output.topRows(n_h).noalias() +=
      trace.hidden_act * delta_out.transpose();
  acc.d_output.row(n_h) += delta_out.transpose();

  VecX delta_hidden =
      params.w_output.topRows(n_h) * delta_out;  // chain into hidden layer
  for (int l = 0; l < n_h; ++l)
    delta_hidden[l] *= activation_deriv(trace.hidden_act[l]);

  acc.d_hidden.topRows(n_in).noalias() +=
      trace.input * delta_hidden.transpose();
  acc.d_hidden.row(n_in) += delta_hidden.transpose();
}

}  // namespace selfmap
