#include <cmath>
#include <cstdio>

#include "doctest.h"
#include "selfmap/mlp.hpp"
#include "selfmap/rprop.hpp"

using namespace selfmap;

namespace {

// 3-1-1 net small enough to trace by hand; values frozen from that trace.
NetworkParams tiny_net() {
  NetworkParams params;
  params.w_hidden = MatX(4, 1);
  params.w_hidden << 0.3, -0.2, 0.5, 0.1;
  params.w_output = MatX(2, 1);
  params.w_output << 0.7, -0.4;
  return params;
}

}  // namespace

TEST_CASE("forward pass matches a hand-traced 3-1-1 network") {
  const NetworkParams params = tiny_net();
  VecX input(3);
  input << 0.2, -0.5, 0.4;
  const ForwardTrace trace = forward(params, input);
  REQUIRE(trace.hidden_pre.size() == 1);
  REQUIRE(trace.output_act.size() == 1);
  CHECK(trace.hidden_pre[0] == doctest::Approx(0.45999999999999996).epsilon(1e-15));
  CHECK(trace.hidden_act[0] == doctest::Approx(0.43008421140197944).epsilon(1e-15));
  CHECK(trace.output_pre[0] ==
        doctest::Approx(-0.098941052018614417).epsilon(1e-15));
  CHECK(trace.output_act[0] ==
        doctest::Approx(-0.098619455650577184).epsilon(1e-15));
}

TEST_CASE("evaluate returns the forward pass output") {
  const NetworkParams params = init_weights(3, 30, 2, 77);
  VecX input(3);
  input << 0.4, -0.1, 0.6;
  const VecX out = evaluate(params, input);
  const ForwardTrace trace = forward(params, input);
  REQUIRE(out.size() == 2);
  CHECK(out == trace.output_act);
  // tanh keeps outputs strictly inside (-1, 1).
  CHECK(out.cwiseAbs().maxCoeff() < 1.0);
}

TEST_CASE("weight initialization is uniform in [-1,1] with bias rows") {
  const NetworkParams a = init_weights(3, 30, 2, 5);
  const NetworkParams b = init_weights(3, 30, 2, 5);
  const NetworkParams c = init_weights(3, 30, 2, 6);
  CHECK(a.w_hidden.rows() == 4);
  CHECK(a.w_hidden.cols() == 30);
  CHECK(a.w_output.rows() == 31);
  CHECK(a.w_output.cols() == 2);
  CHECK(a.n_in() == 3);
  CHECK(a.n_hidden() == 30);
  CHECK(a.n_out() == 2);
  CHECK(a.w_hidden.cwiseAbs().maxCoeff() <= 1.0);
  CHECK(a.w_output.cwiseAbs().maxCoeff() <= 1.0);
  CHECK(a.w_hidden == b.w_hidden);
  CHECK(a.w_output == b.w_output);
  CHECK(a.w_hidden != c.w_hidden);
}

TEST_CASE("network JSON round trip is bit-exact") {
  const NetworkParams params = init_weights(3, 30, 2, 31);
  const NetworkParams back = network_from_json(network_to_json(params));
  CHECK(back.w_hidden == params.w_hidden);
  CHECK(back.w_output == params.w_output);

  const std::string path = "test_mlp_roundtrip.json";
  save_network(params, path);
  const NetworkParams from_file = load_network(path);
  std::remove(path.c_str());
  CHECK(from_file.w_hidden == params.w_hidden);
  CHECK(from_file.w_output == params.w_output);
}

TEST_CASE("step adaptation minimizes a quadratic per weight") {
  NetworkParams params;
  params.w_hidden = MatX::Zero(1, 1);
  params.w_output = MatX::Zero(1, 1);
  RpropState state(params, RpropSettings{});
  Gradients grads(params);
  for (int it = 0; it < 100; ++it) {
    grads.d_hidden(0, 0) = 2.0 * (params.w_hidden(0, 0) - 3.0);
    grads.d_output(0, 0) = 2.0 * (params.w_output(0, 0) + 1.0);
    state.apply(params, grads);
  }
  CHECK(std::abs(params.w_hidden(0, 0) - 3.0) < 1e-3);
  CHECK(std::abs(params.w_output(0, 0) + 1.0) < 1e-3);
}

TEST_CASE("steps grow under agreement and are capped") {
  NetworkParams params;
  params.w_hidden = MatX::Zero(1, 1);
  params.w_output = MatX::Zero(1, 1);
  RpropSettings settings;
  RpropState state(params, settings);
  Gradients grads(params);
  grads.d_hidden(0, 0) = 1.0;  // constant sign forever
  grads.d_output(0, 0) = 1.0;
  // First application sees no history: neutral, step stays at delta_init.
  state.apply(params, grads);
  CHECK(params.w_hidden(0, 0) == doctest::Approx(-0.1).epsilon(1e-15));
  CHECK(state.steps_hidden()(0, 0) == doctest::Approx(0.1).epsilon(1e-15));
  // Agreement: step scales by eta_plus before the move.
  state.apply(params, grads);
  CHECK(state.steps_hidden()(0, 0) == doctest::Approx(0.12).epsilon(1e-15));
  CHECK(params.w_hidden(0, 0) == doctest::Approx(-0.22).epsilon(1e-14));
  for (int it = 0; it < 60; ++it) state.apply(params, grads);
  CHECK(state.steps_hidden()(0, 0) <= settings.delta_max + 1e-12);
  CHECK(state.steps_hidden()(0, 0) == doctest::Approx(settings.delta_max));
}

TEST_CASE("a sign flip shrinks the step and skips the move once") {
  NetworkParams params;
  params.w_hidden = MatX::Zero(1, 1);
  params.w_output = MatX::Zero(1, 1);
  RpropState state(params, RpropSettings{});
  Gradients grads(params);

  grads.d_hidden(0, 0) = 1.0;
  state.apply(params, grads);  // move to -0.1, history +
  REQUIRE(params.w_hidden(0, 0) == doctest::Approx(-0.1));

  grads.d_hidden(0, 0) = -1.0;  // flip: halve the step, hold position
  state.apply(params, grads);
  CHECK(params.w_hidden(0, 0) == doctest::Approx(-0.1).epsilon(1e-15));
  CHECK(state.steps_hidden()(0, 0) == doctest::Approx(0.05).epsilon(1e-15));

  // History was cleared, so the same sign now counts as neutral and moves.
  grads.d_hidden(0, 0) = -1.0;
  state.apply(params, grads);
  CHECK(params.w_hidden(0, 0) == doctest::Approx(-0.05).epsilon(1e-14));
  CHECK(state.steps_hidden()(0, 0) == doctest::Approx(0.05).epsilon(1e-15));
}

TEST_CASE("alternating gradients never push the step below its floor") {
  NetworkParams params;
  params.w_hidden = MatX::Zero(1, 1);
  params.w_output = MatX::Zero(1, 1);
  RpropSettings settings;
  RpropState state(params, settings);
  Gradients grads(params);
  for (int it = 0; it < 200; ++it) {
    grads.d_hidden(0, 0) = (it % 2 == 0) ? 1.0 : -1.0;
    state.apply(params, grads);
  }
  CHECK(state.steps_hidden()(0, 0) >= settings.delta_min);
}

TEST_CASE("invalid adaptation factors are rejected") {
  NetworkParams params;
  params.w_hidden = MatX::Zero(1, 1);
  params.w_output = MatX::Zero(1, 1);
  RpropSettings bad;
  bad.eta_plus = 0.9;
  CHECK_THROWS_AS(RpropState(params, bad), std::invalid_argument);
  RpropSettings bad2;
  bad2.eta_minus = 1.5;
  CHECK_THROWS_AS(RpropState(params, bad2), std::invalid_argument);
}
