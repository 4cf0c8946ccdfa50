#include "selfmap/mlp.hpp"

#include <cmath>

#include "json.hpp"
#include "selfmap/io.hpp"
#include "selfmap/rng.hpp"

namespace selfmap {

NetworkParams init_weights(int n_in, int n_hidden, int n_out,
                           std::uint64_t seed) {
  if (n_in < 1 || n_hidden < 1 || n_out < 1)
    throw std::invalid_argument("network layer sizes must be positive");
  Rng rng(seed);
  NetworkParams params;
  params.w_hidden = MatX::Zero(n_in + 1, n_hidden);
  params.w_output = MatX::Zero(n_hidden + 1, n_out);
  // Row-major fill order so the draw sequence matches the serialized layout.
  for (int r = 0; r < params.w_hidden.rows(); ++r)
    for (int c = 0; c < params.w_hidden.cols(); ++c)
      params.w_hidden(r, c) = rng.uniform_symmetric();
  for (int r = 0; r < params.w_output.rows(); ++r)
    for (int c = 0; c < params.w_output.cols(); ++c)
      params.w_output(r, c) = rng.uniform_symmetric();
  return params;
}

ForwardTrace forward(const NetworkParams& params, const VecX& p_norm) {
  const int n_in = params.n_in();
  const int n_h = params.n_hidden();
  if (p_norm.size() != n_in)
    throw std::invalid_argument("input dimension mismatch");

  ForwardTrace t;
  t.input = p_norm;

  t.hidden_pre = params.w_hidden.topRows(n_in).transpose() * p_norm +
                 params.w_hidden.row(n_in).transpose();
  t.hidden_act = t.hidden_pre.unaryExpr([](double e) { return activation(e); });

  t.output_pre = params.w_output.topRows(n_h).transpose() * t.hidden_act +
                 params.w_output.row(n_h).transpose();
  t.output_act = t.output_pre.unaryExpr([](double e) { return activation(e); });
  return t;
}

VecX evaluate(const NetworkParams& params, const VecX& p_norm) {
  return forward(params, p_norm).output_act;
}

std::string network_to_json(const NetworkParams& params) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["n_in"] = params.n_in();
  j["n_hidden"] = params.n_hidden();
  j["n_out"] = params.n_out();
  auto dump_rows = [](const MatX& m) {
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(m.size()));
    for (int r = 0; r < m.rows(); ++r)
      for (int c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
    return flat;
  };
  j["w_hidden"] = dump_rows(params.w_hidden);
  j["w_output"] = dump_rows(params.w_output);
  return j.dump(2) + "\n";
}

NetworkParams network_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  const int version = j.at("format_version").get<int>();
  if (version != 1)
    throw std::runtime_error("unsupported network format_version " +
                             std::to_string(version));
  const int n_in = j.at("n_in").get<int>();
  const int n_h = j.at("n_hidden").get<int>();
  const int n_out = j.at("n_out").get<int>();

  NetworkParams params;
  params.w_hidden = MatX::Zero(n_in + 1, n_h);
  params.w_output = MatX::Zero(n_h + 1, n_out);
  auto load_rows = [](MatX& m, const nlohmann::json& arr) {
    if (static_cast<long>(arr.size()) != m.size())
      throw std::runtime_error("weight array size mismatch");
    std::size_t i = 0;
    for (int r = 0; r < m.rows(); ++r)
      for (int c = 0; c < m.cols(); ++c) m(r, c) = arr.at(i++).get<double>();
  };
  load_rows(params.w_hidden, j.at("w_hidden"));
  load_rows(params.w_output, j.at("w_output"));
  return params;
}

void save_network(const NetworkParams& params, const std::string& path) {
  write_text_file(path, network_to_json(params));
}

NetworkParams load_network(const std::string& path) {
  return network_from_json(read_text_file(path));
}

}  // namespace selfmap
