#include "selfmap/config.hpp"

#include <stdexcept>

#include "json.hpp"
#include "selfmap/io.hpp"

namespace selfmap {

namespace {

using nlohmann::json;

json to_doc(const RunConfig& c) {
  json j;
  j["scenario"] = c.scenario;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["output_dir"] = c.output_dir;
  j["exploration"] = {{"n_samples", c.n_samples},
                      {"reference", {c.reference[0], c.reference[1],
                                     c.reference[2]}},
                      {"amplitude", c.amplitude}};
  j["network"] = {{"n_hidden", c.n_hidden}, {"n_out", c.n_out}};
  j["training"] = {{"mu", c.mu},
                   {"gamma", c.gamma},
                   {"iterations", c.train_iterations},
                   {"q_min", c.q_min},
                   {"n_environments", c.n_environments},
                   {"gradient", c.gradient}};
  j["rprop"] = {{"eta_plus", c.rprop.eta_plus},
                {"eta_minus", c.rprop.eta_minus},
                {"delta_init", c.rprop.delta_init},
                {"delta_min", c.rprop.delta_min},
                {"delta_max", c.rprop.delta_max}};
  j["pretrain"] = {{"isomap_k", c.isomap_k},
                   {"iterations", c.pretrain_iterations}};
  j["arm"] = {{"segment_length", c.segment_length}};
  j["environment"] = {{"n_red", c.n_red}, {"n_blue", c.n_blue}};
  j["evaluation"] = {{"fd_epsilon", c.fd_epsilon},
                     {"grid_side", c.grid_side},
                     {"grid_shrink", c.grid_shrink}};
  j["reach"] = {{"step", c.reach_step}, {"tol", c.reach_tol}};
  return j;
}

RunConfig from_doc(const json& j) {
  // Reject keys the schema does not define, at both nesting levels.
  const json schema = to_doc(RunConfig{});
  for (const auto& [key, value] : j.items()) {
    if (!schema.contains(key))
      throw std::invalid_argument("unknown config key: " + key);
    if (value.is_object()) {
      for (const auto& [sub, ignored] : value.items()) {
        (void)ignored;
        if (!schema.at(key).contains(sub))
          throw std::invalid_argument("unknown config key: " + key + "." +
                                      sub);
      }
    }
  }

  // Missing keys fall back to the scenario's defaults, so a config document
  // only needs the values it changes.
  int scenario = RunConfig{}.scenario;
  if (j.contains("scenario")) j.at("scenario").get_to(scenario);
  if (scenario != 1 && scenario != 2)
    throw std::invalid_argument("scenario must be 1 or 2");
  json merged = to_doc(default_config(scenario));
  merged.update(j, /*merge_objects=*/true);

  RunConfig c;
  merged.at("scenario").get_to(c.scenario);
  merged.at("seed").get_to(c.seed);
  merged.at("threads").get_to(c.threads);
  merged.at("output_dir").get_to(c.output_dir);
  const json& ex = merged.at("exploration");
  ex.at("n_samples").get_to(c.n_samples);
  if (ex.at("reference").size() != 3)
    throw std::invalid_argument("reference needs 3 angles");
  for (int k = 0; k < 3; ++k) c.reference[k] = ex.at("reference").at(k);
  ex.at("amplitude").get_to(c.amplitude);
  const json& net = merged.at("network");
  net.at("n_hidden").get_to(c.n_hidden);
  net.at("n_out").get_to(c.n_out);
  const json& tr = merged.at("training");
  tr.at("mu").get_to(c.mu);
  tr.at("gamma").get_to(c.gamma);
  tr.at("iterations").get_to(c.train_iterations);
  tr.at("q_min").get_to(c.q_min);
  tr.at("n_environments").get_to(c.n_environments);
  tr.at("gradient").get_to(c.gradient);
  const json& rp = merged.at("rprop");
  rp.at("eta_plus").get_to(c.rprop.eta_plus);
  rp.at("eta_minus").get_to(c.rprop.eta_minus);
  rp.at("delta_init").get_to(c.rprop.delta_init);
  rp.at("delta_min").get_to(c.rprop.delta_min);
  rp.at("delta_max").get_to(c.rprop.delta_max);
  const json& pre = merged.at("pretrain");
  pre.at("isomap_k").get_to(c.isomap_k);
  pre.at("iterations").get_to(c.pretrain_iterations);
  merged.at("arm").at("segment_length").get_to(c.segment_length);
  const json& env = merged.at("environment");
  env.at("n_red").get_to(c.n_red);
  env.at("n_blue").get_to(c.n_blue);
  const json& ev = merged.at("evaluation");
  ev.at("fd_epsilon").get_to(c.fd_epsilon);
  ev.at("grid_side").get_to(c.grid_side);
  ev.at("grid_shrink").get_to(c.grid_shrink);
  const json& re = merged.at("reach");
  re.at("step").get_to(c.reach_step);
  re.at("tol").get_to(c.reach_tol);

  if (c.scenario != 1 && c.scenario != 2)
    throw std::invalid_argument("scenario must be 1 or 2");
  if (c.threads < 1) throw std::invalid_argument("threads must be >= 1");
  if (c.n_samples < 2) throw std::invalid_argument("n_samples must be >= 2");
  if (!(c.amplitude > 0.0))
    throw std::invalid_argument("amplitude must be positive");
  if (c.n_hidden < 1 || c.n_out < 1)
    throw std::invalid_argument("network sizes must be positive");
  if (!(c.mu > 0.0)) throw std::invalid_argument("mu must be positive");
  if (c.gamma < 0.0) throw std::invalid_argument("gamma must be >= 0");
  if (c.train_iterations < 1 || c.pretrain_iterations < 0)
    throw std::invalid_argument("iteration budgets invalid");
  if (c.n_environments < 1)
    throw std::invalid_argument("n_environments must be >= 1");
  if (c.gradient != "exact" && c.gradient != "gated")
    throw std::invalid_argument("gradient must be \"exact\" or \"gated\"");
  if (c.isomap_k < 1) throw std::invalid_argument("isomap_k must be >= 1");
  if (!(c.segment_length > 0.0))
    throw std::invalid_argument("segment_length must be positive");
  if (c.n_red < 1 || c.n_blue < 1)
    throw std::invalid_argument("environment needs lights of both colors");
  if (!(c.fd_epsilon > 0.0) || !(c.reach_step > 0.0) || !(c.reach_tol > 0.0))
    throw std::invalid_argument("step sizes must be positive");
  if (c.grid_side < 2) throw std::invalid_argument("grid_side must be >= 2");
  if (c.grid_shrink < 0.0 || c.grid_shrink >= 1.0)
    throw std::invalid_argument("grid_shrink must be in [0, 1)");
  return c;
}

}  // namespace

RunConfig default_config(int scenario) {
  RunConfig c;
  c.scenario = scenario;
  if (scenario == 2) c.n_environments = 3;
  if (scenario != 1 && scenario != 2)
    throw std::invalid_argument("scenario must be 1 or 2");
  return c;
}

std::string config_to_json(const RunConfig& cfg) {
  return to_doc(cfg).dump(2) + "\n";
}

RunConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") +
                                e.what());
  }
  return from_doc(j);
}

void save_config(const RunConfig& cfg, const std::string& path) {
  write_text_file(path, config_to_json(cfg));
}

RunConfig load_config(const std::string& path) {
  return config_from_json(read_text_file(path));
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw std::invalid_argument("override must look like key=value: " +
                                assignment);
  std::string key = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);

  for (char& ch : key)
    if (ch == '.') ch = '/';
  const json::json_pointer ptr("/" + key);

  json doc = to_doc(cfg);
  if (!doc.contains(ptr))
    throw std::invalid_argument("unknown config key: " +
                                assignment.substr(0, eq));

  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::parse_error&) {
    parsed = value;  // bare word: treat as a string
  }
  doc[ptr] = parsed;
  cfg = from_doc(doc);
}

}  // namespace selfmap
