#include "selfmap/dataset.hpp"

#include <cmath>
#include <sstream>

#include "json.hpp"
#include "selfmap/io.hpp"
#include "selfmap/rng.hpp"

namespace selfmap {

NormalizationStats compute_normalization(const std::vector<Sample>& samples) {
  if (samples.size() < 2)
    throw std::invalid_argument("normalization needs at least 2 samples");

  const int s_dim = static_cast<int>(samples[0].s.size());
  NormalizationStats st;
  st.s_mean = VecX::Zero(s_dim);
  for (const Sample& smp : samples) {
    st.p_mean += smp.p.angles;
    st.s_mean += smp.s;
  }
  const double n = static_cast<double>(samples.size());
  st.p_mean /= n;
  st.s_mean /= n;

  st.p_scale = 0.0;
  st.s_scale = 0.0;
  for (const Sample& smp : samples) {
    st.p_scale = std::max(st.p_scale,
                          (smp.p.angles - st.p_mean).cwiseAbs().maxCoeff());
    st.s_scale =
        std::max(st.s_scale, (smp.s - st.s_mean).cwiseAbs().maxCoeff());
  }
  if (st.p_scale <= 0.0 || st.s_scale <= 0.0)
    throw std::runtime_error(
        "degenerate dataset: zero spread in proprioception or exteroception");
  return st;
}

Dataset explore(const ExplorationConfig& cfg, const Sensor& sensor,
                const ArmGeometry& geom, const WorkspaceLimits& limits,
                const std::string& environment_id) {
  if (cfg.n_samples < 2 || cfg.amplitude <= 0.0)
    throw std::invalid_argument("exploration config invalid");

  Rng rng(cfg.seed);
  Dataset ds;
  ds.environment_id = environment_id;
  ds.samples.reserve(static_cast<std::size_t>(cfg.n_samples));

  const long max_attempts = 100L * cfg.n_samples;
  long attempts = 0;
  while (ds.size() < cfg.n_samples) {
    if (attempts++ >= max_attempts)
      throw std::runtime_error(
          "exploration acceptance rate below 1%: workspace rejects nearly all "
          "samples");
    Sample smp;
    for (int k = 0; k < 3; ++k)
      smp.p.angles[k] =
          cfg.reference.angles[k] + cfg.amplitude * rng.uniform_symmetric();
    if (!in_workspace(smp.p, geom, limits)) continue;
    smp.s = sensor.sense(forward_kinematics(smp.p, geom));
    ds.samples.push_back(std::move(smp));
  }

  ds.stats = compute_normalization(ds.samples);
  for (Sample& smp : ds.samples) {
    smp.p_norm = ds.stats.normalize_p(smp.p.angles);
    smp.s_norm = ds.stats.normalize_s(smp.s);
  }
  return ds;
}

std::size_t pair_count(std::size_t n) { return n * (n - 1) / 2; }

double neighborhood_weight(double d, double mu) { return d <= mu ? 1.0 : 0.0; }

void save_dataset(const Dataset& ds, const std::string& csv_path,
                  const std::string& stats_path) {
  const int s_dim = ds.s_dim();
  std::ostringstream out;
  out << "m1,m2,m3";
  for (int k = 1; k <= s_dim; ++k) out << ",s_" << k;
  out << ",pn_1,pn_2,pn_3";
  for (int k = 1; k <= s_dim; ++k) out << ",sn_" << k;
  out << "\n";
  for (const Sample& smp : ds.samples) {
    for (int k = 0; k < 3; ++k)
      out << (k ? "," : "") << format_double(smp.p.angles[k]);
    for (int k = 0; k < s_dim; ++k) out << "," << format_double(smp.s[k]);
    for (int k = 0; k < 3; ++k) out << "," << format_double(smp.p_norm[k]);
    for (int k = 0; k < s_dim; ++k) out << "," << format_double(smp.s_norm[k]);
    out << "\n";
  }
  write_text_file(csv_path, out.str());
  write_text_file(stats_path, stats_to_json(ds.stats, ds.environment_id));
}

Dataset load_dataset(const std::string& csv_path,
                     const std::string& stats_path) {
  Dataset ds;
  ds.stats = stats_from_json(read_text_file(stats_path), &ds.environment_id);

  std::istringstream in(read_text_file(csv_path));
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("empty dataset csv: " + csv_path);
  const auto header = split_csv_line(line);
  if (header.size() < 10 || (header.size() - 6) % 2 != 0)
    throw std::runtime_error("malformed dataset header: " + csv_path);
  const int s_dim = static_cast<int>((header.size() - 6) / 2);

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (static_cast<int>(f.size()) != 6 + 2 * s_dim)
      throw std::runtime_error("malformed dataset row: " + csv_path);
    Sample smp;
    smp.s = VecX::Zero(s_dim);
    smp.s_norm = VecX::Zero(s_dim);
    int i = 0;
    for (int k = 0; k < 3; ++k) smp.p.angles[k] = std::stod(f[i++]);
    for (int k = 0; k < s_dim; ++k) smp.s[k] = std::stod(f[i++]);
    for (int k = 0; k < 3; ++k) smp.p_norm[k] = std::stod(f[i++]);
    for (int k = 0; k < s_dim; ++k) smp.s_norm[k] = std::stod(f[i++]);
    ds.samples.push_back(std::move(smp));
  }
  if (ds.samples.empty())
    throw std::runtime_error("dataset csv has no rows: " + csv_path);
  return ds;
}

std::string stats_to_json(const NormalizationStats& stats,
                          const std::string& environment_id) {
  nlohmann::json j;
  j["p_mean"] = {stats.p_mean[0], stats.p_mean[1], stats.p_mean[2]};
  j["p_scale"] = stats.p_scale;
  j["s_mean"] = std::vector<double>(stats.s_mean.data(),
                                    stats.s_mean.data() + stats.s_mean.size());
  j["s_scale"] = stats.s_scale;
  j["environment_id"] = environment_id;
  return j.dump(2) + "\n";
}

NormalizationStats stats_from_json(const std::string& text,
                                   std::string* environment_id) {
  const auto j = nlohmann::json::parse(text);
  NormalizationStats st;
  for (int k = 0; k < 3; ++k) st.p_mean[k] = j.at("p_mean").at(k).get<double>();
  st.p_scale = j.at("p_scale").get<double>();
  const auto& sm = j.at("s_mean");
  st.s_mean = VecX::Zero(sm.size());
  for (std::size_t k = 0; k < sm.size(); ++k)
    st.s_mean[static_cast<int>(k)] = sm.at(k).get<double>();
  st.s_scale = j.at("s_scale").get<double>();
  if (environment_id)
    *environment_id = j.value("environment_id", std::string{});
  return st;
}

}  // namespace selfmap
