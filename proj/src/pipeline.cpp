#include "selfmap/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "selfmap/dataset.hpp"
#include "selfmap/errors.hpp"
#include "selfmap/io.hpp"
#include "selfmap/isomap.hpp"
#include "selfmap/jacobian.hpp"
#include "selfmap/mlp.hpp"
#include "selfmap/reach.hpp"
#include "selfmap/rng.hpp"
#include "selfmap/sensors.hpp"
#include "selfmap/trainer.hpp"

namespace selfmap {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string join(const std::string& dir, const std::string& name) {
  return dir + "/" + name;
}

std::string require_file(const std::string& path,
                         const std::string& producer) {
  if (!fs::exists(path))
    throw MissingStageError("missing " + path + "; run the " + producer +
                            " stage first");
  return path;
}

ArmGeometry arm_geometry(const RunConfig& cfg) {
  ArmGeometry geom;
  geom.segment_length = cfg.segment_length;
  return geom;
}

ExplorationConfig exploration_config(const RunConfig& cfg, int phase) {
  ExplorationConfig ec;
  ec.n_samples = cfg.n_samples;
  ec.reference.angles = cfg.reference;
  ec.amplitude = cfg.amplitude;
  ec.seed = derive_seed(cfg.seed, "explore", phase);
  return ec;
}

// Builds the phase's sensor; for the retina scenario this draws the phase's
// light environment (optionally handed back for persistence).
std::unique_ptr<Sensor> make_sensor(const RunConfig& cfg, int phase,
                                    const ArmGeometry& geom,
                                    Environment* env_out = nullptr) {
  if (cfg.scenario == 1) return std::make_unique<PositionSensor>();
  Environment env = generate_environment(
      derive_seed(cfg.seed, "environment", phase), cfg.n_red, cfg.n_blue,
      EnvironmentBounds{}, geom);
  if (env_out) *env_out = env;
  return std::make_unique<RetinaSensor>(RetinaGeometry{}, std::move(env));
}

std::string environment_label(const RunConfig& cfg, int phase) {
  if (cfg.scenario == 1) return "position";
  return "retina-" + std::to_string(phase);
}

Dataset explore_phase(const RunConfig& cfg, int phase,
                      Environment* env_out = nullptr) {
  const ArmGeometry geom = arm_geometry(cfg);
  const auto sensor = make_sensor(cfg, phase, geom, env_out);
  return explore(exploration_config(cfg, phase), *sensor, geom,
                 WorkspaceLimits{}, environment_label(cfg, phase));
}

Dataset load_explored(const RunConfig& cfg) {
  const std::string dir = cfg.output_dir;
  return load_dataset(require_file(join(dir, "dataset.csv"), "explore"),
                      require_file(join(dir, "stats.json"), "explore"));
}

NetworkParams load_model(const RunConfig& cfg, const std::string& name,
                         const std::string& producer) {
  return load_network(require_file(join(cfg.output_dir, name), producer));
}

TrainConfig train_config(const RunConfig& cfg) {
  TrainConfig tc;
  tc.mu = cfg.mu;
  tc.gamma = cfg.gamma;
  tc.max_iterations = cfg.train_iterations;
  tc.q_min = cfg.q_min;
  tc.n_environments = cfg.n_environments;
  tc.rprop = cfg.rprop;
  tc.gradient = cfg.gradient == "gated" ? GradientFormula::Gated
                                        : GradientFormula::Exact;
  tc.threads = cfg.threads;
  return tc;
}

std::string index_name(const char* prefix, int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%03d.csv", prefix, index);
  return buf;
}

json stage_explore(const RunConfig& cfg) {
  fs::create_directories(cfg.output_dir);
  Environment env;
  const Dataset ds = explore_phase(cfg, 0, &env);
  save_dataset(ds, join(cfg.output_dir, "dataset.csv"),
               join(cfg.output_dir, "stats.json"));
  if (cfg.scenario == 2)
    write_text_file(join(cfg.output_dir, "environment.json"),
                    environment_to_json(env));
  json m;
  m["n_samples"] = ds.size();
  m["s_dim"] = ds.s_dim();
  m["environment_id"] = ds.environment_id;
  return m;
}

json stage_pretrain(const RunConfig& cfg) {
  const Dataset ds = load_explored(cfg);
  MatX points(ds.size(), ds.s_dim());
  for (int i = 0; i < ds.size(); ++i)
    points.row(i) = ds.samples[static_cast<std::size_t>(i)].s_norm.transpose();

  const GeodesicGraph graph = build_graph(points, cfg.isomap_k);
  const MatX D = geodesic_distances(graph);
  const EmbeddingTargets targets = classical_mds(D, cfg.n_out);
  write_targets_csv(targets, join(cfg.output_dir, "embedding.csv"));

  NetworkParams params = init_weights(
      3, cfg.n_hidden, cfg.n_out, derive_seed(cfg.seed, "init-weights", 0));
  const PretrainResult result =
      pretrain(std::move(params), ds, targets, cfg.pretrain_iterations,
               cfg.rprop);
  save_network(result.params, join(cfg.output_dir, "model_pretrained.json"));

  json m;
  m["initial_error"] = result.initial_error;
  m["final_error"] = result.final_error;
  m["k_used"] = graph.k_used;
  m["embedding_scale"] = targets.scale_applied;
  write_text_file(join(cfg.output_dir, "pretrain.json"), m.dump(2) + "\n");
  return m;
}

json stage_train(const RunConfig& cfg) {
  const Dataset first = load_explored(cfg);
  NetworkParams params =
      load_model(cfg, "model_pretrained.json", "pretrain");

  std::ostringstream log;
  log << "iteration,phase,q,active_pair_fraction\n";
  const TrainLogger logger = [&log](const TrainLogEntry& e) {
    log << e.iteration << ',' << e.phase << ',' << format_double(e.q) << ','
        << format_double(e.active_fraction) << '\n';
  };

  const auto provider = [&cfg, &first](int phase) {
    return phase == 0 ? first : explore_phase(cfg, phase);
  };
  const TrainResult result =
      train(std::move(params), provider, train_config(cfg), logger);

  save_network(result.params, join(cfg.output_dir, "model.json"));
  write_text_file(join(cfg.output_dir, "training_log.csv"), log.str());

  json m;
  m["q_initial"] = result.q_initial;
  m["q_final"] = result.q_final;
  m["iterations_run"] = result.iterations_run;
  write_text_file(join(cfg.output_dir, "train.json"), m.dump(2) + "\n");
  return m;
}

json stage_eval_nullspace(const RunConfig& cfg) {
  const Dataset ds = load_explored(cfg);
  const NetworkParams params = load_model(cfg, "model.json", "train");
  const ArmGeometry geom = arm_geometry(cfg);

  const WorkspaceLimits limits;
  const TargetGrid grid = make_target_grid(
      ds, ProprioState{cfg.reference}, geom, limits, cfg.grid_side,
      cfg.grid_shrink,
      exploration_ik_options(exploration_config(cfg, 0), geom, limits));
  std::vector<ProprioState> configs;
  for (std::size_t i = 0; i < grid.configs.size(); ++i)
    if (grid.feasible[i]) configs.push_back(grid.configs[i]);

  const DivergenceReport report =
      evaluate_divergence(params, ds.stats, configs, geom, cfg.fd_epsilon);

  json doc = json::parse(divergence_to_json(report));
  doc["n_grid_targets"] = static_cast<int>(grid.targets.size());
  doc["n_grid_feasible"] = grid.n_feasible();
  write_text_file(join(cfg.output_dir, "divergence.json"),
                  doc.dump(2) + "\n");

  json m = doc;
  m.erase("points");
  return m;
}

struct ReachOutcome {
  ConsistentTarget target;
  Trajectory f;
  Trajectory g;
};

json stage_reach(const RunConfig& cfg) {
  const Dataset ds = load_explored(cfg);
  const NetworkParams params = load_model(cfg, "model.json", "train");
  const ArmGeometry geom = arm_geometry(cfg);
  const WorkspaceLimits limits;

  const TargetGrid grid = make_target_grid(
      ds, ProprioState{cfg.reference}, geom, limits, cfg.grid_side,
      cfg.grid_shrink,
      exploration_ik_options(exploration_config(cfg, 0), geom, limits));
  std::vector<int> indices;
  for (std::size_t i = 0; i < grid.targets.size(); ++i)
    if (grid.feasible[i]) indices.push_back(static_cast<int>(i));

  const ExplorationConfig box = exploration_config(cfg, 0);
  std::vector<ReachOutcome> outcomes(indices.size());
  const auto run_one = [&](std::size_t slot) {
    const int idx = indices[slot];
    ReachOutcome& out = outcomes[slot];
    out.target = make_consistent_targets(
        params, ds.stats, grid.targets[static_cast<std::size_t>(idx)], box,
        geom, limits, derive_seed(cfg.seed, "reach-target", idx));

    ReachTask task_f;
    task_f.start.angles = cfg.reference;
    task_f.target = out.target.xi;
    task_f.step = cfg.reach_step;
    task_f.tol = cfg.reach_tol;
    out.f = reach_f(params, ds.stats, task_f, geom, cfg.fd_epsilon);

    ReachTask task_g = task_f;
    task_g.target = grid.targets[static_cast<std::size_t>(idx)];
    out.g = reach_g(task_g, geom);
    annotate_internal_state(out.g, params, ds.stats);
  };

  const int workers = std::min<int>(cfg.threads, int(indices.size()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < indices.size(); ++i) run_one(i);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t i = static_cast<std::size_t>(w); i < indices.size();
             i += static_cast<std::size_t>(workers))
          run_one(i);
      });
    for (auto& t : pool) t.join();
  }

  const std::string traj_dir = join(cfg.output_dir, "trajectories");
  fs::create_directories(traj_dir);

  json targets = json::array();
  int f_converged = 0;
  int g_converged = 0;
  int agree = 0;
  const double agree_tol = 0.05 * geom.segment_length;
  for (std::size_t slot = 0; slot < indices.size(); ++slot) {
    const int idx = indices[slot];
    const ReachOutcome& out = outcomes[slot];
    const std::string f_name = index_name("f", idx);
    const std::string g_name = index_name("g", idx);
    write_trajectory_csv(out.f, join(traj_dir, f_name));
    write_trajectory_csv(out.g, join(traj_dir, g_name));

    std::vector<VecX> xi_path;
    for (const TrajectoryStep& s : out.f.steps) xi_path.push_back(s.xi);
    std::vector<VecX> ee_path;
    for (const TrajectoryStep& s : out.g.steps) {
      VecX e(2);
      e << s.ee.x(), s.ee.y();
      ee_path.push_back(e);
    }
    VecX c_star(2);
    c_star << grid.targets[static_cast<std::size_t>(idx)].x(),
        grid.targets[static_cast<std::size_t>(idx)].y();

    const Vec2 f_end = out.f.steps.back().ee;
    const Vec2 g_end = out.g.steps.back().ee;
    const double endpoint_distance = (f_end - g_end).norm();
    if (out.f.converged) ++f_converged;
    if (out.g.converged) ++g_converged;
    if (endpoint_distance <= agree_tol) ++agree;

    json entry;
    entry["index"] = idx;
    entry["target"] = {c_star[0], c_star[1]};
    entry["xi_target"] = std::vector<double>(
        out.target.xi.data(), out.target.xi.data() + out.target.xi.size());
    entry["endpoint_distance"] = endpoint_distance;
    entry["f"] = {
        {"file", "trajectories/" + f_name},
        {"converged", out.f.converged},
        {"stalled", out.f.stalled},
        {"iterations", out.f.iterations},
        {"final_ee", {f_end.x(), f_end.y()}},
        {"straightness",
         max_deviation_from_segment(xi_path, out.f.steps.front().xi,
                                    out.target.xi)},
        {"monotone_fraction",
         monotone_progress_fraction(xi_path, out.target.xi)},
    };
    entry["g"] = {
        {"file", "trajectories/" + g_name},
        {"converged", out.g.converged},
        {"stalled", out.g.stalled},
        {"iterations", out.g.iterations},
        {"final_ee", {g_end.x(), g_end.y()}},
        {"straightness",
         max_deviation_from_segment(ee_path, ee_path.front(), c_star)},
    };
    targets.push_back(entry);
  }

  json doc;
  doc["step"] = cfg.reach_step;
  doc["tol"] = cfg.reach_tol;
  doc["n_grid_targets"] = static_cast<int>(grid.targets.size());
  doc["n_feasible"] = static_cast<int>(indices.size());
  doc["f_converged"] = f_converged;
  doc["g_converged"] = g_converged;
  doc["endpoint_agreement_fraction"] =
      indices.empty() ? 0.0
                      : static_cast<double>(agree) /
                            static_cast<double>(indices.size());
  doc["targets"] = targets;
  write_text_file(join(cfg.output_dir, "reach.json"), doc.dump(2) + "\n");

  json m = doc;
  m.erase("targets");
  return m;
}

json read_metrics_if_present(const std::string& path, const char* drop_key) {
  if (!fs::exists(path)) return nullptr;
  json j = json::parse(read_text_file(path));
  if (drop_key && j.contains(drop_key)) j.erase(drop_key);
  return j;
}

json stage_export(const RunConfig& cfg, const json* timings) {
  const std::string dir = cfg.output_dir;
  json files = json::object();
  const auto note = [&](const char* key, const std::string& name) {
    const std::string p = join(dir, name);
    if (fs::exists(p) && fs::file_size(p) > 0) files[key] = name;
  };
  note("dataset", "dataset.csv");
  note("stats", "stats.json");
  note("environment", "environment.json");
  note("embedding", "embedding.csv");
  note("model_pretrained", "model_pretrained.json");
  note("model", "model.json");
  note("training_log", "training_log.csv");
  note("divergence", "divergence.json");
  note("reach", "reach.json");

  const std::string traj_dir = join(dir, "trajectories");
  if (fs::is_directory(traj_dir)) {
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(traj_dir))
      if (e.is_regular_file()) names.push_back(e.path().filename().string());
    std::sort(names.begin(), names.end());
    json arr = json::array();
    for (const std::string& n : names) arr.push_back("trajectories/" + n);
    files["trajectories"] = arr;
  }

  json metrics = json::object();
  if (auto j = read_metrics_if_present(join(dir, "pretrain.json"), nullptr);
      !j.is_null())
    metrics["pretrain"] = j;
  if (auto j = read_metrics_if_present(join(dir, "train.json"), nullptr);
      !j.is_null())
    metrics["train"] = j;
  if (auto j = read_metrics_if_present(join(dir, "divergence.json"), "points");
      !j.is_null())
    metrics["divergence"] = j;
  if (auto j = read_metrics_if_present(join(dir, "reach.json"), "targets");
      !j.is_null())
    metrics["reach"] = j;

  RunConfig snapshot = cfg;
  snapshot.output_dir = ".";  // the manifest lives inside the output dir

  json manifest;
  manifest["format_version"] = 1;
  manifest["config"] = json::parse(config_to_json(snapshot));
  manifest["files"] = files;
  manifest["metrics"] = metrics;
  if (timings) manifest["timings_ms"] = *timings;
  write_text_file(join(dir, "manifest.json"), manifest.dump(2) + "\n");
  return metrics;
}

}  // namespace

const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> names{
      "explore", "pretrain", "train", "eval-nullspace", "reach", "export"};
  return names;
}

std::string run_stage(const RunConfig& cfg, const std::string& stage) {
  json m;
  if (stage == "explore")
    m = stage_explore(cfg);
  else if (stage == "pretrain")
    m = stage_pretrain(cfg);
  else if (stage == "train")
    m = stage_train(cfg);
  else if (stage == "eval-nullspace")
    m = stage_eval_nullspace(cfg);
  else if (stage == "reach")
    m = stage_reach(cfg);
  else if (stage == "export")
    m = stage_export(cfg, nullptr);
  else
    throw std::invalid_argument("unknown stage: " + stage);
  return m.dump(2) + "\n";
}

std::string run_all(const RunConfig& cfg) {
  json timings = json::object();
  for (const std::string& stage : stage_names()) {
    const auto t0 = std::chrono::steady_clock::now();
    if (stage == "export") {
      stage_export(cfg, &timings);
    } else {
      run_stage(cfg, stage);
      const auto t1 = std::chrono::steady_clock::now();
      timings[stage] =
          std::chrono::duration<double, std::milli>(t1 - t0).count();
    }
  }
  return read_text_file(join(cfg.output_dir, "manifest.json"));
}

}  // namespace selfmap
