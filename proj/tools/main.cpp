// Command-line front end; everything goes through the shared library's C
// interface.
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "selfmap.h"

namespace {

struct CliOptions {
  std::string config_path;
  std::string output_dir;
  std::uint64_t seed = 0;
  int scenario = 0;
  int threads = 0;
  std::vector<std::string> overrides;
  bool has_seed = false;
  bool has_output = false;
  bool has_threads = false;
};

int fail(const char* context) {
  std::fprintf(stderr, "error (%s): %s\n", context, selfmap_last_error());
  return 1;
}

int run_command(const CliOptions& opts, const std::string& stage) {
  selfmap_config* cfg = nullptr;
  selfmap_status st;
  if (!opts.config_path.empty())
    st = selfmap_config_load(opts.config_path.c_str(), &cfg);
  else
    st = selfmap_config_default(opts.scenario > 0 ? opts.scenario : 1, &cfg);
  if (st != SELFMAP_OK) return fail("config");

  std::vector<std::string> assignments;
  if (opts.scenario > 0 && !opts.config_path.empty())
    assignments.push_back("scenario=" + std::to_string(opts.scenario));
  if (opts.has_seed)
    assignments.push_back("seed=" + std::to_string(opts.seed));
  if (opts.has_output) assignments.push_back("output_dir=" + opts.output_dir);
  if (opts.has_threads)
    assignments.push_back("threads=" + std::to_string(opts.threads));
  for (const std::string& s : opts.overrides) assignments.push_back(s);

  for (const std::string& a : assignments) {
    if (selfmap_config_set(cfg, a.c_str()) != SELFMAP_OK) {
      fail(a.c_str());
      selfmap_config_free(cfg);
      return 1;
    }
  }

  char* result = nullptr;
  if (stage == "run")
    st = selfmap_run(cfg, &result);
  else
    st = selfmap_run_stage(cfg, stage.c_str(), &result);
  selfmap_config_free(cfg);
  if (st != SELFMAP_OK) return fail(stage.c_str());

  if (result) {
    std::fputs(result, stdout);
    selfmap_string_free(result);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Learns an internal representation of a robot arm's end-effector "
      "configuration from unordered sensor data, then evaluates it by "
      "null-space comparison and pseudoinverse reaching."};
  app.require_subcommand(1);

  CliOptions opts;
  app.add_option("--config", opts.config_path,
                 "JSON configuration file (defaults built in)")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", opts.seed, "master random seed")
      ->each([&opts](const std::string&) { opts.has_seed = true; });
  app.add_option("--scenario", opts.scenario,
                 "1 = position sensor, 2 = retina across environments")
      ->check(CLI::IsMember({1, 2}));
  app.add_option("--output", opts.output_dir, "output directory")
      ->each([&opts](const std::string&) { opts.has_output = true; });
  app.add_option("--threads", opts.threads,
                 "worker threads (1 is bit-reproducible)")
      ->check(CLI::PositiveNumber)
      ->each([&opts](const std::string&) { opts.has_threads = true; });
  app.add_option("--set", opts.overrides,
                 "config override key=value, repeatable "
                 "(e.g. --set training.mu=0.2)");

  static const char* const kCommands[] = {
      "run",   "explore", "pretrain", "train",
      "eval-nullspace", "reach",   "export"};
  static const char* const kHelp[] = {
      "run the whole pipeline and write manifest.json",
      "sample arm configurations and sensor readings",
      "unfold the sensor set and fit the network to it",
      "minimize the pairwise distance-mismatch cost",
      "compare learned and analytic Jacobian null spaces",
      "servo to a grid of targets with both Jacobians",
      "write manifest.json from existing artifacts"};
  for (std::size_t i = 0; i < std::size(kCommands); ++i)
    app.add_subcommand(kCommands[i], kHelp[i])->fallthrough();

  CLI11_PARSE(app, argc, argv);
  return run_command(opts, app.get_subcommands().front()->get_name());
}
