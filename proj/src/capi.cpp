#include "selfmap.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>

#include "json.hpp"
#include "selfmap/config.hpp"
#include "selfmap/dataset.hpp"
#include "selfmap/errors.hpp"
#include "selfmap/io.hpp"
#include "selfmap/jacobian.hpp"
#include "selfmap/mlp.hpp"
#include "selfmap/pipeline.hpp"

struct selfmap_config {
  selfmap::RunConfig cfg;
};

struct selfmap_model {
  selfmap::NetworkParams params;
  selfmap::NormalizationStats stats;
};

namespace {

thread_local std::string t_last_error;

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

selfmap_status fail(selfmap_status status, const char* what) {
  t_last_error = what;
  return status;
}

template <typename Fn>
selfmap_status guarded(Fn&& fn) {
  t_last_error.clear();
  try {
    return fn();
  } catch (const selfmap::MissingStageError& e) {
    return fail(SELFMAP_ERR_MISSING_STAGE, e.what());
  } catch (const selfmap::IoError& e) {
    return fail(SELFMAP_ERR_IO, e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(SELFMAP_ERR_PARSE, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(SELFMAP_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::runtime_error& e) {
    return fail(SELFMAP_ERR_NUMERIC, e.what());
  } catch (const std::exception& e) {
    return fail(SELFMAP_ERR_INTERNAL, e.what());
  }
}

selfmap_status require(bool ok, const char* what) {
  return ok ? SELFMAP_OK : fail(SELFMAP_ERR_INVALID_ARGUMENT, what);
}

}  // namespace

extern "C" {

const char* selfmap_last_error(void) { return t_last_error.c_str(); }

void selfmap_string_free(char* s) { std::free(s); }

selfmap_status selfmap_config_default(int scenario, selfmap_config** out) {
  if (require(out != nullptr, "out is null") != SELFMAP_OK)
    return SELFMAP_ERR_INVALID_ARGUMENT;
  return guarded([&] {
    *out = new selfmap_config{selfmap::default_config(scenario)};
    return SELFMAP_OK;
  });
}

selfmap_status selfmap_config_load(const char* path, selfmap_config** out) {
  if (require(path != nullptr && out != nullptr, "path or out is null") !=
      SELFMAP_OK)
    return SELFMAP_ERR_INVALID_ARGUMENT;
  return guarded([&] {
    *out = new selfmap_config{selfmap::load_config(path)};
    return SELFMAP_OK;
  });
}

selfmap_status selfmap_config_save(const selfmap_config* cfg,
                                   const char* path) {
  if (require(cfg != nullptr && path != nullptr, "cfg or path is null") !=
      SELFMAP_OK)
    return SELFMAP_ERR_INVALID_ARGUMENT;
  return guarded([&] {
    selfmap::save_config(cfg->cfg, path);
    return SELFMAP_OK;
  });
}

selfmap_status selfmap_config_set(selfmap_config* cfg,
                                  const char* assignment) {
  if (require(cfg != nullptr && assignment != nullptr,
              "cfg or assignment is null") != SELFMAP_OK)
    return SELFMAP_ERR_INVALID_ARGUMENT;
  return guarded([&] {
    selfmap::apply_override(cfg->cfg, assignment);
    return SELFMAP_OK;
  });
}

selfmap_status selfmap_config_dump(const selfmap_config* cfg,
                                   char** json_out) {
  if (require(cfg != nullptr && json_out != nullptr,
              "cfg or json_out is null") != SELFMAP_OK)
    return SELFMAP_ERR_INVALID_ARGUMENT;
  return guarded([&] {
    *json_out = dup_string(selfmap::config_to_json(cfg->cfg));
    return *json_out ? SELFMAP_OK
                     : fail(SELFMAP_ERR_INTERNAL, "allocation failed");
  });
}

void selfmap_config_free(selfmap_config* cfg) { delete cfg; }

selfmap_status selfmap_run(const selfmap_config* cfg,
                           char** manifest_json_out) {
  if (require(cfg != nullptr, "cfg is null") != SELFMAP_OK)
    return SELFMAP_ERR_INVALID_ARGUMENT;
  return guarded([&] {
    const std::string manifest = selfmap::run_all(cfg->cfg);
    if (manifest_json_out) {
      *manifest_json_out = dup_string(manifest);
      if (!*manifest_json_out)
        return fail(SELFMAP_ERR_INTERNAL, "allocation failed");
    }
    return SELFMAP_OK;
  });
}

selfmap_status selfmap_run_stage(const selfmap_config* cfg, const char* stage,
                                 char** metrics_json_out) {
  if (require(cfg != nullptr && stage != nullptr, "cfg or stage is null") !=
      SELFMAP_OK)
    return SELFMAP_ERR_INVALID_ARGUMENT;
  return guarded([&] {
    const std::string metrics = selfmap::run_stage(cfg->cfg, stage);
    if (metrics_json_out) {
      *metrics_json_out = dup_string(metrics);
      if (!*metrics_json_out)
        return fail(SELFMAP_ERR_INTERNAL, "allocation failed");
    }
    return SELFMAP_OK;
  });
}

selfmap_status selfmap_model_load(const char* model_path,
                                  const char* stats_path,
                                  selfmap_model** out) {
  if (require(model_path != nullptr && stats_path != nullptr && out != nullptr,
              "model_path, stats_path, or out is null") != SELFMAP_OK)
    return SELFMAP_ERR_INVALID_ARGUMENT;
  return guarded([&] {
    auto model = std::make_unique<selfmap_model>();
    model->params = selfmap::load_network(model_path);
    model->stats =
        selfmap::stats_from_json(selfmap::read_text_file(stats_path));
    *out = model.release();
    return SELFMAP_OK;
  });
}

selfmap_status selfmap_model_output_dim(const selfmap_model* m,
                                        int* dim_out) {
  if (require(m != nullptr && dim_out != nullptr, "m or dim_out is null") !=
      SELFMAP_OK)
    return SELFMAP_ERR_INVALID_ARGUMENT;
  *dim_out = m->params.n_out();
  t_last_error.clear();
  return SELFMAP_OK;
}

selfmap_status selfmap_model_evaluate(const selfmap_model* m,
                                      const double p[3], double* xi_out,
                                      size_t xi_len) {
  if (require(m != nullptr && p != nullptr && xi_out != nullptr,
              "m, p, or xi_out is null") != SELFMAP_OK)
    return SELFMAP_ERR_INVALID_ARGUMENT;
  return guarded([&]() -> selfmap_status {
    const int n_out = m->params.n_out();
    if (xi_len != static_cast<size_t>(n_out))
      return fail(SELFMAP_ERR_INVALID_ARGUMENT,
                  "xi_len does not match the model's output dimension");
    const selfmap::Vec3 raw(p[0], p[1], p[2]);
    const selfmap::VecX xi =
        selfmap::evaluate(m->params, m->stats.normalize_p(raw));
    for (int k = 0; k < n_out; ++k) xi_out[k] = xi[k];
    return SELFMAP_OK;
  });
}

selfmap_status selfmap_model_jacobian(const selfmap_model* m,
                                      const double p[3], double eps,
                                      double* jac_out, size_t jac_len) {
  if (require(m != nullptr && p != nullptr && jac_out != nullptr,
              "m, p, or jac_out is null") != SELFMAP_OK)
    return SELFMAP_ERR_INVALID_ARGUMENT;
  return guarded([&]() -> selfmap_status {
    const int n_out = m->params.n_out();
    if (jac_len != static_cast<size_t>(n_out) * 3)
      return fail(SELFMAP_ERR_INVALID_ARGUMENT,
                  "jac_len does not match output_dim x 3");
    const selfmap::Vec3 raw(p[0], p[1], p[2]);
    const selfmap::MatX J =
        selfmap::network_jacobian(m->params, m->stats.normalize_p(raw), eps);
    for (int r = 0; r < n_out; ++r)
      for (int c = 0; c < 3; ++c) jac_out[r * 3 + c] = J(r, c);
    return SELFMAP_OK;
  });
}

void selfmap_model_free(selfmap_model* m) { delete m; }

}  // extern "C"
