#include "isovol/isovol.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "core/backtest.hpp"
#include "core/csv.hpp"
#include "core/diagnostics.hpp"
#include "core/errors.hpp"
#include "core/patch_topology.hpp"
#include "core/sphere_geometry.hpp"
#include "core/volume_annealing.hpp"

struct isovol_body {
  isovol::PatchBody body;
};

struct isovol_transform {
  isovol::PatchTransform transform;
};

namespace {

thread_local std::string last_error;

template <class F>
isovol_status guarded(F&& f) {
  try {
    f();
    last_error.clear();
    return ISOVOL_OK;
  } catch (const isovol::Error& e) {
    last_error = e.what();
    return static_cast<isovol_status>(static_cast<int>(e.code()));
  } catch (const nlohmann::json::exception& e) {
    last_error = std::string("bad JSON: ") + e.what();
    return ISOVOL_INVALID_ARGUMENT;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return ISOVOL_INTERNAL_ERROR;
  } catch (const std::exception& e) {
    last_error = e.what();
    return ISOVOL_INTERNAL_ERROR;
  } catch (...) {
    last_error = "unknown error";
    return ISOVOL_INTERNAL_ERROR;
  }
}

void require(bool ok, const char* what) {
  if (!ok) isovol::fail(isovol::Errc::invalid_argument, what);
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

isovol::SampleOptions to_sample_options(const isovol_sample_options* o) {
  isovol::SampleOptions s;
  if (!o) return s;
  require(o->walk == 0 || o->walk == 1, "walk must be 0 (reflective) or 1 (great-cycle)");
  s.walk = o->walk == 0 ? isovol::WalkKind::regcw : isovol::WalkKind::gcw;
  if (o->tau > 0.0) s.tau = o->tau;
  if (o->rho > 0) s.rho = o->rho;
  if (o->walk_length > 0) s.walk_length = o->walk_length;
  s.burn_in = static_cast<std::size_t>(o->burn_in);
  return s;
}

isovol::VolumeOptions to_volume_options(const isovol_volume_options* o) {
  isovol::VolumeOptions v;
  if (!o) return v;
  v.epsilon = o->epsilon;
  v.delta = o->delta;
  v.epsilon0 = o->epsilon0;
  v.zeta = o->zeta;
  v.max_samples_per_phase = static_cast<std::size_t>(o->max_samples_per_phase);
  v.max_phases = o->max_phases;
  return v;
}

}  // namespace

extern "C" {

const char* isovol_version(void) { return ISOVOL_VERSION_STRING; }

const char* isovol_status_name(isovol_status status) {
  if (status == ISOVOL_OK) return "Ok";
  if (status == ISOVOL_INTERNAL_ERROR) return "InternalError";
  return isovol::errc_name(static_cast<isovol::Errc>(static_cast<int>(status)));
}

const char* isovol_last_error(void) { return last_error.c_str(); }

void isovol_string_free(char* s) { std::free(s); }
void isovol_buffer_free(double* buffer) { std::free(buffer); }

isovol_status isovol_transform_create(const double* cov, int n, double level, isovol_transform** out) {
  return guarded([&] {
    require(cov && out && n > 0, "transform_create needs a covariance and an output handle");
    *out = nullptr;
    const Eigen::MatrixXd s = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(cov, n, n);
    *out = new isovol_transform{isovol::PatchTransform::build(s, level)};
  });
}

void isovol_transform_free(isovol_transform* t) { delete t; }

int isovol_transform_assets(const isovol_transform* t) { return t ? t->transform.assets() : 0; }
int isovol_transform_dim(const isovol_transform* t) { return t ? t->transform.dim() : 0; }

isovol_status isovol_transform_to_patch(const isovol_transform* t, const double* weights, double* point) {
  return guarded([&] {
    require(t && weights && point, "transform_to_patch needs a transform, weights and output");
    const Eigen::VectorXd y =
        t->transform.to_patch(Eigen::Map<const Eigen::VectorXd>(weights, t->transform.assets()));
    Eigen::Map<Eigen::VectorXd>(point, y.size()) = y;
  });
}

isovol_status isovol_transform_from_patch(const isovol_transform* t, const double* point, double* weights) {
  return guarded([&] {
    require(t && point && weights, "transform_from_patch needs a transform, point and output");
    const Eigen::VectorXd x = t->transform.from_patch(Eigen::Map<const Eigen::VectorXd>(point, t->transform.dim()));
    Eigen::Map<Eigen::VectorXd>(weights, x.size()) = x;
  });
}

isovol_status isovol_transform_to_json(const isovol_transform* t, char** json) {
  return guarded([&] {
    require(t && json, "transform_to_json needs a transform and output");
    *json = copy_string(t->transform.to_json().dump());
  });
}

isovol_status isovol_body_create(const double* normals, const double* offsets, int dim, isovol_body** out) {
  return guarded([&] {
    require(normals && offsets && out && dim >= 2, "body_create needs normals, offsets, dim >= 2 and output");
    *out = nullptr;
    isovol::SimplexH s;
    s.normals = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        normals, dim + 1, dim);
    s.offsets = Eigen::Map<const Eigen::VectorXd>(offsets, dim + 1);
    *out = new isovol_body{isovol::PatchBody(std::move(s))};
  });
}

isovol_status isovol_body_from_transform(const isovol_transform* t, isovol_body** out) {
  return guarded([&] {
    require(t && out, "body_from_transform needs a transform and output");
    *out = nullptr;
    *out = new isovol_body{isovol::PatchBody(t->transform.simplex())};
  });
}

isovol_status isovol_body_from_json(const char* json, isovol_body** out) {
  return guarded([&] {
    require(json && out, "body_from_json needs JSON text and output");
    *out = nullptr;
    *out = new isovol_body{isovol::PatchBody(isovol::SimplexH::from_json(nlohmann::json::parse(json)))};
  });
}

void isovol_body_free(isovol_body* body) { delete body; }

int isovol_body_dim(const isovol_body* body) { return body ? body->body.dim() : 0; }
int isovol_body_component_count(const isovol_body* body) { return body ? body->body.component_count() : 0; }

isovol_status isovol_body_membership(const isovol_body* body, const double* point, int* component) {
  return guarded([&] {
    require(body && point && component, "body_membership needs a body, point and output");
    const auto m = body->body.membership(Eigen::Map<const Eigen::VectorXd>(point, body->body.dim()));
    *component = m ? *m : -1;
  });
}

isovol_status isovol_body_components_json(const isovol_body* body, char** json) {
  return guarded([&] {
    require(body && json, "body_components_json needs a body and output");
    *json = copy_string(body->body.to_json().dump());
  });
}

void isovol_sample_options_init(isovol_sample_options* o) {
  if (!o) return;
  o->walk = 0;
  o->tau = 0.0;
  o->rho = 0;
  o->walk_length = 0;
  o->burn_in = 0;
  o->threads = 0;
}

void isovol_volume_options_init(isovol_volume_options* o) {
  if (!o) return;
  const isovol::VolumeOptions v;
  o->epsilon = v.epsilon;
  o->delta = v.delta;
  o->epsilon0 = v.epsilon0;
  o->zeta = v.zeta;
  o->max_samples_per_phase = v.max_samples_per_phase;
  o->max_phases = v.max_phases;
  o->threads = 0;
}

isovol_status isovol_body_estimate_volumes(isovol_body* body, const isovol_volume_options* options, uint64_t seed,
                                           char** report_json) {
  return guarded([&] {
    require(body, "body_estimate_volumes needs a body");
    const auto estimates =
        isovol::relative_volumes(body->body, to_volume_options(options), seed, options ? options->threads : 0);
    if (report_json) {
      nlohmann::json comps = nlohmann::json::array();
      const auto weights = body->body.weights();
      for (const auto& e : estimates) {
        nlohmann::json j = e.to_json();
        j["weight"] = weights[static_cast<std::size_t>(e.component)];
        comps.push_back(std::move(j));
      }
      *report_json = copy_string(nlohmann::json{{"components", comps}, {"weights", weights}}.dump());
    }
  });
}

isovol_status isovol_body_set_weights(isovol_body* body, const double* weights, int count) {
  return guarded([&] {
    require(body && weights && count >= 0, "body_set_weights needs a body and weights");
    body->body.set_weights(std::vector<double>(weights, weights + count));
  });
}

isovol_status isovol_body_sample(const isovol_body* body, const isovol_sample_options* options, uint64_t seed,
                                 size_t n, double* points, int* components, char** diagnostics_json) {
  return guarded([&] {
    require(body && (points || n == 0), "body_sample needs a body and an output buffer");
    const isovol::PatchSamples s =
        isovol::sample_patch(body->body, n, to_sample_options(options), seed, options ? options->threads : 0);
    const int d = body->body.dim();
    for (std::size_t i = 0; i < n; ++i) {
      Eigen::Map<Eigen::VectorXd>(points + i * static_cast<std::size_t>(d), d) = s.points[i];
      if (components) components[i] = s.components[i];
    }
    if (diagnostics_json) {
      nlohmann::json per = nlohmann::json::array();
      isovol::WalkCounters total;
      for (std::size_t c = 0; c < s.counters.size(); ++c) {
        nlohmann::json j = isovol::summarize(s.counters[c]);
        j["component"] = c;
        j["tau"] = s.taus[c];
        per.push_back(std::move(j));
        total += s.counters[c];
      }
      *diagnostics_json = copy_string(nlohmann::json{{"total", isovol::summarize(total)}, {"components", per}}.dump());
    }
  });
}

isovol_status isovol_sample_level(const double* cov, int n_assets, double level, size_t n,
                                  const isovol_sample_options* sample_options,
                                  const isovol_volume_options* volume_options, uint64_t seed, double* portfolios,
                                  char** report_json) {
  return guarded([&] {
    require(cov && n_assets > 0 && (portfolios || n == 0), "sample_level needs a covariance and output");
    const Eigen::MatrixXd s =
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(cov, n_assets, n_assets);
    isovol::LevelSampleOptions opts;
    opts.walk = to_sample_options(sample_options);
    opts.volume = to_volume_options(volume_options);
    opts.threads = sample_options ? sample_options->threads : 0;
    const isovol::LevelSample out = isovol::sample_level(s, level, n, seed, opts);
    for (std::size_t i = 0; i < n; ++i)
      Eigen::Map<Eigen::VectorXd>(portfolios + i * static_cast<std::size_t>(n_assets), n_assets) = out.portfolios[i];
    if (report_json)
      *report_json = copy_string(nlohmann::json{{"components", out.components},
                                                {"weights", out.weights},
                                                {"walk", isovol::summarize(out.counters)}}
                                     .dump());
  });
}

isovol_status isovol_backtest_run(const char* config_json, uint64_t seed, char** stats_csv, char** report_json) {
  return guarded([&] {
    require(config_json, "backtest_run needs a configuration");
    const nlohmann::json j = nlohmann::json::parse(config_json);
    require(j.is_object() && j.contains("prices"), "backtest configuration needs a 'prices' path");
    isovol::BacktestConfig config = isovol::backtest_config_from_json(j);
    const isovol::Panel panel =
        isovol::load_panel_file(j.at("prices").get<std::string>(), j.value("returns_input", false));
    if (j.contains("volumes") && !j.at("volumes").is_null())
      config.admission.volumes = isovol::load_value_panel_file(j.at("volumes").get<std::string>());
    const isovol::BacktestResult res = isovol::run_backtest(panel, config, seed);
    if (stats_csv) *stats_csv = copy_string(res.stats_csv());
    if (report_json) *report_json = copy_string(res.report(panel).dump());
  });
}

isovol_status isovol_psrf(const double* samples, int chains, size_t n, int dim, double* out) {
  return guarded([&] {
    require(samples && out && chains > 0 && dim > 0, "psrf needs samples and output");
    std::vector<Eigen::MatrixXd> cs;
    const auto rows = static_cast<Eigen::Index>(n);
    for (int c = 0; c < chains; ++c)
      cs.emplace_back(Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          samples + static_cast<std::size_t>(c) * n * static_cast<std::size_t>(dim), rows, dim));
    const Eigen::VectorXd r = isovol::psrf(cs);
    Eigen::Map<Eigen::VectorXd>(out, dim) = r;
  });
}

isovol_status isovol_read_matrix_csv(const char* path, double** values, size_t* rows, size_t* cols,
                                     char** header_json) {
  return guarded([&] {
    require(path && values && rows && cols, "read_matrix_csv needs a path and outputs");
    *values = nullptr;
    const isovol::NumericTable t = isovol::read_numeric_csv_file(path);
    *rows = static_cast<size_t>(t.values.rows());
    *cols = static_cast<size_t>(t.values.cols());
    const std::size_t count = *rows * *cols;
    double* buf = static_cast<double*>(std::malloc(std::max<std::size_t>(count, 1) * sizeof(double)));
    if (!buf) throw std::bad_alloc();
    for (std::size_t r = 0; r < *rows; ++r)
      for (std::size_t c = 0; c < *cols; ++c)
        buf[r * *cols + c] = t.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    *values = buf;
    if (header_json) *header_json = copy_string(nlohmann::json(t.header).dump());
  });
}

}  // extern "C"
