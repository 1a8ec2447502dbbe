// isovol command line front end. Talks to the library only through the C API.
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <algorithm>
#include <thread>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "isovol/isovol.h"
#include "json.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct Failure {
  int exit_code;
  std::string message;
};

[[noreturn]] void config_error(const std::string& msg) { throw Failure{kExitConfig, msg}; }

int exit_code_for(isovol_status s) {
  switch (s) {
    case ISOVOL_INVALID_ARGUMENT:
    case ISOVOL_MALFORMED_CSV:
    case ISOVOL_NON_MONOTONE_DATES:
    case ISOVOL_IO_ERROR:
      return kExitConfig;
    default:
      return kExitNumeric;
  }
}

void check(isovol_status s) {
  if (s != ISOVOL_OK)
    throw Failure{exit_code_for(s), std::string(isovol_status_name(s)) + ": " + isovol_last_error()};
}

struct CString {
  char* p = nullptr;
  ~CString() { isovol_string_free(p); }
  std::string str() const { return p ? std::string(p) : std::string(); }
};

struct BodyDeleter {
  void operator()(isovol_body* b) const { isovol_body_free(b); }
};
struct TransformDeleter {
  void operator()(isovol_transform* t) const { isovol_transform_free(t); }
};
using BodyPtr = std::unique_ptr<isovol_body, BodyDeleter>;
using TransformPtr = std::unique_ptr<isovol_transform, TransformDeleter>;

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) config_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::fwrite(text.data(), 1, text.size(), stdout);
    std::fflush(stdout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) config_error("cannot write " + path);
  out << text;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Keys that only say where results go; they do not change any number.
const std::vector<std::string> kOutputKeys = {"out", "out_dir", "diagnostics", "seed", "threads"};

std::string config_hash(const json& config) {
  json c = config;
  for (const auto& k : kOutputKeys) c.erase(k);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(c.dump())));
  return buf;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Run {
  json config = json::object();
  std::optional<std::uint64_t> seed;
  fs::path base;  // directory that relative paths in the config file refer to

  std::string hash() const { return config_hash(config); }

  json stamp() const {
    return {{"tool", "isovol"},
            {"version", isovol_version()},
            {"config_hash", hash()},
            {"seed", seed ? json(*seed) : json(nullptr)}};
  }
  std::string csv_stamp() const {
    return "# isovol " + std::string(isovol_version()) + " config_hash=" + hash() +
           " seed=" + (seed ? std::to_string(*seed) : std::string("none")) + "\n";
  }
  std::string path(const std::string& key) const {
    const fs::path p = config.at(key).get<std::string>();
    return (p.is_absolute() || base.empty() ? p : base / p).string();
  }
  bool has(const std::string& key) const { return config.contains(key) && !config.at(key).is_null(); }
  int threads() const { return config.value("threads", 0); }
};

// CLI flags that were given on the command line, merged over the config file.
struct Overrides {
  std::string config_file;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string out;
  json flags = json::object();
};

Run resolve(const Overrides& o, bool seed_required) {
  Run run;
  if (!o.config_file.empty()) {
    try {
      run.config = json::parse(read_text(o.config_file));
    } catch (const json::exception& e) {
      config_error("config " + o.config_file + ": " + e.what());
    }
    if (!run.config.is_object()) config_error("config file must hold a JSON object");
    run.base = fs::path(o.config_file).parent_path();
  }
  for (const auto& [k, v] : o.flags.items()) {
    run.config[k] = v;
    // flag-given paths are relative to the working directory
    if (k == "body" || k == "cov" || k == "prices" || k == "volumes")
      run.config[k] = fs::absolute(v.get<std::string>()).string();
  }
  if (o.threads) run.config["threads"] = *o.threads;
  if (!o.out.empty()) run.config["out"] = o.out;
  if (o.seed)
    run.seed = o.seed;
  else if (run.config.contains("seed"))
    run.seed = run.config.at("seed").get<std::uint64_t>();
  if (seed_required && !run.seed) config_error("--seed is required");
  return run;
}

struct Matrix {
  std::vector<double> values;
  std::size_t rows = 0, cols = 0;
  std::vector<std::string> header;
};

Matrix read_matrix(const std::string& path) {
  Matrix m;
  double* buf = nullptr;
  CString header;
  check(isovol_read_matrix_csv(path.c_str(), &buf, &m.rows, &m.cols, &header.p));
  m.values.assign(buf, buf + m.rows * m.cols);
  isovol_buffer_free(buf);
  m.header = json::parse(header.str()).get<std::vector<std::string>>();
  return m;
}

struct Source {
  BodyPtr body;
  TransformPtr transform;
  Matrix cov;
};

// A body comes from a half-space JSON file ("body") or from a covariance CSV
// and a variance level ("cov" + "level").
Source load_source(const Run& run) {
  Source s;
  if (run.has("body")) {
    isovol_body* b = nullptr;
    check(isovol_body_from_json(read_text(run.path("body")).c_str(), &b));
    s.body.reset(b);
    return s;
  }
  if (!run.has("cov") || !run.has("level")) config_error("need either 'body' or both 'cov' and 'level'");
  s.cov = read_matrix(run.path("cov"));
  if (s.cov.rows != s.cov.cols) config_error("covariance CSV must be square");
  isovol_transform* t = nullptr;
  check(isovol_transform_create(s.cov.values.data(), static_cast<int>(s.cov.rows),
                                run.config.at("level").get<double>(), &t));
  s.transform.reset(t);
  isovol_body* b = nullptr;
  check(isovol_body_from_transform(t, &b));
  s.body.reset(b);
  return s;
}

isovol_sample_options sample_options(const Run& run) {
  isovol_sample_options o;
  isovol_sample_options_init(&o);
  const std::string walk = run.config.value("walk", std::string("regcw"));
  if (walk == "regcw")
    o.walk = 0;
  else if (walk == "gcw")
    o.walk = 1;
  else
    config_error("walk must be 'regcw' or 'gcw'");
  o.tau = run.config.value("tau", 0.0);
  o.rho = run.config.value("rho", 0);
  o.walk_length = run.config.value("walk_length", 0);
  o.burn_in = run.config.value("burn_in", std::uint64_t{0});
  o.threads = run.threads();
  return o;
}

isovol_volume_options volume_options(const Run& run) {
  isovol_volume_options o;
  isovol_volume_options_init(&o);
  o.epsilon = run.config.value("epsilon", o.epsilon);
  o.delta = run.config.value("delta", o.delta);
  o.epsilon0 = run.config.value("epsilon0", o.epsilon0);
  o.zeta = run.config.value("zeta", o.zeta);
  o.max_samples_per_phase = run.config.value("max_samples_per_phase", o.max_samples_per_phase);
  o.max_phases = run.config.value("max_phases", o.max_phases);
  o.threads = run.threads();
  return o;
}

int cmd_components(const Run& run) {
  Source s = load_source(run);
  CString comps;
  check(isovol_body_components_json(s.body.get(), &comps.p));
  json out = run.stamp();
  out["dim"] = isovol_body_dim(s.body.get());
  out["component_count"] = isovol_body_component_count(s.body.get());
  out["body"] = json::parse(comps.str());
  write_text(run.config.value("out", std::string()), out.dump(2) + "\n");
  return kExitOk;
}

int cmd_sample(const Run& run) {
  Source s = load_source(run);
  const auto n = run.config.value("n", std::size_t{1000});
  const isovol_sample_options sopts = sample_options(run);
  const isovol_volume_options vopts = volume_options(run);
  std::string csv = run.csv_stamp();
  json diag;
  if (s.transform) {
    const std::size_t assets = s.cov.rows;
    std::vector<double> w(n * assets);
    CString report;
    check(isovol_sample_level(s.cov.values.data(), static_cast<int>(assets), run.config.at("level").get<double>(), n,
                              &sopts, &vopts, *run.seed, w.data(), &report.p));
    diag = json::parse(report.str());
    for (std::size_t a = 0; a < assets; ++a) csv += (a ? "," : "") + s.cov.header[a];
    csv += "\n";
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t a = 0; a < assets; ++a) csv += (a ? "," : "") + fmt(w[i * assets + a]);
      csv += "\n";
    }
  } else {
    isovol_body* b = s.body.get();
    const int d = isovol_body_dim(b);
    if (isovol_body_component_count(b) > 1) check(isovol_body_estimate_volumes(b, &vopts, *run.seed, nullptr));
    std::vector<double> pts(n * static_cast<std::size_t>(d));
    std::vector<int> comp(n);
    CString report;
    check(isovol_body_sample(b, &sopts, *run.seed, n, pts.data(), comp.data(), &report.p));
    diag = json::parse(report.str());
    csv += "component";
    for (int k = 0; k < d; ++k) csv += ",y" + std::to_string(k + 1);
    csv += "\n";
    for (std::size_t i = 0; i < n; ++i) {
      csv += std::to_string(comp[i]);
      for (int k = 0; k < d; ++k) csv += "," + fmt(pts[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(k)]);
      csv += "\n";
    }
  }
  write_text(run.config.value("out", std::string()), csv);
  if (run.has("diagnostics")) {
    json j = run.stamp();
    j["diagnostics"] = diag;
    write_text(run.path("diagnostics"), j.dump(2) + "\n");
  }
  return kExitOk;
}

int cmd_volume(const Run& run) {
  Source s = load_source(run);
  const isovol_volume_options vopts = volume_options(run);
  CString report;
  check(isovol_body_estimate_volumes(s.body.get(), &vopts, *run.seed, &report.p));
  json out = run.stamp();
  out["dim"] = isovol_body_dim(s.body.get());
  out["component_count"] = isovol_body_component_count(s.body.get());
  const json r = json::parse(report.str());
  out["weights"] = r.at("weights");
  out["components"] = r.at("components");
  write_text(run.config.value("out", std::string()), out.dump(2) + "\n");
  return kExitOk;
}

int cmd_diagnose(const Run& run, const std::vector<std::string>& files) {
  if (files.size() < 2) config_error("diagnose needs at least two chain files");
  std::vector<Matrix> chains;
  for (const auto& f : files) chains.push_back(read_matrix(f));
  // label columns are not coordinates
  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < chains[0].cols; ++c)
    if (chains[0].header[c] != "component") keep.push_back(c);
  std::size_t n = chains[0].rows;
  for (const auto& m : chains) {
    if (m.header != chains[0].header) config_error("chain files have different columns");
    n = std::min(n, m.rows);
  }
  if (keep.empty()) config_error("no coordinate columns");
  const std::size_t d = keep.size();
  std::vector<double> flat(chains.size() * n * d);
  for (std::size_t c = 0; c < chains.size(); ++c)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < d; ++k)
        flat[(c * n + i) * d + k] = chains[c].values[i * chains[c].cols + keep[k]];
  std::vector<double> r(d);
  check(isovol_psrf(flat.data(), static_cast<int>(chains.size()), n, static_cast<int>(d), r.data()));
  json out = run.stamp();
  std::vector<std::string> names;
  for (std::size_t k : keep) names.push_back(chains[0].header[k]);
  out["columns"] = names;
  out["psrf"] = r;
  out["chains"] = chains.size();
  out["samples"] = n;
  double worst = 0.0;
  for (double v : r) worst = std::max(worst, v);
  out["max_psrf"] = worst;
  write_text(run.config.value("out", std::string()), out.dump(2) + "\n");
  return kExitOk;
}

int cmd_backtest(const Run& run) {
  if (!run.has("prices")) config_error("backtest needs 'prices'");
  json cfg = run.config;
  cfg["prices"] = run.path("prices");
  if (run.has("volumes")) cfg["volumes"] = run.path("volumes");
  if (!cfg.contains("threads") || cfg.at("threads").get<int>() <= 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    cfg["threads"] = hw == 0 ? 1 : static_cast<int>(hw);
  }
  CString stats, report;
  check(isovol_backtest_run(cfg.dump().c_str(), *run.seed, &stats.p, &report.p));
  const fs::path dir = run.config.value("out_dir", std::string("."));
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) config_error("cannot create " + dir.string());
  const json r = json::parse(report.str());
  write_text((dir / "stats.csv").string(), run.csv_stamp() + stats.str());
  json rep = run.stamp();
  rep["quarters"] = r.at("quarters");
  rep["levels"] = r.at("levels");
  rep["walk"] = r.at("walk");
  write_text((dir / "report.json").string(), rep.dump(2) + "\n");
  json clusters = run.stamp();
  json tests = run.stamp();
  clusters["clusters"] = json::array();
  tests["sharpe_tests_vs_level_1"] = json::array();
  for (const auto& l : r.at("levels")) {
    clusters["clusters"].push_back({{"level", l.at("level")}, {"summary", l.at("cluster")}});
    tests["sharpe_tests_vs_level_1"].push_back({{"level", l.at("level")}, {"test", l.at("sharpe_test_vs_level_1")}});
  }
  write_text((dir / "clusters.json").string(), clusters.dump(2) + "\n");
  write_text((dir / "tests.json").string(), tests.dump(2) + "\n");
  json summary = {{"out_dir", dir.string()}, {"mean_sharpe", json::array()}};
  for (const auto& l : r.at("levels")) summary["mean_sharpe"].push_back(l.at("mean_sharpe"));
  write_text(run.config.value("out", std::string()), summary.dump() + "\n");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sampling, volumes and iso-volatility backtests on sphere/simplex patches", "isovol"};
  app.set_version_flag("--version", std::string(isovol_version()));
  app.require_subcommand(1);

  Overrides o;
  std::uint64_t seed = 0;
  int threads = 0;
  std::vector<std::string> chain_files;

  auto add_common = [&](CLI::App* sub, bool with_seed) {
    sub->add_option("--config", o.config_file, "JSON config file; flags override its keys")->check(CLI::ExistingFile);
    sub->add_option("--out,-o", o.out, "Output file (default stdout)");
    sub->add_option("--threads", threads, "Worker threads (default: all cores)")->check(CLI::NonNegativeNumber);
    if (with_seed) sub->add_option("--seed", seed, "Master RNG seed");
  };
  auto str_flag = [&](CLI::App* sub, const std::string& name, const std::string& key, const std::string& help) {
    sub->add_option_function<std::string>(name, [&o, key](const std::string& v) { o.flags[key] = v; }, help);
  };
  auto num_flag = [&](CLI::App* sub, const std::string& name, const std::string& key, const std::string& help) {
    sub->add_option_function<double>(name, [&o, key](const double& v) { o.flags[key] = v; }, help);
  };
  auto int_flag = [&](CLI::App* sub, const std::string& name, const std::string& key, const std::string& help) {
    sub->add_option_function<std::int64_t>(name, [&o, key](const std::int64_t& v) { o.flags[key] = v; }, help);
  };
  auto body_flags = [&](CLI::App* sub) {
    str_flag(sub, "--body", "body", "Half-space JSON file {\"A\": [[...]], \"b\": [...]}");
    str_flag(sub, "--cov", "cov", "Covariance CSV (header row of asset names)");
    num_flag(sub, "--level", "level", "Portfolio variance level c");
  };
  auto walk_flags = [&](CLI::App* sub) {
    str_flag(sub, "--walk", "walk", "regcw or gcw");
    num_flag(sub, "--tau", "tau", "Trajectory length scale");
    int_flag(sub, "--rho", "rho", "Reflection budget");
    int_flag(sub, "--walk-length", "walk_length", "Steps between emitted points");
    int_flag(sub, "--burn-in", "burn_in", "Discarded steps per chain");
  };
  auto volume_flags = [&](CLI::App* sub) {
    num_flag(sub, "--epsilon", "epsilon", "Target relative error");
    num_flag(sub, "--delta", "delta", "Schedule variance parameter");
  };

  auto* components = app.add_subcommand("components", "Connected components of a patch");
  add_common(components, false);
  body_flags(components);

  auto* sample = app.add_subcommand("sample", "Uniform points or portfolios from a patch");
  add_common(sample, true);
  body_flags(sample);
  walk_flags(sample);
  volume_flags(sample);
  int_flag(sample, "--n,-n", "n", "Number of samples");
  str_flag(sample, "--diagnostics", "diagnostics", "Write walk diagnostics JSON here");

  auto* volume = app.add_subcommand("volume", "Component volumes and weights");
  add_common(volume, true);
  body_flags(volume);
  volume_flags(volume);

  auto* diagnose = app.add_subcommand("diagnose", "PSRF of sample chains");
  add_common(diagnose, false);
  diagnose->add_option("chains", chain_files, "Sample CSV files, one chain each")->required()->check(CLI::ExistingFile);

  auto* backtest = app.add_subcommand("backtest", "Iso-volatility backtest on a price panel");
  add_common(backtest, true);
  str_flag(backtest, "--prices", "prices", "Price (or return) panel CSV");
  str_flag(backtest, "--volumes", "volumes", "Trading volume panel CSV");
  str_flag(backtest, "--mode", "mode", "random or momentum");
  str_flag(backtest, "--out-dir", "out_dir", "Directory for result files");
  int_flag(backtest, "--levels", "levels", "Number of variance levels");
  int_flag(backtest, "--samples-per-level", "samples_per_level", "Portfolios per level and quarter");
  num_flag(backtest, "--epsilon", "epsilon", "Volume accuracy for multi-component levels");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    if (auto* opt = sub->get_option_no_throw("--seed"); opt && opt->count()) o.seed = seed;
    if (sub->count("--threads")) o.threads = threads;
    const std::string name = sub->get_name();
    const bool seeded = name == "sample" || name == "volume" || name == "backtest";
    const Run run = resolve(o, seeded);
    if (name == "components") return cmd_components(run);
    if (name == "sample") return cmd_sample(run);
    if (name == "volume") return cmd_volume(run);
    if (name == "diagnose") return cmd_diagnose(run, chain_files);
    return cmd_backtest(run);
  } catch (const Failure& f) {
    std::cerr << "isovol: " << f.message << "\n";
    return f.exit_code;
  } catch (const json::exception& e) {
    std::cerr << "isovol: bad config value: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "isovol: " << e.what() << "\n";
    return kExitNumeric;
  }
}
