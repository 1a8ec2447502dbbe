#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "core/covariance.hpp"
#include "core/panel.hpp"
#include "core/performance.hpp"
#include "core/random_walks.hpp"
#include "core/volume_annealing.hpp"
#include "json.hpp"

namespace isovol {

struct LevelSampleOptions {
  SampleOptions walk;
  VolumeOptions volume;
  int threads = 1;
};

struct LevelSample {
  std::vector<Eigen::VectorXd> portfolios;  // long-only weights, x^T S x = level
  int components = 0;
  std::vector<double> weights;  // component weights used for the draw
  WalkCounters counters;
};

// n portfolios drawn uniformly from { x in simplex : x^T S x = level } via the
// sphere-patch transform. Throws EmptyIntersection when the level set misses
// the open simplex.
LevelSample sample_level(const Eigen::MatrixXd& covariance, double level, std::size_t n, std::uint64_t seed,
                         const LevelSampleOptions& options = {});

enum class ConcatMode { random, momentum };

struct BacktestConfig {
  AdmissionRules admission;
  int levels = 5;
  std::size_t samples_per_level = 1000;
  ConcatMode mode = ConcatMode::random;
  PerformanceOptions performance;
  LevelSampleOptions sampling;
  int in_sample_days = 91;
  int threads = 1;
};

// Pipeline settings from a JSON object (keys as in the README); missing keys
// keep their defaults. Panel paths are not read here.
BacktestConfig backtest_config_from_json(const nlohmann::json& j);

// First panel date in March, June, September and December with enough weekly
// history before it.
std::vector<Day> rebalance_dates(const Panel& panel, int window_weeks);

struct QuarterRecord {
  Day rebalance = 0;
  Day end = 0;
  std::vector<Day> marks;  // rebalance, month starts, end
  std::vector<int> assets;
  QuintileTargets targets;
  std::vector<int> components;  // per level
  std::vector<std::vector<double>> component_weights;
};

struct BacktestResult {
  std::vector<QuarterRecord> quarters;
  // segments[q][level][sample]: monthly returns of a sampled portfolio held over quarter q.
  std::vector<std::vector<std::vector<std::vector<double>>>> segments;
  // in_sample[q][level][sample]: buy-and-hold return over the quarter before q.
  std::vector<std::vector<std::vector<double>>> in_sample;
  // pairing[q][level][path]: sample index appended to the path in quarter q.
  std::vector<std::vector<std::vector<int>>> pairing;
  // paths[level][path]: concatenated monthly returns.
  std::vector<std::vector<std::vector<double>>> paths;
  std::vector<std::vector<PerformanceStats>> stats;
  std::vector<std::optional<ClusterSummary>> clusters;
  std::vector<std::vector<double>> level_mean_series;
  std::vector<std::optional<SharpeTest>> tests_vs_lowest;
  WalkCounters counters;

  std::vector<double> mean_sharpe() const;
  // "level,path,ann_return,ann_std,sharpe" rows, levels numbered from 1.
  std::string stats_csv() const;
  nlohmann::json report(const Panel& panel) const;
};

BacktestResult run_backtest(const Panel& panel, const BacktestConfig& config, std::uint64_t seed);

}  // namespace isovol
