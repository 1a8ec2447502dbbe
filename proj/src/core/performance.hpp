#pragma once

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

namespace isovol {

struct PerformanceStats {
  double ann_return = 0.0;  // geometric
  double ann_std = 0.0;     // monthly sample std * sqrt(12)
  double sharpe = 0.0;      // +inf / -inf / NaN when the std is zero
};

struct PerformanceOptions {
  double risk_free = 0.0;                        // monthly rate
  std::optional<std::vector<double>> risk_free_series;  // overrides risk_free
  bool geometric_sharpe = false;
};

// Annualized statistics of monthly discrete returns. Needs >= 12 values
// (TooShortSeries).
PerformanceStats performance_stats(const std::vector<double>& monthly, const PerformanceOptions& options = {});

struct SharpeTest {
  double sharpe_a = 0.0;  // monthly
  double sharpe_b = 0.0;
  double difference = 0.0;
  double statistic = 0.0;
  double p_value = 1.0;
  double bandwidth = 0.0;
};

// Two-sided test of equal Sharpe ratios: delta method on (mean, second
// moment) of both series with a Parzen-kernel HAC covariance and the
// AR(1)-plug-in automatic bandwidth. Needs equal lengths >= 24.
SharpeTest sharpe_test(const std::vector<double>& a, const std::vector<double>& b);

double parzen_kernel(double x);

struct ClusterSummary {
  Eigen::Vector2d mean;           // (ann std, ann return)
  Eigen::Matrix2d covariance;
  double correlation = 0.0;       // NaN when either coordinate is constant
  std::vector<Eigen::Vector2d> hull;  // counter-clockwise, no repeated endpoint

  bool contains(const Eigen::Vector2d& point, double tol = 1e-12) const;
  nlohmann::json to_json() const;
};

// Summary of (risk, return) pairs of one level. Needs >= 30 pairs.
ClusterSummary cluster_summary(const std::vector<Eigen::Vector2d>& pairs);

std::vector<Eigen::Vector2d> convex_hull(std::vector<Eigen::Vector2d> points);

}  // namespace isovol
