#pragma once

#include <vector>

#include <Eigen/Dense>

namespace isovol {

// Linear shrinkage of the sample covariance toward a scaled identity with the
// Ledoit-Wolf (2004) intensity. Rows of `returns` are observations. Needs at
// least 30 observations and 2 assets (TooFewObservations otherwise).
Eigen::MatrixXd shrinkage_covariance(const Eigen::MatrixXd& returns);

// Shrinkage intensity in [0, 1] used by shrinkage_covariance.
double shrinkage_intensity(const Eigen::MatrixXd& returns);

// Per-column sample standard deviation.
Eigen::VectorXd column_volatility(const Eigen::MatrixXd& returns);

struct QuintileTargets {
  std::vector<double> targets;          // ascending
  std::vector<int> permutation;         // targets[m] comes from group permutation[m]
  std::vector<std::vector<int>> groups;  // asset indices per group, lowest volatility first
  bool sorted = false;                  // true when the group variances were not already ascending
};

// Sorts assets by volatility into `levels` equal groups (the lowest groups
// take the remainder), forms equal-weight group portfolios x_m and returns
// c_m = x_m^T S x_m. Needs at least `levels` assets (TooFewAssets).
QuintileTargets quintile_targets(const Eigen::MatrixXd& covariance, const Eigen::VectorXd& vols, int levels = 5);

}  // namespace isovol
