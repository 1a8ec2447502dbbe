#pragma once

#include <vector>

#include <Eigen/Dense>

#include "core/random_walks.hpp"
#include "json.hpp"

namespace isovol {

// Gelman-Rubin potential scale reduction per coordinate. Each chain is an
// n x d matrix (one sample per row); needs m >= 2 chains of equal shape, n >= 10.
// Throws ZeroVariance when the within-chain variance of a coordinate is 0.
Eigen::VectorXd psrf(const std::vector<Eigen::MatrixXd>& chains);

// Effective sample size of a scalar series by batch means with about sqrt(n)
// batches of size sqrt(n).
double batch_means_ess(const std::vector<double>& series);

// Steps, boundary rejections, budget violations, reflections and the
// violation rate (violations / steps, 0 for a fresh state).
nlohmann::json summarize(const WalkCounters& counters);

}  // namespace isovol
