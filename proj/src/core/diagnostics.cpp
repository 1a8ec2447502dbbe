#include "core/diagnostics.hpp"

#include <cmath>

#include "core/errors.hpp"

namespace isovol {

Eigen::VectorXd psrf(const std::vector<Eigen::MatrixXd>& chains) {
  const auto m = static_cast<Eigen::Index>(chains.size());
  if (m < 2) fail(Errc::invalid_argument, "psrf needs at least two chains");
  const Eigen::Index n = chains.front().rows();
  const Eigen::Index d = chains.front().cols();
  if (n < 10 || d < 1) fail(Errc::invalid_argument, "psrf needs chains with at least 10 samples");
  for (const auto& c : chains)
    if (c.rows() != n || c.cols() != d) fail(Errc::invalid_argument, "chains must share length and dimension");

  Eigen::MatrixXd means(m, d);
  Eigen::VectorXd within = Eigen::VectorXd::Zero(d);
  for (Eigen::Index j = 0; j < m; ++j) {
    means.row(j) = chains[j].colwise().mean();
    const Eigen::MatrixXd centered = chains[j].rowwise() - means.row(j);
    within += (centered.array().square().colwise().sum() / static_cast<double>(n - 1)).matrix().transpose();
  }
  within /= static_cast<double>(m);
  const Eigen::RowVectorXd grand = means.colwise().mean();
  const Eigen::VectorXd between =
      ((means.rowwise() - grand).array().square().colwise().sum() * (static_cast<double>(n) / (m - 1))).transpose();

  Eigen::VectorXd out(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    if (!(within[i] > 0.0)) fail(Errc::zero_variance, "within-chain variance is zero");
    const double pooled = (n - 1.0) / n * within[i] + between[i] / n;
    out[i] = std::sqrt(pooled / within[i]);
  }
  return out;
}

double batch_means_ess(const std::vector<double>& series) {
  const std::size_t n = series.size();
  if (n < 4) fail(Errc::invalid_argument, "batch means needs at least 4 values");
  const auto b = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
  const std::size_t batches = n / b;
  const std::size_t used = batches * b;
  double mean = 0.0;
  for (std::size_t i = 0; i < used; ++i) mean += series[i];
  mean /= static_cast<double>(used);
  double var = 0.0;
  for (std::size_t i = 0; i < used; ++i) var += (series[i] - mean) * (series[i] - mean);
  var /= static_cast<double>(used - 1);
  if (!(var > 0.0)) fail(Errc::zero_variance, "series is constant");
  double batch_var = 0.0;
  for (std::size_t k = 0; k < batches; ++k) {
    double s = 0.0;
    for (std::size_t i = k * b; i < (k + 1) * b; ++i) s += series[i];
    s /= static_cast<double>(b);
    batch_var += (s - mean) * (s - mean);
  }
  batch_var /= static_cast<double>(batches - 1);
  const double long_run = static_cast<double>(b) * batch_var;
  if (!(long_run > 0.0)) return static_cast<double>(used);
  return static_cast<double>(used) * var / long_run;
}

nlohmann::json summarize(const WalkCounters& counters) {
  const double rate = counters.steps == 0
                          ? 0.0
                          : static_cast<double>(counters.budget_violations) / static_cast<double>(counters.steps);
  return {{"steps", counters.steps},
          {"boundary_failures", counters.boundary_failures},
          {"budget_violations", counters.budget_violations},
          {"reflections", counters.reflections},
          {"violation_rate", rate}};
}

}  // namespace isovol
