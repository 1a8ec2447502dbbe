#include "core/covariance.hpp"

#include <algorithm>
#include <numeric>

#include "core/errors.hpp"

namespace isovol {

namespace {

struct ShrinkageParts {
  Eigen::MatrixXd sample;
  double scale = 0.0;
  double intensity = 0.0;
};

ShrinkageParts shrinkage_parts(const Eigen::MatrixXd& returns) {
  const Eigen::Index n = returns.rows();
  const Eigen::Index p = returns.cols();
  if (p < 2) fail(Errc::too_few_observations, "covariance needs at least two assets");
  if (n < 30) fail(Errc::too_few_observations, "covariance needs at least 30 observations");
  if (!returns.allFinite()) fail(Errc::invalid_argument, "returns contain missing or non-finite values");
  const Eigen::MatrixXd x = returns.rowwise() - returns.colwise().mean();
  ShrinkageParts out;
  out.sample = x.transpose() * x / static_cast<double>(n);
  out.scale = out.sample.trace() / static_cast<double>(p);
  const Eigen::MatrixXd target_gap = out.sample - out.scale * Eigen::MatrixXd::Identity(p, p);
  const double d2 = target_gap.squaredNorm() / static_cast<double>(p);
  double b2 = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::VectorXd xk = x.row(k).transpose();
    b2 += (xk * xk.transpose() - out.sample).squaredNorm() / static_cast<double>(p);
  }
  b2 /= static_cast<double>(n) * static_cast<double>(n);
  b2 = std::min(b2, d2);
  out.intensity = d2 > 0.0 ? b2 / d2 : 1.0;
  return out;
}

}  // namespace

double shrinkage_intensity(const Eigen::MatrixXd& returns) { return shrinkage_parts(returns).intensity; }

Eigen::MatrixXd shrinkage_covariance(const Eigen::MatrixXd& returns) {
  const ShrinkageParts s = shrinkage_parts(returns);
  if (!(s.scale > 0.0)) fail(Errc::not_positive_definite, "returns have zero variance");
  Eigen::MatrixXd out = (1.0 - s.intensity) * s.sample;
  out.diagonal().array() += s.intensity * s.scale;
  return 0.5 * (out + out.transpose());
}

Eigen::VectorXd column_volatility(const Eigen::MatrixXd& returns) {
  if (returns.rows() < 2) fail(Errc::too_few_observations, "volatility needs at least two observations");
  const Eigen::MatrixXd x = returns.rowwise() - returns.colwise().mean();
  return (x.array().square().colwise().sum() / static_cast<double>(returns.rows() - 1)).sqrt().transpose();
}

QuintileTargets quintile_targets(const Eigen::MatrixXd& covariance, const Eigen::VectorXd& vols, int levels) {
  const auto n = static_cast<int>(vols.size());
  if (levels < 1) fail(Errc::invalid_argument, "levels must be positive");
  if (covariance.rows() != n || covariance.cols() != n) fail(Errc::invalid_argument, "covariance and vols disagree");
  if (n < levels) fail(Errc::too_few_assets, "fewer assets than levels");
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return vols[a] < vols[b]; });

  QuintileTargets q;
  const int base = n / levels;
  const int extra = n % levels;
  std::vector<double> raw;
  int pos = 0;
  for (int m = 0; m < levels; ++m) {
    const int size = base + (m < extra ? 1 : 0);
    std::vector<int> group(order.begin() + pos, order.begin() + pos + size);
    pos += size;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    for (int a : group) x[a] = 1.0 / size;
    raw.push_back(x.dot(covariance * x));
    q.groups.push_back(std::move(group));
  }
  q.permutation.resize(static_cast<std::size_t>(levels));
  std::iota(q.permutation.begin(), q.permutation.end(), 0);
  std::stable_sort(q.permutation.begin(), q.permutation.end(), [&](int a, int b) { return raw[a] < raw[b]; });
  for (int m = 0; m < levels; ++m) {
    q.targets.push_back(raw[q.permutation[m]]);
    if (q.permutation[m] != m) q.sorted = true;
  }
  return q;
}

}  // namespace isovol
