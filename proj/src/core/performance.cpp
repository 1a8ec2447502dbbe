#include "core/performance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/errors.hpp"

namespace isovol {

namespace {

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double cross(const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

}  // namespace

PerformanceStats performance_stats(const std::vector<double>& monthly, const PerformanceOptions& options) {
  const std::size_t n = monthly.size();
  if (n < 12) fail(Errc::too_short_series, "performance statistics need at least 12 monthly returns");
  if (options.risk_free_series && options.risk_free_series->size() != n)
    fail(Errc::invalid_argument, "risk-free series length differs from the return series");
  PerformanceStats s;
  double log_growth = 0.0;
  for (double r : monthly) {
    if (!(r > -1.0)) fail(Errc::invalid_argument, "monthly returns must exceed -1");
    log_growth += std::log1p(r);
  }
  s.ann_return = std::expm1(log_growth * 12.0 / static_cast<double>(n));
  const double mean = mean_of(monthly);
  // Deviations from the first value so that a constant series has exactly zero spread.
  double shift_mean = 0.0;
  for (double r : monthly) shift_mean += r - monthly[0];
  shift_mean /= static_cast<double>(n);
  double var = 0.0;
  for (double r : monthly) var += (r - monthly[0] - shift_mean) * (r - monthly[0] - shift_mean);
  var /= static_cast<double>(n - 1);
  s.ann_std = std::sqrt(var * 12.0);

  double excess = 0.0;
  if (options.geometric_sharpe) {
    double rf_log = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      rf_log += std::log1p(options.risk_free_series ? (*options.risk_free_series)[i] : options.risk_free);
    excess = s.ann_return - std::expm1(rf_log * 12.0 / static_cast<double>(n));
  } else {
    double rf = options.risk_free;
    if (options.risk_free_series) rf = mean_of(*options.risk_free_series);
    excess = (mean - rf) * 12.0;
  }
  if (s.ann_std > 0.0) {
    s.sharpe = excess / s.ann_std;
  } else if (excess > 0.0) {
    s.sharpe = std::numeric_limits<double>::infinity();
  } else if (excess < 0.0) {
    s.sharpe = -std::numeric_limits<double>::infinity();
  } else {
    s.sharpe = std::numeric_limits<double>::quiet_NaN();
  }
  return s;
}

double parzen_kernel(double x) {
  const double a = std::abs(x);
  if (a <= 0.5) return 1.0 - 6.0 * a * a + 6.0 * a * a * a;
  if (a <= 1.0) return 2.0 * (1.0 - a) * (1.0 - a) * (1.0 - a);
  return 0.0;
}

SharpeTest sharpe_test(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  if (b.size() != n) fail(Errc::invalid_argument, "Sharpe test needs equal-length series");
  if (n < 24) fail(Errc::too_short_series, "Sharpe test needs at least 24 observations");
  const double t = static_cast<double>(n);

  const double mu_a = mean_of(a);
  const double mu_b = mean_of(b);
  double g_a = 0.0;
  double g_b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    g_a += a[i] * a[i];
    g_b += b[i] * b[i];
  }
  g_a /= t;
  g_b /= t;
  const double var_a = g_a - mu_a * mu_a;
  const double var_b = g_b - mu_b * mu_b;
  if (!(var_a > 0.0) || !(var_b > 0.0)) fail(Errc::degenerate_variance, "Sharpe test needs non-constant series");

  SharpeTest out;
  out.sharpe_a = mu_a / std::sqrt(var_a);
  out.sharpe_b = mu_b / std::sqrt(var_b);
  out.difference = out.sharpe_a - out.sharpe_b;
  if (a == b) {
    out.statistic = 0.0;
    out.p_value = 1.0;
    return out;
  }

  Eigen::MatrixXd y(static_cast<Eigen::Index>(n), 4);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    y(r, 0) = a[i] - mu_a;
    y(r, 1) = b[i] - mu_b;
    y(r, 2) = a[i] * a[i] - g_a;
    y(r, 3) = b[i] * b[i] - g_b;
  }

  // Automatic bandwidth from AR(1) fits of each column.
  double num = 0.0;
  double den = 0.0;
  for (int c = 0; c < 4; ++c) {
    double sxy = 0.0;
    double sxx = 0.0;
    for (Eigen::Index i = 1; i < y.rows(); ++i) {
      sxy += y(i, c) * y(i - 1, c);
      sxx += y(i - 1, c) * y(i - 1, c);
    }
    if (!(sxx > 0.0)) continue;
    double rho = sxy / sxx;
    rho = std::clamp(rho, -0.97, 0.97);
    double s2 = 0.0;
    for (Eigen::Index i = 1; i < y.rows(); ++i) {
      const double e = y(i, c) - rho * y(i - 1, c);
      s2 += e * e;
    }
    s2 /= static_cast<double>(y.rows() - 1);
    const double s4 = s2 * s2;
    num += 4.0 * rho * rho * s4 / std::pow(1.0 - rho, 8);
    den += s4 / std::pow(1.0 - rho, 4);
  }
  const double alpha2 = den > 0.0 ? num / den : 0.0;
  out.bandwidth = 2.6614 * std::pow(alpha2 * t, 0.2);

  Eigen::Matrix4d psi = (y.transpose() * y) / t;
  for (Eigen::Index j = 1; j < y.rows(); ++j) {
    const double w = parzen_kernel(static_cast<double>(j) / out.bandwidth);
    if (w == 0.0) break;
    const Eigen::Matrix4d gamma = (y.bottomRows(y.rows() - j).transpose() * y.topRows(y.rows() - j)) / t;
    psi += w * (gamma + gamma.transpose());
  }
  psi *= t / (t - 4.0);

  Eigen::Vector4d grad;
  grad << g_a / std::pow(var_a, 1.5), -g_b / std::pow(var_b, 1.5), -mu_a / (2.0 * std::pow(var_a, 1.5)),
      mu_b / (2.0 * std::pow(var_b, 1.5));
  const double v = grad.dot(psi * grad) / t;
  if (!(v > 0.0)) fail(Errc::degenerate_variance, "Sharpe difference has zero estimated variance");
  out.statistic = out.difference / std::sqrt(v);
  out.p_value = std::erfc(std::abs(out.statistic) / std::sqrt(2.0));
  return out;
}

std::vector<Eigen::Vector2d> convex_hull(std::vector<Eigen::Vector2d> pts) {
  std::sort(pts.begin(), pts.end(), [](const Eigen::Vector2d& p, const Eigen::Vector2d& q) {
    return p.x() < q.x() || (p.x() == q.x() && p.y() < q.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Eigen::Vector2d> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

bool ClusterSummary::contains(const Eigen::Vector2d& p, double tol) const {
  if (hull.empty()) return false;
  if (hull.size() == 1) return (hull[0] - p).norm() <= tol;
  if (hull.size() == 2) {
    const Eigen::Vector2d d = hull[1] - hull[0];
    const double len = d.norm();
    if (std::abs(cross(hull[0], hull[1], p)) > tol * len) return false;
    const double s = (p - hull[0]).dot(d) / (len * len);
    return s >= -tol && s <= 1.0 + tol;
  }
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const auto& a = hull[i];
    const auto& b = hull[(i + 1) % hull.size()];
    if (cross(a, b, p) < -tol * (b - a).norm()) return false;
  }
  return true;
}

nlohmann::json ClusterSummary::to_json() const {
  nlohmann::json h = nlohmann::json::array();
  for (const auto& p : hull) h.push_back({p.x(), p.y()});
  return {{"mean", {mean.x(), mean.y()}},
          {"covariance", {{covariance(0, 0), covariance(0, 1)}, {covariance(1, 0), covariance(1, 1)}}},
          {"risk_return_correlation", std::isnan(correlation) ? nlohmann::json(nullptr) : nlohmann::json(correlation)},
          {"hull", h}};
}

ClusterSummary cluster_summary(const std::vector<Eigen::Vector2d>& pairs) {
  if (pairs.size() < 30) fail(Errc::invalid_argument, "cluster summary needs at least 30 paths");
  ClusterSummary s;
  s.mean.setZero();
  for (const auto& p : pairs) s.mean += p;
  s.mean /= static_cast<double>(pairs.size());
  Eigen::Vector2d shift_mean = Eigen::Vector2d::Zero();
  for (const auto& p : pairs) shift_mean += p - pairs[0];
  shift_mean /= static_cast<double>(pairs.size());
  s.covariance.setZero();
  for (const auto& p : pairs) {
    const Eigen::Vector2d e = p - pairs[0] - shift_mean;
    s.covariance += e * e.transpose();
  }
  s.covariance /= static_cast<double>(pairs.size() - 1);
  const double denom = std::sqrt(s.covariance(0, 0) * s.covariance(1, 1));
  s.correlation = denom > 0.0 ? s.covariance(0, 1) / denom : std::numeric_limits<double>::quiet_NaN();
  s.hull = convex_hull(pairs);
  return s;
}

}  // namespace isovol
