#include "core/vmf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "core/errors.hpp"

namespace isovol {

namespace {

double log_bessel_series(double nu, double x) {
  const double log_half_x = std::log(0.5 * x);
  const double q = 0.25 * x * x;
  // Terms t_k = (x/2)^{2k+nu} / (k! Gamma(k+nu+1)); accumulate relative to t_0.
  double log_t0 = nu * log_half_x - std::lgamma(nu + 1.0);
  // Rescale once the running term gets large.
  double scale = 0.0;
  double sum = 1.0;
  double term = 1.0;
  for (int k = 0; k < 100000; ++k) {
    term *= q / ((k + 1.0) * (k + nu + 1.0));
    sum += term;
    if (sum > 1e250) {
      scale += std::log(sum);
      term /= sum;
      sum = 1.0;
    }
    if (term < sum * 1e-17 && k + 1 > 0.5 * x) break;
  }
  return log_t0 + scale + std::log(sum);
}

double log_bessel_asymptotic(double nu, double x) {
  const double mu = 4.0 * nu * nu;
  double sum = 1.0;
  double term = 1.0;
  for (int k = 1; k < 30; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = -term * (mu - odd * odd) / (k * 8.0 * x);
    if (std::abs(next) >= std::abs(term)) break;
    term = next;
    sum += term;
    if (std::abs(term) < 1e-17) break;
  }
  return x - 0.5 * std::log(2.0 * std::numbers::pi * x) + std::log(sum);
}

}  // namespace

double log_bessel_i(double nu, double x) {
  if (!(nu >= 0.0) || !(x >= 0.0)) fail(Errc::invalid_argument, "log_bessel_i needs nu >= 0 and x >= 0");
  if (x == 0.0) return nu == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
  if (x > 30.0 && x > nu * nu) return log_bessel_asymptotic(nu, x);
  return log_bessel_series(nu, x);
}

double log_sphere_area(int d) {
  return std::log(2.0) + 0.5 * d * std::log(std::numbers::pi) - std::lgamma(0.5 * d);
}

double log_vmf_integral(int d, double alpha) {
  if (d < 2) fail(Errc::invalid_argument, "sphere dimension must be at least 2");
  if (!(alpha >= 0.0)) fail(Errc::invalid_argument, "concentration must be non-negative");
  if (alpha == 0.0) return log_sphere_area(d);
  const double nu = 0.5 * d - 1.0;
  return 0.5 * d * std::log(2.0 * std::numbers::pi) + log_bessel_i(nu, alpha) - nu * std::log(alpha);
}

Eigen::VectorXd vmf_exact_sample(const Eigen::VectorXd& mu, double alpha, Rng& rng) {
  const int d = static_cast<int>(mu.size());
  if (alpha == 0.0) return rng.unit_vector(d);
  const double m = d - 1.0;
  const double b = m / (2.0 * alpha + std::sqrt(4.0 * alpha * alpha + m * m));
  const double x0 = (1.0 - b) / (1.0 + b);
  const double c = alpha * x0 + m * std::log(1.0 - x0 * x0);
  double w = 0.0;
  double one_minus_w = 1.0;
  for (;;) {
    const double g1 = rng.gamma(0.5 * m);
    const double g2 = rng.gamma(0.5 * m);
    if (!(g1 + g2 > 0.0)) continue;
    const double z = g1 / (g1 + g2);
    const double denom = 1.0 - (1.0 - b) * z;
    w = (1.0 - (1.0 + b) * z) / denom;
    one_minus_w = 2.0 * b * z / denom;
    const double u = rng.uniform_open_left();
    if (alpha * w + m * std::log(1.0 - x0 * w) - c >= std::log(u)) break;
  }
  Eigen::VectorXd v;
  for (;;) {
    v = rng.normal_vector(d);
    v -= mu.dot(v) * mu;
    const double n = v.norm();
    if (n > 1e-12) {
      v /= n;
      break;
    }
  }
  const double s = std::sqrt(std::max(0.0, one_minus_w * (1.0 + w)));
  Eigen::VectorXd x = w * mu + s * v;
  return x / x.norm();
}

}  // namespace isovol
