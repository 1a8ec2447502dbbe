#pragma once

#include <Eigen/Dense>

#include "core/rng.hpp"

namespace isovol {

// log I_nu(x) for nu >= 0, x >= 0. Power series in log space, large-argument
// expansion once x > 30 and x > nu^2.
double log_bessel_i(double nu, double x);

// log of the surface area of S^{d-1} in R^d.
double log_sphere_area(int d);

// log of the integral of exp(alpha mu^T x) over S^{d-1}.
double log_vmf_integral(int d, double alpha);

// Exact draw from the von Mises-Fisher distribution with mean mu (unit) and
// concentration alpha >= 0 (Wood's rejection scheme for the cosine marginal).
Eigen::VectorXd vmf_exact_sample(const Eigen::VectorXd& mu, double alpha, Rng& rng);

}  // namespace isovol
