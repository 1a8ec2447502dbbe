#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "core/panel.hpp"
#include "core/simplex.hpp"

namespace oracle {

// Independent of the library RNG on purpose.
using Engine = std::mt19937_64;

Eigen::VectorXd sphere_point(int d, Engine& eng);

bool inside(const isovol::SimplexH& s, const Eigen::VectorXd& x, double tol = 0.0);
// Smallest distance from x to a facet hyperplane (signed: positive inside).
double facet_margin(const isovol::SimplexH& s, const Eigen::VectorXd& x);

// Uniform points on S^{d-1} ∩ simplex by plain rejection.
std::vector<Eigen::VectorXd> rejection_sample(const isovol::SimplexH& s, std::size_t n, std::uint64_t seed,
                                              std::size_t max_tries = 200'000'000);
// Fraction of uniform sphere points inside the simplex.
double inside_fraction(const isovol::SimplexH& s, std::size_t draws, std::uint64_t seed);

// Surface area of S^{d-1}.
double sphere_area(int d);
// Area of the cap { x in S^{d-1} : x_d >= h } by Simpson quadrature.
double cap_area(int d, double h);

// {x : x_d >= h} cut out by a simplex whose other facets stay far from the ball.
isovol::SimplexH cap_simplex(int d, double h);
// Triangle meeting the unit circle in the arc y >= cos(length / 2).
isovol::SimplexH arc_triangle(double length);
// Simplex containing the ball of radius `radius`.
isovol::SimplexH enclosing_simplex(int d, double radius);
// Vertices drawn with norms away from 1 so every piece of the patch is sizeable.
isovol::SimplexH random_simplex(int d, Engine& eng);
// Random single-piece body: perturbed cap with side facets that may cut the sphere.
isovol::SimplexH random_cap_body(int d, Engine& eng);

// True iff the minor great-circle arc from p to q stays in the simplex.
bool arc_inside(const isovol::SimplexH& s, const Eigen::VectorXd& p, const Eigen::VectorXd& q);

// Points where random chords of the simplex cross the sphere.
std::vector<Eigen::VectorXd> crossing_points(const isovol::SimplexH& s, std::size_t n, Engine& eng);

// Flood fill over patch points. Two points are joined by an arc inside the
// simplex, or by a simplex point strictly above both tangent planes; two such
// outside points are joined when the segment between them misses the closed ball.
std::vector<int> linked_components(const isovol::SimplexH& s, const std::vector<Eigen::VectorXd>& pts, int* count,
                                   Engine& eng, std::size_t witnesses = 20000);

// Flood fill over a Fibonacci grid on S^2: grid points inside the simplex are
// joined when closer than a small multiple of the grid spacing.
struct SphereGrid {
  std::vector<Eigen::Vector3d> points;
  std::vector<int> label;  // -1 outside the simplex
  int count = 0;
  double spacing = 0.0;
  // Label of the nearest inside grid point within three spacings, -2 if none.
  int label_near(const Eigen::Vector3d& x) const;

  std::unordered_map<long long, std::vector<int>> cells;
  double cell = 0.0;
  long long key(const Eigen::Vector3d& x) const;
};
SphereGrid grid_components(const isovol::SimplexH& s, std::size_t n = 1'000'000);

// Histogram bins: per-coordinate equal bins on [-1, 1].
struct Histogram {
  int bins = 20;
  std::vector<std::vector<double>> marginals;  // d x bins, normalized
};
Histogram histogram(const std::vector<Eigen::VectorXd>& pts, int bins = 20);
// Largest total variation distance over the coordinate marginals.
double max_marginal_tv(const Histogram& a, const Histogram& b);
double tv(const std::vector<double>& p, const std::vector<double>& q);

// E[mu^T x] under vMF(mu, alpha) on S^{d-1}, from std::cyl_bessel_i.
double vmf_mean_resultant(int d, double alpha);
// P(mu^T x < 0) under vMF(mu, alpha) on S^{d-1}, by quadrature of the cosine density.
double vmf_lower_hemisphere_mass(int d, double alpha);

// Weekly panel of one market factor plus idiosyncratic noise. Expected excess
// return falls with beta, so lower-variance portfolios earn a higher Sharpe.
struct PanelSpec {
  int assets = 30;
  int years = 12;
  double beta_lo = 0.4;
  double beta_hi = 1.6;
  double factor_vol = 0.18;  // annual
  double idio_vol = 0.12;    // annual
  double premium = 0.12;     // annual drift at beta 0
  double beta_slope = -0.06;  // annual drift per unit beta
  // Factor volatility ramps linearly to this value over the panel when > 0.
  double factor_vol_end = 0.0;
  // Independent idiosyncratic crashes: weekly probability and return.
  double jump_prob = 0.0;
  double jump_size = 0.0;
};
isovol::Panel synthetic_panel(std::uint64_t seed, const PanelSpec& spec = {});
void write_panel_csv(const isovol::Panel& p, const std::string& path);

// Pearson correlation.
double correlation(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace oracle

namespace oracle {

// Two-sample / one-sample Kolmogorov-Smirnov statistics and the asymptotic p-value.
double ks_uniform(std::vector<double> xs, double lo, double hi);
double ks_two_sample(std::vector<double> a, std::vector<double> b);
double ks_p_value(double d, double n_eff);

// Upper tail of the chi-square distribution.
double chi_square_p(double stat, int dof);

// Mirror-symmetric 3D simplex whose patch has two congruent pieces near +-e1.
isovol::SimplexH two_cap_simplex();

}  // namespace oracle
