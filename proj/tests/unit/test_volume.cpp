#include "doctest.h"

#include <cmath>

#include "core/errors.hpp"
#include "core/vmf.hpp"
#include "core/volume_annealing.hpp"
#include "support/oracles.hpp"

using namespace isovol;

namespace {

std::vector<Eigen::VectorXd> vmf_draws(const Eigen::VectorXd& mu, double alpha, int n, Rng& rng) {
  std::vector<Eigen::VectorXd> out;
  for (int i = 0; i < n; ++i) out.push_back(vmf_exact_sample(mu, alpha, rng));
  return out;
}

// Var/Mean^2 of exp(a mu^T x), written out independently of the library.
double relvar_oracle(const std::vector<Eigen::VectorXd>& xs, const Eigen::VectorXd& mu, double a) {
  double m = 0.0, m2 = 0.0;
  for (const auto& x : xs) {
    const double w = std::exp(a * (mu.dot(x) - 1.0));
    m += w;
    m2 += w * w;
  }
  m /= xs.size();
  m2 /= xs.size();
  return (m2 - m * m) / (m * m);
}

Eigen::VectorXd unit(int d, int k) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(d);
  e[k] = 1.0;
  return e;
}

}  // namespace

TEST_CASE("log Bessel function against the standard library") {
  for (double nu : {0.0, 0.5, 1.0, 2.5, 4.0, 9.5})
    for (double x : {1e-3, 0.5, 1.0, 5.0, 20.0, 35.0, 80.0, 200.0}) {
      const double ref = std::log(std::cyl_bessel_i(nu, x));
      CHECK(log_bessel_i(nu, x) == doctest::Approx(ref).epsilon(1e-10));
    }
  CHECK(log_bessel_i(0.0, 0.0) == 0.0);
  CHECK(std::isinf(log_bessel_i(1.5, 0.0)));
  CHECK(log_bessel_i(2.0, 5000.0) == doctest::Approx(5000.0 - 0.5 * std::log(2 * M_PI * 5000.0)).epsilon(1e-6));
}

TEST_CASE("vMF normalizer") {
  for (int d : {2, 3, 5, 10}) {
    CHECK(log_vmf_integral(d, 0.0) == doctest::Approx(std::log(oracle::sphere_area(d))).epsilon(1e-12));
    CHECK(log_sphere_area(d) == doctest::Approx(std::log(oracle::sphere_area(d))).epsilon(1e-12));
  }
  // d = 3: int exp(a t) over S^2 = 2 pi (e^a - e^-a) / a
  for (double a : {0.5, 3.0, 40.0})
    CHECK(log_vmf_integral(3, a) == doctest::Approx(std::log(2 * M_PI * 2 * std::sinh(a) / a)).epsilon(1e-10));
}

TEST_CASE("exact vMF draws") {
  Rng rng(1);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(4);
  for (const auto& x : vmf_draws(unit(4, 0), 0.0, 100000, rng)) mean += x;
  CHECK((mean / 100000.0).norm() < 0.02);

  const Eigen::VectorXd mu = Eigen::VectorXd::Ones(5).normalized();
  Eigen::VectorXd m5 = Eigen::VectorXd::Zero(5);
  for (const auto& x : vmf_draws(mu, 50.0, 100000, rng)) {
    CHECK(std::abs(x.norm() - 1.0) < 1e-12);
    m5 += x;
  }
  CHECK(m5.normalized().dot(mu) > 0.99);

  for (int d : {3, 7})
    for (double a : {2.0, 25.0}) {
      double s = 0.0;
      for (const auto& x : vmf_draws(unit(d, 1), a, 200000, rng)) s += x[1];
      CHECK(s / 200000.0 == doctest::Approx(oracle::vmf_mean_resultant(d, a)).epsilon(0.01));
    }
}

TEST_CASE("mean direction") {
  const PatchBody body(oracle::cap_simplex(3, 0.2));
  const PatchSamples s = sample_patch(body, 5000, {}, 4);
  const Eigen::VectorXd mu = choose_mu(s.points);
  CHECK(std::abs(mu.norm() - 1.0) < 1e-12);
  CHECK(mu[2] > 0.99);
  bool thrown = false;
  try {
    choose_mu({Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(-1, 0, 0)});
  } catch (const Error& e) {
    thrown = e.code() == Errc::degenerate_mean;
  }
  CHECK(thrown);
}

TEST_CASE("first concentration matches a grid scan") {
  // hemisphere x3 >= 0 with the pole as mean direction
  const SimplexH hemi = oracle::cap_simplex(3, 0.0);
  const auto xs = oracle::rejection_sample(hemi, 4000, 7);
  const Eigen::Vector3d mu(0, 0, 1);
  CHECK(relative_variance(xs, mu, 0.0) == 0.0);
  const double a1 = first_alpha(xs, mu);
  double scan = 0.0;
  for (double a = 0.0; a < 20.0; a += 1e-3)
    if (relvar_oracle(xs, mu, a) <= 1.0) scan = a;
  CHECK(std::abs(a1 - scan) <= 2e-3);
  CHECK(first_alpha(xs, mu) == a1);
}

TEST_CASE("next concentration lands in the variance band") {
  Rng rng(3);
  for (int d : {3, 6}) {
    const Eigen::VectorXd mu = unit(d, 0);
    const auto xs = vmf_draws(mu, 4.0, 3000, rng);
    const double next = next_alpha(4.0, xs, mu, d, 0.1);
    CHECK(next > 4.0);
    const double rv = relvar_oracle(xs, mu, next - 4.0);
    CHECK(rv <= 1.0 + 1e-6);
    CHECK(rv >= 0.9 - 1e-2);
  }
}

TEST_CASE("stopping test") {
  Rng rng(11);
  const PatchBody whole(oracle::enclosing_simplex(3, 2.0));
  for (double a : {0.0, 1.0, 30.0}) CHECK(stop_check(whole, 0, Eigen::Vector3d(0, 0, 1), a, 0.05, 0.05, rng));
  const PatchBody hemi(oracle::cap_simplex(3, 0.0));
  // outside mass in 3D is (1 - e^{-a}) / (e^a - e^{-a}): 0.27 at a = 1, 5e-5 at a = 10
  CHECK_FALSE(stop_check(hemi, 0, Eigen::Vector3d(0, 0, 1), 1.0, 0.05, 0.05, rng));
  CHECK(stop_check(hemi, 0, Eigen::Vector3d(0, 0, 1), 10.0, 0.05, 0.05, rng));
  CHECK(stop_check_draws(0.05, 0.05) == static_cast<std::size_t>(std::ceil(std::log(1 / 0.95) / 0.0025)));
}

TEST_CASE("ratio of equal densities is one") {
  Rng rng(2);
  const PatchBody whole(oracle::enclosing_simplex(3, 2.0));
  const Eigen::Vector3d mu(0, 1, 0);
  const auto warm = vmf_draws(mu, 2.0, 500, rng);
  const RatioResult r = ratio_estimate(whole, 0, mu, 2.0, 2.0, 0.05, 600, warm, warm.back(), rng);
  CHECK(r.ratio == 1.0);
  CHECK(r.samples >= 600);
}

TEST_CASE("ratio on the whole sphere matches the Bessel form") {
  Rng rng(5);
  const PatchBody whole(oracle::enclosing_simplex(4, 2.0));
  const Eigen::VectorXd mu = unit(4, 3);
  const double eps_k = 0.05;
  for (const auto& [a, b] : std::vector<std::pair<double, double>>{{1.0, 2.0}, {5.0, 7.0}}) {
    // int exp(a t) over S^3 = 2 pi^2 * 2 I_1(a) / a
    const double truth = (std::cyl_bessel_i(1.0, b) / b) / (std::cyl_bessel_i(1.0, a) / a);
    const auto warm = vmf_draws(mu, a, 1000, rng);
    const RatioResult r = ratio_estimate(whole, 0, mu, a, b, eps_k, 4 * 16 + 500, warm, warm.back(), rng);
    CHECK(r.ratio > 0.0);
    CHECK(std::abs(r.ratio / truth - 1.0) < 2 * eps_k);
  }
}

TEST_CASE("volume of the whole sphere and of arcs") {
  Rng rng(1);
  const PatchBody sphere(oracle::enclosing_simplex(3, 2.0));
  const VolumeEstimate v = estimate_volume(sphere, 0, {}, rng);
  CHECK(std::abs(v.volume / (4 * M_PI) - 1.0) < 0.1);
  for (double len : {M_PI / 6, M_PI / 2, M_PI}) {
    const PatchBody arc(oracle::arc_triangle(len));
    REQUIRE(arc.component_count() == 1);
    const VolumeEstimate e = estimate_volume(arc, 0, {}, rng);
    CHECK(std::abs(e.volume / len - 1.0) < 0.1);
    for (std::size_t j = 1; j < e.schedule.size(); ++j) CHECK(e.schedule[j] > e.schedule[j - 1]);
  }
}

TEST_CASE("volume of a cap against its closed form") {
  Rng rng(8);
  const PatchBody cap(oracle::cap_simplex(5, 0.3));
  VolumeOptions o;
  o.epsilon = 0.05;
  const VolumeEstimate e = estimate_volume(cap, 0, o, rng);
  CHECK(std::abs(e.volume / oracle::cap_area(5, 0.3) - 1.0) < 0.1);
  CHECK(e.phases <= 60);
  CHECK(e.to_json().at("phases").get<int>() == e.phases);
}

TEST_CASE("relative volumes") {
  PatchBody one(oracle::cap_simplex(3, 0.4));
  relative_volumes(one, {}, 1);
  CHECK(one.weights() == std::vector<double>{1.0});

  PatchBody two(oracle::two_cap_simplex());
  VolumeOptions o;
  o.epsilon = 0.05;
  relative_volumes(two, o, 2);
  const auto w = two.weights();
  CHECK(std::abs(w[0] - 0.5) < 0.05);
  CHECK(w[0] + w[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("weights follow the components when they are relabelled") {
  // two pieces of different size; reversing the vertex order swaps their ids
  std::vector<Eigen::VectorXd> vs = {Eigen::Vector3d(3, 0, 0), Eigen::Vector3d(-1.6, 0, 0),
                                     Eigen::Vector3d(0, 0.5, 0.3), Eigen::Vector3d(0, -0.5, 0.3)};
  PatchBody a(SimplexH::from_vertices(vs));
  std::reverse(vs.begin(), vs.end());
  PatchBody b(SimplexH::from_vertices(vs));
  REQUIRE(a.component_count() == 2);
  REQUIRE(b.component_count() == 2);
  VolumeOptions o;
  o.epsilon = 0.05;
  relative_volumes(a, o, 3);
  relative_volumes(b, o, 3);
  for (int i = 0; i < 2; ++i) {
    const auto mb = b.membership(a.component(i).start);
    REQUIRE(mb.has_value());
    CHECK(std::abs(a.weights()[static_cast<std::size_t>(i)] - b.weights()[static_cast<std::size_t>(*mb)]) < 0.08);
  }
}
