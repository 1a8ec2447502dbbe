#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "core/patch_topology.hpp"
#include "core/random_walks.hpp"
#include "core/rng.hpp"
#include "json.hpp"

namespace isovol {

struct VolumeOptions {
  double epsilon = 0.1;    // target relative error
  double delta = 0.1;      // schedule window [1 - delta, 1] for Var/Mean^2
  double epsilon0 = 0.05;  // allowed vMF mass outside the component at the last phase
  double zeta = 0.05;      // failure probability for the stopping test
  std::optional<std::size_t> window;            // 4 d^2 + 500
  std::optional<std::size_t> schedule_samples;  // 1200 + d^2
  std::size_t max_samples_per_phase = 10'000'000;
  int max_phases = 200;
  int mh_inner_steps = 10;
  SampleOptions uniform_walk;  // ReGCW used for the uniform phase-0 sample
};

struct VolumeEstimate {
  int component = 0;
  double volume = 0.0;
  double log_volume = 0.0;
  double epsilon = 0.0;
  int phases = 0;
  std::vector<double> schedule;  // alpha_0 = 0, ..., alpha_k
  std::vector<double> log_ratios;  // log R_j, R_j = int f_j / int f_{j-1}
  std::vector<std::size_t> ratio_samples;  // samples behind each R_j, warm-up included
  double inside_fraction = 1.0;
  std::size_t samples = 0;
  Eigen::VectorXd mu;
  bool mu_fallback = false;
  double tau = 0.0;

  nlohmann::json to_json() const;
};

// Normalized mean of the samples. Throws DegenerateMean below norm 1e-8.
Eigen::VectorXd choose_mu(const std::vector<Eigen::VectorXd>& samples);

// Var/Mean^2 of exp(dalpha mu^T x) over the samples (population variance).
double relative_variance(const std::vector<Eigen::VectorXd>& samples, const Eigen::VectorXd& mu, double dalpha);

// Largest alpha (to within `tol`) with relative_variance(alpha) <= 1 over a
// uniform sample.
double first_alpha(const std::vector<Eigen::VectorXd>& samples, const Eigen::VectorXd& mu, double tol = 1e-3);

// alpha_prev (1 + 1/d)^r with the largest r whose Var/Mean^2 lies in
// [1 - delta, 1]. Samples follow exp(alpha_prev mu^T x) on the component.
double next_alpha(double alpha_prev, const std::vector<Eigen::VectorXd>& samples, const Eigen::VectorXd& mu, int d,
                  double delta, double rel_tol = 1e-3);

// Number of exact vMF draws used by stop_check.
std::size_t stop_check_draws(double epsilon0, double zeta);

// True iff fewer than epsilon0 * nu of nu exact vMF(mu, alpha) draws land
// outside the component.
bool stop_check(const PatchBody& body, int component, const Eigen::VectorXd& mu, double alpha, double epsilon0,
                double zeta, Rng& rng);

struct RatioResult {
  double ratio = 1.0;
  double log_ratio = 0.0;
  std::size_t samples = 0;
};

// Streaming estimate of int f_next / int f_prev over the component using GCW
// samples from f_prev. `warmup` samples (already distributed as f_prev) seed
// the running mean; the chain continues from `start`.
RatioResult ratio_estimate(const PatchBody& body, int component, const Eigen::VectorXd& mu, double alpha_prev,
                           double alpha_next, double epsilon_k, std::size_t window,
                           const std::vector<Eigen::VectorXd>& warmup, const Eigen::VectorXd& start, Rng& rng,
                           std::size_t max_samples = 10'000'000, int inner_steps = 10);

VolumeEstimate estimate_volume(const PatchBody& body, int component, const VolumeOptions& options, Rng& rng);

// Estimates every component volume (in parallel, one stream per component),
// caches them on the body and sets normalized weights.
std::vector<VolumeEstimate> relative_volumes(PatchBody& body, const VolumeOptions& options, std::uint64_t seed,
                                             int threads = 1);

}  // namespace isovol
