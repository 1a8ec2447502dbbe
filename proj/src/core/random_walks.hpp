#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "core/patch_topology.hpp"
#include "core/rng.hpp"
#include "core/simplex.hpp"
#include "json.hpp"

namespace isovol {

// Segment { anchor cos t + tangent sin t : t in [lower, upper] } of a great
// circle. lower <= 0 <= upper and upper - lower <= 2 pi.
struct ArcInterval {
  Eigen::VectorXd anchor;
  Eigen::VectorXd tangent;
  double lower = 0.0;
  double upper = 0.0;
  bool full_circle = false;

  double length() const { return upper - lower; }
  Eigen::VectorXd at(double theta) const { return anchor * std::cos(theta) + tangent * std::sin(theta); }
};

struct WalkCounters {
  std::uint64_t steps = 0;
  std::uint64_t boundary_failures = 0;
  std::uint64_t budget_violations = 0;
  std::uint64_t reflections = 0;

  WalkCounters& operator+=(const WalkCounters& o) {
    steps += o.steps;
    boundary_failures += o.boundary_failures;
    budget_violations += o.budget_violations;
    reflections += o.reflections;
    return *this;
  }
};

struct WalkState {
  Eigen::VectorXd point;
  int component = 0;
  Rng rng;
  WalkCounters counters;
};

struct ReGcwParams {
  double tau = 1.0;
  int rho = 1;
  int walk_length = 1;
};

enum class WalkKind { regcw, gcw };

// Draws theta from the target restricted to an arc, given the current
// position theta = 0.
using ArcSampler = std::function<double(const ArcInterval&, Rng&)>;

Eigen::VectorXd random_tangent(const Eigen::VectorXd& p, Rng& rng);

// Part of the great circle through p with direction v that lies inside the
// simplex and contains p. Throws AnchorOutsideSimplex if p is outside.
ArcInterval arc_in_simplex(const Eigen::VectorXd& p, const Eigen::VectorXd& v, const SimplexH& simplex);

double uniform_arc_sample(const ArcInterval& arc, Rng& rng);

// Metropolis-Hastings on the arc for density exp(alpha mu^T l(theta)) with a
// uniform window proposal of width length/3 centred on the current angle.
double mh_arc_sample(const ArcInterval& arc, const Eigen::VectorXd& mu, double alpha, double current, Rng& rng,
                     int inner_steps = 10);

// Reflects tangent v at boundary point q about the facet normal projected to
// the tangent space at q. Throws TangentFacet if that projection vanishes.
Eigen::VectorXd reflect_direction(const Eigen::VectorXd& q, const Eigen::VectorXd& v, const Eigen::VectorXd& normal);

void gcw_step(WalkState& state, const SimplexH& simplex, const ArcSampler& target);
void regcw_step(WalkState& state, const SimplexH& simplex, const ReGcwParams& params);

ArcSampler uniform_target();
ArcSampler vmf_target(const Eigen::VectorXd& mu, double alpha, int inner_steps = 10);

// Largest arc length seen over 20 d uniform GCW steps from `start`.
double estimate_tau(const Eigen::VectorXd& start, const SimplexH& simplex, Rng& rng);

struct SampleOptions {
  WalkKind walk = WalkKind::regcw;
  std::optional<double> tau;   // estimated when empty
  std::optional<int> rho;      // 100 d when empty
  std::optional<int> walk_length;  // 1 for ReGCW, 1 for GCW
  std::size_t burn_in = 0;
};

struct ComponentSamples {
  std::vector<Eigen::VectorXd> points;
  WalkCounters counters;
  double tau = 0.0;
};

ReGcwParams resolve_params(const SampleOptions& options, const Eigen::VectorXd& start, const SimplexH& simplex,
                           Rng& rng);

ComponentSamples sample_component(const PatchBody& body, int component, std::size_t n, const SampleOptions& options,
                                  Rng& rng);

struct PatchSamples {
  std::vector<Eigen::VectorXd> points;
  std::vector<int> components;
  std::vector<WalkCounters> counters;  // per component
  std::vector<double> taus;
};

// Uniform samples from K: each draw picks a component by cached relative
// volume, then advances that component's chain. Chains run in parallel with
// streams keyed on (seed, component).
PatchSamples sample_patch(const PatchBody& body, std::size_t n, const SampleOptions& options, std::uint64_t seed,
                          int threads = 1);

}  // namespace isovol
