#include "core/random_walks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "core/errors.hpp"
#include "core/parallel.hpp"

namespace isovol {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kInsideTol = 1e-9;

double wrap_positive(double x) {
  double r = std::fmod(x, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  return r;
}

// Maps x in [-2 pi, 4 pi) to [0, 2 pi).
double wrap_near(double x) {
  if (x < 0.0) return x + kTwoPi;
  if (x >= kTwoPi) return x - kTwoPi;
  return x;
}

// Largest scaled violation given ax = A x, computing row norms only for
// facets that are actually violated.
double scaled_violation(const SimplexH& simplex, const Eigen::VectorXd& ax) {
  double worst = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < simplex.facets(); ++j) {
    const double gap = ax[j] - simplex.offsets[j];
    worst = std::max(worst, gap > 0.0 ? gap / simplex.normals.row(j).norm() : gap);
  }
  return worst;
}

bool inside(const SimplexH& simplex, const Eigen::VectorXd& x) {
  return scaled_violation(simplex, simplex.normals * x) <= kInsideTol;
}

// Angles at which l(theta) = p cos theta + v sin theta enters (forward, in
// [0, 2 pi)) and leaves (backward, in [-2 pi, 0)) the half-space violation
// set { a^T l > b }, with alpha = a^T p and beta = a^T v.
struct FacetHits {
  double forward;
  double backward;
};

std::optional<FacetHits> facet_hits(double alpha, double beta, double b) {
  const double r2 = alpha * alpha + beta * beta;
  if (!(r2 > 0.0) || (b >= 0.0 && r2 <= b * b)) return std::nullopt;
  const double z = b / std::sqrt(r2);
  if (z >= 1.0) return std::nullopt;
  const double phi = std::atan2(beta, alpha);
  const double omega = std::acos(std::max(z, -1.0));
  FacetHits h{wrap_near(phi - omega), wrap_near(phi + omega) - kTwoPi};
  if (h.backward <= -kTwoPi) h.backward = 0.0;
  return h;
}

struct Hit {
  double theta;
  int facet;
};

std::optional<Hit> first_hit(const Eigen::VectorXd& p, const Eigen::VectorXd& v, const SimplexH& simplex, int skip) {
  const Eigen::VectorXd ap = simplex.normals * p;
  const Eigen::VectorXd av = simplex.normals * v;
  std::optional<Hit> best;
  for (int j = 0; j < simplex.facets(); ++j) {
    const auto h = facet_hits(ap[j], av[j], simplex.offsets[j]);
    if (!h) continue;
    const double f = h->forward;
    if (j == skip && (f < 1e-9 || f > kTwoPi - 1e-9)) continue;
    if (!best || f < best->theta) best = Hit{f, j};
  }
  return best;
}

}  // namespace

Eigen::VectorXd random_tangent(const Eigen::VectorXd& p, Rng& rng) {
  for (;;) {
    const Eigen::VectorXd u = rng.unit_vector(static_cast<int>(p.size()));
    Eigen::VectorXd v = u - p.dot(u) * p;
    const double n = v.norm();
    if (n < 1e-12) continue;
    v /= n;
    // One more projection pass keeps |v^T p| at rounding level.
    v -= p.dot(v) * p;
    return v.normalized();
  }
}

ArcInterval arc_in_simplex(const Eigen::VectorXd& p, const Eigen::VectorXd& v, const SimplexH& simplex) {
  const Eigen::VectorXd ap = simplex.normals * p;
  const Eigen::VectorXd av = simplex.normals * v;
  if (scaled_violation(simplex, ap) > kInsideTol) fail(Errc::anchor_outside_simplex, "arc anchor is outside the simplex");
  ArcInterval arc{p, v, 0.0, 0.0, false};
  double upper = std::numeric_limits<double>::infinity();
  double lower = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < simplex.facets(); ++j) {
    const auto h = facet_hits(ap[j], av[j], simplex.offsets[j]);
    if (!h) continue;
    upper = std::min(upper, h->forward);
    lower = std::max(lower, h->backward);
  }
  if (!std::isfinite(upper) && !std::isfinite(lower)) {
    arc.lower = -std::numbers::pi;
    arc.upper = std::numbers::pi;
    arc.full_circle = true;
    return arc;
  }
  arc.upper = std::isfinite(upper) ? upper : 0.0;
  arc.lower = std::isfinite(lower) ? lower : 0.0;
  return arc;
}

double uniform_arc_sample(const ArcInterval& arc, Rng& rng) {
  if (!(arc.upper > arc.lower)) return arc.lower;
  return arc.lower + (arc.upper - arc.lower) * rng.uniform();
}

double mh_arc_sample(const ArcInterval& arc, const Eigen::VectorXd& mu, double alpha, double current, Rng& rng,
                     int inner_steps) {
  if (!(arc.upper > arc.lower)) return arc.lower;
  const double a = alpha * mu.dot(arc.anchor);
  const double b = alpha * mu.dot(arc.tangent);
  auto log_density = [&](double t) { return a * std::cos(t) + b * std::sin(t); };
  const double width = arc.length() / 3.0;
  double theta = current;
  double log_current = log_density(theta);
  for (int i = 0; i < inner_steps; ++i) {
    double proposal = theta + width * (rng.uniform() - 0.5);
    if (arc.full_circle) {
      proposal = arc.lower + wrap_positive(proposal - arc.lower);
    } else if (proposal < arc.lower || proposal > arc.upper) {
      continue;
    }
    const double log_proposal = log_density(proposal);
    if (std::log(rng.uniform_open_left()) < log_proposal - log_current) {
      theta = proposal;
      log_current = log_proposal;
    }
  }
  return theta;
}

Eigen::VectorXd reflect_direction(const Eigen::VectorXd& q, const Eigen::VectorXd& v, const Eigen::VectorXd& normal) {
  Eigen::VectorXd projected = normal - normal.dot(q) * q;
  const double n = projected.norm();
  if (n < 1e-12 * std::max(1.0, normal.norm())) fail(Errc::tangent_facet, "facet normal is parallel to the boundary point");
  projected /= n;
  return v - 2.0 * v.dot(projected) * projected;
}

ArcSampler uniform_target() {
  return [](const ArcInterval& arc, Rng& rng) { return uniform_arc_sample(arc, rng); };
}

ArcSampler vmf_target(const Eigen::VectorXd& mu, double alpha, int inner_steps) {
  if (alpha == 0.0) return uniform_target();
  return [mu, alpha, inner_steps](const ArcInterval& arc, Rng& rng) {
    return mh_arc_sample(arc, mu, alpha, 0.0, rng, inner_steps);
  };
}

void gcw_step(WalkState& state, const SimplexH& simplex, const ArcSampler& target) {
  const Eigen::VectorXd v = random_tangent(state.point, state.rng);
  const ArcInterval arc = arc_in_simplex(state.point, v, simplex);
  const double theta = target(arc, state.rng);
  Eigen::VectorXd next = arc.at(theta);
  next.normalize();
  ++state.counters.steps;
  if (!inside(simplex, next)) {
    ++state.counters.boundary_failures;
    return;
  }
  state.point = std::move(next);
}

void regcw_step(WalkState& state, const SimplexH& simplex, const ReGcwParams& params) {
  ++state.counters.steps;
  double remaining = -params.tau * std::log(state.rng.uniform_open_left());
  Eigen::VectorXd p = state.point;
  Eigen::VectorXd v = random_tangent(p, state.rng);
  int skip = -1;
  for (int reflections = 0;; ++reflections) {
    const auto hit = first_hit(p, v, simplex, skip);
    if (!hit || remaining < hit->theta) {
      p = p * std::cos(remaining) + v * std::sin(remaining);
      p.normalize();
      break;
    }
    if (reflections >= params.rho) {
      ++state.counters.budget_violations;
      return;
    }
    const double c = std::cos(hit->theta);
    const double s = std::sin(hit->theta);
    Eigen::VectorXd q = p * c + v * s;
    Eigen::VectorXd incoming = v * c - p * s;
    q.normalize();
    incoming -= incoming.dot(q) * q;
    incoming.normalize();
    v = reflect_direction(q, incoming, simplex.normals.row(hit->facet).transpose());
    v -= v.dot(q) * q;
    v.normalize();
    p = std::move(q);
    remaining -= hit->theta;
    skip = hit->facet;
    ++state.counters.reflections;
  }
  if (!inside(simplex, p)) {
    ++state.counters.boundary_failures;
    return;
  }
  state.point = std::move(p);
}

double estimate_tau(const Eigen::VectorXd& start, const SimplexH& simplex, Rng& rng) {
  const int steps = 20 * simplex.dim();
  Eigen::VectorXd p = start;
  double tau = 0.0;
  for (int i = 0; i < steps; ++i) {
    const Eigen::VectorXd v = random_tangent(p, rng);
    const ArcInterval arc = arc_in_simplex(p, v, simplex);
    tau = std::max(tau, arc.length());
    Eigen::VectorXd next = arc.at(uniform_arc_sample(arc, rng)).normalized();
    if (inside(simplex, next)) p = std::move(next);
  }
  if (!(tau > 0.0)) fail(Errc::empty_intersection, "component has zero-length chords");
  return tau;
}

ReGcwParams resolve_params(const SampleOptions& options, const Eigen::VectorXd& start, const SimplexH& simplex,
                           Rng& rng) {
  ReGcwParams params;
  params.rho = options.rho.value_or(100 * simplex.dim());
  params.walk_length = options.walk_length.value_or(1);
  if (options.walk == WalkKind::regcw) params.tau = options.tau ? *options.tau : estimate_tau(start, simplex, rng);
  if (!(params.tau > 0.0) || params.rho < 1 || params.walk_length < 1)
    fail(Errc::invalid_argument, "walk parameters need tau > 0, rho >= 1, walk length >= 1");
  return params;
}

ComponentSamples sample_component(const PatchBody& body, int component, std::size_t n, const SampleOptions& options,
                                  Rng& rng) {
  if (body.component_count() == 0) fail(Errc::empty_intersection, "body has no components");
  const Component& comp = body.component(component);
  ComponentSamples out;
  const ReGcwParams params = resolve_params(options, comp.start, body.simplex(), rng);
  out.tau = params.tau;
  WalkState state{comp.start, component, Rng(rng()), {}};
  const ArcSampler target = uniform_target();
  auto step = [&] {
    if (options.walk == WalkKind::regcw)
      regcw_step(state, body.simplex(), params);
    else
      gcw_step(state, body.simplex(), target);
  };
  for (std::size_t i = 0; i < options.burn_in; ++i) step();
  out.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 0; k < params.walk_length; ++k) step();
    out.points.push_back(state.point);
  }
  out.counters = state.counters;
  return out;
}

PatchSamples sample_patch(const PatchBody& body, std::size_t n, const SampleOptions& options, std::uint64_t seed,
                          int threads) {
  const int m = body.component_count();
  if (m == 0) fail(Errc::empty_intersection, "the sphere does not meet the simplex");
  const std::vector<double> weights = body.weights();

  PatchSamples out;
  out.components.resize(n);
  std::vector<std::size_t> counts(static_cast<std::size_t>(m), 0);
  Rng picker(seed, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = picker.uniform();
    double cumulative = 0.0;
    int chosen = m - 1;
    for (int c = 0; c < m; ++c) {
      cumulative += weights[c];
      if (u < cumulative) {
        chosen = c;
        break;
      }
    }
    out.components[i] = chosen;
    ++counts[chosen];
  }

  std::vector<ComponentSamples> per(static_cast<std::size_t>(m));
  parallel_for(static_cast<std::size_t>(m), threads, [&](std::size_t c) {
    if (counts[c] == 0) return;
    Rng rng(seed, 1 + c);
    per[c] = sample_component(body, static_cast<int>(c), counts[c], options, rng);
  });

  std::vector<std::size_t> cursor(static_cast<std::size_t>(m), 0);
  out.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<std::size_t>(out.components[i]);
    out.points.push_back(per[c].points[cursor[c]++]);
  }
  for (const auto& s : per) {
    out.counters.push_back(s.counters);
    out.taus.push_back(s.tau);
  }
  return out;
}

}  // namespace isovol
