#include "core/patch_topology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "core/errors.hpp"
#include "core/json_eigen.hpp"

namespace isovol {

namespace {

constexpr double kBoundaryTol = 1e-9;
constexpr double kUnitTol = 1e-9;

struct DisjointSets {
  explicit DisjointSets(int n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<int> parent;
};

// Min-norm point of the affine hull of the given points, as barycentric weights.
Eigen::VectorXd affine_min_norm(const std::vector<Eigen::VectorXd>& points, const std::vector<int>& active) {
  const auto k = static_cast<int>(active.size());
  Eigen::VectorXd mu(k);
  if (k == 1) {
    mu[0] = 1.0;
    return mu;
  }
  const Eigen::VectorXd& base = points[active[0]];
  Eigen::MatrixXd q(base.size(), k - 1);
  for (int i = 1; i < k; ++i) q.col(i - 1) = points[active[i]] - base;
  const Eigen::VectorXd w = q.colPivHouseholderQr().solve(-base);
  mu[0] = 1.0 - w.sum();
  mu.tail(k - 1) = w;
  return mu;
}

}  // namespace

bool segment_sphere_intersects(const Eigen::VectorXd& u, const Eigen::VectorXd& w) {
  const Eigen::VectorXd dir = w - u;
  const double a = dir.squaredNorm();
  const double b = u.dot(dir);
  const double c = u.squaredNorm() - 1.0;
  auto f = [&](double t) { return (a * t + 2.0 * b) * t + c; };
  const double t_min = a > 0.0 ? std::clamp(-b / a, 0.0, 1.0) : 0.0;
  const double low = f(t_min);
  const double high = std::max(f(0.0), f(1.0));
  return low <= 0.0 && high >= 0.0;
}

Eigen::VectorXd min_norm_point(const std::vector<Eigen::VectorXd>& points) {
  if (points.empty()) fail(Errc::invalid_argument, "min_norm_point: no points");
  const auto n = static_cast<int>(points.size());
  double scale = 0.0;
  int first = 0;
  for (int i = 0; i < n; ++i) {
    scale = std::max(scale, points[i].squaredNorm());
    if (points[i].squaredNorm() < points[first].squaredNorm()) first = i;
  }
  const double tol = 1e-14 * std::max(scale, 1e-300);

  std::vector<int> active{first};
  Eigen::VectorXd lambda = Eigen::VectorXd::Ones(1);
  Eigen::VectorXd x = points[first];
  for (int major = 0; major < 50 * n + 100; ++major) {
    int best = 0;
    double best_dot = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      const double v = points[i].dot(x);
      if (v < best_dot) {
        best_dot = v;
        best = i;
      }
    }
    if (x.squaredNorm() - best_dot <= tol ||
        std::find(active.begin(), active.end(), best) != active.end())
      return x;
    active.push_back(best);
    lambda.conservativeResize(lambda.size() + 1);
    lambda[lambda.size() - 1] = 0.0;

    for (int minor = 0; minor < n + 2; ++minor) {
      const Eigen::VectorXd mu = affine_min_norm(points, active);
      if ((mu.array() > 1e-15).all()) {
        lambda = mu;
        break;
      }
      double theta = 1.0;
      for (Eigen::Index i = 0; i < mu.size(); ++i)
        if (mu[i] <= 1e-15) theta = std::min(theta, lambda[i] / (lambda[i] - mu[i]));
      lambda = lambda + theta * (mu - lambda);
      std::vector<int> kept;
      std::vector<double> kept_lambda;
      for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        if (lambda[i] > 1e-15) {
          kept.push_back(active[static_cast<std::size_t>(i)]);
          kept_lambda.push_back(lambda[i]);
        }
      }
      active = kept;
      lambda = Eigen::Map<Eigen::VectorXd>(kept_lambda.data(), static_cast<Eigen::Index>(kept_lambda.size()));
      lambda /= lambda.sum();
    }
    x.setZero();
    for (std::size_t i = 0; i < active.size(); ++i) x += lambda[static_cast<Eigen::Index>(i)] * points[active[i]];
  }
  return x;
}

ComponentGraph build_component_graph(const SimplexH& simplex) {
  simplex.validate();
  ComponentGraph g;
  g.vertices = vertices_of(simplex);
  const auto n = static_cast<int>(g.vertices.size());
  g.inside_ball.resize(n);
  g.label.assign(n, -1);

  // K is empty when the simplex misses the open unit ball; the skeleton rule
  // alone cannot see this case.
  if (min_norm_point(g.vertices).norm() >= 1.0) {
    for (int i = 0; i < n; ++i) g.inside_ball[i] = g.vertices[i].squaredNorm() < 1.0;
    return g;
  }

  for (int i = 0; i < n; ++i) g.inside_ball[i] = g.vertices[i].squaredNorm() < 1.0;
  DisjointSets sets(n);
  for (int i = 0; i < n; ++i) {
    if (g.inside_ball[i]) continue;
    for (int j = i + 1; j < n; ++j) {
      if (g.inside_ball[j]) continue;
      if (segment_sphere_intersects(g.vertices[i], g.vertices[j])) continue;
      g.edges.emplace_back(i, j);
      sets.unite(i, j);
    }
  }
  std::vector<int> root_label(n, -1);
  for (int i = 0; i < n; ++i) {
    if (g.inside_ball[i]) continue;
    const int r = sets.find(i);
    if (root_label[r] < 0) root_label[r] = g.component_count++;
    g.label[i] = root_label[r];
  }
  return g;
}

InscribedBall inscribed_ball(const SimplexH& simplex) {
  const int d = simplex.dim();
  const auto vertices = vertices_of(simplex);

  // The simplex shrunk by r is homothetic to it about the incenter.
  Eigen::MatrixXd system(d + 1, d + 1);
  for (int j = 0; j <= d; ++j) {
    system.row(j).head(d) = simplex.normals.row(j);
    system(j, d) = simplex.normals.row(j).norm();
  }
  const Eigen::VectorXd sol = system.fullPivLu().solve(simplex.offsets);
  const Eigen::VectorXd incenter = sol.head(d);
  const double inradius = sol[d];
  if (!(inradius > 0.0)) fail(Errc::degenerate_simplex, "simplex has no interior");

  std::vector<Eigen::VectorXd> shrunk(vertices.size());
  auto closest = [&](double r) {
    const double s = 1.0 - r / inradius;
    for (std::size_t i = 0; i < vertices.size(); ++i) shrunk[i] = incenter + s * (vertices[i] - incenter);
    return min_norm_point(shrunk);
  };
  auto gap = [&](double r, Eigen::VectorXd& at) {
    at = closest(r);
    return at.norm() + r - 1.0;
  };

  Eigen::VectorXd point;
  if (gap(0.0, point) >= 0.0) fail(Errc::empty_intersection, "simplex does not meet the open unit ball");
  double lo = 0.0;
  double hi = std::min(1.0, inradius);
  Eigen::VectorXd best = point;
  Eigen::VectorXd probe;
  if (gap(hi, probe) <= 0.0) return {probe, hi};
  for (int it = 0; it < 80 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (gap(mid, probe) <= 0.0) {
      lo = mid;
      best = probe;
    } else {
      hi = mid;
    }
  }
  return {best, lo};
}

std::optional<int> membership(const Eigen::VectorXd& p, const ComponentGraph& graph, const SimplexH& simplex) {
  if (p.size() != simplex.dim()) fail(Errc::invalid_argument, "membership: dimension mismatch");
  if (std::abs(p.norm() - 1.0) > kUnitTol) fail(Errc::invalid_argument, "membership: point is not on the unit sphere");
  if (graph.component_count == 0) return std::nullopt;

  const int m = simplex.facets();
  const Eigen::VectorXd ap = simplex.normals * p;
  double worst = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < m; ++j) worst = std::max(worst, (ap[j] - simplex.offsets[j]) / simplex.normals.row(j).norm());
  if (worst > kBoundaryTol) return std::nullopt;
  if (worst >= -kBoundaryTol) fail(Errc::numerically_on_boundary, "point is within 1e-9 of the simplex boundary");

  // Exit point of the ray from the origin through p.
  double t_exit = std::numeric_limits<double>::infinity();
  for (int j = 0; j < m; ++j)
    if (ap[j] > 0.0) t_exit = std::min(t_exit, simplex.offsets[j] / ap[j]);
  if (!std::isfinite(t_exit)) fail(Errc::degenerate_simplex, "ray does not leave the simplex");
  const Eigen::VectorXd q = t_exit * p;

  // Exit facets in index order (more than one when q sits on a ridge).
  for (int j = 0; j < m; ++j) {
    if (!(ap[j] > 0.0)) continue;
    if (std::abs(simplex.offsets[j] / ap[j] - t_exit) > 1e-12 * t_exit) continue;
    for (int u = 0; u < m; ++u) {
      if (u == j || graph.label[u] < 0) continue;
      if (!segment_sphere_intersects(q, graph.vertices[u])) return graph.label[u];
    }
  }
  fail(Errc::numerically_on_boundary, "no vertex of the exit facet is visible from the exit point");
}

Eigen::VectorXd starting_point(const Component& component, const Eigen::VectorXd& center, const ComponentGraph& graph) {
  if (component.vertex_ids.empty()) fail(Errc::empty_intersection, "component has no vertices");
  int best = component.vertex_ids.front();
  for (int v : component.vertex_ids)
    if (graph.vertices[v].squaredNorm() > graph.vertices[best].squaredNorm()) best = v;
  const Eigen::VectorXd& vertex = graph.vertices[best];
  if (std::abs(vertex.norm() - 1.0) <= 1e-12) return vertex.normalized();
  if (!(center.squaredNorm() < 1.0) || !(vertex.squaredNorm() > 1.0))
    fail(Errc::no_crossing, "segment from vertex to center does not cross the sphere");
  const Eigen::VectorXd dir = vertex - center;
  const double a = dir.squaredNorm();
  const double b = center.dot(dir);
  const double c = center.squaredNorm() - 1.0;
  const double t = (-b + std::sqrt(b * b - a * c)) / a;
  if (!(t > 0.0 && t <= 1.0 + 1e-12)) fail(Errc::no_crossing, "sphere crossing outside the segment");
  return (center + t * dir).normalized();
}

PatchBody::PatchBody(SimplexH simplex) : simplex_(std::move(simplex)) {
  graph_ = build_component_graph(simplex_);
  if (graph_.component_count == 0) return;
  ball_ = inscribed_ball(simplex_);
  components_.resize(static_cast<std::size_t>(graph_.component_count));
  for (int i = 0; i < static_cast<int>(graph_.vertices.size()); ++i)
    if (graph_.label[i] >= 0) components_[graph_.label[i]].vertex_ids.push_back(i);
  for (int id = 0; id < graph_.component_count; ++id) {
    auto& c = components_[id];
    c.id = id;
    c.start = starting_point(c, ball_->center, graph_);
  }
  if (graph_.component_count == 1) components_[0].weight = 1.0;
}

const Component& PatchBody::component(int id) const {
  if (id < 0 || id >= component_count()) fail(Errc::invalid_argument, "component id out of range");
  return components_[id];
}

std::optional<int> PatchBody::membership_or_outside(const Eigen::VectorXd& p) const {
  try {
    return membership(p);
  } catch (const Error& e) {
    if (e.code() == Errc::numerically_on_boundary) return std::nullopt;
    throw;
  }
}

bool PatchBody::has_weights() const {
  if (components_.empty()) return false;
  return std::all_of(components_.begin(), components_.end(), [](const Component& c) { return c.weight.has_value(); });
}

std::vector<double> PatchBody::weights() const {
  if (!has_weights()) fail(Errc::volumes_not_cached, "relative component volumes are not cached");
  std::vector<double> w;
  for (const auto& c : components_) w.push_back(*c.weight);
  return w;
}

void PatchBody::set_weights(const std::vector<double>& weights) {
  if (weights.size() != components_.size()) fail(Errc::invalid_argument, "weight count does not match component count");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) fail(Errc::invalid_argument, "weights must be finite and non-negative");
    total += w;
  }
  if (!(total > 0.0)) fail(Errc::invalid_argument, "weights sum to zero");
  for (std::size_t i = 0; i < weights.size(); ++i) components_[i].weight = weights[i] / total;
}

void PatchBody::set_volume(int id, double volume) {
  if (id < 0 || id >= component_count()) fail(Errc::invalid_argument, "component id out of range");
  components_[id].volume = volume;
}

nlohmann::json PatchBody::to_json() const {
  nlohmann::json comps = nlohmann::json::array();
  for (const auto& c : components_) {
    nlohmann::json j = {{"id", c.id}, {"vertices", c.vertex_ids}, {"start", to_json_vector(c.start)}};
    j["volume"] = c.volume ? nlohmann::json(*c.volume) : nlohmann::json(nullptr);
    j["weight"] = c.weight ? nlohmann::json(*c.weight) : nlohmann::json(nullptr);
    comps.push_back(std::move(j));
  }
  std::vector<double> norms;
  for (const auto& v : graph_.vertices) norms.push_back(v.norm());
  nlohmann::json out = {{"dim", dim()},
                        {"component_count", component_count()},
                        {"vertex_norms", norms},
                        {"edges", graph_.edges},
                        {"labels", graph_.label},
                        {"components", comps}};
  if (ball_) out["inscribed_ball"] = {{"center", to_json_vector(ball_->center)}, {"radius", ball_->radius}};
  return out;
}

}  // namespace isovol
