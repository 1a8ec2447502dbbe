#pragma once

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "core/simplex.hpp"
#include "json.hpp"

namespace isovol {

// True iff the closed segment [u, w] contains a point of unit norm.
bool segment_sphere_intersects(const Eigen::VectorXd& u, const Eigen::VectorXd& w);

struct ComponentGraph {
  std::vector<Eigen::VectorXd> vertices;  // vertex i is opposite facet i
  std::vector<bool> inside_ball;          // strictly inside the unit ball
  std::vector<std::pair<int, int>> edges;  // surviving 1-skeleton edges
  std::vector<int> label;                  // component per vertex, -1 if removed
  int component_count = 0;
};

ComponentGraph build_component_graph(const SimplexH& simplex);

struct InscribedBall {
  Eigen::VectorXd center;
  double radius = 0.0;
};

// Largest ball inside simplex ∩ unit ball. Throws EmptyIntersection when the
// intersection has no interior.
InscribedBall inscribed_ball(const SimplexH& simplex);

// Minimum-norm point of conv(points), Wolfe's algorithm.
Eigen::VectorXd min_norm_point(const std::vector<Eigen::VectorXd>& points);

struct Component {
  int id = 0;
  std::vector<int> vertex_ids;
  Eigen::VectorXd start;
  std::optional<double> volume;
  std::optional<double> weight;
};

// Component id of a unit vector p, std::nullopt when p lies outside the
// simplex. Throws NumericallyOnBoundary when p is within 1e-9 of the boundary.
std::optional<int> membership(const Eigen::VectorXd& p, const ComponentGraph& graph, const SimplexH& simplex);

// Point where the segment from a component vertex to `center` crosses the
// sphere. Throws NoCrossing if it does not.
Eigen::VectorXd starting_point(const Component& component, const Eigen::VectorXd& center,
                               const ComponentGraph& graph);

// K = S^{d-1} ∩ simplex together with its component structure.
class PatchBody {
 public:
  explicit PatchBody(SimplexH simplex);

  int dim() const { return simplex_.dim(); }
  const SimplexH& simplex() const { return simplex_; }
  const ComponentGraph& graph() const { return graph_; }
  int component_count() const { return graph_.component_count; }
  const std::vector<Component>& components() const { return components_; }
  const Component& component(int id) const;
  const std::optional<InscribedBall>& ball() const { return ball_; }

  std::optional<int> membership(const Eigen::VectorXd& p) const {
    return isovol::membership(p, graph_, simplex_);
  }
  // Like membership() but reports boundary contact as outside instead of throwing.
  std::optional<int> membership_or_outside(const Eigen::VectorXd& p) const;

  bool has_weights() const;
  std::vector<double> weights() const;
  // Weights are normalized to sum to one.
  void set_weights(const std::vector<double>& weights);
  void set_volume(int id, double volume);

  nlohmann::json to_json() const;

 private:
  SimplexH simplex_;
  ComponentGraph graph_;
  std::vector<Component> components_;
  std::optional<InscribedBall> ball_;
};

}  // namespace isovol
