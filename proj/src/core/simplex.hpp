#pragma once

#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

namespace isovol {

// Half-space form {x : A x <= b} of a full-dimensional simplex in R^d.
// A has d+1 rows; vertex i is the point where every facet except i is tight.
struct SimplexH {
  Eigen::MatrixXd normals;  // (d+1) x d
  Eigen::VectorXd offsets;  // d+1

  int dim() const { return static_cast<int>(normals.cols()); }
  int facets() const { return static_cast<int>(normals.rows()); }

  // Throws DegenerateSimplex unless there are exactly d+1 facets, the
  // feasible set is bounded and it has nonempty interior.
  void validate() const;

  // Largest value of (a_j^T x - b_j) / |a_j| over facets; <= 0 inside.
  double max_scaled_violation(const Eigen::VectorXd& x) const;
  bool contains(const Eigen::VectorXd& x, double tol = 1e-9) const {
    return max_scaled_violation(x) <= tol;
  }

  static SimplexH from_vertices(const std::vector<Eigen::VectorXd>& vertices);

  nlohmann::json to_json() const;
  static SimplexH from_json(const nlohmann::json& j);
};

// Vertex i is opposite facet i. Throws DegenerateSimplex if any d-subset of
// normals is singular or a vertex fails to satisfy its opposite facet.
std::vector<Eigen::VectorXd> vertices_of(const SimplexH& simplex);

}  // namespace isovol
