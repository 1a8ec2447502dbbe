#include "core/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "core/errors.hpp"

namespace isovol {

void SimplexH::validate() const {
  const int d = dim();
  if (d < 1 || facets() != d + 1 || offsets.size() != d + 1)
    fail(Errc::degenerate_simplex, "simplex needs d+1 facets in R^d, got " +
                                       std::to_string(facets()) + " facets in R^" + std::to_string(d));
  if (!normals.allFinite() || !offsets.allFinite())
    fail(Errc::degenerate_simplex, "simplex coefficients must be finite");

  // Bounded iff the facet normals admit a strictly positive combination
  // summing to zero; the kernel of A^T is then one-dimensional.
  Eigen::FullPivLU<Eigen::MatrixXd> lu(normals.transpose());
  lu.setThreshold(1e-12);
  const Eigen::MatrixXd kernel = lu.kernel();
  if (kernel.cols() != 1) fail(Errc::degenerate_simplex, "facet normals are degenerate");
  Eigen::VectorXd lambda = kernel.col(0);
  if (lambda.sum() < 0) lambda = -lambda;
  const double scale = lambda.cwiseAbs().maxCoeff();
  if (!(lambda.minCoeff() > 1e-12 * scale)) fail(Errc::degenerate_simplex, "simplex is unbounded");
  // Farkas: lambda^T A x = 0 <= lambda^T b, with equality for a single point.
  const double slack = lambda.dot(offsets) / scale;
  if (!(slack > 1e-12 * (1.0 + offsets.cwiseAbs().maxCoeff())))
    fail(Errc::degenerate_simplex, "simplex has empty interior");
}

double SimplexH::max_scaled_violation(const Eigen::VectorXd& x) const {
  return ((normals * x - offsets).array() / normals.rowwise().norm().array()).maxCoeff();
}

SimplexH SimplexH::from_vertices(const std::vector<Eigen::VectorXd>& vertices) {
  const int count = static_cast<int>(vertices.size());
  if (count < 2) fail(Errc::degenerate_simplex, "need at least two vertices");
  const int d = static_cast<int>(vertices[0].size());
  if (count != d + 1) fail(Errc::degenerate_simplex, "need exactly d+1 vertices");

  SimplexH s;
  s.normals.resize(d + 1, d);
  s.offsets.resize(d + 1);
  for (int i = 0; i <= d; ++i) {
    std::vector<int> others;
    for (int k = 0; k <= d; ++k)
      if (k != i) others.push_back(k);
    Eigen::VectorXd normal;
    if (d == 1) {
      normal = Eigen::VectorXd::Ones(1);
    } else {
      Eigen::MatrixXd diffs(d - 1, d);
      for (int r = 1; r < d; ++r)
        diffs.row(r - 1) = (vertices[others[r]] - vertices[others[0]]).transpose();
      Eigen::FullPivLU<Eigen::MatrixXd> lu(diffs);
      const Eigen::MatrixXd kernel = lu.kernel();
      if (kernel.cols() != 1) fail(Errc::degenerate_simplex, "vertices are affinely dependent");
      normal = kernel.col(0).normalized();
    }
    double offset = normal.dot(vertices[others[0]]);
    if (normal.dot(vertices[i]) > offset) {
      normal = -normal;
      offset = -offset;
    }
    s.normals.row(i) = normal.transpose();
    s.offsets[i] = offset;
  }
  s.validate();
  return s;
}

nlohmann::json SimplexH::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (int j = 0; j < facets(); ++j) {
    std::vector<double> row(normals.cols());
    for (int k = 0; k < normals.cols(); ++k) row[k] = normals(j, k);
    rows.push_back(row);
  }
  return {{"A", rows}, {"b", std::vector<double>(offsets.data(), offsets.data() + offsets.size())}};
}

SimplexH SimplexH::from_json(const nlohmann::json& j) {
  try {
    const auto& rows = j.at("A");
    const auto& b = j.at("b");
    if (!rows.is_array() || rows.empty()) fail(Errc::invalid_argument, "simplex JSON: A must be a non-empty array");
    const auto m = rows.size();
    const auto d = rows[0].size();
    SimplexH s;
    s.normals.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(d));
    s.offsets.resize(static_cast<Eigen::Index>(b.size()));
    for (std::size_t r = 0; r < m; ++r) {
      if (rows[r].size() != d) fail(Errc::invalid_argument, "simplex JSON: ragged A");
      for (std::size_t c = 0; c < d; ++c) s.normals(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c].get<double>();
    }
    for (std::size_t r = 0; r < b.size(); ++r) s.offsets[static_cast<Eigen::Index>(r)] = b[r].get<double>();
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::invalid_argument, std::string("simplex JSON: ") + e.what());
  }
}

std::vector<Eigen::VectorXd> vertices_of(const SimplexH& simplex) {
  const int d = simplex.dim();
  std::vector<Eigen::VectorXd> vertices;
  vertices.reserve(d + 1);
  Eigen::MatrixXd sub(d, d);
  Eigen::VectorXd rhs(d);
  for (int i = 0; i <= d; ++i) {
    for (int r = 0, k = 0; k <= d; ++k) {
      if (k == i) continue;
      sub.row(r) = simplex.normals.row(k);
      rhs[r] = simplex.offsets[k];
      ++r;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sub);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible()) fail(Errc::degenerate_simplex, "facet normals without facet " + std::to_string(i) + " are singular");
    Eigen::VectorXd v = lu.solve(rhs);
    const double slack = simplex.offsets[i] - simplex.normals.row(i).dot(v);
    if (!(slack > 0.0)) fail(Errc::degenerate_simplex, "vertex " + std::to_string(i) + " violates its opposite facet");
    vertices.push_back(std::move(v));
  }
  return vertices;
}

}  // namespace isovol
