#pragma once

#include <Eigen/Dense>
#include "json.hpp"

#include "core/simplex.hpp"

namespace isovol {

// Maps portfolios on the iso-variance slice { x : sum x = 1, x^T S x = c } of
// the canonical simplex onto the unit sphere in R^{n-1}, and the long-only
// simplex onto a full-dimensional SimplexH there.
//
// x = offset + basis^T z parametrizes the affine hull. In z coordinates the
// slice is the ellipsoid (z - center)^T R (z - center) = reduced_level with
// R = basis S basis^T, and y = W (z - center) with W = (R / reduced_level)^{1/2}
// sends it to the unit sphere.
class PatchTransform {
 public:
  static PatchTransform build(const Eigen::MatrixXd& covariance, double level);

  int assets() const { return static_cast<int>(basis_.cols()); }
  int dim() const { return static_cast<int>(basis_.rows()); }
  double level() const { return level_; }
  double reduced_level() const { return reduced_level_; }

  const Eigen::MatrixXd& basis() const { return basis_; }
  const Eigen::VectorXd& offset() const { return offset_; }
  const Eigen::VectorXd& center() const { return center_; }
  const Eigen::MatrixXd& whitening() const { return whitening_; }
  const Eigen::MatrixXd& covariance() const { return covariance_; }
  const SimplexH& simplex() const { return simplex_; }

  // Throws OffSimplexAffineHull if |sum x - 1| > 1e-9.
  Eigen::VectorXd to_patch(const Eigen::VectorXd& weights) const;
  Eigen::VectorXd from_patch(const Eigen::VectorXd& point) const;

  // Variance of the portfolio mapped from a patch point: exact identity
  // x^T S x = |y|^2 * reduced_level + (level - reduced_level).
  double variance_of(const Eigen::VectorXd& point) const;

  nlohmann::json to_json() const;

 private:
  Eigen::MatrixXd covariance_;
  Eigen::MatrixXd basis_;      // d x n, orthonormal rows orthogonal to 1
  Eigen::VectorXd offset_;     // barycenter 1/n
  Eigen::VectorXd center_;     // ellipsoid center in z coordinates
  Eigen::MatrixXd whitening_;  // symmetric d x d
  Eigen::MatrixXd unwhitening_;
  Eigen::MatrixXd lift_;       // basis^T * unwhitening, n x d
  Eigen::VectorXd anchor_;     // offset + basis^T center
  double level_ = 0.0;
  double reduced_level_ = 0.0;
  SimplexH simplex_;
};

}  // namespace isovol
