#include "core/sphere_geometry.hpp"

#include <cmath>
#include <string>

#include "core/errors.hpp"
#include "core/json_eigen.hpp"

namespace isovol {

namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kConditionFloor = 1e-10;
constexpr double kAffineHullTol = 1e-9;

// Orthonormal rows spanning { x : sum x = 0 }, from a Householder QR of the
// fixed direction matrix [e_1 - e_n, ..., e_{n-1} - e_n].
Eigen::MatrixXd hull_basis(int n) {
  const int d = n - 1;
  Eigen::MatrixXd directions = Eigen::MatrixXd::Zero(n, d);
  for (int i = 0; i < d; ++i) {
    directions(i, i) = 1.0;
    directions(n - 1, i) = -1.0;
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(directions);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, d);
  return q.transpose();
}

}  // namespace

PatchTransform PatchTransform::build(const Eigen::MatrixXd& covariance, double level) {
  const auto n = covariance.rows();
  if (covariance.cols() != n) fail(Errc::invalid_argument, "covariance must be square");
  if (n < 3) fail(Errc::invalid_argument, "need at least 3 assets");
  if (!covariance.allFinite()) fail(Errc::invalid_argument, "covariance has non-finite entries");
  if (!(level > 0.0) || !std::isfinite(level)) fail(Errc::degenerate_level, "variance level must be positive");

  const double scale = covariance.cwiseAbs().maxCoeff();
  if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * scale)
    fail(Errc::not_positive_definite, "covariance is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> full(covariance, Eigen::EigenvaluesOnly);
  if (full.info() != Eigen::Success) fail(Errc::not_positive_definite, "eigendecomposition failed");
  const double lo = full.eigenvalues().minCoeff();
  const double hi = full.eigenvalues().maxCoeff();
  if (!(hi > 0.0) || !(lo > kConditionFloor * hi))
    fail(Errc::not_positive_definite, "covariance is not positive definite (min/max eigenvalue " +
                                          std::to_string(lo) + "/" + std::to_string(hi) + ")");

  PatchTransform t;
  t.covariance_ = covariance;
  t.level_ = level;
  t.basis_ = hull_basis(static_cast<int>(n));
  t.offset_ = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));

  const Eigen::MatrixXd reduced = t.basis_ * covariance * t.basis_.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (reduced + reduced.transpose()));
  if (eig.info() != Eigen::Success) fail(Errc::not_positive_definite, "reduced eigendecomposition failed");
  const Eigen::MatrixXd& vecs = eig.eigenvectors();
  const Eigen::VectorXd& vals = eig.eigenvalues();

  // Minimum-variance point of the affine hull: basis * S * anchor = 0.
  const Eigen::VectorXd gradient = t.basis_ * covariance * t.offset_;
  t.center_ = -(vecs * (vecs.transpose() * gradient).cwiseQuotient(vals));
  t.anchor_ = t.offset_ + t.basis_.transpose() * t.center_;
  const double floor_variance = t.anchor_.dot(covariance * t.anchor_);
  t.reduced_level_ = level - floor_variance;
  if (!(t.reduced_level_ > 1e-12 * level))
    fail(Errc::empty_intersection, "variance level " + std::to_string(level) +
                                       " does not exceed the minimum fully-invested variance " +
                                       std::to_string(floor_variance));

  const Eigen::VectorXd root = (vals / t.reduced_level_).cwiseSqrt();
  t.whitening_ = vecs * root.asDiagonal() * vecs.transpose();
  t.unwhitening_ = vecs * root.cwiseInverse().asDiagonal() * vecs.transpose();
  t.lift_ = t.basis_.transpose() * t.unwhitening_;

  // x_i >= 0  <=>  -lift_i y <= anchor_i, rows scaled to unit norm.
  t.simplex_.normals.resize(n, n - 1);
  t.simplex_.offsets.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double norm = t.lift_.row(i).norm();
    t.simplex_.normals.row(i) = -t.lift_.row(i) / norm;
    t.simplex_.offsets[i] = t.anchor_[i] / norm;
  }
  t.simplex_.validate();
  return t;
}

Eigen::VectorXd PatchTransform::to_patch(const Eigen::VectorXd& weights) const {
  if (weights.size() != assets()) fail(Errc::invalid_argument, "weight vector has wrong length");
  if (std::abs(weights.sum() - 1.0) > kAffineHullTol)
    fail(Errc::off_simplex_affine_hull, "weights sum to " + std::to_string(weights.sum()));
  return whitening_ * (basis_ * (weights - offset_) - center_);
}

Eigen::VectorXd PatchTransform::from_patch(const Eigen::VectorXd& point) const {
  if (point.size() != dim()) fail(Errc::invalid_argument, "patch point has wrong length");
  return anchor_ + lift_ * point;
}

double PatchTransform::variance_of(const Eigen::VectorXd& point) const {
  return point.squaredNorm() * reduced_level_ + (level_ - reduced_level_);
}

nlohmann::json PatchTransform::to_json() const {
  return {{"assets", assets()},
          {"dim", dim()},
          {"level", level_},
          {"reduced_level", reduced_level_},
          {"basis", to_json_matrix(basis_)},
          {"offset", to_json_vector(offset_)},
          {"center", to_json_vector(center_)},
          {"whitening", to_json_matrix(whitening_)},
          {"simplex", simplex_.to_json()}};
}

}  // namespace isovol
