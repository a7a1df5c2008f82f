#pragma once

#include <Eigen/Core>

#include <variant>

#include "ctgp/lie.hpp"

namespace ctgp {

using Matrix36d = Eigen::Matrix<double, 3, 6>;

/// Point-to-point residual with 3x3 covariance R.
struct PointKind {
  Matrix3d R = Matrix3d::Identity();
};

/// Point-to-plane residual: only the component along the unit normal n is
/// penalized, with information beta n n^T.
struct PlaneKind {
  Vector3d n = Vector3d::UnitZ();
  double beta = 1.0;
};

/// A matched point pair: p observed in the body frame at time tau, q its
/// match in the reference frame (both homogeneous, eta = 1).
struct Measurement {
  double tau = 0.0;
  Vector4d p = Vector4d(0, 0, 0, 1);
  Vector4d q = Vector4d(0, 0, 0, 1);
  std::variant<PointKind, PlaneKind> kind = PointKind{};

  /// Throws InvalidArgument for a non-unit normal, non-positive beta, non-SPD R,
  /// non-finite values or a homogeneous coordinate other than 1.
  void validate() const;
};

/// g = D(p - T q): Euclidean part of the point residual.
Vector3d measurement_error(const Measurement& m, const Pose& T_tau);

/// dg/d(delta) under T <- exp(delta^) T, i.e. -D odot(T q).
Matrix36d measurement_jacobian(const Measurement& m, const Pose& T_tau);

/// Residual information matrix: R^-1 (point) or beta n n^T (plane).
Matrix3d measurement_information(const Measurement& m);

/// u = sqrt(g^T W g) with W = measurement_information(m).
double whitened_norm(const Measurement& m, const Vector3d& g);

struct RobustCost {
  double cost = 0.0;
  double weight = 1.0;  ///< IRLS weight (dJ/du) / u
};

/// Geman-McClure: cost = u^2 / (2 (1 + u^2)), weight = 1 / (1 + u^2)^2.
RobustCost robust_cost(double u);

}  // namespace ctgp
