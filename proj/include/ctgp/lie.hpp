#pragma once

#include <Eigen/Core>

namespace ctgp {

using Vector3d = Eigen::Vector3d;
using Vector4d = Eigen::Vector4d;
using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix3d = Eigen::Matrix3d;
using Matrix4d = Eigen::Matrix4d;
using Matrix6d = Eigen::Matrix<double, 6, 6>;
using Matrix46d = Eigen::Matrix<double, 4, 6>;

/// Tangent-space coordinates [rho; phi] (translation in meters, rotation in radians).
using TangentVector = Vector6d;
/// Body-centric velocity [nu; omega].
using BodyVelocity = Vector6d;
/// Body-centric acceleration, time derivative of BodyVelocity.
using BodyAcceleration = Vector6d;

/// Rigid transform on SE(3).
///
/// Stored as rotation C and translation r so that the homogeneous matrix is
///   [ C  r ]
///   [ 0  1 ].
/// Within the estimator a pose maps points from the reference frame into the
/// body frame (p = T q), and evolves as dT/dt = varpi^ T.
class Pose {
 public:
  Pose() : rotation_(Matrix3d::Identity()), translation_(Vector3d::Zero()) {}

  /// Validating constructor. Throws StructureError if C is not a rotation to 1e-9.
  Pose(const Matrix3d& rotation, const Vector3d& translation);

  /// Validating conversion from a 4x4 homogeneous matrix.
  static Pose from_matrix(const Matrix4d& matrix);

  /// Builds a pose from a rotation that is only approximately orthonormal
  /// (e.g. parsed from text), projecting it back onto SO(3).
  static Pose from_rotation_nearest(const Matrix3d& rotation, const Vector3d& translation);

  const Matrix3d& rotation() const { return rotation_; }
  const Vector3d& translation() const { return translation_; }
  Matrix4d matrix() const;

  Pose inverse() const;
  Pose operator*(const Pose& rhs) const;
  /// Transforms a homogeneous point.
  Vector4d operator*(const Vector4d& p) const;

 private:
  struct Unchecked {};
  Pose(const Matrix3d& rotation, const Vector3d& translation, Unchecked)
      : rotation_(rotation), translation_(translation) {}
  friend Pose exp_map(const TangentVector& xi);

  Matrix3d rotation_;
  Vector3d translation_;
};

Matrix3d skew(const Vector3d& v);

/// se(3) hat operator: 6-vector -> 4x4 Lie algebra element.
Matrix4d hat(const TangentVector& xi);
/// Inverse of hat. Throws StructureError if m is not skew / has a nonzero bottom row.
TangentVector vee(const Matrix4d& m);

/// 6x6 adjoint-algebra operator [[phi^, rho^], [0, phi^]].
Matrix6d curly_hat(const TangentVector& xi);

Matrix3d so3_exp(const Vector3d& phi);
/// Principal rotation logarithm. Throws IllConditionedLog for angles >= pi - 1e-6.
Vector3d so3_log(const Matrix3d& rotation);
Matrix3d so3_left_jacobian(const Vector3d& phi);
Matrix3d so3_inv_left_jacobian(const Vector3d& phi);

Pose exp_map(const TangentVector& xi);
/// Throws IllConditionedLog when the rotation angle is within 1e-6 of pi.
TangentVector log_map(const Pose& pose);

/// SE(3) left Jacobian, closed form with a series fallback near phi = 0.
Matrix6d left_jacobian(const TangentVector& xi);
/// Analytic inverse of left_jacobian.
Matrix6d inv_left_jacobian(const TangentVector& xi);
/// First-order approximation I - 1/2 xi^curlyhat.
Matrix6d inv_left_jacobian_approx(const TangentVector& xi);

/// Derivative of inv_left_jacobian(xi) * v with respect to xi.
///
/// Evaluated by differentiating the Bernoulli series of the inverse Jacobian term
/// by term; the number of terms adapts to |phi| so the truncation error stays
/// below double precision for |phi| < pi.
Matrix6d inv_left_jacobian_times_derivative(const TangentVector& xi, const Vector6d& v);

/// Homogeneous point operator with hat(xi) * p == odot(p) * xi.
Matrix46d odot(const Vector4d& p);

/// Adjoint of a pose: Ad(T) xi = vee(T hat(xi) T^-1).
Matrix6d adjoint(const Pose& pose);

}  // namespace ctgp
