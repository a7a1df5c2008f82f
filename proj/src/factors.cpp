#include "ctgp/factors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <cmath>

#include "ctgp/errors.hpp"

namespace ctgp {

void Measurement::validate() const {
  if (!std::isfinite(tau) || !p.allFinite() || !q.allFinite()) {
    throw InvalidArgument("measurement has non-finite entries");
  }
  if (p(3) != 1.0 || q(3) != 1.0) {
    throw InvalidArgument("measurement points must be homogeneous with eta = 1");
  }
  if (const auto* plane = std::get_if<PlaneKind>(&kind)) {
    if (std::abs(plane->n.norm() - 1.0) > 1e-9) {
      throw InvalidArgument("plane normal must have unit length");
    }
    if (!(plane->beta > 0.0) || !std::isfinite(plane->beta)) {
      throw InvalidArgument("plane scale beta must be finite and > 0");
    }
    return;
  }
  const Matrix3d& R = std::get<PointKind>(kind).R;
  if (!R.allFinite() || (R - R.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + R.norm())) {
    throw InvalidArgument("point covariance must be finite and symmetric");
  }
  Eigen::LLT<Matrix3d> llt(R);
  if (llt.info() != Eigen::Success) {
    throw InvalidArgument("point covariance must be positive definite");
  }
}

Vector3d measurement_error(const Measurement& m, const Pose& T_tau) {
  return (m.p - T_tau * m.q).head<3>();
}

Matrix36d measurement_jacobian(const Measurement& m, const Pose& T_tau) {
  return -odot(T_tau * m.q).topRows<3>();
}

Matrix3d measurement_information(const Measurement& m) {
  if (const auto* plane = std::get_if<PlaneKind>(&m.kind)) {
    return plane->beta * plane->n * plane->n.transpose();
  }
  return std::get<PointKind>(m.kind).R.inverse();
}

double whitened_norm(const Measurement& m, const Vector3d& g) {
  if (const auto* plane = std::get_if<PlaneKind>(&m.kind)) {
    return std::sqrt(plane->beta) * std::abs(plane->n.dot(g));
  }
  const Eigen::LLT<Matrix3d> llt(std::get<PointKind>(m.kind).R);
  return llt.matrixL().solve(g).norm();
}

RobustCost robust_cost(double u) {
  const double u2 = u * u;
  if (!std::isfinite(u2)) return {0.5, 0.0};
  const double denom = 1.0 + u2;
  return {0.5 * u2 / denom, 1.0 / (denom * denom)};
}

}  // namespace ctgp
