#include "ctgp/lie.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "ctgp/errors.hpp"

namespace ctgp {
namespace {

constexpr double kPoseTolerance = 1e-9;
constexpr double kStructureTolerance = 1e-9;
constexpr double kLogMargin = 1e-6;
// Below this angle the Jacobian coefficients use their Taylor series. The
// closed forms lose most of their digits to cancellation well above 1e-6.
constexpr double kSeriesAngle = 0.1;

void check_rotation(const Matrix3d& c) {
  const double ortho = (c.transpose() * c - Matrix3d::Identity()).norm();
  const double det = c.determinant();
  if (!(ortho < kPoseTolerance) || !(std::abs(det - 1.0) < kPoseTolerance)) {
    throw StructureError("rotation block is not in SO(3): |C^T C - I| = " + std::to_string(ortho) +
                         ", det = " + std::to_string(det));
  }
}

// Coefficients of the SO(3) and SE(3) Jacobians, stable at small angles.
struct JacobianCoeffs {
  double a;   // sin(t) / t
  double b;   // (1 - cos t) / t^2
  double c1;  // (t - sin t) / t^3
  double c2;  // (t^2 + 2 cos t - 2) / (2 t^4)
  double c3;  // (2 t - 3 sin t + t cos t) / (2 t^5)
  double d;   // 1/t^2 - (1 + cos t) / (2 t sin t)
};

JacobianCoeffs coeffs(double t) {
  JacobianCoeffs k{};
  const double t2 = t * t;
  if (t < kSeriesAngle) {
    const double t4 = t2 * t2;
    const double t6 = t4 * t2;
    k.a = 1.0 - t2 / 6.0 + t4 / 120.0 - t6 / 5040.0;
    k.b = 0.5 - t2 / 24.0 + t4 / 720.0 - t6 / 40320.0;
    k.c1 = 1.0 / 6.0 - t2 / 120.0 + t4 / 5040.0 - t6 / 362880.0;
    k.c2 = 1.0 / 24.0 - t2 / 720.0 + t4 / 40320.0 - t6 / 3628800.0;
    k.c3 = 1.0 / 120.0 - t2 / 2520.0 + t4 / 120960.0 - t6 / 9979200.0;
    k.d = 1.0 / 12.0 + t2 / 720.0 + t4 / 30240.0 + t6 / 1209600.0;
    return k;
  }
  const double s = std::sin(t);
  const double c = std::cos(t);
  const double half = std::sin(0.5 * t);
  k.a = s / t;
  k.b = 2.0 * half * half / t2;
  k.c1 = (t - s) / (t2 * t);
  k.c2 = (t2 + 2.0 * c - 2.0) / (2.0 * t2 * t2);
  k.c3 = (2.0 * t - 3.0 * s + t * c) / (2.0 * t2 * t2 * t);
  k.d = 1.0 / t2 - (1.0 + c) / (2.0 * t * s);
  return k;
}

// Translation-rotation coupling block of the SE(3) left Jacobian.
Matrix3d se3_q_block(const Vector3d& rho, const Vector3d& phi) {
  const JacobianCoeffs k = coeffs(phi.norm());
  const Matrix3d rx = skew(rho);
  const Matrix3d px = skew(phi);
  const Matrix3d pr = px * rx;
  const Matrix3d rp = rx * px;
  const Matrix3d prp = pr * px;
  return 0.5 * rx + k.c1 * (pr + rp + prp) + k.c2 * (px * pr + rp * px - 3.0 * prp) +
         k.c3 * (prp * px + px * prp);
}

// B_n / n! for the generating function x / (e^x - 1).
constexpr int kMaxSeriesTerms = 96;

std::array<double, kMaxSeriesTerms> bernoulli_over_factorial() {
  std::array<double, kMaxSeriesTerms> c{};
  std::array<double, kMaxSeriesTerms + 2> inv_fact{};
  inv_fact[0] = 1.0;
  for (int i = 1; i < kMaxSeriesTerms + 2; ++i) inv_fact[i] = inv_fact[i - 1] / i;
  c[0] = 1.0;
  for (int n = 1; n < kMaxSeriesTerms; ++n) {
    if (n >= 3 && n % 2 == 1) {
      c[n] = 0.0;
      continue;
    }
    double sum = 0.0;
    for (int k = 0; k < n; ++k) sum += c[k] * inv_fact[n - k + 1];
    c[n] = -sum;
  }
  return c;
}

const std::array<double, kMaxSeriesTerms>& series_coeffs() {
  static const std::array<double, kMaxSeriesTerms> c = bernoulli_over_factorial();
  return c;
}

}  // namespace

Pose::Pose(const Matrix3d& rotation, const Vector3d& translation)
    : rotation_(rotation), translation_(translation) {
  check_rotation(rotation_);
  if (!translation_.allFinite()) throw StructureError("translation has non-finite entries");
}

Pose Pose::from_matrix(const Matrix4d& matrix) {
  if (matrix(3, 0) != 0.0 || matrix(3, 1) != 0.0 || matrix(3, 2) != 0.0 || matrix(3, 3) != 1.0) {
    throw StructureError("bottom row of a pose must be exactly [0 0 0 1]");
  }
  return Pose(matrix.topLeftCorner<3, 3>(), matrix.topRightCorner<3, 1>());
}

Pose Pose::from_rotation_nearest(const Matrix3d& rotation, const Vector3d& translation) {
  Eigen::JacobiSVD<Matrix3d> svd(rotation, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Matrix3d c = svd.matrixU() * svd.matrixV().transpose();
  if (c.determinant() < 0.0) {
    Matrix3d u = svd.matrixU();
    u.col(2) *= -1.0;
    c = u * svd.matrixV().transpose();
  }
  return Pose(c, translation);
}

Matrix4d Pose::matrix() const {
  Matrix4d m = Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation_;
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

Pose Pose::inverse() const {
  const Matrix3d ct = rotation_.transpose();
  return Pose(ct, -ct * translation_, Unchecked{});
}

Pose Pose::operator*(const Pose& rhs) const {
  return Pose(rotation_ * rhs.rotation_, rotation_ * rhs.translation_ + translation_, Unchecked{});
}

Vector4d Pose::operator*(const Vector4d& p) const {
  Vector4d out;
  out.head<3>() = rotation_ * p.head<3>() + translation_ * p(3);
  out(3) = p(3);
  return out;
}

Matrix3d skew(const Vector3d& v) {
  Matrix3d m;
  m << 0.0, -v(2), v(1),
       v(2), 0.0, -v(0),
       -v(1), v(0), 0.0;
  return m;
}

Matrix4d hat(const TangentVector& xi) {
  Matrix4d m = Matrix4d::Zero();
  m.topLeftCorner<3, 3>() = skew(xi.tail<3>());
  m.topRightCorner<3, 1>() = xi.head<3>();
  return m;
}

TangentVector vee(const Matrix4d& m) {
  const Matrix3d a = m.topLeftCorner<3, 3>();
  const double sym = (a + a.transpose()).cwiseAbs().maxCoeff();
  const double bottom = m.row(3).cwiseAbs().maxCoeff();
  if (!(sym <= kStructureTolerance) || !(bottom <= kStructureTolerance)) {
    throw StructureError("matrix is not an se(3) element (skew asymmetry " + std::to_string(sym) +
                         ", bottom row " + std::to_string(bottom) + ")");
  }
  TangentVector xi;
  xi.head<3>() = m.topRightCorner<3, 1>();
  xi.tail<3>() << 0.5 * (a(2, 1) - a(1, 2)), 0.5 * (a(0, 2) - a(2, 0)), 0.5 * (a(1, 0) - a(0, 1));
  return xi;
}

Matrix6d curly_hat(const TangentVector& xi) {
  Matrix6d m = Matrix6d::Zero();
  const Matrix3d px = skew(xi.tail<3>());
  m.topLeftCorner<3, 3>() = px;
  m.bottomRightCorner<3, 3>() = px;
  m.topRightCorner<3, 3>() = skew(xi.head<3>());
  return m;
}

Matrix3d so3_exp(const Vector3d& phi) {
  const JacobianCoeffs k = coeffs(phi.norm());
  const Matrix3d px = skew(phi);
  return Matrix3d::Identity() + k.a * px + k.b * px * px;
}

Vector3d so3_log(const Matrix3d& rotation) {
  const Vector3d axis_sin(rotation(2, 1) - rotation(1, 2), rotation(0, 2) - rotation(2, 0),
                          rotation(1, 0) - rotation(0, 1));
  const double s = 0.5 * axis_sin.norm();
  const double c = 0.5 * (rotation.trace() - 1.0);
  const double angle = std::atan2(s, c);
  if (angle >= std::numbers::pi - kLogMargin) {
    throw IllConditionedLog("rotation logarithm at angle " + std::to_string(angle) +
                            " is within 1e-6 of pi");
  }
  // angle / sin(angle); for tiny angles s == sin(angle) to machine precision.
  const double ratio = s > 1e-12 ? angle / s : 1.0 + angle * angle / 6.0;
  return 0.5 * ratio * axis_sin;
}

Matrix3d so3_left_jacobian(const Vector3d& phi) {
  const JacobianCoeffs k = coeffs(phi.norm());
  const Matrix3d px = skew(phi);
  return Matrix3d::Identity() + k.b * px + k.c1 * px * px;
}

Matrix3d so3_inv_left_jacobian(const Vector3d& phi) {
  const JacobianCoeffs k = coeffs(phi.norm());
  const Matrix3d px = skew(phi);
  return Matrix3d::Identity() - 0.5 * px + k.d * px * px;
}

Pose exp_map(const TangentVector& xi) {
  const Vector3d phi = xi.tail<3>();
  const JacobianCoeffs k = coeffs(phi.norm());
  const Matrix3d px = skew(phi);
  const Matrix3d pxx = px * px;
  const Matrix3d c = Matrix3d::Identity() + k.a * px + k.b * pxx;
  const Matrix3d j = Matrix3d::Identity() + k.b * px + k.c1 * pxx;
  return Pose(c, j * xi.head<3>(), Pose::Unchecked{});
}

TangentVector log_map(const Pose& pose) {
  TangentVector xi;
  const Vector3d phi = so3_log(pose.rotation());
  xi.tail<3>() = phi;
  xi.head<3>() = so3_inv_left_jacobian(phi) * pose.translation();
  return xi;
}

Matrix6d left_jacobian(const TangentVector& xi) {
  const Vector3d phi = xi.tail<3>();
  Matrix6d m = Matrix6d::Zero();
  const Matrix3d j = so3_left_jacobian(phi);
  m.topLeftCorner<3, 3>() = j;
  m.bottomRightCorner<3, 3>() = j;
  m.topRightCorner<3, 3>() = se3_q_block(xi.head<3>(), phi);
  return m;
}

Matrix6d inv_left_jacobian(const TangentVector& xi) {
  const Vector3d phi = xi.tail<3>();
  Matrix6d m = Matrix6d::Zero();
  const Matrix3d jinv = so3_inv_left_jacobian(phi);
  m.topLeftCorner<3, 3>() = jinv;
  m.bottomRightCorner<3, 3>() = jinv;
  m.topRightCorner<3, 3>() = -jinv * se3_q_block(xi.head<3>(), phi) * jinv;
  return m;
}

Matrix6d inv_left_jacobian_approx(const TangentVector& xi) {
  return Matrix6d::Identity() - 0.5 * curly_hat(xi);
}

Matrix6d inv_left_jacobian_times_derivative(const TangentVector& xi, const Vector6d& v) {
  // d/dxi [ sum_n c_n (xi^)^n v ] with d(xi^) w = -(w^) dxi gives
  //   sum_k (xi^)^k M_k,   M_k = -( sum_j c_{k+1+j} (xi^)^j v )^.
  const auto& c = series_coeffs();
  const double angle = xi.tail<3>().norm();
  int terms = 8;
  if (angle > 0.0) {
    const double ratio = angle / (2.0 * std::numbers::pi);
    terms = static_cast<int>(std::ceil(std::log(1e-19) / std::log(ratio))) + 6;
    terms = std::clamp(terms, 8, kMaxSeriesTerms - 1);
  }
  const Matrix6d cx = curly_hat(xi);

  std::array<Vector6d, kMaxSeriesTerms> w;
  w[0] = v;
  for (int m = 1; m < terms; ++m) w[m] = cx * w[m - 1];

  Matrix6d acc = Matrix6d::Zero();
  for (int k = terms - 1; k >= 0; --k) {
    Vector6d u = Vector6d::Zero();
    for (int j = 0; k + 1 + j <= terms; ++j) {
      if (c[k + 1 + j] != 0.0) u += c[k + 1 + j] * w[j];
    }
    acc = (cx * acc).eval();
    acc -= curly_hat(u);
  }
  return acc;
}

Matrix46d odot(const Vector4d& p) {
  Matrix46d m = Matrix46d::Zero();
  m.topLeftCorner<3, 3>() = p(3) * Matrix3d::Identity();
  m.topRightCorner<3, 3>() = -skew(p.head<3>());
  return m;
}

Matrix6d adjoint(const Pose& pose) {
  Matrix6d m = Matrix6d::Zero();
  const Matrix3d& c = pose.rotation();
  m.topLeftCorner<3, 3>() = c;
  m.bottomRightCorner<3, 3>() = c;
  m.topRightCorner<3, 3>() = skew(pose.translation()) * c;
  return m;
}

}  // namespace ctgp
