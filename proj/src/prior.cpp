#include "ctgp/prior.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "ctgp/errors.hpp"

namespace ctgp {
namespace {

void require_positive_dt(double dt, const char* what) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw InvalidArgument(std::string(what) + ": dt must be > 0, got " + std::to_string(dt));
  }
}

void require_increasing(const Knot& knot_i, const Knot& knot_j) {
  if (!(knot_j.t > knot_i.t)) {
    throw InvalidArgument("knot times must be strictly increasing (" + std::to_string(knot_i.t) +
                          " then " + std::to_string(knot_j.t) + ")");
  }
}

Knot perturbed(const Knot& knot, int component, int axis, double h) {
  Knot out = knot;
  Vector6d d = Vector6d::Zero();
  d(axis) = h;
  switch (component) {
    case 0: out.pose = exp_map(d) * knot.pose; break;
    case 1: out.velocity += d; break;
    default: out.acceleration += d; break;
  }
  return out;
}

}  // namespace

std::string to_string(PriorOrder order) { return order == PriorOrder::WNOA ? "wnoa" : "wnoj"; }

PriorOrder parse_prior_order(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (lower == "wnoa") return PriorOrder::WNOA;
  if (lower == "wnoj") return PriorOrder::WNOJ;
  throw InvalidArgument("unknown prior order '" + std::string(text) + "' (expected wnoa or wnoj)");
}

void PriorConfig::validate() const {
  for (int k = 0; k < 6; ++k) {
    if (!(qc_diag(k) > 0.0) || !std::isfinite(qc_diag(k))) {
      throw InvalidArgument("qc_diag[" + std::to_string(k) + "] must be finite and > 0, got " +
                            std::to_string(qc_diag(k)));
    }
  }
}

ShapeMatrix transition_shape(PriorOrder order, double dt) {
  if (order == PriorOrder::WNOA) {
    ShapeMatrix m(2, 2);
    m << 1.0, dt,
         0.0, 1.0;
    return m;
  }
  ShapeMatrix m(3, 3);
  m << 1.0, dt, 0.5 * dt * dt,
       0.0, 1.0, dt,
       0.0, 0.0, 1.0;
  return m;
}

ShapeMatrix process_cov_shape(PriorOrder order, double dt) {
  const double dt2 = dt * dt;
  const double dt3 = dt2 * dt;
  if (order == PriorOrder::WNOA) {
    ShapeMatrix m(2, 2);
    m << dt3 / 3.0, dt2 / 2.0,
         dt2 / 2.0, dt;
    return m;
  }
  const double dt4 = dt3 * dt;
  const double dt5 = dt4 * dt;
  ShapeMatrix m(3, 3);
  m << dt5 / 20.0, dt4 / 8.0, dt3 / 6.0,
       dt4 / 8.0, dt3 / 3.0, dt2 / 2.0,
       dt3 / 6.0, dt2 / 2.0, dt;
  return m;
}

ShapeMatrix process_cov_inv_shape(PriorOrder order, double dt) {
  require_positive_dt(dt, "process_cov_inv");
  const double i1 = 1.0 / dt;
  const double i2 = i1 * i1;
  const double i3 = i2 * i1;
  if (order == PriorOrder::WNOA) {
    ShapeMatrix m(2, 2);
    m << 12.0 * i3, -6.0 * i2,
         -6.0 * i2, 4.0 * i1;
    return m;
  }
  const double i4 = i3 * i1;
  const double i5 = i4 * i1;
  ShapeMatrix m(3, 3);
  m << 720.0 * i5, -360.0 * i4, 60.0 * i3,
       -360.0 * i4, 192.0 * i3, -36.0 * i2,
       60.0 * i3, -36.0 * i2, 9.0 * i1;
  return m;
}

Eigen::MatrixXd expand_blocks(const ShapeMatrix& shape, const Vector6d& scale) {
  const Eigen::Index n = shape.rows();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(6 * n, 6 * shape.cols());
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < shape.cols(); ++c) {
      if (shape(r, c) == 0.0) continue;
      out.block<6, 6>(6 * r, 6 * c).diagonal() = shape(r, c) * scale;
    }
  }
  return out;
}

Eigen::MatrixXd transition(PriorOrder order, double dt) {
  if (!(dt >= 0.0) || !std::isfinite(dt)) {
    throw InvalidArgument("transition: dt must be >= 0, got " + std::to_string(dt));
  }
  return expand_blocks(transition_shape(order, dt), Vector6d::Ones());
}

Eigen::MatrixXd process_cov(PriorOrder order, double dt, const PriorConfig& cfg) {
  require_positive_dt(dt, "process_cov");
  return expand_blocks(process_cov_shape(order, dt), cfg.qc_diag);
}

Eigen::MatrixXd process_cov_inv(PriorOrder order, double dt, const PriorConfig& cfg) {
  return expand_blocks(process_cov_inv_shape(order, dt), cfg.qc_diag.cwiseInverse());
}

KnotPairTerms knot_pair_terms(PriorOrder order, const Knot& knot_i, const Knot& knot_j) {
  KnotPairTerms t;
  t.xi = log_map(knot_j.pose * knot_i.pose.inverse());
  t.jinv = inv_left_jacobian(t.xi);
  // J(xi)^-1 Ad(exp(xi)) == J(-xi)^-1
  t.dxi_dpose_i = -inv_left_jacobian(-t.xi);
  t.a = t.jinv * knot_j.velocity;
  t.da_dxi = inv_left_jacobian_times_derivative(t.xi, knot_j.velocity);
  if (order == PriorOrder::WNOA) {
    t.c.setZero();
    t.dc_dxi.setZero();
    t.dc_dvel_j.setZero();
    return t;
  }
  const Matrix6d vel_curly = curly_hat(knot_j.velocity);
  // -1/2 a^ w == 1/2 w^ a
  t.c = 0.5 * vel_curly * t.a + t.jinv * knot_j.acceleration;
  t.dc_dxi = 0.5 * vel_curly * t.da_dxi +
             inv_left_jacobian_times_derivative(t.xi, knot_j.acceleration);
  t.dc_dvel_j = 0.5 * (vel_curly * t.jinv - curly_hat(t.a));
  return t;
}

Eigen::VectorXd prior_error_from_terms(PriorOrder order, const KnotPairTerms& terms,
                                       const Knot& knot_i, double dt) {
  Eigen::VectorXd e(state_dim(order));
  if (order == PriorOrder::WNOA) {
    e.segment<6>(0) = terms.xi - dt * knot_i.velocity;
    e.segment<6>(6) = terms.a - knot_i.velocity;
    return e;
  }
  e.segment<6>(0) = terms.xi - dt * knot_i.velocity - 0.5 * dt * dt * knot_i.acceleration;
  e.segment<6>(6) = terms.a - knot_i.velocity - dt * knot_i.acceleration;
  e.segment<6>(12) = terms.c - knot_i.acceleration;
  return e;
}

std::pair<LocalState, LocalState> local_state_at_knots(PriorOrder order, const Knot& knot_i,
                                                       const Knot& knot_j) {
  const int n = state_dim(order);
  LocalState gi = LocalState::Zero(n);
  LocalState gj = LocalState::Zero(n);
  const TangentVector xi = log_map(knot_j.pose * knot_i.pose.inverse());
  const Matrix6d jinv = inv_left_jacobian(xi);
  const Vector6d a = jinv * knot_j.velocity;
  gi.segment<6>(6) = knot_i.velocity;
  gj.segment<6>(0) = xi;
  gj.segment<6>(6) = a;
  if (order == PriorOrder::WNOJ) {
    gi.segment<6>(12) = knot_i.acceleration;
    gj.segment<6>(12) = -0.5 * curly_hat(a) * knot_j.velocity + jinv * knot_j.acceleration;
  }
  return {gi, gj};
}

PriorError prior_error(PriorOrder order, const Knot& knot_i, const Knot& knot_j,
                       const PriorConfig& cfg) {
  require_increasing(knot_i, knot_j);
  const double dt = knot_j.t - knot_i.t;
  const KnotPairTerms terms = knot_pair_terms(order, knot_i, knot_j);
  return {prior_error_from_terms(order, terms, knot_i, dt), process_cov_inv(order, dt, cfg)};
}

Eigen::MatrixXd prior_error_jacobian_from_terms(PriorOrder order, const KnotPairTerms& t,
                                                double dt) {
  const int n = state_dim(order);
  const Matrix6d eye = Matrix6d::Identity();
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, 2 * n);
  // Columns [0, n) belong to knot i, [n, 2n) to knot j.
  jac.block<6, 6>(0, 0) = t.dxi_dpose_i;
  jac.block<6, 6>(6, 0) = t.da_dxi * t.dxi_dpose_i;
  jac.block<6, 6>(0, n) = t.jinv;
  jac.block<6, 6>(6, n) = t.da_dxi * t.jinv;

  jac.block<6, 6>(0, 6) = -dt * eye;
  jac.block<6, 6>(6, 6) = -eye;
  jac.block<6, 6>(6, n + 6) = t.jinv;

  if (order == PriorOrder::WNOJ) {
    jac.block<6, 6>(12, 0) = t.dc_dxi * t.dxi_dpose_i;
    jac.block<6, 6>(12, n) = t.dc_dxi * t.jinv;
    jac.block<6, 6>(12, n + 6) = t.dc_dvel_j;

    jac.block<6, 6>(0, 12) = -0.5 * dt * dt * eye;
    jac.block<6, 6>(6, 12) = -dt * eye;
    jac.block<6, 6>(12, 12) = -eye;
    jac.block<6, 6>(12, n + 12) = t.jinv;
  }
  return jac;
}

PriorErrorJacobians prior_error_jacobians(PriorOrder order, const Knot& knot_i,
                                          const Knot& knot_j, const PriorConfig& /*cfg*/) {
  require_increasing(knot_i, knot_j);
  const int n = state_dim(order);
  const Eigen::MatrixXd stacked =
      prior_error_jacobian_from_terms(order, knot_pair_terms(order, knot_i, knot_j),
                                      knot_j.t - knot_i.t);
  PriorErrorJacobians jac;
  for (int which = 0; which < 2; ++which) {
    KnotJacobian& out = which == 0 ? jac.knot_i : jac.knot_j;
    const int offset = which * n;
    out.pose = stacked.middleCols(offset, 6);
    out.velocity = stacked.middleCols(offset + 6, 6);
    out.acceleration = stacked.middleCols(offset + 12, order == PriorOrder::WNOJ ? 6 : 0);
  }
  return jac;
}

PriorErrorJacobians prior_error_jacobians_numeric(PriorOrder order, const Knot& knot_i,
                                                  const Knot& knot_j, const PriorConfig& cfg,
                                                  double step) {
  require_increasing(knot_i, knot_j);
  const int n = state_dim(order);
  const int components = num_blocks(order);
  PriorErrorJacobians jac;
  for (int which = 0; which < 2; ++which) {
    KnotJacobian& out = which == 0 ? jac.knot_i : jac.knot_j;
    out.pose = Eigen::MatrixXd::Zero(n, 6);
    out.velocity = Eigen::MatrixXd::Zero(n, 6);
    out.acceleration = Eigen::MatrixXd::Zero(n, order == PriorOrder::WNOJ ? 6 : 0);
    for (int comp = 0; comp < components; ++comp) {
      Eigen::MatrixXd& block = comp == 0 ? out.pose : (comp == 1 ? out.velocity : out.acceleration);
      for (int axis = 0; axis < 6; ++axis) {
        Knot ip = knot_i, im = knot_i, jp = knot_j, jm = knot_j;
        if (which == 0) {
          ip = perturbed(knot_i, comp, axis, step);
          im = perturbed(knot_i, comp, axis, -step);
        } else {
          jp = perturbed(knot_j, comp, axis, step);
          jm = perturbed(knot_j, comp, axis, -step);
        }
        block.col(axis) =
            (prior_error(order, ip, jp, cfg).e - prior_error(order, im, jm, cfg).e) / (2.0 * step);
      }
    }
  }
  return jac;
}

double wnoa_recovery_check(const Knot& knot_i, const Knot& knot_j, const PriorConfig& /*cfg*/) {
  require_increasing(knot_i, knot_j);
  const double dt = knot_j.t - knot_i.t;
  const TangentVector xi = log_map(knot_j.pose * knot_i.pose.inverse());

  // WNOJ error with J^-1 varpi_j replaced by varpi_j (curly-hat term vanishes).
  Eigen::Matrix<double, 18, 1> wnoj;
  wnoj.segment<6>(0) = xi - dt * knot_i.velocity - 0.5 * dt * dt * knot_i.acceleration;
  wnoj.segment<6>(6) = knot_j.velocity - knot_i.velocity - dt * knot_i.acceleration;
  wnoj.segment<6>(12) = knot_j.acceleration - knot_i.acceleration;

  Eigen::Matrix<double, 12, 1> wnoa;
  wnoa.segment<6>(0) = xi - dt * knot_i.velocity;
  wnoa.segment<6>(6) = inv_left_jacobian(xi) * knot_j.velocity - knot_i.velocity;

  Eigen::Matrix<double, 18, 1> diff = wnoj;
  diff.head<12>() -= wnoa;
  return diff.norm();
}

}  // namespace ctgp
