#include "ctgp/interp.hpp"

#include <algorithm>
#include <string>

#include "ctgp/errors.hpp"

namespace ctgp {
namespace {

void check_query(double t_i, double tau, double t_j) {
  if (!(t_j > t_i)) {
    throw InvalidArgument("interpolation interval must satisfy t_i < t_j");
  }
  if (!(tau >= t_i && tau <= t_j)) {
    throw InvalidArgument("query time " + std::to_string(tau) + " outside [" +
                          std::to_string(t_i) + ", " + std::to_string(t_j) + "]");
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

Matrix6d& block_of(PoseJacobianBlocks& blocks, int component) {
  return component == 0 ? blocks.pose : (component == 1 ? blocks.velocity : blocks.acceleration);
}

}  // namespace

InterpShape interp_shape(PriorOrder order, double s, double dt) {
  const ShapeMatrix phi_s = transition_shape(order, s);
  const ShapeMatrix phi_rest = transition_shape(order, dt - s);
  const ShapeMatrix phi_dt = transition_shape(order, dt);
  InterpShape out;
  out.omega = process_cov_shape(order, s) * phi_rest.transpose() * process_cov_inv_shape(order, dt);
  out.lambda = phi_s - out.omega * phi_dt;
  return out;
}

InterpCoeffs interp_coeffs(PriorOrder order, double t_i, double tau, double t_j,
                           const PriorConfig& /*cfg*/) {
  check_query(t_i, tau, t_j);
  InterpCoeffs c;
  c.tau = tau;
  c.t_i = t_i;
  c.t_j = t_j;
  // With a diagonal Q_c every DOF is an independent scalar process, so Q_c
  // cancels between Q(tau) and Q(dt)^-1.
  const InterpShape shape = interp_shape(order, tau - t_i, t_j - t_i);
  c.lambda = expand_blocks(shape.lambda, Vector6d::Ones());
  c.omega = expand_blocks(shape.omega, Vector6d::Ones());
  return c;
}

InterpolatedPose interpolate_with_terms(PriorOrder order, const KnotPairTerms& t,
                                        const Knot& knot_i, const Knot& knot_j, double tau,
                                        bool want_jacobians) {
  InterpolatedPose out;
  if (tau == knot_i.t) {
    out.pose = knot_i.pose;
    out.jacobians.knot_i.pose.setIdentity();
    return out;
  }
  if (tau == knot_j.t) {
    out.pose = knot_j.pose;
    out.jacobians.knot_j.pose.setIdentity();
    return out;
  }

  const InterpShape sh = interp_shape(order, tau - knot_i.t, knot_j.t - knot_i.t);
  const bool wnoj = order == PriorOrder::WNOJ;

  Vector6d zeta = sh.lambda(0, 1) * knot_i.velocity + sh.omega(0, 0) * t.xi + sh.omega(0, 1) * t.a;
  if (wnoj) zeta += sh.lambda(0, 2) * knot_i.acceleration + sh.omega(0, 2) * t.c;
  out.pose = exp_map(zeta) * knot_i.pose;
  if (!want_jacobians) return out;

  const Matrix6d jl = left_jacobian(zeta);
  Matrix6d dzeta_dxi = sh.omega(0, 0) * Matrix6d::Identity() + sh.omega(0, 1) * t.da_dxi;
  if (wnoj) dzeta_dxi += sh.omega(0, 2) * t.dc_dxi;
  const Matrix6d chain = jl * dzeta_dxi;

  InterpJacobians& jac = out.jacobians;
  jac.knot_i.pose = chain * t.dxi_dpose_i + adjoint(exp_map(zeta));
  jac.knot_j.pose = chain * t.jinv;
  jac.knot_i.velocity = sh.lambda(0, 1) * jl;
  if (wnoj) {
    jac.knot_j.velocity = jl * (sh.omega(0, 1) * t.jinv + sh.omega(0, 2) * t.dc_dvel_j);
    jac.knot_i.acceleration = sh.lambda(0, 2) * jl;
    jac.knot_j.acceleration = sh.omega(0, 2) * jl * t.jinv;
  } else {
    jac.knot_j.velocity = sh.omega(0, 1) * jl * t.jinv;
  }
  return out;
}

Pose interpolate_pose(PriorOrder order, const Knot& knot_i, const Knot& knot_j, double tau,
                      const PriorConfig& /*cfg*/) {
  check_query(knot_i.t, tau, knot_j.t);
  if (tau == knot_i.t) return knot_i.pose;
  if (tau == knot_j.t) return knot_j.pose;
  return interpolate_with_terms(order, knot_pair_terms(order, knot_i, knot_j), knot_i, knot_j, tau,
                                false)
      .pose;
}

Pose extrapolate_pose(PriorOrder order, const Knot& knot, double tau) {
  if (!(tau >= knot.t)) {
    throw InvalidArgument("extrapolation time " + std::to_string(tau) + " precedes knot at " +
                          std::to_string(knot.t));
  }
  const double s = tau - knot.t;
  Vector6d zeta = s * knot.velocity;
  if (order == PriorOrder::WNOJ) zeta += 0.5 * s * s * knot.acceleration;
  return exp_map(zeta) * knot.pose;
}

PoseJacobianBlocks extrapolation_jacobians(PriorOrder order, const Knot& knot, double tau) {
  if (!(tau >= knot.t)) {
    throw InvalidArgument("extrapolation time precedes the knot");
  }
  const double s = tau - knot.t;
  Vector6d zeta = s * knot.velocity;
  if (order == PriorOrder::WNOJ) zeta += 0.5 * s * s * knot.acceleration;
  const Matrix6d jl = left_jacobian(zeta);
  PoseJacobianBlocks b;
  b.pose = adjoint(exp_map(zeta));
  b.velocity = s * jl;
  if (order == PriorOrder::WNOJ) b.acceleration = 0.5 * s * s * jl;
  return b;
}

LocalState interpolate_local_state(PriorOrder order, const Knot& knot_i, const Knot& knot_j,
                                   double tau, const PriorConfig& cfg) {
  const InterpCoeffs c = interp_coeffs(order, knot_i.t, tau, knot_j.t, cfg);
  const auto [gi, gj] = local_state_at_knots(order, knot_i, knot_j);
  return c.lambda * gi + c.omega * gj;
}

BodyVelocity interpolate_velocity(PriorOrder order, const Knot& knot_i, const Knot& knot_j,
                                  double tau, const PriorConfig& cfg) {
  const LocalState g = interpolate_local_state(order, knot_i, knot_j, tau, cfg);
  const Vector6d xi = g.segment<6>(0);
  return left_jacobian(xi) * g.segment<6>(6);
}

InterpJacobians interpolation_jacobians(PriorOrder order, const Knot& knot_i, const Knot& knot_j,
                                        double tau, const PriorConfig& /*cfg*/) {
  check_query(knot_i.t, tau, knot_j.t);
  return interpolate_with_terms(order, knot_pair_terms(order, knot_i, knot_j), knot_i, knot_j, tau,
                                true)
      .jacobians;
}

InterpJacobians interpolation_jacobians_numeric(PriorOrder order, const Knot& knot_i,
                                                const Knot& knot_j, double tau,
                                                const PriorConfig& cfg, double step) {
  check_query(knot_i.t, tau, knot_j.t);
  const Pose nominal_inv = interpolate_pose(order, knot_i, knot_j, tau, cfg).inverse();
  InterpJacobians jac;
  for (int which = 0; which < 2; ++which) {
    PoseJacobianBlocks& out = which == 0 ? jac.knot_i : jac.knot_j;
    for (int comp = 0; comp < num_blocks(order); ++comp) {
      for (int axis = 0; axis < 6; ++axis) {
        Knot ip = knot_i, im = knot_i, jp = knot_j, jm = knot_j;
        if (which == 0) {
          ip = perturbed(knot_i, comp, axis, step);
          im = perturbed(knot_i, comp, axis, -step);
        } else {
          jp = perturbed(knot_j, comp, axis, step);
          jm = perturbed(knot_j, comp, axis, -step);
        }
        const Vector6d plus = log_map(interpolate_pose(order, ip, jp, tau, cfg) * nominal_inv);
        const Vector6d minus = log_map(interpolate_pose(order, im, jm, tau, cfg) * nominal_inv);
        block_of(out, comp).col(axis) = (plus - minus) / (2.0 * step);
      }
    }
  }
  return jac;
}

double wnoj_interp_recovery(const Knot& knot_i, const Knot& knot_j, double tau,
                            const PriorConfig& cfg) {
  check_query(knot_i.t, tau, knot_j.t);
  const Pose wnoa = interpolate_pose(PriorOrder::WNOA, knot_i, knot_j, tau, cfg);
  Pose wnoj = knot_i.pose;
  if (tau == knot_j.t) {
    wnoj = knot_j.pose;
  } else if (tau > knot_i.t) {
    const InterpShape sh = interp_shape(PriorOrder::WNOJ, tau - knot_i.t, knot_j.t - knot_i.t);
    const TangentVector xi = log_map(knot_j.pose * knot_i.pose.inverse());
    // J^-1 varpi_j -> varpi_j; the curly-hat term then vanishes identically.
    const Vector6d zeta = sh.lambda(0, 1) * knot_i.velocity + sh.lambda(0, 2) * knot_i.acceleration +
                          sh.omega(0, 0) * xi + sh.omega(0, 1) * knot_j.velocity +
                          sh.omega(0, 2) * knot_j.acceleration;
    wnoj = exp_map(zeta) * knot_i.pose;
  }
  return log_map(wnoj * wnoa.inverse()).norm();
}

Pose query_trajectory(PriorOrder order, const std::vector<Knot>& knots, double tau) {
  if (knots.empty()) throw InvalidArgument("trajectory has no knots");
  if (tau < knots.front().t) {
    throw InvalidArgument("query time " + std::to_string(tau) + " precedes the first knot");
  }
  if (tau >= knots.back().t) return extrapolate_pose(order, knots.back(), tau);
  const auto it = std::upper_bound(knots.begin(), knots.end(), tau,
                                   [](double t, const Knot& k) { return t < k.t; });
  const Knot& kj = *it;
  const Knot& ki = *(it - 1);
  if (tau == ki.t) return ki.pose;
  return interpolate_with_terms(order, knot_pair_terms(order, ki, kj), ki, kj, tau, false).pose;
}

}  // namespace ctgp
