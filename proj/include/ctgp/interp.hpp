#pragma once

#include <Eigen/Core>

#include <vector>

#include "ctgp/lie.hpp"
#include "ctgp/prior.hpp"

namespace ctgp {

/// GP interpolation coefficients gamma(tau) = Lambda gamma(t_i) + Omega gamma(t_j).
struct InterpCoeffs {
  Eigen::MatrixXd lambda;
  Eigen::MatrixXd omega;
  double tau = 0.0;
  double t_i = 0.0;
  double t_j = 0.0;
};

/// Per-DOF shape of Lambda and Omega; each full block is entry * I.
struct InterpShape {
  ShapeMatrix lambda;
  ShapeMatrix omega;
};

/// Shape coefficients at offset s = tau - t_i within an interval of length dt.
/// Uses the full-interval covariance inverse, so Omega(dt) = I and Lambda(dt) = 0.
InterpShape interp_shape(PriorOrder order, double s, double dt);

/// Throws InvalidArgument unless t_i < t_j and t_i <= tau <= t_j.
InterpCoeffs interp_coeffs(PriorOrder order, double t_i, double tau, double t_j,
                           const PriorConfig& cfg);

/// Pose at tau between two knots. Queries exactly at a knot return that knot's pose.
Pose interpolate_pose(PriorOrder order, const Knot& knot_i, const Knot& knot_j, double tau,
                      const PriorConfig& cfg);

/// Prior-mean prediction beyond the last knot: exp((s varpi + s^2/2 varpi_dot)^) T.
/// Throws InvalidArgument if tau < knot.t.
Pose extrapolate_pose(PriorOrder order, const Knot& knot, double tau);

/// Full interpolated local state gamma_i(tau) (relative to knot_i).
LocalState interpolate_local_state(PriorOrder order, const Knot& knot_i, const Knot& knot_j,
                                   double tau, const PriorConfig& cfg);

/// Body velocity at tau, recovered from the interpolated local state as J(xi) xi_dot.
BodyVelocity interpolate_velocity(PriorOrder order, const Knot& knot_i, const Knot& knot_j,
                                  double tau, const PriorConfig& cfg);

/// 6x6 Jacobians of the left perturbation of T_tau with respect to one knot.
struct PoseJacobianBlocks {
  Matrix6d pose = Matrix6d::Zero();
  Matrix6d velocity = Matrix6d::Zero();
  Matrix6d acceleration = Matrix6d::Zero();  ///< zero under WNOA
};

struct InterpJacobians {
  PoseJacobianBlocks knot_i;
  PoseJacobianBlocks knot_j;
};

InterpJacobians interpolation_jacobians(PriorOrder order, const Knot& knot_i, const Knot& knot_j,
                                        double tau, const PriorConfig& cfg);

/// Central finite-difference version of interpolation_jacobians.
InterpJacobians interpolation_jacobians_numeric(PriorOrder order, const Knot& knot_i,
                                                const Knot& knot_j, double tau,
                                                const PriorConfig& cfg, double step = 1e-6);

/// Jacobians of an extrapolated pose with respect to the last knot.
PoseJacobianBlocks extrapolation_jacobians(PriorOrder order, const Knot& knot, double tau);

/// |ln(T_a T_b^-1)| between WNOJ interpolation with J^-1 varpi replaced by varpi
/// and WNOA interpolation, for knots with zero acceleration.
double wnoj_interp_recovery(const Knot& knot_i, const Knot& knot_j, double tau,
                            const PriorConfig& cfg);

/// Interpolated pose and (optionally) its Jacobians, reusing precomputed pair terms.
struct InterpolatedPose {
  Pose pose;
  InterpJacobians jacobians;
};

InterpolatedPose interpolate_with_terms(PriorOrder order, const KnotPairTerms& terms,
                                        const Knot& knot_i, const Knot& knot_j, double tau,
                                        bool want_jacobians);

/// Pose of a knot trajectory at tau: interpolation inside the knot span,
/// prior-mean extrapolation after it. Throws InvalidArgument before the first knot.
Pose query_trajectory(PriorOrder order, const std::vector<Knot>& knots, double tau);

}  // namespace ctgp
