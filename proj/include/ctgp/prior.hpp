#pragma once

#include <Eigen/Core>

#include <string>
#include <string_view>
#include <utility>

#include "ctgp/lie.hpp"

namespace ctgp {

/// White-noise-on-acceleration (constant-velocity mean) or
/// white-noise-on-jerk (constant-acceleration mean).
enum class PriorOrder { WNOA, WNOJ };

/// Number of 6-dof blocks in the local state: 2 for WNOA, 3 for WNOJ.
inline int num_blocks(PriorOrder order) { return order == PriorOrder::WNOA ? 2 : 3; }
inline int state_dim(PriorOrder order) { return 6 * num_blocks(order); }

std::string to_string(PriorOrder order);
/// Accepts "wnoa" / "wnoj" (case-insensitive). Throws InvalidArgument otherwise.
PriorOrder parse_prior_order(std::string_view text);

struct PriorConfig {
  PriorOrder order = PriorOrder::WNOA;
  /// Diagonal of the power-spectral-density matrix Q_c, one entry per DOF.
  Vector6d qc_diag = Vector6d::Ones();

  /// Throws InvalidArgument unless every entry of qc_diag is finite and > 0.
  void validate() const;
};

/// Estimator state at one knot time. `acceleration` is only meaningful under
/// WNOJ and is kept at zero for WNOA trajectories.
struct Knot {
  double t = 0.0;
  Pose pose;
  BodyVelocity velocity = BodyVelocity::Zero();
  BodyAcceleration acceleration = BodyAcceleration::Zero();
};

/// Stacked local state [xi; xi_dot] (WNOA) or [xi; xi_dot; xi_ddot] (WNOJ).
using LocalState = Eigen::VectorXd;

/// Small per-DOF shape matrix; every 6x6 block of the full matrices is the
/// corresponding entry times I (or times Q_c / Q_c^-1).
using ShapeMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;

ShapeMatrix transition_shape(PriorOrder order, double dt);
/// Covariance shape for unit Q_c; valid for dt >= 0 (zero at dt = 0).
ShapeMatrix process_cov_shape(PriorOrder order, double dt);
/// Closed-form inverse of process_cov_shape; requires dt > 0.
ShapeMatrix process_cov_inv_shape(PriorOrder order, double dt);

/// Expands a shape matrix into the full 6n x 6n matrix, scaling each block by diag(scale).
Eigen::MatrixXd expand_blocks(const ShapeMatrix& shape, const Vector6d& scale);

/// State transition Phi(dt). Throws InvalidArgument for dt < 0.
Eigen::MatrixXd transition(PriorOrder order, double dt);
/// Process covariance Q(dt) for the Q_c in `cfg`. Throws InvalidArgument for dt <= 0.
Eigen::MatrixXd process_cov(PriorOrder order, double dt, const PriorConfig& cfg);
/// Closed-form inverse of process_cov. Throws InvalidArgument for dt <= 0.
Eigen::MatrixXd process_cov_inv(PriorOrder order, double dt, const PriorConfig& cfg);

/// Local states gamma_i(t_i) and gamma_i(t_j) built from two knots.
std::pair<LocalState, LocalState> local_state_at_knots(PriorOrder order, const Knot& knot_i,
                                                       const Knot& knot_j);

struct PriorError {
  Eigen::VectorXd e;
  Eigen::MatrixXd q_inv;
};

/// Prior error between consecutive knots in global variables, with its
/// inverse covariance. Throws InvalidArgument unless knot_j.t > knot_i.t.
PriorError prior_error(PriorOrder order, const Knot& knot_i, const Knot& knot_j,
                       const PriorConfig& cfg);

/// Jacobian blocks of a stacked quantity with respect to one knot's perturbation
/// (left pose perturbation, additive velocity and acceleration). The
/// acceleration block has zero columns under WNOA.
struct KnotJacobian {
  Eigen::MatrixXd pose;
  Eigen::MatrixXd velocity;
  Eigen::MatrixXd acceleration;
};

struct PriorErrorJacobians {
  KnotJacobian knot_i;
  KnotJacobian knot_j;
};

/// Analytic Jacobians of prior_error.
PriorErrorJacobians prior_error_jacobians(PriorOrder order, const Knot& knot_i,
                                          const Knot& knot_j, const PriorConfig& cfg);

/// Central finite-difference Jacobians of prior_error (validation mode).
PriorErrorJacobians prior_error_jacobians_numeric(PriorOrder order, const Knot& knot_i,
                                                  const Knot& knot_j, const PriorConfig& cfg,
                                                  double step = 1e-6);

/// Distance between the WNOJ prior error evaluated with J^-1 varpi replaced by
/// varpi and the WNOA prior error, for knots with zero acceleration.
double wnoa_recovery_check(const Knot& knot_i, const Knot& knot_j, const PriorConfig& cfg);

/// Quantities of a knot pair that every prior and interpolation term reuses.
struct KnotPairTerms {
  TangentVector xi;        ///< ln(T_j T_i^-1)
  Matrix6d jinv;           ///< J(xi)^-1
  Matrix6d dxi_dpose_i;    ///< d xi / d (left perturbation of T_i)
  Vector6d a;              ///< J(xi)^-1 varpi_j
  Matrix6d da_dxi;         ///< d a / d xi
  Vector6d c;              ///< -1/2 a^curly varpi_j + J(xi)^-1 varpi_dot_j (WNOJ only)
  Matrix6d dc_dxi;         ///< d c / d xi
  Matrix6d dc_dvel_j;      ///< d c / d varpi_j
};

KnotPairTerms knot_pair_terms(PriorOrder order, const Knot& knot_i, const Knot& knot_j);

/// Prior error from precomputed pair terms; dt = t_j - t_i.
Eigen::VectorXd prior_error_from_terms(PriorOrder order, const KnotPairTerms& terms,
                                       const Knot& knot_i, double dt);

/// Stacked Jacobian [d e / d x_i | d e / d x_j], each half ordered
/// [pose, velocity, (acceleration)].
Eigen::MatrixXd prior_error_jacobian_from_terms(PriorOrder order, const KnotPairTerms& terms,
                                                double dt);

}  // namespace ctgp
