#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ctgp/factors.hpp"
#include "ctgp/prior.hpp"

namespace ctgp {

/// Batch estimation problem: knots joined by the motion prior, plus point
/// measurements evaluated at their own timestamps by GP interpolation.
struct Problem {
  PriorConfig prior;
  std::vector<Knot> knots;
  std::vector<Measurement> measurements;
  /// Knots held constant. Knot 0 by default, which fixes the gauge.
  std::set<std::size_t> fixed_knots{0};
  /// Measurements may lie up to this far past the last knot (prior-mean extrapolation).
  double extrapolation_window = 0.0;
  /// Replaces the prior inverse covariance of every interval when set
  /// (state_dim x state_dim, symmetric positive definite).
  std::optional<Eigen::MatrixXd> prior_information;

  /// Throws InvalidArgument describing the first violated invariant.
  void validate() const;
};

struct SolverOptions {
  /// Geman-McClure via IRLS when true, plain least squares otherwise.
  bool robust = true;
  /// Stop once the relative cost decrease of an iteration drops below this.
  double relative_tolerance = 1e-6;
  int max_iterations = 50;
  /// A step that increases the cost is halved at most this many times.
  int max_halvings = 8;
  /// Worker threads for linearization; results do not depend on this value.
  int threads = 1;
};

/// J = sum of prior costs 1/2 e^T Q^-1 e plus (robust) measurement costs.
double total_cost(const Problem& problem, const SolverOptions& opts = {});

struct StepReport {
  /// Full Gauss-Newton perturbation, one block of 6 * num_blocks(order) per
  /// knot in [pose; velocity; (acceleration)] order; zero for fixed knots.
  Eigen::VectorXd delta;
  double cost_before = 0.0;
  double cost_after = 0.0;
};

struct StepResult {
  Problem problem;
  StepReport report;
};

/// One undamped Gauss-Newton iteration on the IRLS-weighted normal equations.
/// Throws SingularSystem if the system cannot be factored.
StepResult gauss_newton_step(const Problem& problem, const SolverOptions& opts = {});

/// Applies `scale * delta` to every knot: T <- exp(d^) T, varpi += d, varpi_dot += d.
std::vector<Knot> apply_update(PriorOrder order, const std::vector<Knot>& knots,
                               const Eigen::VectorXd& delta, double scale = 1.0);

struct SolveReport {
  int iterations = 0;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  bool converged = false;
  /// "converged", "all-fixed", "max-iterations" or "diverged".
  std::string status;
  /// Cost before the first iteration followed by the cost after each accepted one.
  std::vector<double> cost_trace;
};

struct Solution {
  std::vector<Knot> knots;
  SolveReport report;
};

/// Gauss-Newton with step halving until the relative cost decrease falls below
/// the tolerance or the iteration limit is reached.
Solution solve(const Problem& problem, const SolverOptions& opts = {});

}  // namespace ctgp
