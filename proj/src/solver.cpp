#include "ctgp/solver.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>
#include <thread>

#include "ctgp/block_tridiagonal.hpp"
#include "ctgp/errors.hpp"
#include "ctgp/interp.hpp"

namespace ctgp {
namespace {

using LocalMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 36, 36>;
using LocalVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 36, 1>;
using MeasRow = Eigen::Matrix<double, 3, Eigen::Dynamic, 0, 3, 36>;

/// Measurement indices grouped by the knot interval that determines their pose.
struct Buckets {
  std::vector<std::vector<std::size_t>> interval;  ///< [t_k, t_{k+1}]
  std::vector<std::size_t> tail;                   ///< past the last knot (or single knot)
};

Buckets bucket_measurements(const Problem& problem) {
  const std::size_t n = problem.knots.size();
  Buckets b;
  b.interval.resize(n > 0 ? n - 1 : 0);
  std::vector<double> times(n);
  for (std::size_t k = 0; k < n; ++k) times[k] = problem.knots[k].t;
  for (std::size_t idx = 0; idx < problem.measurements.size(); ++idx) {
    const double tau = problem.measurements[idx].tau;
    const auto it = std::upper_bound(times.begin(), times.end(), tau);
    std::size_t k = static_cast<std::size_t>(it - times.begin()) - 1;
    if (k + 1 < n) {
      b.interval[k].push_back(idx);
    } else if (n >= 2 && tau == times.back()) {
      b.interval[n - 2].push_back(idx);
    } else {
      b.tail.push_back(idx);
    }
  }
  return b;
}

struct Contribution {
  LocalMatrix H;
  LocalVector rhs;
  double cost = 0.0;
};

RobustCost measurement_cost(const Measurement& m, const Vector3d& g, bool robust) {
  const double u = whitened_norm(m, g);
  if (robust) return robust_cost(u);
  return {0.5 * u * u, 1.0};
}

/// Adds w A^T W A and -w A^T W g for one measurement whose Jacobian with
/// respect to the local state block is A = G [blocks].
void add_measurement(const Measurement& m, const Pose& T_tau, const Vector3d& g, double weight,
                     const PoseJacobianBlocks* blocks[2], int b, Contribution& out) {
  const Matrix36d G = measurement_jacobian(m, T_tau);
  const int count = blocks[1] ? 2 : 1;
  MeasRow A = MeasRow::Zero(3, count * b);
  for (int s = 0; s < count; ++s) {
    A.middleCols<6>(s * b) = G * blocks[s]->pose;
    A.middleCols<6>(s * b + 6) = G * blocks[s]->velocity;
    if (b == 18) A.middleCols<6>(s * b + 12) = G * blocks[s]->acceleration;
  }
  const Matrix3d W = weight * measurement_information(m);
  const MeasRow WA = W * A;
  out.H.noalias() += A.transpose() * WA;
  out.rhs.noalias() -= WA.transpose() * g;
}

Eigen::MatrixXd prior_information(const Problem& problem, double dt) {
  if (problem.prior_information) return *problem.prior_information;
  return process_cov_inv(problem.prior.order, dt, problem.prior);
}

Contribution interval_contribution(const Problem& problem, std::size_t k,
                                   const std::vector<std::size_t>& bucket, bool robust,
                                   bool linearize) {
  const PriorOrder order = problem.prior.order;
  const int b = state_dim(order);
  const Knot& ki = problem.knots[k];
  const Knot& kj = problem.knots[k + 1];
  const double dt = kj.t - ki.t;
  const KnotPairTerms terms = knot_pair_terms(order, ki, kj);

  Contribution out;
  if (linearize) {
    out.H = LocalMatrix::Zero(2 * b, 2 * b);
    out.rhs = LocalVector::Zero(2 * b);
  }

  const Eigen::VectorXd e = prior_error_from_terms(order, terms, ki, dt);
  const Eigen::MatrixXd info = prior_information(problem, dt);
  const Eigen::VectorXd info_e = info * e;
  out.cost += 0.5 * e.dot(info_e);
  if (linearize) {
    const Eigen::MatrixXd E = prior_error_jacobian_from_terms(order, terms, dt);
    out.H.noalias() += E.transpose() * info * E;
    out.rhs.noalias() -= E.transpose() * info_e;
  }

  for (const std::size_t idx : bucket) {
    const Measurement& m = problem.measurements[idx];
    const InterpolatedPose ip = interpolate_with_terms(order, terms, ki, kj, m.tau, linearize);
    const Vector3d g = measurement_error(m, ip.pose);
    const RobustCost rc = measurement_cost(m, g, robust);
    out.cost += rc.cost;
    if (linearize) {
      const PoseJacobianBlocks* blocks[2] = {&ip.jacobians.knot_i, &ip.jacobians.knot_j};
      add_measurement(m, ip.pose, g, rc.weight, blocks, b, out);
    }
  }
  return out;
}

Contribution tail_contribution(const Problem& problem, const std::vector<std::size_t>& bucket,
                               bool robust, bool linearize) {
  const PriorOrder order = problem.prior.order;
  const int b = state_dim(order);
  const Knot& last = problem.knots.back();
  Contribution out;
  if (linearize) {
    out.H = LocalMatrix::Zero(b, b);
    out.rhs = LocalVector::Zero(b);
  }
  for (const std::size_t idx : bucket) {
    const Measurement& m = problem.measurements[idx];
    const Pose T_tau = extrapolate_pose(order, last, m.tau);
    const Vector3d g = measurement_error(m, T_tau);
    const RobustCost rc = measurement_cost(m, g, robust);
    out.cost += rc.cost;
    if (linearize) {
      const PoseJacobianBlocks jac = extrapolation_jacobians(order, last, m.tau);
      const PoseJacobianBlocks* blocks[2] = {&jac, nullptr};
      add_measurement(m, T_tau, g, rc.weight, blocks, b, out);
    }
  }
  return out;
}

/// Runs body(i) for i in [0, count) on up to `threads` workers. Each index is
/// handled by exactly one worker, so results written per index are independent
/// of the thread count.
template <typename Body>
void parallel_for(std::size_t count, int threads, Body body) {
  const std::size_t workers =
      std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  const std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        const std::size_t end = std::min(count, (w + 1) * chunk);
        for (std::size_t i = w * chunk; i < end; ++i) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// Evaluates the cost and, when `system` is given, the normal equations over
/// all knots (fixed knots are replaced by identity rows).
double evaluate(const Problem& problem, const SolverOptions& opts, BlockTridiagonal* system,
                Eigen::VectorXd* rhs) {
  const bool linearize = system != nullptr;
  const std::size_t n = problem.knots.size();
  const int b = state_dim(problem.prior.order);
  const Buckets buckets = bucket_measurements(problem);

  std::vector<Contribution> parts(buckets.interval.size());
  parallel_for(parts.size(), opts.threads, [&](std::size_t k) {
    parts[k] = interval_contribution(problem, k, buckets.interval[k], opts.robust, linearize);
  });
  const Contribution tail = tail_contribution(problem, buckets.tail, opts.robust, linearize);

  // Fixed-order reduction keeps the result bit-identical for any thread count.
  double cost = 0.0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    cost += parts[k].cost;
    if (!linearize) continue;
    system->diag(k) += parts[k].H.topLeftCorner(b, b);
    system->upper(k) += parts[k].H.topRightCorner(b, b);
    system->diag(k + 1) += parts[k].H.bottomRightCorner(b, b);
    rhs->segment(k * b, b) += parts[k].rhs.head(b);
    rhs->segment((k + 1) * b, b) += parts[k].rhs.tail(b);
  }
  cost += tail.cost;
  if (linearize && !buckets.tail.empty()) {
    system->diag(n - 1) += tail.H;
    rhs->segment((n - 1) * b, b) += tail.rhs;
  }

  if (linearize) {
    for (const std::size_t k : problem.fixed_knots) {
      system->diag(k).setIdentity();
      if (k > 0) system->upper(k - 1).setZero();
      if (k + 1 < n) system->upper(k).setZero();
      rhs->segment(k * b, b).setZero();
    }
  }
  return cost;
}

}  // namespace

void Problem::validate() const {
  prior.validate();
  if (knots.empty()) throw InvalidArgument("problem has no knots");
  for (std::size_t k = 0; k < knots.size(); ++k) {
    const Knot& knot = knots[k];
    if (!std::isfinite(knot.t) || !knot.velocity.allFinite() || !knot.acceleration.allFinite()) {
      throw InvalidArgument("knot " + std::to_string(k) + " has non-finite entries");
    }
    if (k > 0 && !(knot.t > knots[k - 1].t)) {
      throw InvalidArgument("knot times must be strictly increasing (knot " + std::to_string(k) +
                            ")");
    }
  }
  for (const std::size_t k : fixed_knots) {
    if (k >= knots.size()) {
      throw InvalidArgument("fixed knot index " + std::to_string(k) + " out of range");
    }
  }
  if (fixed_knots.empty() && measurements.empty()) {
    throw InvalidArgument("problem needs a fixed knot or measurements to fix the gauge");
  }
  if (!(extrapolation_window >= 0.0)) {
    throw InvalidArgument("extrapolation window must be >= 0");
  }
  const double t0 = knots.front().t;
  const double t_end = knots.back().t + extrapolation_window;
  for (std::size_t idx = 0; idx < measurements.size(); ++idx) {
    const Measurement& m = measurements[idx];
    m.validate();
    if (m.tau < t0 || m.tau > t_end) {
      throw InvalidArgument("measurement " + std::to_string(idx) + " at t=" +
                            std::to_string(m.tau) + " lies outside the trajectory span");
    }
  }
  if (prior_information) {
    const int n = state_dim(prior.order);
    if (prior_information->rows() != n || prior_information->cols() != n) {
      throw InvalidArgument("prior information override must be " + std::to_string(n) + "x" +
                            std::to_string(n));
    }
  }
}

double total_cost(const Problem& problem, const SolverOptions& opts) {
  return evaluate(problem, opts, nullptr, nullptr);
}

std::vector<Knot> apply_update(PriorOrder order, const std::vector<Knot>& knots,
                               const Eigen::VectorXd& delta, double scale) {
  const int b = state_dim(order);
  if (delta.size() != static_cast<Eigen::Index>(knots.size()) * b) {
    throw InvalidArgument("update size does not match the number of knots");
  }
  std::vector<Knot> out = knots;
  for (std::size_t k = 0; k < knots.size(); ++k) {
    const auto d = delta.segment(k * b, b);
    if (d.isZero(0.0)) continue;
    out[k].pose = exp_map(scale * d.head<6>()) * knots[k].pose;
    out[k].velocity += scale * d.segment<6>(6);
    if (order == PriorOrder::WNOJ) out[k].acceleration += scale * d.segment<6>(12);
  }
  return out;
}

namespace {

// Cost changes below this are round-off; it lets an exact zero-residual
// optimum register as converged.
constexpr double kCostRoundOff = 1e-14;

struct Linearization {
  Eigen::VectorXd delta;
  double cost = 0.0;
};

Linearization linearize_and_solve(const Problem& problem, const SolverOptions& opts) {
  const std::size_t n = problem.knots.size();
  const int b = state_dim(problem.prior.order);
  BlockTridiagonal system(n, b);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n) * b);
  Linearization lin;
  lin.cost = evaluate(problem, opts, &system, &rhs);
  lin.delta = system.solve(rhs);
  for (const std::size_t k : problem.fixed_knots) lin.delta.segment(k * b, b).setZero();
  return lin;
}

}  // namespace

StepResult gauss_newton_step(const Problem& problem, const SolverOptions& opts) {
  problem.validate();
  const Linearization lin = linearize_and_solve(problem, opts);
  StepResult result{problem, {}};
  result.problem.knots = apply_update(problem.prior.order, problem.knots, lin.delta);
  result.report.delta = lin.delta;
  result.report.cost_before = lin.cost;
  result.report.cost_after = total_cost(result.problem, opts);
  return result;
}

Solution solve(const Problem& problem, const SolverOptions& opts) {
  problem.validate();
  if (opts.max_iterations < 0 || opts.max_halvings < 0 || !(opts.relative_tolerance >= 0.0)) {
    throw InvalidArgument("solver options must be non-negative");
  }
  Solution sol;
  sol.knots = problem.knots;
  SolveReport& rep = sol.report;
  double cost = total_cost(problem, opts);
  rep.initial_cost = cost;
  rep.final_cost = cost;
  rep.cost_trace.push_back(cost);

  if (problem.fixed_knots.size() == problem.knots.size()) {
    rep.converged = true;
    rep.status = "all-fixed";
    return sol;
  }

  Problem current = problem;
  rep.status = "max-iterations";
  for (int it = 1; it <= opts.max_iterations; ++it) {
    const Linearization lin = linearize_and_solve(current, opts);

    const std::vector<Knot> base = current.knots;
    double scale = 1.0;
    bool accepted = false;
    double best_rejected = cost;
    double candidate_cost = cost;
    for (int h = 0; h <= opts.max_halvings; ++h, scale *= 0.5) {
      current.knots = apply_update(current.prior.order, base, lin.delta, scale);
      const double c = total_cost(current, opts);
      if (c <= cost) {
        candidate_cost = c;
        accepted = true;
        break;
      }
      best_rejected = h == 0 ? c : std::min(best_rejected, c);
    }

    if (!accepted) {
      // No descent along the Gauss-Newton direction. If the increase is below
      // the convergence tolerance the iterate is already at a minimum.
      current.knots = base;
      rep.iterations = it - 1;
      const bool at_minimum =
          best_rejected - cost <= opts.relative_tolerance * std::abs(cost) + kCostRoundOff;
      rep.converged = at_minimum;
      rep.status = at_minimum ? "converged" : "diverged";
      break;
    }

    const double decrease = cost - candidate_cost;
    cost = candidate_cost;
    rep.iterations = it;
    rep.cost_trace.push_back(cost);
    const double previous = rep.cost_trace[rep.cost_trace.size() - 2];
    if (decrease < opts.relative_tolerance * previous + kCostRoundOff) {
      rep.converged = true;
      rep.status = "converged";
      break;
    }
  }
  rep.final_cost = cost;
  sol.knots = std::move(current.knots);
  return sol;
}

}  // namespace ctgp
