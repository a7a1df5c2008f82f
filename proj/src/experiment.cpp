#include "ctgp/experiment.hpp"

#include "ctgp/errors.hpp"
#include "ctgp/interp.hpp"

namespace ctgp {
namespace {

// Independent streams derived from the run seed.
std::uint64_t stream(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

enum Stream : std::uint64_t { kProfile, kWorld, kMeasurements, kInitial };

}  // namespace

SimulationOutput simulate(const ExperimentConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  SimulationOutput out;
  if (cfg.sim.profile == "urban") {
    out.ground_truth =
        make_urban_profile(cfg.sim.duration, stream(seed, kProfile), cfg.sim.sample_rate);
  } else {
    Knot initial;
    initial.velocity(0) = 6.0;
    out.ground_truth = sample_prior_trajectory(cfg.order, cfg.prior(), cfg.sim.duration,
                                               1.0 / cfg.sim.sample_rate, stream(seed, kProfile),
                                               initial);
  }
  out.world = make_world(out.ground_truth, cfg.sim.world, stream(seed, kWorld));
  out.measurements =
      synthesize_measurements(out.ground_truth, out.world, stream(seed, kMeasurements));
  return out;
}

std::vector<Knot> initial_knots(const ExperimentConfig& cfg, const GroundTruthTrajectory& gt,
                                PriorOrder order, std::uint64_t seed) {
  const std::vector<Knot> exact = knots_from_ground_truth(gt, cfg.solver.knot_spacing, order);
  // The same stream for both orders keeps the comparison paired.
  return perturb_knots(exact, cfg.sim.init_translation_std, cfg.sim.init_rotation_std,
                       cfg.sim.init_velocity_std, stream(seed, kInitial));
}

std::vector<Pose> sample_estimate(PriorOrder order, const std::vector<Knot>& knots,
                                  const GroundTruthTrajectory& gt) {
  std::vector<Pose> poses;
  poses.reserve(gt.samples.size());
  for (const TrajectorySample& s : gt.samples) {
    poses.push_back(query_trajectory(order, knots, s.t));
  }
  return poses;
}

EstimateOutput run_estimate(const ExperimentConfig& cfg, PriorOrder order,
                            const GroundTruthTrajectory& gt,
                            const std::vector<Measurement>& measurements, std::uint64_t seed) {
  cfg.validate();
  Problem problem;
  problem.prior = cfg.prior(order);
  problem.knots = initial_knots(cfg, gt, order, seed);
  problem.measurements = measurements;
  problem.fixed_knots = {0};
  problem.extrapolation_window = 0.0;

  SolverOptions opts;
  opts.robust = cfg.solver.robust;
  opts.relative_tolerance = cfg.solver.tolerance;
  opts.max_iterations = cfg.solver.max_iterations;
  opts.threads = cfg.solver.threads;

  EstimateOutput out;
  out.order = order;
  out.solution = solve(problem, opts);

  std::vector<Pose> gt_poses;
  gt_poses.reserve(gt.samples.size());
  for (const TrajectorySample& s : gt.samples) gt_poses.push_back(s.pose);
  out.errors = segment_translation_error(sample_estimate(order, out.solution.knots, gt), gt_poses,
                                         cfg.metric.segment_lengths);
  return out;
}

CompareOutput run_compare(const ExperimentConfig& cfg, std::uint64_t seed) {
  CompareOutput out;
  out.sim = simulate(cfg, seed);
  out.wnoa = run_estimate(cfg, PriorOrder::WNOA, out.sim.ground_truth, out.sim.measurements, seed);
  out.wnoj = run_estimate(cfg, PriorOrder::WNOJ, out.sim.ground_truth, out.sim.measurements, seed);
  return out;
}

}  // namespace ctgp
