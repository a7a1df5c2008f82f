#pragma once

#include <cstdint>
#include <vector>

#include "ctgp/config.hpp"
#include "ctgp/metrics.hpp"
#include "ctgp/sim.hpp"
#include "ctgp/solver.hpp"

namespace ctgp {

struct SimulationOutput {
  GroundTruthTrajectory ground_truth;
  World world;
  std::vector<Measurement> measurements;
};

/// Ground truth, landmark world and measurements for one seed.
SimulationOutput simulate(const ExperimentConfig& cfg, std::uint64_t seed);

struct EstimateOutput {
  PriorOrder order = PriorOrder::WNOA;
  Solution solution;
  SegmentErrors errors;
};

/// Initial knots for one prior order: ground truth at the knot spacing with
/// seeded perturbations (knot 0 is left exact and held fixed by the solver).
std::vector<Knot> initial_knots(const ExperimentConfig& cfg, const GroundTruthTrajectory& gt,
                                PriorOrder order, std::uint64_t seed);

/// Estimated poses at every ground-truth sample time.
std::vector<Pose> sample_estimate(PriorOrder order, const std::vector<Knot>& knots,
                                  const GroundTruthTrajectory& gt);

/// Solves the batch problem for one prior order and scores it against ground truth.
EstimateOutput run_estimate(const ExperimentConfig& cfg, PriorOrder order,
                            const GroundTruthTrajectory& gt,
                            const std::vector<Measurement>& measurements, std::uint64_t seed);

struct CompareOutput {
  SimulationOutput sim;
  EstimateOutput wnoa;
  EstimateOutput wnoj;
};

/// Runs both priors on one shared measurement set and initial-guess noise.
CompareOutput run_compare(const ExperimentConfig& cfg, std::uint64_t seed);

}  // namespace ctgp
