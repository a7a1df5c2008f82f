#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ctgp/prior.hpp"
#include "ctgp/sim.hpp"

namespace ctgp {

struct SimSettings {
  /// "urban" (randomized driving profile) or "prior" (sample of the configured prior).
  std::string profile = "urban";
  double duration = 60.0;
  /// Ground-truth sample rate in Hz; also the evaluation rate of the metric.
  double sample_rate = 100.0;
  WorldConfig world;
  /// Noise applied to the ground-truth knots to form the initial estimate. Kept
  /// within the basin of the robust cost at the default measurement noise.
  double init_translation_std = 0.01;
  double init_rotation_std = 0.001;
  double init_velocity_std = 0.01;
};

struct SolverSettings {
  double knot_spacing = 0.1;
  int max_iterations = 50;
  double tolerance = 1e-6;
  bool robust = true;
  int threads = 1;
};

struct MetricSettings {
  std::vector<double> segment_lengths{100.0, 200.0, 300.0, 400.0};
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  PriorOrder order = PriorOrder::WNOJ;
  /// Per-order Q_c diagonals so that `compare` can use a tuned value for each prior.
  Vector6d qc_wnoa = default_qc(PriorOrder::WNOA);
  Vector6d qc_wnoj = default_qc(PriorOrder::WNOJ);
  SimSettings sim;
  SolverSettings solver;
  MetricSettings metric;

  PriorConfig prior(PriorOrder which) const;
  PriorConfig prior() const { return prior(order); }

  /// Throws ConfigError naming the offending field.
  void validate() const;

  static Vector6d default_qc(PriorOrder order);
};

/// Parses and validates a YAML configuration. Every section and key is
/// optional; unknown keys are rejected. Throws ConfigError with the line
/// number for syntax errors, unknown keys and invalid values.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Canonical text form of a configuration (stable key order, round-trip precision).
std::string canonical_config(const ExperimentConfig& cfg);
/// 64-bit FNV-1a hash of canonical_config, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace ctgp
