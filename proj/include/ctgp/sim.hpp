#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

#include "ctgp/factors.hpp"
#include "ctgp/prior.hpp"

namespace ctgp {

/// One dense ground-truth sample. Within [t_k, t_{k+1}) the body acceleration is
/// held constant, so the pose follows exp((s varpi + s^2/2 varpi_dot)^) T_k.
struct TrajectorySample {
  double t = 0.0;
  Pose pose;
  BodyVelocity velocity = BodyVelocity::Zero();
  BodyAcceleration acceleration = BodyAcceleration::Zero();
};

struct GroundTruthTrajectory {
  std::vector<TrajectorySample> samples;
  /// Human-readable description of the generator ("profile:urban seed=3", ...).
  std::string descriptor;

  double start_time() const;
  double end_time() const;
  /// Continuous state at tau (inside [start_time, end_time]); throws InvalidArgument otherwise.
  TrajectorySample state_at(double tau) const;
  Pose pose_at(double tau) const { return state_at(tau).pose; }
};

/// Draws a trajectory from the prior by Euler-Maruyama integration with step dt.
/// White noise of variance Q_c dt per step drives varpi (WNOA) or varpi_dot (WNOJ).
/// `initial` supplies the starting pose, velocity and (WNOJ) acceleration; its t is
/// the start time.
GroundTruthTrajectory sample_prior_trajectory(PriorOrder order, const PriorConfig& cfg,
                                              double duration, double dt, std::uint64_t seed,
                                              const Knot& initial = {});

/// Constant body acceleration held for `duration` seconds.
struct ProfileSegment {
  double duration = 1.0;
  BodyAcceleration acceleration = BodyAcceleration::Zero();
};

/// Integrates a sequence of constant-acceleration segments at `rate` Hz.
/// Segment durations are rounded to whole steps. Throws InvalidArgument for an
/// empty list, non-positive durations or rate.
GroundTruthTrajectory make_piecewise_profile(const std::vector<ProfileSegment>& segments,
                                             const Knot& initial = {}, double rate = 100.0);

/// Randomized planar urban-driving profile: accelerate, cruise, brake and turns
/// entered and left with constant yaw acceleration. Deterministic in `seed`.
std::vector<ProfileSegment> make_urban_segments(double duration, std::uint64_t seed);
GroundTruthTrajectory make_urban_profile(double duration, std::uint64_t seed,
                                         double rate = 100.0);

enum class MeasurementKindChoice { Point, Plane };

struct WorldConfig {
  int landmarks = 200;
  /// Half-width of the box around a random path point that each landmark is drawn from.
  double box_margin = 20.0;
  double sensor_range = 30.0;
  double noise_std = 0.02;
  /// Measurement times are (k + 0.5) / rate, one matched point each.
  double measurement_rate = 500.0;
  MeasurementKindChoice kind = MeasurementKindChoice::Point;
};

struct World {
  std::vector<Vector3d> landmarks;
  WorldConfig config;
};

/// Throws InvalidArgument for non-positive counts, range, rate or negative noise.
World make_world(const GroundTruthTrajectory& gt, const WorldConfig& config, std::uint64_t seed);

/// For each scheduled time, picks a landmark within range of the sensor and
/// records p = T_gt(tau) q + noise. Times with no landmark in range are skipped.
/// Plane measurements use a random unit normal and beta = 1 / noise_std^2.
std::vector<Measurement> synthesize_measurements(const GroundTruthTrajectory& gt,
                                                 const World& world, std::uint64_t seed);

/// Knots at the given spacing from the start time, plus one at the end time if
/// the span is not a whole multiple; acceleration is kept only for WNOJ.
std::vector<Knot> knots_from_ground_truth(const GroundTruthTrajectory& gt, double spacing,
                                          PriorOrder order);

/// Adds seeded Gaussian noise to every knot except the first: pose by a left
/// perturbation (translation / rotation std), velocity additively; accelerations
/// are reset to zero.
std::vector<Knot> perturb_knots(const std::vector<Knot>& knots, double translation_std,
                                double rotation_std, double velocity_std, std::uint64_t seed);

struct BiasExperimentResult {
  Vector6d delta_xi = Vector6d::Zero();
  Vector6d closed_form = Vector6d::Zero();
  double m_denominator = 0.0;
};

/// Reference closed form of the one-step perturbation for forward acceleration a
/// and transformed point (x, y, z), with m = (a^2 - 4x)^2 + 16 (y^2 + z^2 + 2).
/// Returns the 6-vector and optionally writes m.
Vector6d bias_closed_form(double a, const Vector3d& point, double* m = nullptr);

/// The same expression with (a - 4x) in place of (a^2 - 4x), which is what the
/// one-step Gauss-Newton solution actually evaluates to for every a.
Vector6d bias_closed_form_consistent(double a, const Vector3d& point, double* m = nullptr);

/// A robot at rest at t = 0 under constant forward acceleration a observes one
/// noise-free point at t = 1; starting from ground truth with knot 0 fixed, unit
/// prior information and unit measurement covariance, one Gauss-Newton step is
/// taken. `point` is the observed point in the body frame at t = 1 (T_op q).
BiasExperimentResult run_bias_experiment(double a, const Vector3d& point, PriorOrder order);

/// Same setup with constant angular acceleration alpha about z instead.
BiasExperimentResult run_angular_bias_experiment(double alpha, const Vector3d& point,
                                                 PriorOrder order);

}  // namespace ctgp
