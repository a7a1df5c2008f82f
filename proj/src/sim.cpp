#include "ctgp/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <string>

#include "ctgp/errors.hpp"
#include "ctgp/solver.hpp"

namespace ctgp {
namespace {

/// Advances one step with body acceleration held constant.
TrajectorySample advance(const TrajectorySample& s, double dt) {
  TrajectorySample next;
  next.t = s.t + dt;
  next.pose = exp_map(dt * s.velocity + 0.5 * dt * dt * s.acceleration) * s.pose;
  next.velocity = s.velocity + dt * s.acceleration;
  next.acceleration = s.acceleration;
  return next;
}

TrajectorySample from_knot(const Knot& k) { return {k.t, k.pose, k.velocity, k.acceleration}; }

Vector6d gaussian6(std::mt19937_64& rng, const Vector6d& stddev) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector6d v;
  for (int i = 0; i < 6; ++i) v(i) = stddev(i) * normal(rng);
  return v;
}

Vector3d sensor_position(const Pose& T) { return -T.rotation().transpose() * T.translation(); }

}  // namespace

double GroundTruthTrajectory::start_time() const {
  if (samples.empty()) throw InvalidArgument("empty ground-truth trajectory");
  return samples.front().t;
}

double GroundTruthTrajectory::end_time() const {
  if (samples.empty()) throw InvalidArgument("empty ground-truth trajectory");
  return samples.back().t;
}

TrajectorySample GroundTruthTrajectory::state_at(double tau) const {
  if (samples.empty() || tau < samples.front().t || tau > samples.back().t) {
    throw InvalidArgument("time " + std::to_string(tau) + " outside the ground-truth span");
  }
  auto it = std::upper_bound(samples.begin(), samples.end(), tau,
                             [](double t, const TrajectorySample& s) { return t < s.t; });
  const TrajectorySample& base = *(it - 1);
  if (base.t == tau) return base;
  const double s = tau - base.t;
  TrajectorySample out;
  out.t = tau;
  out.pose = exp_map(s * base.velocity + 0.5 * s * s * base.acceleration) * base.pose;
  out.velocity = base.velocity + s * base.acceleration;
  out.acceleration = base.acceleration;
  return out;
}

GroundTruthTrajectory sample_prior_trajectory(PriorOrder order, const PriorConfig& cfg,
                                              double duration, double dt, std::uint64_t seed,
                                              const Knot& initial) {
  if (!(dt > 0.0) || !(duration > 0.0)) {
    throw InvalidArgument("prior sampling needs dt > 0 and duration > 0");
  }
  if ((cfg.qc_diag.array() < 0.0).any()) {
    throw InvalidArgument("prior sampling needs non-negative qc_diag");
  }
  std::mt19937_64 rng(seed);
  const Vector6d step_std = (cfg.qc_diag * dt).cwiseSqrt();
  const auto steps = static_cast<std::size_t>(std::llround(duration / dt));

  GroundTruthTrajectory gt;
  std::ostringstream desc;
  desc << "prior:" << to_string(order) << " seed=" << seed;
  gt.descriptor = desc.str();
  gt.samples.reserve(steps + 1);
  TrajectorySample s = from_knot(initial);
  if (order == PriorOrder::WNOA) s.acceleration.setZero();
  gt.samples.push_back(s);
  for (std::size_t k = 1; k <= steps; ++k) {
    TrajectorySample next = advance(s, dt);
    next.t = initial.t + static_cast<double>(k) * dt;
    if (order == PriorOrder::WNOA) {
      next.velocity += gaussian6(rng, step_std);
    } else {
      next.acceleration += gaussian6(rng, step_std);
    }
    gt.samples.push_back(next);
    s = next;
  }
  return gt;
}

GroundTruthTrajectory make_piecewise_profile(const std::vector<ProfileSegment>& segments,
                                             const Knot& initial, double rate) {
  if (segments.empty()) throw InvalidArgument("profile needs at least one segment");
  if (!(rate > 0.0)) throw InvalidArgument("profile rate must be > 0");
  const double dt = 1.0 / rate;

  GroundTruthTrajectory gt;
  gt.descriptor = "profile:piecewise segments=" + std::to_string(segments.size());
  TrajectorySample s = from_knot(initial);
  gt.samples.push_back(s);
  std::size_t k = 0;
  for (const ProfileSegment& seg : segments) {
    if (!(seg.duration > 0.0)) throw InvalidArgument("profile segment duration must be > 0");
    const auto steps = std::max<long long>(1, std::llround(seg.duration * rate));
    gt.samples.back().acceleration = seg.acceleration;
    s = gt.samples.back();
    for (long long i = 0; i < steps; ++i) {
      TrajectorySample next = advance(s, dt);
      next.t = initial.t + static_cast<double>(++k) * dt;
      gt.samples.push_back(next);
      s = next;
    }
  }
  return gt;
}

std::vector<ProfileSegment> make_urban_segments(double duration, std::uint64_t seed) {
  if (!(duration > 0.0)) throw InvalidArgument("profile duration must be > 0");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  // Durations sit on a 0.1 s grid so that any sampling rate dividing it
  // integrates each segment exactly.
  auto period = [&](double lo, double hi) { return std::round(uniform(lo, hi) * 10.0) / 10.0; };

  std::vector<ProfileSegment> segs;
  double elapsed = 0.0;
  double speed = 6.0;  // matches the initial velocity used by make_urban_profile
  auto push = [&](double dur, double forward, double yaw) {
    ProfileSegment seg;
    seg.duration = dur;
    seg.acceleration(0) = forward;
    seg.acceleration(5) = yaw;
    segs.push_back(seg);
    elapsed += dur;
    speed += forward * dur;
  };

  while (elapsed < duration) {
    const double pick = unit(rng);
    if (pick < 0.3) {
      // Accelerate, keeping the speed below 15 m/s.
      const double dur = period(2.0, 5.0);
      push(dur, std::min(uniform(0.8, 2.0), std::max(0.0, 15.0 - speed) / dur), 0.0);
    } else if (pick < 0.5) {
      push(period(2.0, 5.0), 0.0, 0.0);
    } else if (pick < 0.75) {
      // Brake, keeping at least 3 m/s.
      const double dur = period(1.5, 4.0);
      push(dur, -std::min(uniform(1.0, 3.0), std::max(0.0, speed - 3.0) / dur), 0.0);
    } else {
      // Turn: ramp the yaw rate up, hold it, ramp it back down.
      const double alpha = (unit(rng) < 0.5 ? -1.0 : 1.0) * uniform(0.1, 0.25);
      const double ramp = period(1.0, 2.0);
      push(ramp, 0.0, alpha);
      push(period(1.0, 3.0), 0.0, 0.0);
      push(ramp, 0.0, -alpha);
    }
  }
  // Trim the overshoot so the profile ends exactly at `duration`.
  double excess = elapsed - duration;
  while (excess > 0.0 && !segs.empty()) {
    ProfileSegment& last = segs.back();
    if (last.duration > excess + 1e-9) {
      last.duration -= excess;
      excess = 0.0;
    } else {
      excess -= last.duration;
      segs.pop_back();
    }
  }
  return segs;
}

GroundTruthTrajectory make_urban_profile(double duration, std::uint64_t seed, double rate) {
  Knot initial;
  initial.velocity(0) = 6.0;
  GroundTruthTrajectory gt = make_piecewise_profile(make_urban_segments(duration, seed), initial,
                                                    rate);
  gt.descriptor = "profile:urban seed=" + std::to_string(seed);
  return gt;
}

World make_world(const GroundTruthTrajectory& gt, const WorldConfig& config, std::uint64_t seed) {
  if (config.landmarks < 1) throw InvalidArgument("world needs at least one landmark");
  if (!(config.sensor_range > 0.0)) throw InvalidArgument("sensor range must be > 0");
  if (!(config.measurement_rate > 0.0)) throw InvalidArgument("measurement rate must be > 0");
  if (!(config.noise_std >= 0.0)) throw InvalidArgument("noise std must be >= 0");
  if (!(config.box_margin >= 0.0)) throw InvalidArgument("box margin must be >= 0");
  if (gt.samples.empty()) throw InvalidArgument("world needs a non-empty trajectory");

  // Landmarks fill a corridor: each one is drawn from a cube of half-width
  // `box_margin` centred on a point picked uniformly by arc length along the path.
  std::vector<Vector3d> centres;
  std::vector<double> arc;
  centres.reserve(gt.samples.size());
  arc.reserve(gt.samples.size());
  for (const TrajectorySample& s : gt.samples) {
    const Vector3d c = sensor_position(s.pose);
    arc.push_back(centres.empty() ? 0.0 : arc.back() + (c - centres.back()).norm());
    centres.push_back(c);
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  World world;
  world.config = config;
  world.landmarks.reserve(config.landmarks);
  for (int i = 0; i < config.landmarks; ++i) {
    const double target = unit(rng) * arc.back();
    const auto it = std::lower_bound(arc.begin(), arc.end(), target);
    const Vector3d& centre = centres[std::min<std::size_t>(it - arc.begin(), centres.size() - 1)];
    Vector3d l;
    for (int d = 0; d < 3; ++d) l(d) = centre(d) + config.box_margin * (2.0 * unit(rng) - 1.0);
    world.landmarks.push_back(l);
  }
  return world;
}

std::vector<Measurement> synthesize_measurements(const GroundTruthTrajectory& gt,
                                                 const World& world, std::uint64_t seed) {
  const WorldConfig& cfg = world.config;
  if (world.landmarks.empty()) throw InvalidArgument("world has no landmarks");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double t0 = gt.start_time();
  const double t1 = gt.end_time();
  const double range2 = cfg.sensor_range * cfg.sensor_range;

  std::vector<Measurement> out;
  std::vector<std::size_t> visible;
  for (long long k = 0;; ++k) {
    const double tau = t0 + (static_cast<double>(k) + 0.5) / cfg.measurement_rate;
    if (tau > t1) break;
    const Pose T = gt.pose_at(tau);
    const Vector3d c = sensor_position(T);
    visible.clear();
    for (std::size_t i = 0; i < world.landmarks.size(); ++i) {
      if ((world.landmarks[i] - c).squaredNorm() <= range2) visible.push_back(i);
    }
    if (visible.empty()) continue;
    std::uniform_int_distribution<std::size_t> pick(0, visible.size() - 1);
    const Vector3d& landmark = world.landmarks[visible[pick(rng)]];

    Measurement m;
    m.tau = tau;
    m.q << landmark, 1.0;
    Vector3d noise;
    for (int d = 0; d < 3; ++d) noise(d) = cfg.noise_std * normal(rng);
    m.p = T * m.q;
    m.p.head<3>() += noise;
    const double var = std::max(cfg.noise_std * cfg.noise_std, 1e-12);
    if (cfg.kind == MeasurementKindChoice::Plane) {
      Vector3d n;
      for (int d = 0; d < 3; ++d) n(d) = normal(rng);
      PlaneKind plane;
      plane.n = n.normalized();
      plane.beta = 1.0 / var;
      m.kind = plane;
    } else {
      PointKind point;
      point.R = var * Matrix3d::Identity();
      m.kind = point;
    }
    out.push_back(m);
  }
  return out;
}

std::vector<Knot> knots_from_ground_truth(const GroundTruthTrajectory& gt, double spacing,
                                          PriorOrder order) {
  if (!(spacing > 0.0)) throw InvalidArgument("knot spacing must be > 0");
  const double t0 = gt.start_time();
  const double t1 = gt.end_time();
  const auto count = static_cast<long long>(std::floor((t1 - t0) / spacing + 1e-9));
  std::vector<Knot> knots;
  knots.reserve(count + 1);
  for (long long k = 0; k <= count; ++k) {
    const double t = std::min(t1, t0 + static_cast<double>(k) * spacing);
    const TrajectorySample s = gt.state_at(t);
    Knot knot;
    knot.t = t;
    knot.pose = s.pose;
    knot.velocity = s.velocity;
    if (order == PriorOrder::WNOJ) knot.acceleration = s.acceleration;
    knots.push_back(knot);
  }
  // Close the span with a knot at the final sample time so every time is covered;
  // a short remainder moves the last knot instead of creating a tiny interval.
  if (t1 - knots.back().t > 1e-9) {
    if (knots.size() > 1 && t1 - knots.back().t < 0.5 * spacing) knots.pop_back();
    const TrajectorySample s = gt.samples.back();
    Knot knot;
    knot.t = t1;
    knot.pose = s.pose;
    knot.velocity = s.velocity;
    if (order == PriorOrder::WNOJ) knot.acceleration = s.acceleration;
    knots.push_back(knot);
  }
  return knots;
}

std::vector<Knot> perturb_knots(const std::vector<Knot>& knots, double translation_std,
                                double rotation_std, double velocity_std, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Vector6d pose_std;
  pose_std << Vector3d::Constant(translation_std), Vector3d::Constant(rotation_std);
  const Vector6d vel_std = Vector6d::Constant(velocity_std);
  std::vector<Knot> out = knots;
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k].acceleration.setZero();
    if (k == 0) {
      out[k].acceleration = knots[k].acceleration;
      continue;
    }
    out[k].pose = exp_map(gaussian6(rng, pose_std)) * knots[k].pose;
    out[k].velocity += gaussian6(rng, vel_std);
  }
  return out;
}

Vector6d bias_closed_form(double a, const Vector3d& point, double* m_out) {
  const double x = point(0), y = point(1), z = point(2);
  const double r = a * a - 4.0 * x;
  const double m = r * r + 16.0 * (y * y + z * z + 2.0);
  if (m_out) *m_out = m;
  Vector6d d;
  d << -0.25 * a * (r * r + 32.0 * (y * y + z * z + 1.0)) / m, a * y * (a + 4.0 * x) / m,
      a * z * (a + 4.0 * x) / m, 0.0, 8.0 * a * z / m, -8.0 * a * y / m;
  return d;
}

Vector6d bias_closed_form_consistent(double a, const Vector3d& point, double* m_out) {
  const double x = point(0), y = point(1), z = point(2);
  const double r = a - 4.0 * x;
  const double m = r * r + 16.0 * (y * y + z * z + 2.0);
  if (m_out) *m_out = m;
  Vector6d d;
  d << -0.25 * a * (r * r + 32.0 * (y * y + z * z + 1.0)) / m, a * y * (a + 4.0 * x) / m,
      a * z * (a + 4.0 * x) / m, 0.0, 8.0 * a * z / m, -8.0 * a * y / m;
  return d;
}

namespace {

BiasExperimentResult one_step_experiment(const BodyAcceleration& accel, const Vector3d& point,
                                         PriorOrder order) {
  // Ground truth at t = 1 after starting from rest: xi = a / 2, varpi = a.
  Problem problem;
  problem.prior.order = order;
  Knot k0;
  k0.t = 0.0;
  Knot k1;
  k1.t = 1.0;
  k1.pose = exp_map(0.5 * accel);
  k1.velocity = accel;
  if (order == PriorOrder::WNOJ) {
    k0.acceleration = accel;
    k1.acceleration = accel;
  }
  problem.knots = {k0, k1};
  problem.fixed_knots = {0};
  problem.prior_information =
      Eigen::MatrixXd::Identity(state_dim(order), state_dim(order));

  Measurement m;
  m.tau = 1.0;
  m.p << point, 1.0;
  m.q = k1.pose.inverse() * m.p;
  m.kind = PointKind{};
  problem.measurements = {m};

  SolverOptions opts;
  opts.robust = false;
  const StepResult step = gauss_newton_step(problem, opts);

  BiasExperimentResult result;
  result.delta_xi = step.report.delta.segment<6>(state_dim(order));
  return result;
}

}  // namespace

BiasExperimentResult run_bias_experiment(double a, const Vector3d& point, PriorOrder order) {
  BodyAcceleration accel = BodyAcceleration::Zero();
  accel(0) = a;
  BiasExperimentResult result = one_step_experiment(accel, point, order);
  double m = 0.0;
  const Vector6d closed = bias_closed_form(a, point, &m);
  result.m_denominator = m;
  if (order == PriorOrder::WNOA) result.closed_form = closed;
  return result;
}

BiasExperimentResult run_angular_bias_experiment(double alpha, const Vector3d& point,
                                                 PriorOrder order) {
  BodyAcceleration accel = BodyAcceleration::Zero();
  accel(5) = alpha;
  return one_step_experiment(accel, point, order);
}

}  // namespace ctgp
