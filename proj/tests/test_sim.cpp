#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>

#include "ctgp/errors.hpp"
#include "ctgp/sim.hpp"
#include "oracles.hpp"

using namespace ctgp;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

Vector6d vec6(double a, double b, double c, double d, double e, double f) {
  Vector6d v;
  v << a, b, c, d, e, f;
  return v;
}

Vector3d sensor_position(const Pose& t) { return -t.rotation().transpose() * t.translation(); }

/// One Gauss-Newton step of the single-measurement bias problem, assembled
/// densely: knot 0 fixed at rest, knot 1 at ground truth, unit prior
/// information, unit measurement covariance, constant body acceleration `accel`.
Vector6d hand_assembled_bias_step(const Vector6d& accel, const Vector3d& point) {
  const Pose t1 = exp_map(0.5 * accel);
  const Vector4d p(point(0), point(1), point(2), 1.0);
  const Vector4d q = t1.inverse() * p;
  const Vector6d w0 = Vector6d::Zero();
  const auto residual = [&](const VectorXd& d) {
    const Pose t = exp_map(Vector6d(d.head<6>())) * t1;
    const Vector6d w1 = accel + d.tail<6>();
    const Vector6d xi = log_map(t);  // T_0 = I
    VectorXd r(15);
    r.head<6>() = xi - w0;
    r.segment<6>(6) = inv_left_jacobian(xi) * w1 - w0;
    r.tail<3>() = (p - t * q).head<3>();
    return r;
  };
  const MatrixXd jac = oracle::numeric_jacobian(residual, VectorXd::Zero(12), 1e-7);
  const VectorXd r0 = residual(VectorXd::Zero(12));
  const VectorXd delta = (jac.transpose() * jac).ldlt().solve(-jac.transpose() * r0);
  return delta.head<6>();
}

}  // namespace

TEST(SamplePrior, ZeroNoiseWnoaIsConstantVelocity) {
  PriorConfig cfg;
  cfg.qc_diag.setZero();
  Knot start;
  start.pose = exp_map(vec6(1, 2, 3, 0.1, 0.2, 0.3));
  start.velocity = vec6(3, 0.2, 0, 0.05, 0, 0.4);
  const GroundTruthTrajectory gt = sample_prior_trajectory(PriorOrder::WNOA, cfg, 2.0, 0.01, 1, start);
  ASSERT_EQ(gt.samples.size(), 201u);
  for (const TrajectorySample& s : gt.samples) {
    EXPECT_LT(log_map(s.pose * (exp_map(s.t * start.velocity) * start.pose).inverse()).norm(), 1e-9);
    EXPECT_EQ(s.velocity, start.velocity);
  }
}

TEST(SamplePrior, ZeroNoiseWnojStraightLineKinematics) {
  PriorConfig cfg;
  cfg.qc_diag.setZero();
  const double v0 = 2.0, a = 1.5;
  Knot start;
  start.velocity = vec6(v0, 0, 0, 0, 0, 0);
  start.acceleration = vec6(a, 0, 0, 0, 0, 0);
  const GroundTruthTrajectory gt = sample_prior_trajectory(PriorOrder::WNOJ, cfg, 3.0, 0.01, 1, start);
  for (const TrajectorySample& s : gt.samples) {
    EXPECT_NEAR(s.pose.translation()(0), v0 * s.t + 0.5 * a * s.t * s.t, 1e-9);
    EXPECT_NEAR(s.velocity(0), v0 + a * s.t, 1e-9);
    EXPECT_LT(s.pose.translation().tail<2>().norm(), 1e-12);
  }
}

TEST(SamplePrior, DeterministicInSeed) {
  const PriorConfig cfg;
  const GroundTruthTrajectory a = sample_prior_trajectory(PriorOrder::WNOJ, cfg, 1.0, 0.01, 42);
  const GroundTruthTrajectory b = sample_prior_trajectory(PriorOrder::WNOJ, cfg, 1.0, 0.01, 42);
  const GroundTruthTrajectory c = sample_prior_trajectory(PriorOrder::WNOJ, cfg, 1.0, 0.01, 43);
  ASSERT_EQ(a.samples.size(), b.samples.size());
  for (std::size_t k = 0; k < a.samples.size(); ++k) {
    EXPECT_EQ(a.samples[k].pose.matrix(), b.samples[k].pose.matrix());
    EXPECT_EQ(a.samples[k].acceleration, b.samples[k].acceleration);
  }
  EXPECT_NE(a.samples.back().acceleration, c.samples.back().acceleration);
}

TEST(SamplePrior, RejectsBadArguments) {
  const PriorConfig cfg;
  EXPECT_THROW(sample_prior_trajectory(PriorOrder::WNOA, cfg, 1.0, 0.0, 1), InvalidArgument);
  EXPECT_THROW(sample_prior_trajectory(PriorOrder::WNOA, cfg, -1.0, 0.1, 1), InvalidArgument);
  PriorConfig neg;
  neg.qc_diag(0) = -1.0;
  EXPECT_THROW(sample_prior_trajectory(PriorOrder::WNOA, neg, 1.0, 0.1, 1), InvalidArgument);
}

TEST(PiecewiseProfile, ConstantVelocityLine) {
  Knot start;
  start.velocity(0) = 10.0;
  const GroundTruthTrajectory gt = make_piecewise_profile({ProfileSegment{3.0, Vector6d::Zero()}}, start);
  for (const TrajectorySample& s : gt.samples) {
    EXPECT_NEAR(s.pose.translation()(0), 10.0 * s.t, 1e-9);
  }
  EXPECT_NEAR(gt.end_time(), 3.0, 1e-12);
}

TEST(PiecewiseProfile, AccelerateFromRest) {
  const GroundTruthTrajectory gt =
      make_piecewise_profile({ProfileSegment{5.0, vec6(2, 0, 0, 0, 0, 0)}});
  EXPECT_NEAR(gt.samples.back().velocity(0), 10.0, 1e-9);
  EXPECT_NEAR(gt.samples.back().pose.translation().norm(), 25.0, 1e-9);
}

TEST(PiecewiseProfile, ConstantYawRateIsCircularArc) {
  const double v = 5.0, omega = 0.5;
  Knot start;
  start.velocity = vec6(v, 0, 0, 0, 0, omega);
  const GroundTruthTrajectory gt = make_piecewise_profile({ProfileSegment{4.0, Vector6d::Zero()}}, start);
  const double radius = v / omega;
  const Vector3d c0 = sensor_position(gt.samples.front().pose);
  for (const TrajectorySample& s : gt.samples) {
    const double chord = (sensor_position(s.pose) - c0).norm();
    EXPECT_NEAR(chord, 2.0 * radius * std::sin(omega * s.t / 2.0), 1e-9);
  }
}

TEST(PiecewiseProfile, RejectsBadSegments) {
  EXPECT_THROW(make_piecewise_profile({}), InvalidArgument);
  EXPECT_THROW(make_piecewise_profile({ProfileSegment{0.0, Vector6d::Zero()}}), InvalidArgument);
  EXPECT_THROW(make_piecewise_profile({ProfileSegment{1.0, Vector6d::Zero()}}, Knot{}, 0.0),
               InvalidArgument);
}

TEST(GroundTruth, StateAtMatchesSamplesAndIsContinuous) {
  const GroundTruthTrajectory gt = make_urban_profile(20.0, 3);
  for (std::size_t k = 0; k < gt.samples.size(); k += 97) {
    const TrajectorySample s = gt.state_at(gt.samples[k].t);
    EXPECT_LT(log_map(s.pose * gt.samples[k].pose.inverse()).norm(), 1e-12);
  }
  const double tau = 7.123;
  const Pose a = gt.pose_at(tau), b = gt.pose_at(tau + 1e-7);
  EXPECT_LT(log_map(b * a.inverse()).norm(), 1e-5);
  EXPECT_THROW(gt.state_at(-0.1), InvalidArgument);
  EXPECT_THROW(gt.state_at(gt.end_time() + 0.1), InvalidArgument);
}

TEST(UrbanProfile, DeterministicPlanarAndBounded) {
  const std::vector<ProfileSegment> a = make_urban_segments(60.0, 5);
  const std::vector<ProfileSegment> b = make_urban_segments(60.0, 5);
  ASSERT_EQ(a.size(), b.size());
  double total = 0.0;
  bool turns = false, brakes = false, accelerates = false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].acceleration, b[k].acceleration);
    total += a[k].duration;
    EXPECT_EQ(a[k].acceleration(1), 0.0);
    EXPECT_EQ(a[k].acceleration(2), 0.0);
    EXPECT_EQ(a[k].acceleration(3), 0.0);
    EXPECT_EQ(a[k].acceleration(4), 0.0);
    turns |= a[k].acceleration(5) != 0.0;
    brakes |= a[k].acceleration(0) < 0.0;
    accelerates |= a[k].acceleration(0) > 0.0;
  }
  EXPECT_NEAR(total, 60.0, 1e-9);
  EXPECT_TRUE(turns && brakes && accelerates);

  const GroundTruthTrajectory gt = make_urban_profile(60.0, 5);
  for (const TrajectorySample& s : gt.samples) {
    EXPECT_GE(s.velocity(0), 3.0 - 1e-9);
    EXPECT_LE(s.velocity(0), 15.0 + 1e-9);
    EXPECT_LT(std::abs(sensor_position(s.pose)(2)), 1e-9);
  }
}

TEST(World, LandmarksNearPathAndValidation) {
  const GroundTruthTrajectory gt = make_urban_profile(30.0, 2);
  WorldConfig wc;
  const World world = make_world(gt, wc, 9);
  ASSERT_EQ(world.landmarks.size(), 200u);
  for (const Vector3d& l : world.landmarks) {
    double best = 1e300;
    for (std::size_t k = 0; k < gt.samples.size(); k += 5) {
      best = std::min(best, (sensor_position(gt.samples[k].pose) - l).lpNorm<Eigen::Infinity>());
    }
    EXPECT_LE(best, wc.box_margin + 1.0);
  }
  WorldConfig bad = wc;
  bad.landmarks = 0;
  EXPECT_THROW(make_world(gt, bad, 1), InvalidArgument);
  bad = wc;
  bad.sensor_range = 0.0;
  EXPECT_THROW(make_world(gt, bad, 1), InvalidArgument);
  bad = wc;
  bad.noise_std = -1.0;
  EXPECT_THROW(make_world(gt, bad, 1), InvalidArgument);
}

TEST(Measurements, ZeroNoiseIdentityTrajectory) {
  const GroundTruthTrajectory gt = make_piecewise_profile({ProfileSegment{1.0, Vector6d::Zero()}});
  WorldConfig wc;
  wc.noise_std = 0.0;
  wc.landmarks = 50;
  const World world = make_world(gt, wc, 1);
  const std::vector<Measurement> ms = synthesize_measurements(gt, world, 2);
  ASSERT_FALSE(ms.empty());
  for (const Measurement& m : ms) EXPECT_LT((m.p - m.q).norm(), 1e-15);
}

TEST(Measurements, ZeroNoiseInvertsModelAndUsesScheduledTimes) {
  const GroundTruthTrajectory gt = make_urban_profile(10.0, 4);
  WorldConfig wc;
  wc.noise_std = 0.0;
  const World world = make_world(gt, wc, 1);
  const std::vector<Measurement> ms = synthesize_measurements(gt, world, 2);
  EXPECT_GT(ms.size(), 4900u);
  for (const Measurement& m : ms) {
    EXPECT_LT(measurement_error(m, gt.pose_at(m.tau)).norm(), 1e-9);
    const double slot = (m.tau - gt.start_time()) * wc.measurement_rate - 0.5;
    EXPECT_NEAR(slot, std::round(slot), 1e-6);
    EXPECT_LE((gt.pose_at(m.tau) * m.q).head<3>().norm(), wc.sensor_range + 1e-9);
  }
}

TEST(Measurements, NoiseVarianceMatchesChiSquareMean) {
  const GroundTruthTrajectory gt = make_urban_profile(20.0, 6);
  WorldConfig wc;
  wc.noise_std = 0.05;
  const World world = make_world(gt, wc, 7);
  const std::vector<Measurement> ms = synthesize_measurements(gt, world, 8);
  ASSERT_GE(ms.size(), 9900u);
  double sum = 0.0;
  for (const Measurement& m : ms) sum += measurement_error(m, gt.pose_at(m.tau)).squaredNorm();
  const double mean = sum / static_cast<double>(ms.size());
  EXPECT_NEAR(mean, 3.0 * wc.noise_std * wc.noise_std, 0.05 * 3.0 * wc.noise_std * wc.noise_std);
  const auto& kind = std::get<PointKind>(ms.front().kind);
  EXPECT_TRUE(kind.R.isApprox(Matrix3d::Identity() * wc.noise_std * wc.noise_std));
}

TEST(Measurements, PlaneKind) {
  const GroundTruthTrajectory gt = make_urban_profile(5.0, 6);
  WorldConfig wc;
  wc.kind = MeasurementKindChoice::Plane;
  const World world = make_world(gt, wc, 7);
  const std::vector<Measurement> ms = synthesize_measurements(gt, world, 8);
  ASSERT_FALSE(ms.empty());
  for (const Measurement& m : ms) {
    const auto& plane = std::get<PlaneKind>(m.kind);
    EXPECT_NEAR(plane.n.norm(), 1.0, 1e-12);
    EXPECT_NEAR(plane.beta, 1.0 / (wc.noise_std * wc.noise_std), 1e-6);
  }
}

TEST(Knots, FromGroundTruth) {
  const GroundTruthTrajectory gt = make_urban_profile(1.0, 2);
  const std::vector<Knot> wnoa = knots_from_ground_truth(gt, 0.1, PriorOrder::WNOA);
  const std::vector<Knot> wnoj = knots_from_ground_truth(gt, 0.1, PriorOrder::WNOJ);
  ASSERT_EQ(wnoa.size(), 11u);
  for (std::size_t k = 0; k < wnoa.size(); ++k) {
    EXPECT_NEAR(wnoa[k].t, 0.1 * k, 1e-12);
    EXPECT_LT(log_map(wnoa[k].pose * gt.pose_at(wnoa[k].t).inverse()).norm(), 1e-12);
    EXPECT_TRUE(wnoa[k].acceleration.isZero(0.0));
    EXPECT_EQ(wnoj[k].acceleration, gt.state_at(wnoj[k].t).acceleration);
  }
  const GroundTruthTrajectory longer = make_urban_profile(1.07, 2);
  const std::vector<Knot> ks = knots_from_ground_truth(longer, 0.1, PriorOrder::WNOA);
  EXPECT_NEAR(ks.back().t, longer.end_time(), 1e-12);
  EXPECT_THROW(knots_from_ground_truth(gt, 0.0, PriorOrder::WNOA), InvalidArgument);
}

TEST(Knots, PerturbLeavesFirstKnotAndZeroesAcceleration) {
  const GroundTruthTrajectory gt = make_urban_profile(2.0, 2);
  const std::vector<Knot> exact = knots_from_ground_truth(gt, 0.1, PriorOrder::WNOJ);
  const std::vector<Knot> a = perturb_knots(exact, 0.1, 0.01, 0.1, 3);
  const std::vector<Knot> b = perturb_knots(exact, 0.1, 0.01, 0.1, 3);
  EXPECT_EQ(a[0].pose.matrix(), exact[0].pose.matrix());
  EXPECT_EQ(a[0].velocity, exact[0].velocity);
  for (std::size_t k = 1; k < a.size(); ++k) {
    EXPECT_EQ(a[k].pose.matrix(), b[k].pose.matrix());
    EXPECT_NE(a[k].pose.matrix(), exact[k].pose.matrix());
    EXPECT_TRUE(a[k].acceleration.isZero(0.0));
    EXPECT_EQ(a[k].t, exact[k].t);
  }
}

TEST(BiasExperiment, ZeroAccelerationGivesZeroPerturbation) {
  for (PriorOrder order : {PriorOrder::WNOA, PriorOrder::WNOJ}) {
    const BiasExperimentResult r = run_bias_experiment(0.0, Vector3d(1, -1, 0.5), order);
    EXPECT_LT(r.delta_xi.norm(), 1e-12);
  }
}

TEST(BiasExperiment, WnoaAtOriginPoint) {
  const BiasExperimentResult r = run_bias_experiment(1.0, Vector3d::Zero(), PriorOrder::WNOA);
  EXPECT_NEAR(r.m_denominator, 33.0, 1e-12);
  EXPECT_LT((r.delta_xi - vec6(-0.25, 0, 0, 0, 0, 0)).norm(), 1e-9);
  EXPECT_LT((r.closed_form - vec6(-0.25, 0, 0, 0, 0, 0)).norm(), 1e-15);
}

TEST(BiasExperiment, WnoaLateralPointShowsBias) {
  const BiasExperimentResult r = run_bias_experiment(1.0, Vector3d(0, 1, 0), PriorOrder::WNOA);
  const Vector6d expected = vec6(-65.0 / 196.0, 1.0 / 49.0, 0, 0, 0, -8.0 / 49.0);
  EXPECT_NEAR(r.m_denominator, 49.0, 1e-12);
  EXPECT_LT((r.delta_xi - expected).norm(), 1e-9);
  EXPECT_LT((r.closed_form - expected).norm(), 1e-15);
}

TEST(BiasExperiment, WnojHasNoBias) {
  for (double a : {0.5, 1.0, 2.0}) {
    const BiasExperimentResult r = run_bias_experiment(a, Vector3d(1, 1, -1), PriorOrder::WNOJ);
    EXPECT_LT(r.delta_xi.norm(), 1e-10);
    EXPECT_TRUE(r.closed_form.isZero(0.0));
  }
}

TEST(BiasExperiment, MatchesHandAssembledGaussNewton) {
  for (double a : {0.5, 1.0, 2.0}) {
    for (const Vector3d& point : {Vector3d(1, -1, 0.5), Vector3d(0, 1, 0), Vector3d(-1, 0, 1)}) {
      const BiasExperimentResult r = run_bias_experiment(a, point, PriorOrder::WNOA);
      const Vector6d oracle_step = hand_assembled_bias_step(vec6(a, 0, 0, 0, 0, 0), point);
      EXPECT_LT((r.delta_xi - oracle_step).norm(), 1e-7) << "a " << a;
      // The (a - 4x) form reproduces the one-step solution for every a; the
      // (a^2 - 4x) form coincides with it only at a = 1 (or x = 0 and a^2 = a).
      EXPECT_LT((r.delta_xi - bias_closed_form_consistent(a, point)).norm(), 1e-9) << "a " << a;
    }
  }
}

TEST(BiasExperiment, ClosedFormsAgreeAtUnitAcceleration) {
  const Vector3d point(1, -1, 1);
  double m_printed = 0.0, m_consistent = 0.0;
  EXPECT_LT((bias_closed_form(1.0, point, &m_printed) -
             bias_closed_form_consistent(1.0, point, &m_consistent))
                .norm(),
            1e-15);
  EXPECT_EQ(m_printed, m_consistent);
  EXPECT_GT((bias_closed_form(2.0, point) - bias_closed_form_consistent(2.0, point)).norm(), 1e-3);
}

TEST(BiasExperiment, AngularAcceleration) {
  const Vector3d point(2, 1, 0);
  const BiasExperimentResult wnoa = run_angular_bias_experiment(0.5, point, PriorOrder::WNOA);
  EXPECT_GT(wnoa.delta_xi.norm(), 1e-3);
  EXPECT_LT((wnoa.delta_xi - hand_assembled_bias_step(vec6(0, 0, 0, 0, 0, 0.5), point)).norm(), 1e-7);
  const BiasExperimentResult wnoj = run_angular_bias_experiment(0.5, point, PriorOrder::WNOJ);
  EXPECT_LT(wnoj.delta_xi.norm(), 1e-10);
}
