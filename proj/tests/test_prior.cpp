#include <gtest/gtest.h>

#include <random>

#include "ctgp/errors.hpp"
#include "ctgp/prior.hpp"
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

MatrixXd blocks(const std::vector<std::vector<double>>& shape) {
  MatrixXd s(shape.size(), shape.size());
  for (std::size_t r = 0; r < shape.size(); ++r)
    for (std::size_t c = 0; c < shape.size(); ++c) s(r, c) = shape[r][c];
  return oracle::expand_identity(s);
}

PriorConfig config(PriorOrder order, const Vector6d& qc = Vector6d::Ones()) {
  PriorConfig cfg;
  cfg.order = order;
  cfg.qc_diag = qc;
  return cfg;
}

/// Applies a stacked perturbation [pose; vel; (acc)] to a knot.
Knot perturbed(const Knot& k, const VectorXd& d, PriorOrder order) {
  Knot out = k;
  out.pose = exp_map(d.segment<6>(0)) * k.pose;
  out.velocity += d.segment<6>(6);
  if (order == PriorOrder::WNOJ) out.acceleration += d.segment<6>(12);
  return out;
}

/// Random knot pair near the prior mean: knot_j follows the constant-velocity
/// (or constant-acceleration) motion from knot_i plus a small disturbance.
std::pair<Knot, Knot> random_pair(std::mt19937_64& rng, PriorOrder order, double dt) {
  Knot ki;
  ki.t = 1.0;
  ki.pose = exp_map(oracle::random_vec6(rng, 2.0));
  ki.velocity = oracle::random_vec6(rng, 1.0);
  if (order == PriorOrder::WNOJ) ki.acceleration = oracle::random_vec6(rng, 0.5);
  Knot kj;
  kj.t = ki.t + dt;
  kj.pose = exp_map(dt * ki.velocity + 0.5 * dt * dt * ki.acceleration +
                    oracle::random_vec6(rng, 0.05)) *
            ki.pose;
  kj.velocity = ki.velocity + dt * ki.acceleration + oracle::random_vec6(rng, 0.1);
  if (order == PriorOrder::WNOJ) kj.acceleration = ki.acceleration + oracle::random_vec6(rng, 0.1);
  return {ki, kj};
}

/// Central-difference Jacobians of the prior error over both knots' perturbations.
MatrixXd numeric_prior_jacobian(PriorOrder order, const Knot& ki, const Knot& kj,
                                const PriorConfig& cfg) {
  const int n = state_dim(order);
  return oracle::numeric_jacobian(
      [&](const VectorXd& d) {
        return prior_error(order, perturbed(ki, d.head(n), order), perturbed(kj, d.tail(n), order),
                           cfg)
            .e;
      },
      VectorXd::Zero(2 * n));
}

MatrixXd stacked(const PriorErrorJacobians& j) {
  const Eigen::Index rows = j.knot_i.pose.rows();
  const Eigen::Index nb = j.knot_i.acceleration.cols() > 0 ? 3 : 2;
  MatrixXd out(rows, 12 * nb);
  Eigen::Index col = 0;
  for (const KnotJacobian* k : {&j.knot_i, &j.knot_j}) {
    out.middleCols(col, 6) = k->pose;
    out.middleCols(col + 6, 6) = k->velocity;
    if (nb == 3) out.middleCols(col + 12, 6) = k->acceleration;
    col += 6 * nb;
  }
  return out;
}

}  // namespace

TEST(PriorOrder, ParseAndPrint) {
  EXPECT_EQ(parse_prior_order("wnoa"), PriorOrder::WNOA);
  EXPECT_EQ(parse_prior_order("WNOJ"), PriorOrder::WNOJ);
  EXPECT_EQ(to_string(PriorOrder::WNOJ), "wnoj");
  EXPECT_THROW(parse_prior_order("wnox"), InvalidArgument);
  EXPECT_EQ(state_dim(PriorOrder::WNOA), 12);
  EXPECT_EQ(state_dim(PriorOrder::WNOJ), 18);
}

TEST(PriorConfig, RejectsNonPositiveQc) {
  PriorConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.qc_diag(3) = 0.0;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg.qc_diag(3) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(cfg.validate(), InvalidArgument);
}

TEST(Transition, ZeroIsIdentity) {
  EXPECT_TRUE(transition(PriorOrder::WNOA, 0.0).isIdentity(0.0));
  EXPECT_TRUE(transition(PriorOrder::WNOJ, 0.0).isIdentity(0.0));
  EXPECT_THROW(transition(PriorOrder::WNOA, -0.1), InvalidArgument);
}

TEST(Transition, WnojAtTwoSeconds) {
  EXPECT_EQ(transition(PriorOrder::WNOJ, 2.0), blocks({{1, 2, 2}, {0, 1, 2}, {0, 0, 1}}));
  EXPECT_EQ(transition(PriorOrder::WNOA, 2.0), blocks({{1, 2}, {0, 1}}));
}

TEST(Transition, MatchesMatrixExponentialAndSemigroup) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (PriorOrder order : {PriorOrder::WNOA, PriorOrder::WNOJ}) {
    for (int k = 0; k < 20; ++k) {
      const double a = u(rng), b = u(rng);
      EXPECT_LT((transition(order, a + b) - transition(order, a) * transition(order, b)).norm(),
                1e-12 * (1 + (a + b) * (a + b)));
      EXPECT_LT((transition(order, a) - oracle::transition_expm(num_blocks(order), a)).norm(), 1e-10);
    }
  }
}

TEST(ProcessCov, UnitIntervalBlocks) {
  const PriorConfig cfg;
  EXPECT_LT((process_cov(PriorOrder::WNOJ, 1.0, cfg) -
             blocks({{1. / 20, 1. / 8, 1. / 6}, {1. / 8, 1. / 3, 1. / 2}, {1. / 6, 1. / 2, 1}}))
                .norm(),
            1e-15);
  EXPECT_LT((process_cov(PriorOrder::WNOA, 1.0, cfg) - blocks({{1. / 3, 1. / 2}, {1. / 2, 1}})).norm(),
            1e-15);
  EXPECT_THROW(process_cov(PriorOrder::WNOA, 0.0, cfg), InvalidArgument);
}

TEST(ProcessCov, MatchesQuadrature) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.2, 3.0);
  for (PriorOrder order : {PriorOrder::WNOA, PriorOrder::WNOJ}) {
    for (double dt : {0.01, 0.37, 1.0, 10.0}) {
      Vector6d qc;
      for (int k = 0; k < 6; ++k) qc(k) = u(rng);
      const MatrixXd quad = oracle::process_cov_quadrature(num_blocks(order), dt, qc, 200);
      const MatrixXd cov = process_cov(order, dt, config(order, qc));
      EXPECT_LT(oracle::relative_error(cov, quad, 0.0), 1e-6) << to_string(order) << " dt " << dt;
      EXPECT_TRUE(cov.isApprox(cov.transpose(), 0.0));
    }
  }
}

TEST(ProcessCovInv, UnitIntervalBlocks) {
  const PriorConfig cfg;
  EXPECT_EQ(process_cov_inv(PriorOrder::WNOA, 1.0, cfg), blocks({{12, -6}, {-6, 4}}));
  EXPECT_EQ(process_cov_inv(PriorOrder::WNOJ, 1.0, cfg),
            blocks({{720, -360, 60}, {-360, 192, -36}, {60, -36, 9}}));
  EXPECT_THROW(process_cov_inv(PriorOrder::WNOJ, -1.0, cfg), InvalidArgument);
}

TEST(ProcessCovInv, InverseConsistency) {
  const Vector6d qc = vec6(0.5, 2.0, 3.0, 0.1, 0.7, 1.3);
  for (PriorOrder order : {PriorOrder::WNOA, PriorOrder::WNOJ}) {
    for (double dt : {0.01, 0.1, 1.0, 10.0}) {
      const MatrixXd prod = process_cov_inv(order, dt, config(order, qc)) *
                            process_cov(order, dt, config(order, qc));
      EXPECT_LT((prod - MatrixXd::Identity(prod.rows(), prod.cols())).cwiseAbs().maxCoeff(), 1e-8)
          << to_string(order) << " dt " << dt;
      Eigen::LLT<MatrixXd> llt(process_cov_inv(order, dt, config(order, qc)));
      EXPECT_EQ(llt.info(), Eigen::Success);
    }
  }
}

TEST(LocalState, IdenticalKnots) {
  Knot ki, kj;
  kj.t = 1.0;
  ki.velocity = kj.velocity = vec6(1, 2, 3, 0.1, 0.2, 0.3);
  const auto [gi, gj] = local_state_at_knots(PriorOrder::WNOJ, ki, kj);
  VectorXd expected = VectorXd::Zero(18);
  expected.segment<6>(6) = ki.velocity;
  EXPECT_LT((gj - expected).norm(), 1e-14);
  EXPECT_TRUE(gi.head<6>().isZero(0.0));
  EXPECT_EQ(VectorXd(gi.segment<6>(6)), VectorXd(ki.velocity));
}

TEST(LocalState, PureTranslationUsesTerminatingSeries) {
  Knot ki, kj;
  kj.t = 1.0;
  const Vector6d xi = vec6(1.0, -0.5, 0.3, 0, 0, 0);
  kj.pose = exp_map(xi);
  kj.velocity = vec6(0.3, 0.2, 0.1, 0.05, -0.02, 0.04);
  const auto [gi, gj] = local_state_at_knots(PriorOrder::WNOA, ki, kj);
  const Vector6d expected = (Matrix6d::Identity() - 0.5 * curly_hat(xi)) * kj.velocity;
  EXPECT_LT((gj.segment<6>(6) - expected).norm(), 1e-14);
  EXPECT_LT((gj.head<6>() - xi).norm(), 1e-14);
}

TEST(LocalState, ZeroVelocityAndAcceleration) {
  Knot ki, kj;
  kj.t = 1.0;
  kj.pose = exp_map(vec6(1, 2, 3, 0.1, 0.2, 0.3));
  const auto [gi, gj] = local_state_at_knots(PriorOrder::WNOJ, ki, kj);
  EXPECT_TRUE(gj.tail<12>().isZero(0.0));
  EXPECT_TRUE(gi.isZero(0.0));
}

TEST(PriorError, ZeroOnConstantVelocity) {
  Knot ki, kj;
  ki.t = 2.0;
  kj.t = 2.5;
  ki.pose = exp_map(vec6(1, 2, 3, 0.1, 0.2, 0.3));
  ki.velocity = kj.velocity = vec6(4, 0, 0, 0, 0, 0);
  kj.pose = exp_map(0.5 * ki.velocity) * ki.pose;
  const PriorError pe = prior_error(PriorOrder::WNOA, ki, kj, PriorConfig{});
  EXPECT_LT(pe.e.norm(), 1e-12);
  EXPECT_EQ(pe.q_inv, process_cov_inv(PriorOrder::WNOA, 0.5, PriorConfig{}));
}

TEST(PriorError, ZeroOnRotatingConstantVelocity) {
  // Any constant body velocity is on the WNOA mean, including a rotating one.
  Knot ki, kj;
  kj.t = 1.3;
  ki.velocity = kj.velocity = vec6(2, 0.5, -0.1, 0.2, -0.3, 0.4);
  kj.pose = exp_map(1.3 * ki.velocity) * ki.pose;
  EXPECT_LT(prior_error(PriorOrder::WNOA, ki, kj, PriorConfig{}).e.norm(), 1e-12);
}

TEST(PriorError, WnojZeroOnStraightConstantAcceleration) {
  const double v = 3.0, a = 1.5, dt = 0.8;
  Knot ki, kj;
  kj.t = dt;
  ki.velocity = vec6(v, 0, 0, 0, 0, 0);
  ki.acceleration = kj.acceleration = vec6(a, 0, 0, 0, 0, 0);
  kj.pose = exp_map(vec6(v * dt + 0.5 * a * dt * dt, 0, 0, 0, 0, 0));
  kj.velocity = vec6(v + a * dt, 0, 0, 0, 0, 0);
  EXPECT_LT(prior_error(PriorOrder::WNOJ, ki, kj, PriorConfig{}).e.norm(), 1e-10);

  // The same pair violates the constant-velocity mean.
  const VectorXd e = prior_error(PriorOrder::WNOA, ki, kj, PriorConfig{}).e;
  EXPECT_NEAR(e(0), 0.5 * a * dt * dt, 1e-12);
  EXPECT_NEAR(e(6), a * dt, 1e-12);
  EXPECT_LT(e.segment<5>(1).norm(), 1e-12);
}

TEST(PriorError, RejectsNonIncreasingTimes) {
  Knot ki, kj;
  EXPECT_THROW(prior_error(PriorOrder::WNOA, ki, kj, PriorConfig{}), InvalidArgument);
  kj.t = -1.0;
  EXPECT_THROW(prior_error(PriorOrder::WNOJ, ki, kj, PriorConfig{}), InvalidArgument);
}

TEST(PriorErrorJacobians, VelocityBlockAtMean) {
  Knot ki, kj;
  const double dt = 0.7;
  kj.t = dt;
  ki.velocity = kj.velocity = vec6(1, 0, 0, 0, 0, 0.2);
  kj.pose = exp_map(dt * ki.velocity);
  const PriorErrorJacobians j = prior_error_jacobians(PriorOrder::WNOA, ki, kj, PriorConfig{});
  MatrixXd expected(12, 6);
  expected << -dt * MatrixXd::Identity(6, 6), -MatrixXd::Identity(6, 6);
  EXPECT_LT((j.knot_i.velocity - expected).norm(), 1e-14);
  EXPECT_EQ(j.knot_i.acceleration.cols(), 0);
}

TEST(PriorErrorJacobians, WnojAccelerationBlockAtIdentity) {
  Knot ki, kj;
  kj.t = 0.4;
  const PriorErrorJacobians j = prior_error_jacobians(PriorOrder::WNOJ, ki, kj, PriorConfig{});
  MatrixXd expected = MatrixXd::Zero(18, 6);
  expected.bottomRows<6>() = MatrixXd::Identity(6, 6);
  EXPECT_LT((j.knot_j.acceleration - expected).norm(), 1e-14);
}

TEST(PriorErrorJacobians, MatchFiniteDifferences) {
  std::mt19937_64 rng(3);
  for (PriorOrder order : {PriorOrder::WNOA, PriorOrder::WNOJ}) {
    for (int k = 0; k < 30; ++k) {
      const auto [ki, kj] = random_pair(rng, order, 0.1 + 0.4 * (k % 3));
      const MatrixXd an = stacked(prior_error_jacobians(order, ki, kj, PriorConfig{}));
      const MatrixXd fd = numeric_prior_jacobian(order, ki, kj, PriorConfig{});
      EXPECT_LT(oracle::relative_error(an, fd), 1e-6) << to_string(order) << " case " << k;
    }
  }
}

TEST(PriorErrorJacobians, LibraryNumericModeAgrees) {
  std::mt19937_64 rng(4);
  const auto [ki, kj] = random_pair(rng, PriorOrder::WNOJ, 0.3);
  const MatrixXd an = stacked(prior_error_jacobians(PriorOrder::WNOJ, ki, kj, PriorConfig{}));
  const MatrixXd num =
      stacked(prior_error_jacobians_numeric(PriorOrder::WNOJ, ki, kj, PriorConfig{}));
  EXPECT_LT(oracle::relative_error(an, num), 1e-6);
}

TEST(PriorTerms, StackedJacobianMatchesPerKnotBlocks) {
  std::mt19937_64 rng(5);
  for (PriorOrder order : {PriorOrder::WNOA, PriorOrder::WNOJ}) {
    const auto [ki, kj] = random_pair(rng, order, 0.25);
    const KnotPairTerms terms = knot_pair_terms(order, ki, kj);
    EXPECT_LT((prior_error_from_terms(order, terms, ki, 0.25) -
               prior_error(order, ki, kj, PriorConfig{}).e)
                  .norm(),
              1e-14);
    const MatrixXd full = prior_error_jacobian_from_terms(order, terms, 0.25);
    EXPECT_LT((full - stacked(prior_error_jacobians(order, ki, kj, PriorConfig{}))).norm(), 1e-14);
  }
}

TEST(WnoaRecovery, ExactCases) {
  Knot ki, kj;
  kj.t = 1.0;
  ki.velocity = kj.velocity = vec6(1, 2, 3, 0.1, 0.2, 0.3);
  EXPECT_LT(wnoa_recovery_check(ki, kj, PriorConfig{}), 1e-14);
  Knot zi, zj;
  zj.t = 1.0;
  zj.pose = exp_map(vec6(0.3, 0.1, 0.2, 0.1, 0.05, 0.02));
  EXPECT_LT(wnoa_recovery_check(zi, zj, PriorConfig{}), 1e-14);
}

TEST(WnoaRecovery, SmallRelativePose) {
  std::mt19937_64 rng(6);
  for (int k = 0; k < 50; ++k) {
    Knot ki, kj;
    kj.t = 0.1;
    Vector6d xi = oracle::random_vec6(rng, 1.0);
    xi *= 0.01 / xi.norm();
    ki.pose = exp_map(oracle::random_vec6(rng, 1.0));
    kj.pose = exp_map(xi) * ki.pose;
    ki.velocity = xi / 0.1 + oracle::random_vec6(rng, 0.01);
    kj.velocity = xi / 0.1 + oracle::random_vec6(rng, 0.01);
    EXPECT_LT(wnoa_recovery_check(ki, kj, PriorConfig{}), 1e-3);
  }
}
