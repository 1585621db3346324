#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "coopgrid/error.h"
#include "coopgrid/uncertainty/contribution.h"
#include "coopgrid/uncertainty/sets.h"

namespace coopgrid::uncertainty {
namespace {

Eigen::MatrixXd random_spd(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = g(rng);
  }
  return a * a.transpose() + Eigen::MatrixXd::Identity(n, n);
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(v.size());
  int k = 0;
  for (double x : v) out[k++] = x;
  return out;
}

TEST(Cholesky, Identity) {
  const CholFactor f = cholesky(Eigen::MatrixXd::Identity(2, 2));
  EXPECT_TRUE(f.upper().isApprox(Eigen::MatrixXd::Identity(2, 2)));
}

TEST(Cholesky, Diagonal) {
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(2, 2);
  q(0, 0) = 4;
  q(1, 1) = 9;
  const CholFactor f = cholesky(q);
  EXPECT_DOUBLE_EQ(f.upper()(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(f.upper()(1, 1), 3.0);
  EXPECT_DOUBLE_EQ(f.upper()(0, 1), 0.0);
}

TEST(Cholesky, ReconstructsRandomSpd) {
  std::mt19937_64 rng(1);
  for (int k = 0; k < 20; ++k) {
    const Eigen::MatrixXd q = random_spd(rng, 5);
    const CholFactor f = cholesky(q);
    const Eigen::MatrixXd l = f.upper();
    EXPECT_LE((l.transpose() * l - q).cwiseAbs().maxCoeff(),
              1e-10 * q.cwiseAbs().maxCoeff());
    EXPECT_TRUE(l.isUpperTriangular());
  }
}

TEST(Cholesky, RejectsIndefinite) {
  Eigen::MatrixXd q(2, 2);
  q << 1, 2, 2, 1;
  try {
    cholesky(q);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotPositiveDefinite);
  }
  EXPECT_THROW(cholesky(Eigen::MatrixXd::Zero(2, 3)), Error);
}

TEST(Budget, Examples) {
  DataContribution d;
  d.k_h = 1.0;
  EXPECT_DOUBLE_EQ(effective_budget(d, Coalition(5)), 1.0);
  d = DataContribution::singletons(1.0, {0.1, 0.1});
  EXPECT_NEAR(effective_budget(d, Coalition(3)), 0.8, 1e-15);
  d.terms.push_back({Coalition(3), 0.05});
  EXPECT_NEAR(effective_budget(d, Coalition(3)), 0.75, 1e-15);
  EXPECT_NEAR(effective_budget(d, Coalition(1)), 0.9, 1e-15);
  EXPECT_DOUBLE_EQ(effective_budget(d, Coalition()), 1.0);
}

TEST(Budget, MonotoneInCoalition) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 0.05);
  DataContribution d;
  d.k_h = 1.0;
  for (int k = 0; k < 10; ++k) d.terms.push_back({Coalition((rng() & 31) | 1), u(rng)});
  for (int k = 0; k < 200; ++k) {
    const Coalition small(rng() & 31);
    const Coalition big = small | Coalition(rng() & 31);
    EXPECT_GE(effective_budget(d, small), effective_budget(d, big));
  }
}

TEST(Support, UnitBall) {
  const EllipsoidSet e(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2), 1.0);
  EXPECT_NEAR(support_ellipsoid(vec({3, 4}), e), 5.0, 1e-14);
  const EllipsoidSet shifted(vec({1, 0}), Eigen::MatrixXd::Identity(2, 2), 1.0);
  EXPECT_NEAR(support_ellipsoid(vec({3, 4}), shifted), 8.0, 1e-14);
  EXPECT_THROW(support_ellipsoid(vec({1, 2, 3}), e), Error);
}

TEST(Support, DiagonalShapeAgainstSampling) {
  Eigen::MatrixXd q = Eigen::MatrixXd::Identity(2, 2);
  q(0, 0) = 4.0;
  const EllipsoidSet e(Eigen::VectorXd::Zero(2), q, 1.0);
  const Eigen::VectorXd a = vec({2, 2});
  const double exact = support_ellipsoid(a, e);
  EXPECT_NEAR(exact, std::sqrt(5.0), 1e-12);
  double best = -1e300;
  for (const Eigen::VectorXd& d : sample_ellipsoid(e, 100000, 3, SampleMode::kBoundary)) {
    best = std::max(best, a.dot(d));
  }
  EXPECT_NEAR(best, exact, 1e-3);
  EXPECT_LE(best, exact + 1e-12);
}

TEST(Support, Box) {
  const BoxSet b{vec({0.2, 0.2})};
  EXPECT_NEAR(support_box(vec({1, 1}), b), 0.4, 1e-15);
  EXPECT_NEAR(support_box(vec({1, -1}), b), 0.4, 1e-15);
  EXPECT_EQ(support_box(vec({5, -7}), BoxSet{vec({0, 0})}), 0.0);
  EXPECT_THROW(support_box(vec({1}), b), Error);
}

TEST(Support, EllipsoidInsideBoxIsDominated) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 4;
    const EllipsoidSet e(Eigen::VectorXd::Zero(n), random_spd(rng, n), 0.7);
    // Smallest enclosing box of the ellipsoid.
    Eigen::VectorXd w(n);
    for (int j = 0; j < n; ++j) {
      w[j] = support_ellipsoid(Eigen::VectorXd::Unit(n, j), e);
      ASSERT_LE(support_ellipsoid(-Eigen::VectorXd::Unit(n, j), e), w[j] + 1e-12);
    }
    const BoxSet b{w};
    for (int k = 0; k < 1000; ++k) {
      Eigen::VectorXd a(n);
      for (int j = 0; j < n; ++j) a[j] = g(rng);
      EXPECT_LE(support_ellipsoid(a, e), support_box(a, b) + 1e-9);
    }
  }
}

TEST(Support, SquareRootBudgetScaling) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g;
  for (int k = 0; k < 50; ++k) {
    Eigen::VectorXd c(3), a(3);
    for (int j = 0; j < 3; ++j) {
      c[j] = g(rng);
      a[j] = g(rng);
    }
    const EllipsoidSet e(c, random_spd(rng, 3), 0.3 + std::abs(g(rng)));
    const double base = support_ellipsoid(a, e);
    const double scaled = support_ellipsoid(a, e.with_budget(4 * e.budget()));
    EXPECT_NEAR(scaled, a.dot(c) + 2 * (base - a.dot(c)), 1e-10);
  }
}

TEST(Sampling, BoundaryOnSurface) {
  std::mt19937_64 rng(7);
  Eigen::VectorXd c(3);
  c << 0.5, -1.0, 2.0;
  const EllipsoidSet e(c, random_spd(rng, 3), 0.8);
  for (const Eigen::VectorXd& d : sample_ellipsoid(e, 2000, 11, SampleMode::kBoundary)) {
    const Eigen::VectorXd z = d - c;
    EXPECT_NEAR(z.dot(e.shape() * z), 0.8, 1e-9);
  }
  const EllipsoidSet ball(Eigen::VectorXd::Zero(3), Eigen::MatrixXd::Identity(3, 3), 1.0);
  for (const Eigen::VectorXd& d : sample_ellipsoid(ball, 2000, 12, SampleMode::kBoundary)) {
    EXPECT_NEAR(d.norm(), 1.0, 1e-9);
  }
}

TEST(Sampling, NeverExceedsSupport) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  Eigen::VectorXd c(3);
  c << 0.1, 0.2, -0.3;
  const EllipsoidSet e(c, random_spd(rng, 3), 1.5);
  const auto pts = sample_ellipsoid(e, 5000, 13, SampleMode::kBoundary);
  for (int k = 0; k < 20; ++k) {
    Eigen::VectorXd a(3);
    for (int j = 0; j < 3; ++j) a[j] = g(rng);
    const double s = support_ellipsoid(a, e);
    for (const Eigen::VectorXd& d : pts) ASSERT_LE(a.dot(d), s + 1e-9);
  }
}

TEST(Sampling, InteriorMeanNearCenter) {
  std::mt19937_64 rng(9);
  Eigen::VectorXd c(2);
  c << 1.0, -2.0;
  const EllipsoidSet e(c, random_spd(rng, 2), 1.0);
  const int n = 100000;
  const auto pts = sample_ellipsoid(e, n, 14, SampleMode::kInterior);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(2);
  for (const auto& d : pts) mean += d;
  mean /= n;
  Eigen::VectorXd var = Eigen::VectorXd::Zero(2);
  for (const auto& d : pts) var += (d - mean).cwiseAbs2();
  var /= (n - 1);
  for (int j = 0; j < 2; ++j) {
    EXPECT_LE(std::abs(mean[j] - c[j]), 5 * std::sqrt(var[j] / n));
    for (const auto& d : pts) {
      const Eigen::VectorXd w = d - c;
      ASSERT_LE(w.dot(e.shape() * w), 1.0 + 1e-9);
    }
  }
}

TEST(Sampling, Deterministic) {
  const EllipsoidSet e(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2), 1.0);
  const auto a = sample_ellipsoid(e, 10, 42, SampleMode::kInterior);
  const auto b = sample_ellipsoid(e, 10, 42, SampleMode::kInterior);
  for (int k = 0; k < 10; ++k) EXPECT_EQ(a[k], b[k]);
}

TEST(Ellipsoid, RejectsBadInput) {
  Eigen::MatrixXd q(2, 2);
  q << 1, 0.5, 0.4, 1;
  try {
    EllipsoidSet(Eigen::VectorXd::Zero(2), q, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonPositiveDefiniteShape);
  }
  EXPECT_THROW(EllipsoidSet(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2), 0.0),
               Error);
}

}  // namespace
}  // namespace coopgrid::uncertainty
