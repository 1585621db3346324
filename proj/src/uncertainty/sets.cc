#include "coopgrid/uncertainty/sets.h"

#include <cmath>
#include <random>

#include "coopgrid/error.h"

namespace coopgrid::uncertainty {
namespace {

void require_dim(long got, long want, const char* what) {
  if (got != want) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(what) + ": got " + std::to_string(got) +
                    ", expected " + std::to_string(want));
  }
}

}  // namespace

CholFactor cholesky(const Eigen::MatrixXd& q) {
  require_dim(q.cols(), q.rows(), "cholesky needs a square matrix");
  const long n = q.rows();
  // Column-oriented factorization of the lower factor G (Q = G G^T); the
  // stored factor is L = G^T.
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
  for (long j = 0; j < n; ++j) {
    double d = q(j, j) - g.row(j).head(j).squaredNorm();
    if (!(d > 1e-12)) {
      throw Error(ErrorCode::kNotPositiveDefinite,
                  "pivot " + std::to_string(j) + " is " + std::to_string(d));
    }
    const double gjj = std::sqrt(d);
    g(j, j) = gjj;
    for (long i = j + 1; i < n; ++i) {
      g(i, j) = (q(i, j) - g.row(i).head(j).dot(g.row(j).head(j))) / gjj;
    }
  }
  CholFactor f;
  f.l_ = g.transpose();
  return f;
}

Eigen::VectorXd CholFactor::solve_transpose(const Eigen::VectorXd& a) const {
  return l_.transpose().triangularView<Eigen::Lower>().solve(a);
}

Eigen::VectorXd CholFactor::solve(const Eigen::VectorXd& u) const {
  return l_.triangularView<Eigen::Upper>().solve(u);
}

EllipsoidSet::EllipsoidSet(Eigen::VectorXd center, Eigen::MatrixXd shape,
                           double budget, CholFactor factor)
    : center_(std::move(center)),
      shape_(std::move(shape)),
      budget_(budget),
      factor_(std::move(factor)) {}

EllipsoidSet::EllipsoidSet(Eigen::VectorXd center, Eigen::MatrixXd shape,
                           double budget)
    : center_(std::move(center)), shape_(std::move(shape)), budget_(budget) {
  require_dim(shape_.rows(), center_.size(), "ellipsoid shape rows");
  require_dim(shape_.cols(), center_.size(), "ellipsoid shape cols");
  if (!(budget_ > 0) || !std::isfinite(budget_)) {
    throw Error(ErrorCode::kEmptyBudget, "ellipsoid budget must be positive");
  }
  const double scale = std::max(1.0, shape_.cwiseAbs().maxCoeff());
  if ((shape_ - shape_.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw Error(ErrorCode::kNonPositiveDefiniteShape, "shape is not symmetric");
  }
  try {
    factor_ = cholesky(shape_);
  } catch (const Error& e) {
    throw Error(ErrorCode::kNonPositiveDefiniteShape, e.what());
  }
}

EllipsoidSet EllipsoidSet::with_budget(double budget) const {
  if (!(budget > 0) || !std::isfinite(budget)) {
    throw Error(ErrorCode::kEmptyBudget, "ellipsoid budget must be positive");
  }
  return EllipsoidSet(center_, shape_, budget, factor_);
}

double support_ellipsoid(const Eigen::VectorXd& a, const EllipsoidSet& e) {
  require_dim(a.size(), e.dim(), "support direction");
  return a.dot(e.center()) +
         std::sqrt(e.budget()) * e.factor().solve_transpose(a).norm();
}

double support_box(const Eigen::VectorXd& a, const BoxSet& b) {
  require_dim(a.size(), b.half_width.size(), "support direction");
  return a.cwiseAbs().dot(b.half_width);
}

std::vector<Eigen::VectorXd> sample_ellipsoid(const EllipsoidSet& e, int n,
                                              std::uint64_t seed,
                                              SampleMode mode) {
  if (n < 1) throw Error(ErrorCode::kInvalidValue, "sample count must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int d = e.dim();
  const double radius = std::sqrt(e.budget());
  std::vector<Eigen::VectorXd> out;
  out.reserve(n);
  for (int k = 0; k < n; ++k) {
    Eigen::VectorXd u(d);
    double norm = 0.0;
    while (norm < 1e-12) {
      for (int j = 0; j < d; ++j) u[j] = gauss(rng);
      norm = u.norm();
    }
    u /= norm;
    double scale = radius;
    if (mode == SampleMode::kInterior) scale *= std::pow(unif(rng), 1.0 / d);
    out.push_back(e.center() + e.factor().solve(u) * scale);
  }
  return out;
}

}  // namespace coopgrid::uncertainty
