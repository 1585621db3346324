#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace coopgrid::uncertainty {

/// Upper-triangular L with Q = L^T L.
class CholFactor {
 public:
  const Eigen::MatrixXd& upper() const { return l_; }
  int dim() const { return static_cast<int>(l_.rows()); }
  /// L^{-T} a
  Eigen::VectorXd solve_transpose(const Eigen::VectorXd& a) const;
  /// L^{-1} u
  Eigen::VectorXd solve(const Eigen::VectorXd& u) const;

 private:
  friend CholFactor cholesky(const Eigen::MatrixXd& q);
  Eigen::MatrixXd l_;
};

/// Throws NotPositiveDefinite when a pivot falls to 1e-12 or below, or
/// DimensionMismatch for a non-square input.
CholFactor cholesky(const Eigen::MatrixXd& q);

struct BoxSet {
  Eigen::VectorXd half_width;
};

/// {d : (d - c)^T Q (d - c) <= r}
class EllipsoidSet {
 public:
  /// Validates symmetry (1e-10 relative), positive definiteness and r > 0.
  EllipsoidSet(Eigen::VectorXd center, Eigen::MatrixXd shape, double budget);

  const Eigen::VectorXd& center() const { return center_; }
  const Eigen::MatrixXd& shape() const { return shape_; }
  double budget() const { return budget_; }
  const CholFactor& factor() const { return factor_; }
  int dim() const { return static_cast<int>(center_.size()); }

  EllipsoidSet with_budget(double budget) const;

 private:
  EllipsoidSet(Eigen::VectorXd center, Eigen::MatrixXd shape, double budget,
               CholFactor factor);
  Eigen::VectorXd center_;
  Eigen::MatrixXd shape_;
  double budget_;
  CholFactor factor_;
};

/// max over the set of a^T d = a^T c + sqrt(r) ||L^{-T} a||.
double support_ellipsoid(const Eigen::VectorXd& a, const EllipsoidSet& e);

/// sum |a_j| * half_width_j
double support_box(const Eigen::VectorXd& a, const BoxSet& b);

enum class SampleMode { kBoundary, kInterior };

/// Deterministic for a given seed.
std::vector<Eigen::VectorXd> sample_ellipsoid(const EllipsoidSet& e, int n,
                                              std::uint64_t seed,
                                              SampleMode mode);

}  // namespace coopgrid::uncertainty
