#pragma once

#include <span>
#include <vector>

namespace coopgrid::conic::internal {

struct KktEntry {
  int row = 0;
  int col = 0;
};

/// Sparse LDL^T factorization of a symmetric quasi-definite matrix with a
/// fixed pattern. The pattern is analysed once (AMD ordering, elimination
/// tree); each refactor only refreshes numeric values. Pivots whose sign
/// disagrees with the expected inertia are replaced by sign * delta.
class QuasiDefiniteLdl {
 public:
  /// entries: one slot per structural nonzero of the lower or upper triangle
  /// (each (i,j) pair at most once, diagonal always present).
  /// signs[i] is +1 for the positive-definite block and -1 otherwise.
  QuasiDefiniteLdl(int n, std::span<const KktEntry> entries,
                   std::vector<int> signs);

  /// values[k] belongs to entries[k].
  void factor(std::span<const double> values, double dynamic_delta);

  /// In-place solve of K x = b.
  void solve(std::span<double> rhs) const;

  int dim() const { return n_; }
  int regularized_pivots() const { return regularized_; }

 private:
  int n_;
  std::vector<int> signs_;  // permuted
  std::vector<int> perm_;   // perm_[new] = old
  std::vector<int> iperm_;  // iperm_[old] = new
  // Permuted upper-triangular CSC of K.
  std::vector<int> ap_;
  std::vector<int> ai_;
  std::vector<double> ax_;
  std::vector<int> slot_;  // entry k -> position in ax_
  // Factor.
  std::vector<int> etree_;
  std::vector<int> lnz_;
  std::vector<int> lp_;
  std::vector<int> li_;
  std::vector<double> lx_;
  std::vector<double> d_;
  std::vector<double> dinv_;
  int regularized_ = 0;
  mutable std::vector<double> work_;
};

}  // namespace coopgrid::conic::internal
