#include "conic/ldl.h"

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "coopgrid/error.h"

namespace coopgrid::conic::internal {

QuasiDefiniteLdl::QuasiDefiniteLdl(int n, std::span<const KktEntry> entries,
                                   std::vector<int> signs)
    : n_(n) {
  // Fill-reducing ordering on the symmetric pattern.
  Eigen::SparseMatrix<double, Eigen::ColMajor, int> pattern(n, n);
  {
    std::vector<Eigen::Triplet<double, int>> trips;
    trips.reserve(entries.size() * 2);
    for (const KktEntry& e : entries) {
      trips.emplace_back(e.row, e.col, 1.0);
      if (e.row != e.col) trips.emplace_back(e.col, e.row, 1.0);
    }
    pattern.setFromTriplets(trips.begin(), trips.end());
  }
  Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> amd;
  Eigen::AMDOrdering<int> ordering;
  ordering(pattern, amd);
  // The ordering is returned as new -> old (SimplicialLDLT inverts it).
  perm_.assign(amd.indices().data(), amd.indices().data() + n);
  iperm_.assign(n, 0);
  for (int i = 0; i < n; ++i) iperm_[perm_[i]] = i;
  signs_.assign(n, 1);
  for (int i = 0; i < n; ++i) signs_[iperm_[i]] = signs[i];

  // Permuted upper triangle in CSC with a slot map for value refreshes.
  struct Placed {
    int row, col, k;
  };
  std::vector<Placed> placed;
  placed.reserve(entries.size());
  for (std::size_t k = 0; k < entries.size(); ++k) {
    int r = iperm_[entries[k].row];
    int c = iperm_[entries[k].col];
    if (r > c) std::swap(r, c);
    placed.push_back({r, c, static_cast<int>(k)});
  }
  std::sort(placed.begin(), placed.end(), [](const Placed& a, const Placed& b) {
    return a.col != b.col ? a.col < b.col : a.row < b.row;
  });
  ap_.assign(n + 1, 0);
  ai_.resize(placed.size());
  ax_.assign(placed.size(), 0.0);
  slot_.assign(entries.size(), 0);
  for (std::size_t p = 0; p < placed.size(); ++p) {
    ++ap_[placed[p].col + 1];
    ai_[p] = placed[p].row;
    slot_[placed[p].k] = static_cast<int>(p);
  }
  for (int j = 0; j < n; ++j) ap_[j + 1] += ap_[j];

  // Elimination tree and column counts.
  etree_.assign(n, -1);
  lnz_.assign(n, 0);
  std::vector<int> flag(n, -1);
  for (int j = 0; j < n; ++j) {
    flag[j] = j;
    for (int p = ap_[j]; p < ap_[j + 1]; ++p) {
      int i = ai_[p];
      while (flag[i] != j) {
        if (etree_[i] == -1) etree_[i] = j;
        ++lnz_[i];
        flag[i] = j;
        i = etree_[i];
      }
    }
  }
  lp_.assign(n + 1, 0);
  for (int i = 0; i < n; ++i) lp_[i + 1] = lp_[i] + lnz_[i];
  li_.assign(lp_[n], 0);
  lx_.assign(lp_[n], 0.0);
  d_.assign(n, 0.0);
  dinv_.assign(n, 0.0);
  work_.assign(n, 0.0);
}

void QuasiDefiniteLdl::factor(std::span<const double> values,
                              double dynamic_delta) {
  for (std::size_t k = 0; k < values.size(); ++k) ax_[slot_[k]] = values[k];
  regularized_ = 0;
  const int n = n_;
  std::vector<double> y(n, 0.0);
  std::vector<char> marked(n, 0);
  std::vector<int> y_idx(n);
  std::vector<int> elim(n);
  std::vector<int> next_space(lp_.begin(), lp_.end() - 1);

  auto fix_pivot = [&](int k) {
    const double threshold = dynamic_delta;
    if (!(signs_[k] * d_[k] > threshold)) {
      d_[k] = signs_[k] * dynamic_delta;
      ++regularized_;
    }
    dinv_[k] = 1.0 / d_[k];
  };

  for (int k = 0; k < n; ++k) {
    d_[k] = 0.0;
    int nnz_y = 0;
    for (int p = ap_[k]; p < ap_[k + 1]; ++p) {
      const int b = ai_[p];
      if (b == k) {
        d_[k] = ax_[p];
        continue;
      }
      y[b] = ax_[p];
      int next = b;
      if (!marked[next]) {
        marked[next] = 1;
        elim[0] = next;
        int nnz_e = 1;
        next = etree_[b];
        while (next != -1 && next < k) {
          if (marked[next]) break;
          marked[next] = 1;
          elim[nnz_e++] = next;
          next = etree_[next];
        }
        while (nnz_e) y_idx[nnz_y++] = elim[--nnz_e];
      }
    }
    for (int i = nnz_y - 1; i >= 0; --i) {
      const int c = y_idx[i];
      const int slot = next_space[c];
      const double yc = y[c];
      for (int j = lp_[c]; j < slot; ++j) y[li_[j]] -= lx_[j] * yc;
      li_[slot] = k;
      lx_[slot] = yc * dinv_[c];
      d_[k] -= yc * lx_[slot];
      ++next_space[c];
      y[c] = 0.0;
      marked[c] = 0;
    }
    fix_pivot(k);
  }
}

void QuasiDefiniteLdl::solve(std::span<double> rhs) const {
  const int n = n_;
  for (int i = 0; i < n; ++i) work_[i] = rhs[perm_[i]];
  for (int i = 0; i < n; ++i) {
    const double xi = work_[i];
    for (int j = lp_[i]; j < lp_[i + 1]; ++j) work_[li_[j]] -= lx_[j] * xi;
  }
  for (int i = 0; i < n; ++i) work_[i] *= dinv_[i];
  for (int i = n - 1; i >= 0; --i) {
    double xi = work_[i];
    for (int j = lp_[i]; j < lp_[i + 1]; ++j) xi -= lx_[j] * work_[li_[j]];
    work_[i] = xi;
  }
  for (int i = 0; i < n; ++i) rhs[perm_[i]] = work_[i];
}

}  // namespace coopgrid::conic::internal
