#pragma once

#include <algorithm>
#include <bit>
#include <numeric>
#include <random>

#include "coopgrid/conic/interior_point.h"
#include "coopgrid/imputation/allocation.h"
#include "coopgrid/imputation/oracle.h"

namespace coopgrid::testing {

using imputation::CharacteristicOracle;
using imputation::TableGame;

inline TableGame random_game(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::vector<double> v(std::size_t{1} << n);
  for (auto& a : v) a = u(rng);
  return TableGame(n, v);
}

// v(C) = (sum of weights)^2 is supermodular, hence superadditive.
inline TableGame convex_game(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  std::vector<double> w(n);
  for (auto& a : w) a = u(rng);
  std::vector<double> v(std::size_t{1} << n, 0.0);
  for (std::size_t m = 1; m < v.size(); ++m) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      if ((m >> i) & 1) s += w[i];
    }
    v[m] = s * s - 0.3 * std::popcount(m);
  }
  return TableGame(n, v);
}

// Player perm[i] of the permuted game plays the role of player i.
inline TableGame permuted(const TableGame& g, const std::vector<int>& perm) {
  const int n = g.num_players();
  std::vector<double> v(std::size_t{1} << n);
  for (std::uint64_t m = 0; m < v.size(); ++m) {
    std::uint64_t pm = 0;
    for (int i = 0; i < n; ++i) {
      if ((m >> i) & 1) pm |= std::uint64_t{1} << perm[i];
    }
    v[pm] = g.value(Coalition(m));
  }
  return TableGame(n, v);
}

// Average marginal contribution over every player ordering.
inline std::vector<double> shapley_by_orderings(const CharacteristicOracle& o) {
  const int n = o.num_players();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> phi(n, 0.0);
  long count = 0;
  do {
    Coalition c;
    double before = 0.0;
    for (int i : order) {
      c = c.with(i);
      const double after = o.value(c);
      phi[i] += after - before;
      before = after;
    }
    ++count;
  } while (std::next_permutation(order.begin(), order.end()));
  for (auto& p : phi) p /= count;
  return phi;
}

inline double true_max_excess(const CharacteristicOracle& o, const std::vector<double>& x) {
  double best = -1e300;
  for (Coalition c : enumerate_coalitions(o.num_players(), true)) {
    best = std::max(best, imputation::excess(o, x, c));
  }
  return best;
}

// Largest distance from x_lc of any x in the least core, found by pushing
// each coordinate up and down. Zero when the least core is a single point.
inline double least_core_width(const CharacteristicOracle& g, const imputation::LeastCore& lc) {
  const int n = g.num_players();
  const auto proper = enumerate_coalitions(n, true);
  double width = 0.0;
  for (int i = 0; i < n; ++i) {
    for (double sign : {1.0, -1.0}) {
      conic::ConicProgram p;
      std::vector<conic::Term> sum;
      for (int j = 0; j < n; ++j) {
        p.add_variable(-1e3, 1e3, j == i ? sign : 0.0);
        sum.push_back({j, 1.0});
      }
      p.add_row(sum, g.value(Coalition::grand(n)), g.value(Coalition::grand(n)));
      for (Coalition c : proper) {
        std::vector<conic::Term> row;
        for (int j : c.members()) row.push_back({j, 1.0});
        p.add_row(row, g.value(c) - lc.mu - 1e-9, conic::kInf);
      }
      const auto sol = conic::solve_continuous(p, imputation::lp_config({}));
      if (!sol.optimal()) return conic::kInf;
      width = std::max(width, std::abs(sol.x[i] - lc.imputation.x[i]));
    }
  }
  return width;
}

}  // namespace coopgrid::testing
