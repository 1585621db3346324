#pragma once

#include <string>
#include <vector>

#include "coopgrid/conic/program.h"
#include "coopgrid/imputation/oracle.h"

namespace coopgrid::imputation {

struct Imputation {
  std::vector<double> x;
  std::string method;
};

/// e(C, x) = v(C) - x(C)
double excess(const CharacteristicOracle& o, const std::vector<double>& x,
              Coalition c);

/// N <= 16.
Imputation shapley(const CharacteristicOracle& o);

/// Lexicographic minimization of sorted excesses by sequential LPs. N <= 12.
Imputation nucleolus(const CharacteristicOracle& o,
                     const conic::SolverConfig& cfg = {});

struct CoreViolation {
  Coalition coalition;
  double excess = 0.0;
};

/// Proper coalitions whose excess exceeds tol, largest first. N <= 16.
std::vector<CoreViolation> check_core(const CharacteristicOracle& o,
                                      const std::vector<double>& x,
                                      double tol = 1e-6);

struct LeastCore {
  Imputation imputation;
  double mu = 0.0;
  bool box_active = false;  // an allocation bound is tight; widen it
};

/// LP tolerances used by the allocation solvers.
conic::SolverConfig lp_config(const conic::SolverConfig& cfg);

/// min mu s.t. x(N) = v(N), mu >= v(C) - x(C) for the listed cuts,
/// mu >= mu_min, |x_i| <= box. Ties are broken by the minimum-norm x among
/// allocations within a tiny slack of the optimal mu.
LeastCore solve_least_core_master(int n, double grand_value,
                                  const std::vector<Coalition>& cuts,
                                  const std::vector<double>& cut_values,
                                  double box, const conic::SolverConfig& cfg);

/// Least core with every proper coalition as an explicit row. N <= 16.
LeastCore leastcore_enumeration(const CharacteristicOracle& o,
                                const conic::SolverConfig& cfg = {});

}  // namespace coopgrid::imputation
