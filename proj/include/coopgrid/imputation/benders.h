#pragma once

#include <iosfwd>
#include <vector>

#include "coopgrid/conic/program.h"
#include "coopgrid/imputation/allocation.h"

namespace coopgrid::imputation {

struct MaxExcess {
  Coalition coalition;
  double excess = -conic::kInf;
  bool proven = true;     // false when a node limit stopped the search
  long evaluations = 0;   // characteristic values requested
  long nodes = 0;
};

/// Finds the proper coalition with the largest excess under x.
class ExcessSearch {
 public:
  virtual ~ExcessSearch() = default;
  virtual MaxExcess maximize(const std::vector<double>& x) const = 0;
};

/// Every proper coalition in mask order. N <= 20.
class EnumerationSearch final : public ExcessSearch {
 public:
  explicit EnumerationSearch(const CharacteristicOracle& o) : o_(o) {}
  MaxExcess maximize(const std::vector<double>& x) const override;

 private:
  const CharacteristicOracle& o_;
};

/// Best-first branch-and-bound over membership literals for superadditive
/// games. A node fixes players in or out and leaves the rest free; for any
/// C between in and in+free,
///   v(C) - x(C) <= v(in+free) - x(in) - sum_free min(x_j, v({j}))
/// because dropping member j from a coalition loses at least v({j}).
class MembershipSearch final : public ExcessSearch {
 public:
  MembershipSearch(const CharacteristicOracle& o, long node_limit = 200000)
      : o_(o), node_limit_(node_limit) {}
  MaxExcess maximize(const std::vector<double>& x) const override;

 private:
  const CharacteristicOracle& o_;
  long node_limit_;
};

struct BendersIteration {
  int iteration = 0;
  double mu = 0.0;
  std::vector<double> x;
  Coalition coalition;
  double excess = 0.0;
  double master_seconds = 0.0;
  double subproblem_seconds = 0.0;
};

struct BendersLog {
  std::vector<BendersIteration> iterations;
  bool converged = false;

  /// iteration,mu,coalition,excess[,master_seconds,subproblem_seconds]
  void write_csv(std::ostream& out, bool timing = false) const;
};

struct BendersResult {
  LeastCore least_core;
  BendersLog log;
};

/// Cutting-plane least core. The master minimizes mu over the cuts found so
/// far, starting from every singleton and every complement of a singleton;
/// the search returns the most violated coalition for the master's x.
/// Stops when its excess is within cfg.epsilon of mu. Throws IterLimit
/// after cfg.benders_max_iterations (the message carries the last mu).
BendersResult leastcore_benders(const CharacteristicOracle& o,
                                const ExcessSearch& search,
                                const conic::SolverConfig& cfg = {});

/// Same with MembershipSearch.
BendersResult leastcore_benders(const CharacteristicOracle& o,
                                const conic::SolverConfig& cfg = {});

}  // namespace coopgrid::imputation
