#pragma once

#include "coopgrid/conic/program.h"

namespace coopgrid::conic {

/// Contract for continuous conic backends: binaries are treated as
/// continuous in their bounds; Optimal solutions satisfy every row, bound and
/// cone within cfg.feas_tol; infeasible or unbounded input is reported through
/// the status, never by throwing.
class ContinuousSolver {
 public:
  virtual ~ContinuousSolver() = default;
  virtual Solution solve(const ConicProgram& program,
                         const SolverConfig& cfg) const = 0;
};

/// Primal-dual interior-point method on the homogeneous self-dual embedding
/// with Nesterov-Todd scaling and Mehrotra predictor-corrector steps.
class InteriorPointSolver final : public ContinuousSolver {
 public:
  Solution solve(const ConicProgram& program,
                 const SolverConfig& cfg) const override;
};

const ContinuousSolver& default_continuous_solver();

Solution solve_continuous(const ConicProgram& program, const SolverConfig& cfg,
                          const ContinuousSolver* backend = nullptr);

}  // namespace coopgrid::conic
