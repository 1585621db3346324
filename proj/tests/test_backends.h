#pragma once

#include <atomic>

#include "coopgrid/conic/interior_point.h"

namespace coopgrid::testing {

// Delegates to the default backend and counts calls.
class CountingSolver final : public conic::ContinuousSolver {
 public:
  conic::Solution solve(const conic::ConicProgram& p,
                        const conic::SolverConfig& cfg) const override {
    ++calls;
    return conic::default_continuous_solver().solve(p, cfg);
  }
  mutable std::atomic<int> calls{0};
};

// Always reports a numerical breakdown.
class FailingSolver final : public conic::ContinuousSolver {
 public:
  conic::Solution solve(const conic::ConicProgram&,
                        const conic::SolverConfig&) const override {
    conic::Solution s;
    s.status = conic::SolveStatus::kNumericalFailure;
    return s;
  }
};

}  // namespace coopgrid::testing
