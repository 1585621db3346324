#pragma once

#include <cstdint>
#include <vector>

#include "coopgrid/conic/program.h"
#include "coopgrid/core/schedule.h"
#include "coopgrid/dispatch/modes.h"

namespace coopgrid::dispatch {

using IndexSeries = std::vector<int>;              // [t]
using IndexPerProsumer = std::vector<IndexSeries>; // [i][t]
using IndexPerMachine = std::vector<IndexPerProsumer>;

/// Program variable behind each schedule entry (-1 for non-members).
struct VariableMap {
  IndexPerProsumer pd0, ps, pb, rd_up, rd_dw, rm_up, rm_dw;
  IndexPerMachine pg0, rg_up, rg_dw;
  IndexPerProsumer gamma_d, gamma_m;
  IndexPerMachine gamma_g;
};

enum class RowClass { kBalance, kShares, kBounds, kRobust };

struct RobustCounterpart {
  conic::ConicProgram program;
  VariableMap map;
  Coalition coalition;
  DispatchMode mode = DispatchMode::kJointData;
  CoalitionSet set;
  std::vector<RowClass> row_class;  // one per program row
  int robust_rows = 0;
};

/// Minimizes the negated payoff of C. Quadratic utility and cost terms enter
/// through rotated-cone epigraphs; every reserve direction gets one robust
/// row per period and provider of the form share * S <= reserve.
RobustCounterpart build_counterpart(const Scenario& s, Coalition c,
                                    DispatchMode mode);

DispatchSchedule extract_schedule(const Scenario& s, const RobustCounterpart& rc,
                                  const std::vector<double>& x);

/// Throws Infeasible (naming the responsible constraint group) or
/// SolverFailure.
CoalitionValue solve_dispatch(const Scenario& s, Coalition c, DispatchMode mode);

/// Signed recourse for one realization: deviation[t] lists member-unit
/// deviations in member order (units of member i in DRG order).
struct Recourse {
  PerProsumer rd, rm;
  PerMachine rg;
  std::vector<double> total_deviation;    // D_t
  std::vector<double> balance_residual;   // sum(RD + RG + RM) - D_t
};

Recourse recourse_response(const Scenario& s, const DispatchSchedule& sched,
                           const std::vector<Eigen::VectorXd>& deviation);

struct ViolationReport {
  int samples = 0;
  int violations = 0;  // samples with any excess above 1e-6
  double max_violation = 0.0;
  std::string worst;   // constraint class of the largest excess
};

ViolationReport verify_robust_feasibility(const DispatchSchedule& sched,
                                          const Scenario& s, Coalition c,
                                          DispatchMode mode, int n_samples,
                                          std::uint64_t seed);

}  // namespace coopgrid::dispatch
