#pragma once

#include <string>
#include <vector>

#include "coopgrid/conic/program.h"
#include "coopgrid/core/coalition.h"
#include "coopgrid/core/scenario.h"

namespace coopgrid {

using Series = std::vector<double>;             // [t]
using PerProsumer = std::vector<Series>;        // [i][t]
using PerMachine = std::vector<PerProsumer>;    // [i][m][t]

/// Dispatch of one coalition. Arrays are dense over all N prosumers; entries
/// of non-members stay zero. Recourse shares are stored per period; with
/// time-invariant shares every period holds the same value.
struct DispatchSchedule {
  Coalition coalition;
  int periods = 0;
  PerProsumer pd0, ps, pb;
  PerMachine pg0;
  PerProsumer rd_up, rd_dw, rm_up, rm_dw;
  PerMachine rg_up, rg_dw;
  PerProsumer gamma_d, gamma_m;
  PerMachine gamma_g;

  static DispatchSchedule zeros(const Scenario& s, Coalition c);
};

/// Payoff terms of one prosumer summed over the horizon.
struct PayoffBreakdown {
  double utility = 0.0;
  double generation_cost = 0.0;
  double sale_revenue = 0.0;
  double purchase_cost = 0.0;
  double load_reserve_cost = 0.0;
  double machine_reserve_cost = 0.0;
  double operator_reserve_up_cost = 0.0;
  double operator_reserve_dw_cost = 0.0;

  double total() const;
  PayoffBreakdown& operator+=(const PayoffBreakdown& o);
};

PayoffBreakdown payoff_breakdown(const Scenario& s, const DispatchSchedule& d,
                                 int prosumer);

/// Sum over members of C of energy revenue minus reserve costs. Throws
/// DimensionMismatch when the schedule does not fit the scenario.
double evaluate_payoff(const Scenario& s, Coalition c, const DispatchSchedule& d);

struct CoalitionValue {
  Coalition coalition;
  double value = 0.0;
  DispatchSchedule schedule;
  conic::SolveStatus status = conic::SolveStatus::kOptimal;
  int iterations = 0;
  double seconds = 0.0;
  /// Budget of the ellipsoid used, or 0 for box sets.
  double budget = 0.0;
  std::string set_label;
};

}  // namespace coopgrid
