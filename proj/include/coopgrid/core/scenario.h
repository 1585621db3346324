#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "coopgrid/conic/program.h"
#include "coopgrid/core/coalition.h"
#include "coopgrid/error.h"
#include "coopgrid/uncertainty/contribution.h"

namespace coopgrid {

struct TimeGrid {
  int periods = 1;
  double period_hours = 1.0;
};

/// Microturbine with cost a*pg^2 + b*pg + c per period.
struct MachineSpec {
  double pg_max = 0.0;
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  std::vector<double> pi_g_up;
  std::vector<double> pi_g_dw;
};

/// Renewable unit: forecast and box half-width per period.
struct DrgSpec {
  std::vector<double> pw0;
  std::vector<double> dpw_max;
};

struct ProsumerSpec {
  std::string id;
  std::vector<double> pd_min;
  std::vector<double> pd_max;
  std::vector<double> lambda;
  std::vector<double> beta;
  std::vector<double> pi_d_up;
  std::vector<double> pi_d_dw;
  std::vector<MachineSpec> machines;
  std::vector<DrgSpec> drgs;
  /// Optional cap on ps and pb per period.
  double exchange_cap = conic::kInf;
};

struct TariffSchedule {
  std::vector<double> pi_buy;
  std::vector<double> pi_sell;
  std::vector<double> pi_m_up;
  std::vector<double> pi_m_dw;
};

enum class BudgetScope { kPerPeriod, kHorizon };

/// Ellipsoid shapes over the stacked DRG deviations. Per-period scope holds
/// one (center, shape) pair per period over all D units; horizon scope holds a
/// single pair of dimension D*T (period-major). Box-only models carry none.
struct UncertaintyModel {
  bool ellipsoid = false;
  BudgetScope scope = BudgetScope::kPerPeriod;
  std::vector<Eigen::VectorXd> centers;
  std::vector<Eigen::MatrixXd> shapes;
};

/// What "no short-term data" means for coalition trading without data.
enum class ElectricityOnlySet { kBox, kHistorical };

/// Coalition values feed 1e-6 absolute comparisons, so dispatch solves run
/// tighter than the generic solver defaults.
inline conic::SolverConfig dispatch_solver_defaults() {
  conic::SolverConfig cfg;
  cfg.feas_tol = 1e-9;
  cfg.abs_tol = 1e-9;
  cfg.rel_tol = 1e-10;
  return cfg;
}

struct ScenarioConfig {
  std::string name;
  std::uint64_t seed = 0;
  ElectricityOnlySet electricity_only_set = ElectricityOnlySet::kBox;
  bool per_period_shares = false;
  conic::SolverConfig solver = dispatch_solver_defaults();
  std::vector<double> sweep_multipliers{0.5, 1.0, 1.5, 2.0};
  int verify_samples = 10000;
};

struct Scenario {
  TimeGrid grid;
  std::vector<ProsumerSpec> prosumers;
  TariffSchedule tariff;
  UncertaintyModel uncertainty;
  uncertainty::DataContribution contributions;
  ScenarioConfig config;

  int num_players() const { return static_cast<int>(prosumers.size()); }
  int periods() const { return grid.periods; }
  int num_drgs() const;
  /// Global index of prosumer i's w-th DRG among all units.
  int drg_index(int i, int w) const;
};

struct ValidationIssue {
  ErrorCode code;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> errors;
  std::vector<std::string> warnings;
  bool ok() const { return errors.empty(); }
  /// Throws the first error, if any.
  void raise() const;
};

ValidationReport validate_scenario(const Scenario& s);

/// validate_scenario(s).raise()
void require_valid(const Scenario& s);

/// Hash of every numeric field; identifies a scenario in value caches.
std::uint64_t scenario_fingerprint(const Scenario& s);

/// Copy with every tariff price (energy and operator reserve) scaled.
Scenario scale_tariff(const Scenario& s, double multiplier);

}  // namespace coopgrid
