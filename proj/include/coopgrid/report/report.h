#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "coopgrid/core/scenario.h"
#include "coopgrid/dispatch/modes.h"
#include "coopgrid/dispatch/robust.h"
#include "coopgrid/imputation/allocation.h"
#include "coopgrid/imputation/benders.h"

namespace coopgrid::report {

/// Exit status for a library error: 2 bad input, 3 solver trouble,
/// 4 guard violation.
int exit_code(ErrorCode code);

struct CaseRow {
  std::string name;  // I, II, III
  dispatch::DispatchMode mode = dispatch::DispatchMode::kIsolated;
  bool ok = false;
  std::string error;
  PayoffBreakdown operator_side;  // summed over prosumers
  double total_payoff = 0.0;
  std::vector<double> per_prosumer;
  double seconds = 0.0;
};

/// Case I: every prosumer alone. Case II: grand coalition trading
/// electricity only. Case III: grand coalition with shared data. A failing
/// case is recorded and the others still run.
struct CaseReport {
  std::vector<std::string> ids;
  std::vector<CaseRow> cases;

  void write_csv(std::ostream& out, bool timing = false) const;
  void write_prosumer_csv(std::ostream& out) const;
};

CaseReport run_cases(const Scenario& s, int workers = 1);

enum class ImputationMethod { kShapley, kNucleolus, kLeastCore };
ImputationMethod parse_method(std::string_view text);
std::string_view method_name(ImputationMethod m);

struct ImputationOptions {
  dispatch::DispatchMode mode = dispatch::DispatchMode::kJointData;
  bool electricity_only_attribution = false;
  int workers = 1;
  /// Least-core search: membership, enumeration, misocp, misocp-conservative.
  std::string search = "membership";
};

struct ImputationReport {
  ImputationMethod method = ImputationMethod::kLeastCore;
  std::string label;
  std::vector<std::string> ids;
  std::vector<double> x;
  std::vector<double> standalone;  // v({i})
  double grand_value = 0.0;
  std::optional<double> mu;
  std::optional<imputation::BendersLog> log;
  bool core_checked = false;
  std::vector<imputation::CoreViolation> violations;
  double seconds = 0.0;

  /// player,id,standalone,payoff,gain (+ a total row).
  void write_csv(std::ostream& out) const;
  /// coalition,members,excess for each violated coalition.
  void write_violations_csv(std::ostream& out) const;
};

/// Guards name the method that scales: shapley N <= 16, nucleolus N <= 12.
ImputationReport run_imputation(const Scenario& s, ImputationMethod method,
                                const ImputationOptions& options = {});

struct SweepRow {
  double multiplier = 1.0;
  double electricity_only = 0.0;
  double joint = 0.0;
  double data_value() const { return joint - electricity_only; }
};

std::vector<SweepRow> run_sweep(const Scenario& s, const std::vector<double>& multipliers);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

struct VerifyResult {
  Coalition coalition;
  dispatch::DispatchMode mode = dispatch::DispatchMode::kJointData;
  dispatch::ViolationReport report;
};

VerifyResult run_verify(const Scenario& s, Coalition c, dispatch::DispatchMode mode,
                        int samples, std::uint64_t seed);
void write_verify_csv(std::ostream& out, const VerifyResult& r);

/// t,prosumer,pd0,ps,pb,rd_up,rd_dw,rm_up,rm_dw,pg0,rg_up,rg_dw,gamma_d,gamma_m,gamma_g
/// with machine columns summed per prosumer.
void write_schedule_csv(std::ostream& out, const Scenario& s, const DispatchSchedule& d);

/// coalition,members,mode,value,status,iterations,set,budget
void write_value_csv(std::ostream& out, const CoalitionValue& v, dispatch::DispatchMode mode);

}  // namespace coopgrid::report
