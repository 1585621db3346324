#include "coopgrid/report/report.h"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "coopgrid/dispatch/characteristic.h"
#include "coopgrid/imputation/subproblem.h"

namespace coopgrid::report {
namespace {

using dispatch::DispatchMode;
using Clock = std::chrono::steady_clock;

std::string money(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v == 0.0 ? 0.0 : v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string members(Coalition c) {
  std::string out;
  for (int i : c.members()) out += (out.empty() ? "" : " ") + std::to_string(i);
  return out;
}

double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInfeasible:
    case ErrorCode::kUnbounded:
    case ErrorCode::kSolverFailure:
    case ErrorCode::kIterLimit:
      return 3;
    case ErrorCode::kTooManyPlayers:
    case ErrorCode::kEmptyCoalition:
    case ErrorCode::kModeMismatch:
      return 4;
    default:
      return 2;
  }
}

CaseReport run_cases(const Scenario& s, int workers) {
  require_valid(s);
  const int n = s.num_players();
  CaseReport report;
  for (const ProsumerSpec& p : s.prosumers) report.ids.push_back(p.id);
  struct Spec {
    const char* name;
    DispatchMode mode;
  };
  for (Spec spec : {Spec{"I", DispatchMode::kIsolated},
                    Spec{"II", DispatchMode::kElectricityOnly},
                    Spec{"III", DispatchMode::kJointData}}) {
    CaseRow row;
    row.name = spec.name;
    row.mode = spec.mode;
    row.per_prosumer.assign(n, 0.0);
    const auto t0 = Clock::now();
    try {
      std::vector<Coalition> parts;
      if (spec.mode == DispatchMode::kIsolated) {
        for (int i = 0; i < n; ++i) parts.push_back(Coalition::singleton(i));
        dispatch::prefetch_values(s, parts, spec.mode, workers);
      } else {
        parts.push_back(Coalition::grand(n));
      }
      for (Coalition c : parts) {
        const auto v = dispatch::coalition_value(s, c, spec.mode);
        row.total_payoff += v->value;
        for (int i : c.members()) {
          const PayoffBreakdown b = payoff_breakdown(s, v->schedule, i);
          row.per_prosumer[i] = b.total();
          row.operator_side += b;
        }
      }
      row.ok = true;
    } catch (const Error& e) {
      row.error = std::string(error_code_name(e.code()));
    }
    row.seconds = since(t0);
    report.cases.push_back(row);
  }
  return report;
}

void CaseReport::write_csv(std::ostream& out, bool timing) const {
  out << "case,mode,status,total_payoff,energy_purchase_cost,energy_sale_revenue,"
         "operator_reserve_up_cost,operator_reserve_dw_cost";
  if (timing) out << ",seconds";
  out << '\n';
  for (const CaseRow& r : cases) {
    out << r.name << ',' << dispatch::mode_name(r.mode) << ',' << (r.ok ? "ok" : r.error);
    if (r.ok) {
      const PayoffBreakdown& b = r.operator_side;
      out << ',' << money(r.total_payoff) << ',' << money(b.purchase_cost) << ','
          << money(b.sale_revenue) << ',' << money(b.operator_reserve_up_cost) << ','
          << money(b.operator_reserve_dw_cost);
    } else {
      out << ",,,,,";
    }
    if (timing) out << ',' << money(r.seconds);
    out << '\n';
  }
}

void CaseReport::write_prosumer_csv(std::ostream& out) const {
  out << "player,id";
  for (const CaseRow& r : cases) out << ",case_" << r.name;
  out << '\n';
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out << i << ',' << csv_field(ids[i]);
    for (const CaseRow& r : cases) out << ',' << (r.ok ? money(r.per_prosumer[i]) : "");
    out << '\n';
  }
}

ImputationMethod parse_method(std::string_view text) {
  if (text == "shapley") return ImputationMethod::kShapley;
  if (text == "nucleolus") return ImputationMethod::kNucleolus;
  if (text == "leastcore" || text == "least-core") return ImputationMethod::kLeastCore;
  throw Error(ErrorCode::kInvalidValue, "unknown method '" + std::string(text) + "'");
}

std::string_view method_name(ImputationMethod m) {
  switch (m) {
    case ImputationMethod::kShapley:
      return "shapley";
    case ImputationMethod::kNucleolus:
      return "nucleolus";
    case ImputationMethod::kLeastCore:
      return "leastcore";
  }
  return "unknown";
}

ImputationReport run_imputation(const Scenario& s, ImputationMethod method,
                                const ImputationOptions& options) {
  require_valid(s);
  const int n = s.num_players();
  const int limit = method == ImputationMethod::kShapley     ? 16
                    : method == ImputationMethod::kNucleolus ? 12
                                                             : kMaxPlayers;
  if (n > limit) {
    throw Error(ErrorCode::kTooManyPlayers,
                std::string(method_name(method)) + " enumerates every coalition and "
                "supports at most " + std::to_string(limit) + " players; use --method "
                "leastcore for " + std::to_string(n));
  }
  const auto t0 = Clock::now();
  imputation::OracleOptions oo;
  oo.workers = options.workers;
  oo.electricity_only_attribution = options.electricity_only_attribution;
  const imputation::ScenarioOracle oracle(s, options.mode, oo);
  const conic::SolverConfig& cfg = s.config.solver;

  ImputationReport r;
  r.method = method;
  r.label = std::string(method_name(method));
  if (options.electricity_only_attribution) r.label += "-et";
  for (const ProsumerSpec& p : s.prosumers) r.ids.push_back(p.id);

  switch (method) {
    case ImputationMethod::kShapley:
      r.x = imputation::shapley(oracle).x;
      break;
    case ImputationMethod::kNucleolus:
      r.x = imputation::nucleolus(oracle, cfg).x;
      break;
    case ImputationMethod::kLeastCore: {
      std::unique_ptr<imputation::ExcessSearch> search;
      if (options.search == "membership") {
        search = std::make_unique<imputation::MembershipSearch>(oracle, cfg.node_limit);
      } else if (options.search == "enumeration") {
        search = std::make_unique<imputation::EnumerationSearch>(oracle);
      } else if (options.search == "misocp" || options.search == "misocp-conservative") {
        if (options.electricity_only_attribution) {
          throw Error(ErrorCode::kInvalidValue,
                      "the single-shot search models one characteristic function; "
                      "use membership search with electricity-only attribution");
        }
        search = std::make_unique<imputation::MisocpSearch>(
            s, options.mode,
            options.search == "misocp" ? imputation::RadiusModel::kExact
                                       : imputation::RadiusModel::kConservative,
            cfg);
      } else {
        throw Error(ErrorCode::kInvalidValue, "unknown search '" + options.search + "'");
      }
      const imputation::BendersResult b = imputation::leastcore_benders(oracle, *search, cfg);
      r.x = b.least_core.imputation.x;
      r.mu = b.least_core.mu;
      r.log = b.log;
      if (options.search != "membership") r.label += "-" + options.search;
      break;
    }
  }
  r.grand_value = oracle.value(Coalition::grand(n));
  std::vector<Coalition> singles;
  for (int i = 0; i < n; ++i) singles.push_back(Coalition::singleton(i));
  oracle.prefetch(singles);
  for (Coalition c : singles) r.standalone.push_back(oracle.value(c));
  if (n <= 16) {
    r.core_checked = true;
    r.violations = imputation::check_core(oracle, r.x);
  }
  r.seconds = since(t0);
  return r;
}

void ImputationReport::write_csv(std::ostream& out) const {
  out << "player,id,standalone,payoff,gain\n";
  double total = 0.0, alone = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    out << i << ',' << csv_field(ids[i]) << ',' << money(standalone[i]) << ',' << money(x[i])
        << ',' << money(x[i] - standalone[i]) << '\n';
    total += x[i];
    alone += standalone[i];
  }
  out << "total,," << money(alone) << ',' << money(total) << ',' << money(total - alone)
      << '\n';
}

void ImputationReport::write_violations_csv(std::ostream& out) const {
  out << "coalition,members,excess\n";
  for (const auto& v : violations) {
    out << v.coalition.mask() << ',' << members(v.coalition) << ',' << money(v.excess) << '\n';
  }
}

std::vector<SweepRow> run_sweep(const Scenario& s, const std::vector<double>& multipliers) {
  require_valid(s);
  const Coalition grand = Coalition::grand(s.num_players());
  std::vector<Scenario> scaled;
  for (double m : multipliers) {
    if (!(m > 0)) throw Error(ErrorCode::kInvalidValue, "sweep multipliers must be positive");
    scaled.push_back(scale_tariff(s, m));
  }
  std::vector<SweepRow> rows;
  for (std::size_t k = 0; k < multipliers.size(); ++k) {
    SweepRow row;
    row.multiplier = multipliers[k];
    row.electricity_only =
        dispatch::characteristic_value(scaled[k], grand, DispatchMode::kElectricityOnly);
    row.joint = dispatch::characteristic_value(scaled[k], grand, DispatchMode::kJointData);
    rows.push_back(row);
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "multiplier,case_II,case_III,data_value\n";
  char buf[64];
  for (const SweepRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%g", r.multiplier);
    out << buf << ',' << money(r.electricity_only) << ',' << money(r.joint) << ','
        << money(r.data_value()) << '\n';
  }
}

VerifyResult run_verify(const Scenario& s, Coalition c, DispatchMode mode, int samples,
                        std::uint64_t seed) {
  const auto v = dispatch::coalition_value(s, c, mode);
  VerifyResult r;
  r.coalition = c;
  r.mode = mode;
  r.report = dispatch::verify_robust_feasibility(v->schedule, s, c, mode, samples, seed);
  return r;
}

void write_verify_csv(std::ostream& out, const VerifyResult& r) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3e", r.report.max_violation);
  out << "coalition,members,mode,samples,violations,max_violation,worst\n"
      << r.coalition.mask() << ',' << members(r.coalition) << ','
      << dispatch::mode_name(r.mode) << ',' << r.report.samples << ','
      << r.report.violations << ',' << buf << ','
      << (r.report.worst.empty() ? "none" : csv_field(r.report.worst)) << '\n';
}

void write_schedule_csv(std::ostream& out, const Scenario& s, const DispatchSchedule& d) {
  out << "t,player,pd0,ps,pb,rd_up,rd_dw,rm_up,rm_dw,pg0,rg_up,rg_dw,gamma_d,gamma_m,"
         "gamma_g\n";
  for (int t = 0; t < s.periods(); ++t) {
    for (int i : d.coalition.members()) {
      double pg = 0, up = 0, dw = 0, gg = 0;
      for (std::size_t g = 0; g < d.pg0[i].size(); ++g) {
        pg += d.pg0[i][g][t];
        up += d.rg_up[i][g][t];
        dw += d.rg_dw[i][g][t];
        gg += d.gamma_g[i][g][t];
      }
      out << t << ',' << i;
      for (double v : {d.pd0[i][t], d.ps[i][t], d.pb[i][t], d.rd_up[i][t], d.rd_dw[i][t],
                       d.rm_up[i][t], d.rm_dw[i][t], pg, up, dw, d.gamma_d[i][t],
                       d.gamma_m[i][t], gg}) {
        out << ',' << money(v);
      }
      out << '\n';
    }
  }
}

void write_value_csv(std::ostream& out, const CoalitionValue& v, DispatchMode mode) {
  out << "coalition,members,mode,value,status,iterations,set,budget\n"
      << v.coalition.mask() << ',' << members(v.coalition) << ',' << dispatch::mode_name(mode)
      << ',' << money(v.value) << ',' << conic::status_name(v.status) << ',' << v.iterations
      << ',' << v.set_label << ',' << money(v.budget) << '\n';
}

}  // namespace coopgrid::report
