#include "coopgrid/dispatch/robust.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "coopgrid/conic/interior_point.h"
#include "coopgrid/error.h"

namespace coopgrid::dispatch {
namespace {

using conic::kInf;
using conic::Term;

std::string tag(const char* what, int i, int t) {
  return std::string(what) + " i=" + std::to_string(i) + " t=" + std::to_string(t);
}

class Builder {
 public:
  Builder(const Scenario& s, Coalition c, DispatchMode mode, RobustCounterpart& rc)
      : s_(s), c_(c), rc_(rc), p_(rc.program) {
    rc_.coalition = c;
    rc_.mode = mode;
    rc_.set = coalition_set(s, c, mode);
  }

  void build() {
    const int n = s_.num_players();
    const int T = s_.periods();
    VariableMap& m = rc_.map;
    const IndexPerProsumer none(n, IndexSeries(T, -1));
    for (IndexPerProsumer* v : {&m.pd0, &m.ps, &m.pb, &m.rd_up, &m.rd_dw, &m.rm_up,
                                &m.rm_dw, &m.gamma_d, &m.gamma_m}) {
      *v = none;
    }
    for (IndexPerMachine* v : {&m.pg0, &m.rg_up, &m.rg_dw, &m.gamma_g}) {
      v->assign(n, {});
      for (int i = 0; i < n; ++i) {
        (*v)[i].assign(s_.prosumers[i].machines.size(), IndexSeries(T, -1));
      }
    }
    add_shares();
    for (int i : c_.members()) add_prosumer(i);
    add_balance();
    add_robust_rows();
  }

 private:
  int row(std::vector<Term> terms, double lo, double up, std::string label,
          RowClass cls) {
    rc_.row_class.push_back(cls);
    return p_.add_row(std::move(terms), lo, up, std::move(label));
  }

  // Epigraph e >= q * x^2 through 2 * e * h >= x^2 with h fixed to 1/(2q).
  int quadratic_epigraph(int x, double q, const std::string& name) {
    const int e = p_.add_variable(0.0, kInf, 1.0, name);
    const int h = p_.add_variable(0.5 / q, 0.5 / q, 0.0);
    p_.add_rotated_cone(e, h, {x});
    return e;
  }

  void add_shares() {
    const int T = s_.periods();
    const bool per_period = s_.config.per_period_shares;
    const int blocks = per_period ? T : 1;
    VariableMap& m = rc_.map;
    for (int b = 0; b < blocks; ++b) {
      std::vector<Term> sum;
      auto share = [&](const std::string& name) {
        const int v = p_.add_variable(0.0, 1.0, 0.0, name);
        sum.push_back({v, 1.0});
        return v;
      };
      for (int i : c_.members()) {
        const int gd = share(tag("gamma_d", i, b));
        const int gm = share(tag("gamma_m", i, b));
        const int t0 = per_period ? b : 0;
        const int t1 = per_period ? b + 1 : T;
        for (int t = t0; t < t1; ++t) {
          m.gamma_d[i][t] = gd;
          m.gamma_m[i][t] = gm;
        }
        for (std::size_t g = 0; g < s_.prosumers[i].machines.size(); ++g) {
          const int gg = share(tag("gamma_g", i, b));
          for (int t = t0; t < t1; ++t) m.gamma_g[i][g][t] = gg;
        }
      }
      row(std::move(sum), 1.0, 1.0, "shares b=" + std::to_string(b),
          RowClass::kShares);
    }
  }

  void add_prosumer(int i) {
    const ProsumerSpec& pr = s_.prosumers[i];
    const TariffSchedule& tf = s_.tariff;
    const CoalitionSet& set = rc_.set;
    VariableMap& m = rc_.map;
    for (int t = 0; t < s_.periods(); ++t) {
      // Surplus and purchases beyond the coalition's own capacity only net
      // out against each other at a loss, so these caps never bind at an
      // optimum.
      double gen_cap = 0.0;
      double load_cap = 0.0;
      for (int j : c_.members()) {
        const ProsumerSpec& q = s_.prosumers[j];
        for (const MachineSpec& g : q.machines) gen_cap += g.pg_max;
        for (const DrgSpec& w : q.drgs) gen_cap += w.pw0[t];
        load_cap += q.pd_max[t];
      }
      const double lo = pr.pd_min[t];
      const double hi = pr.pd_max[t];
      const int pd = p_.add_variable(lo, hi, -pr.lambda[t], tag("pd0", i, t));
      m.pd0[i][t] = pd;
      if (pr.beta[t] > 0) quadratic_epigraph(pd, pr.beta[t], tag("util", i, t));
      m.ps[i][t] = p_.add_variable(0.0, std::min(pr.exchange_cap, gen_cap),
                                   -tf.pi_sell[t], tag("ps", i, t));
      m.pb[i][t] = p_.add_variable(0.0, std::min(pr.exchange_cap, load_cap),
                                   tf.pi_buy[t], tag("pb", i, t));
      const int rdu = p_.add_variable(0.0, hi - lo, pr.pi_d_up[t], tag("rd_up", i, t));
      const int rdd = p_.add_variable(0.0, hi - lo, pr.pi_d_dw[t], tag("rd_dw", i, t));
      m.rd_up[i][t] = rdu;
      m.rd_dw[i][t] = rdd;
      row({{pd, 1.0}, {rdu, 1.0}}, -kInf, hi, tag("load-up", i, t), RowClass::kBounds);
      row({{pd, 1.0}, {rdd, -1.0}}, lo, kInf, tag("load-dw", i, t), RowClass::kBounds);
      // Operator reserve never needs to exceed the worst deviation.
      m.rm_up[i][t] = p_.add_variable(0.0, std::max(0.0, set.s_dw[t]), tf.pi_m_up[t],
                                      tag("rm_up", i, t));
      m.rm_dw[i][t] = p_.add_variable(0.0, std::max(0.0, set.s_up[t]), tf.pi_m_dw[t],
                                      tag("rm_dw", i, t));
      for (std::size_t g = 0; g < pr.machines.size(); ++g) {
        const MachineSpec& mt = pr.machines[g];
        const int pg = p_.add_variable(0.0, mt.pg_max, mt.b, tag("pg0", i, t));
        m.pg0[i][g][t] = pg;
        if (mt.a > 0) quadratic_epigraph(pg, mt.a, tag("cost", i, t));
        p_.objective_offset += mt.c;
        const int up = p_.add_variable(0.0, mt.pg_max, mt.pi_g_up[t], tag("rg_up", i, t));
        const int dw = p_.add_variable(0.0, mt.pg_max, mt.pi_g_dw[t], tag("rg_dw", i, t));
        m.rg_up[i][g][t] = up;
        m.rg_dw[i][g][t] = dw;
        row({{pg, 1.0}, {up, 1.0}}, -kInf, mt.pg_max, tag("mt-up", i, t),
            RowClass::kBounds);
        row({{pg, 1.0}, {dw, -1.0}}, 0.0, kInf, tag("mt-dw", i, t), RowClass::kBounds);
      }
    }
  }

  void add_balance() {
    const VariableMap& m = rc_.map;
    for (int t = 0; t < s_.periods(); ++t) {
      std::vector<Term> terms;
      double forecast = 0.0;
      for (int i : c_.members()) {
        terms.push_back({m.pd0[i][t], 1.0});
        terms.push_back({m.ps[i][t], 1.0});
        terms.push_back({m.pb[i][t], -1.0});
        for (const IndexSeries& pg : m.pg0[i]) terms.push_back({pg[t], -1.0});
        for (const DrgSpec& w : s_.prosumers[i].drgs) forecast += w.pw0[t];
      }
      row(std::move(terms), forecast, forecast, "balance t=" + std::to_string(t),
          RowClass::kBalance);
    }
  }

  void robust(int share, double support, int reserve, std::string label) {
    if (!(support > 0)) return;
    row({{share, support}, {reserve, -1.0}}, -kInf, 0.0, std::move(label),
        RowClass::kRobust);
    ++rc_.robust_rows;
  }

  void add_robust_rows() {
    const VariableMap& m = rc_.map;
    const CoalitionSet& set = rc_.set;
    for (int t = 0; t < s_.periods(); ++t) {
      const double up = set.s_up[t];
      const double dw = set.s_dw[t];
      for (int i : c_.members()) {
        robust(m.gamma_d[i][t], up, m.rd_up[i][t], tag("robust load-up", i, t));
        robust(m.gamma_d[i][t], dw, m.rd_dw[i][t], tag("robust load-dw", i, t));
        for (std::size_t g = 0; g < m.pg0[i].size(); ++g) {
          robust(m.gamma_g[i][g][t], up, m.rg_dw[i][g][t], tag("robust mt-dw", i, t));
          robust(m.gamma_g[i][g][t], dw, m.rg_up[i][g][t], tag("robust mt-up", i, t));
        }
        robust(m.gamma_m[i][t], up, m.rm_dw[i][t], tag("robust op-dw", i, t));
        robust(m.gamma_m[i][t], dw, m.rm_up[i][t], tag("robust op-up", i, t));
      }
    }
  }

  const Scenario& s_;
  Coalition c_;
  RobustCounterpart& rc_;
  conic::ConicProgram& p_;
};

double pick(const std::vector<double>& x, int idx) { return idx < 0 ? 0.0 : x[idx]; }

void fill(PerProsumer& out, const IndexPerProsumer& idx, const std::vector<double>& x) {
  for (std::size_t i = 0; i < idx.size(); ++i) {
    for (std::size_t t = 0; t < idx[i].size(); ++t) out[i][t] = pick(x, idx[i][t]);
  }
}

void fill(PerMachine& out, const IndexPerMachine& idx, const std::vector<double>& x) {
  for (std::size_t i = 0; i < idx.size(); ++i) fill(out[i], idx[i], x);
}

conic::Solution solve_with_retry(const conic::ConicProgram& p,
                                 const conic::SolverConfig& cfg) {
  conic::Solution sol = conic::solve_continuous(p, cfg);
  if (sol.optimal() || sol.status == conic::SolveStatus::kInfeasible ||
      sol.status == conic::SolveStatus::kUnbounded) {
    return sol;
  }
  conic::SolverConfig loose = cfg;
  loose.feas_tol = std::max(cfg.feas_tol, 1e-8);
  loose.abs_tol *= 100;
  loose.rel_tol *= 100;
  loose.max_iterations = std::max(cfg.max_iterations, 300);
  conic::Solution retry = conic::solve_continuous(p, loose);
  retry.stats.iterations += sol.stats.iterations;
  return retry;
}

std::string diagnose(const RobustCounterpart& rc, const conic::SolverConfig& cfg) {
  struct Group {
    RowClass cls;
    const char* text;
  };
  const Group order[] = {
      {RowClass::kRobust, "reserve capacity cannot cover the uncertainty set"},
      {RowClass::kBalance, "power balance cannot be met within load and generation limits"},
      {RowClass::kBounds, "reserve headroom rows conflict with the operating limits"},
  };
  for (const Group& g : order) {
    conic::ConicProgram q = rc.program;
    bool touched = false;
    for (std::size_t r = 0; r < q.rows.size(); ++r) {
      if (rc.row_class[r] == g.cls) {
        q.rows[r].lower = -kInf;
        q.rows[r].upper = kInf;
        touched = true;
      }
    }
    if (!touched) continue;
    if (conic::solve_continuous(q, cfg).status != conic::SolveStatus::kInfeasible) {
      return g.text;
    }
  }
  return "no single constraint group explains it";
}

}  // namespace

RobustCounterpart build_counterpart(const Scenario& s, Coalition c,
                                    DispatchMode mode) {
  RobustCounterpart rc;
  Builder(s, c, mode, rc).build();
  return rc;
}

DispatchSchedule extract_schedule(const Scenario& s, const RobustCounterpart& rc,
                                  const std::vector<double>& x) {
  DispatchSchedule d = DispatchSchedule::zeros(s, rc.coalition);
  const VariableMap& m = rc.map;
  fill(d.pd0, m.pd0, x);
  fill(d.ps, m.ps, x);
  fill(d.pb, m.pb, x);
  fill(d.rd_up, m.rd_up, x);
  fill(d.rd_dw, m.rd_dw, x);
  fill(d.rm_up, m.rm_up, x);
  fill(d.rm_dw, m.rm_dw, x);
  fill(d.pg0, m.pg0, x);
  fill(d.rg_up, m.rg_up, x);
  fill(d.rg_dw, m.rg_dw, x);
  fill(d.gamma_d, m.gamma_d, x);
  fill(d.gamma_m, m.gamma_m, x);
  fill(d.gamma_g, m.gamma_g, x);
  return d;
}

CoalitionValue solve_dispatch(const Scenario& s, Coalition c, DispatchMode mode) {
  const auto start = std::chrono::steady_clock::now();
  const RobustCounterpart rc = build_counterpart(s, c, mode);
  const conic::SolverConfig& cfg = s.config.solver;
  const conic::Solution sol = solve_with_retry(rc.program, cfg);
  if (sol.status == conic::SolveStatus::kInfeasible) {
    throw Error(ErrorCode::kInfeasible,
                "coalition " + c.to_string() + " in " + std::string(mode_name(mode)) +
                    " mode: " + diagnose(rc, cfg));
  }
  if (sol.status == conic::SolveStatus::kUnbounded) {
    throw Error(ErrorCode::kUnbounded, "coalition " + c.to_string() + " is unbounded");
  }
  if (!sol.optimal()) {
    throw Error(ErrorCode::kSolverFailure,
                "coalition " + c.to_string() + ": solver returned " +
                    std::string(conic::status_name(sol.status)));
  }
  CoalitionValue v;
  v.coalition = c;
  v.schedule = extract_schedule(s, rc, sol.x);
  v.value = evaluate_payoff(s, c, v.schedule);
  v.status = sol.status;
  v.iterations = sol.stats.iterations;
  v.budget = rc.set.ellipsoid ? rc.set.budget : 0.0;
  v.set_label = rc.set.label;
  v.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                  .count();
  return v;
}

Recourse recourse_response(const Scenario& s, const DispatchSchedule& sched,
                           const std::vector<Eigen::VectorXd>& deviation) {
  const int T = s.periods();
  const Coalition c = sched.coalition;
  if (static_cast<int>(deviation.size()) != T || sched.periods != T) {
    throw Error(ErrorCode::kDimensionMismatch, "deviation needs one vector per period");
  }
  int units = 0;
  for (int i : c.members()) units += static_cast<int>(s.prosumers[i].drgs.size());
  Recourse r;
  const DispatchSchedule zero = DispatchSchedule::zeros(s, c);
  r.rd = zero.pd0;
  r.rm = zero.pd0;
  r.rg = zero.pg0;
  r.total_deviation.assign(T, 0.0);
  r.balance_residual.assign(T, 0.0);
  for (int t = 0; t < T; ++t) {
    if (deviation[t].size() != units) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "period " + std::to_string(t) + " deviation has " +
                      std::to_string(deviation[t].size()) + " entries, expected " +
                      std::to_string(units));
    }
    const double d = deviation[t].sum();
    r.total_deviation[t] = d;
    double absorbed = 0.0;
    for (int i : c.members()) {
      r.rd[i][t] = sched.gamma_d[i][t] * d;
      r.rm[i][t] = sched.gamma_m[i][t] * d;
      absorbed += r.rd[i][t] + r.rm[i][t];
      for (std::size_t g = 0; g < r.rg[i].size(); ++g) {
        r.rg[i][g][t] = sched.gamma_g[i][g][t] * d;
        absorbed += r.rg[i][g][t];
      }
    }
    r.balance_residual[t] = absorbed - d;
  }
  return r;
}

ViolationReport verify_robust_feasibility(const DispatchSchedule& sched,
                                          const Scenario& s, Coalition c,
                                          DispatchMode mode, int n_samples,
                                          std::uint64_t seed) {
  const CoalitionSet set = coalition_set(s, c, mode);
  const int T = s.periods();
  const int n = std::max(1, n_samples);
  // Member unit coordinates within a block, in member order.
  std::vector<int> coords;
  std::vector<const DrgSpec*> units;
  for (int i : c.members()) {
    for (std::size_t w = 0; w < s.prosumers[i].drgs.size(); ++w) {
      coords.push_back(s.drg_index(i, static_cast<int>(w)));
      units.push_back(&s.prosumers[i].drgs[w]);
    }
  }
  const bool horizon = s.uncertainty.scope == BudgetScope::kHorizon;
  const int D = s.num_drgs();

  std::vector<std::vector<Eigen::VectorXd>> draws;  // [block][k]
  if (set.ellipsoid) {
    for (std::size_t b = 0; b < set.ellipsoids.size(); ++b) {
      draws.push_back(uncertainty::sample_ellipsoid(
          set.ellipsoids[b], n, seed + 0x9e3779b97f4a7c15ULL * b,
          uncertainty::SampleMode::kBoundary));
    }
  }
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);

  ViolationReport rep;
  rep.samples = n;
  const double tol = 1e-6;
  for (int k = 0; k < n; ++k) {
    std::vector<Eigen::VectorXd> dev(T, Eigen::VectorXd::Zero(coords.size()));
    for (int t = 0; t < T; ++t) {
      for (std::size_t j = 0; j < coords.size(); ++j) {
        if (set.ellipsoid) {
          const Eigen::VectorXd& v = draws[horizon ? 0 : t][k];
          dev[t][j] = v[(horizon ? t * D : 0) + coords[j]];
        } else {
          // Box vertices: every unit at its limit with a random sign.
          const double h = units[j]->dpw_max[t];
          dev[t][j] = coin(rng) ? h : -h;
        }
      }
    }
    const Recourse r = recourse_response(s, sched, dev);
    double worst = 0.0;
    std::string cls;
    auto check = [&](double excess, const char* what) {
      if (excess > worst) {
        worst = excess;
        cls = what;
      }
    };
    for (int t = 0; t < T; ++t) {
      check(std::abs(r.balance_residual[t]), "recourse balance");
      for (int i : c.members()) {
        check(r.rd[i][t] - sched.rd_up[i][t], "load up reserve");
        check(-r.rd[i][t] - sched.rd_dw[i][t], "load down reserve");
        check(r.rm[i][t] - sched.rm_dw[i][t], "operator down reserve");
        check(-r.rm[i][t] - sched.rm_up[i][t], "operator up reserve");
        for (std::size_t g = 0; g < r.rg[i].size(); ++g) {
          check(r.rg[i][g][t] - sched.rg_dw[i][g][t], "machine down reserve");
          check(-r.rg[i][g][t] - sched.rg_up[i][g][t], "machine up reserve");
        }
      }
    }
    if (worst > tol) ++rep.violations;
    if (worst > rep.max_violation) {
      rep.max_violation = worst;
      rep.worst = cls;
    }
  }
  return rep;
}

}  // namespace coopgrid::dispatch
