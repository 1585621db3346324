#include "coopgrid/imputation/subproblem.h"

#include <algorithm>
#include <cmath>

#include "coopgrid/dispatch/characteristic.h"
#include "coopgrid/error.h"
#include "coopgrid/uncertainty/sets.h"

namespace coopgrid::imputation {
namespace {

using conic::kInf;
using conic::Term;

std::string tag(const char* what, int i, int t) {
  return std::string(what) + " i=" + std::to_string(i) + " t=" + std::to_string(t);
}

// A robust row whose radius coefficient the leaf refiner rewrites.
struct RadiusRow {
  int row = 0;
  int tau = 0;
  std::vector<int> q;
};

struct Share {
  int var = 0;
  int owner = 0;
  int reserve_up_side = 0;  // reserve covering S_up
  int reserve_dw_side = 0;  // reserve covering S_dw
  int period = 0;
};

class Builder {
 public:
  Builder(const Scenario& s, dispatch::DispatchMode mode, const std::vector<double>& x,
          RadiusModel model, const conic::SolverConfig& cfg, SubproblemModel& out)
      : s_(s), mode_(mode), x_(x), model_(model), cfg_(cfg), out_(out),
        p_(out.program) {}

  void build() {
    const int n = s_.num_players();
    if (n < 2) throw Error(ErrorCode::kInvalidValue, "no proper coalition exists");
    if (static_cast<int>(x_.size()) != n) {
      throw Error(ErrorCode::kDimensionMismatch, "allocation length differs from N");
    }
    if (mode_ == dispatch::DispatchMode::kIsolated) {
      throw Error(ErrorCode::kModeMismatch, "isolated mode has no coalitions");
    }
    choose_set();
    for (int i = 0; i < n; ++i) {
      out_.membership.push_back(p_.add_binary(x_[i], "I" + std::to_string(i)));
    }
    std::vector<Term> count;
    for (int b : out_.membership) count.push_back({b, 1.0});
    p_.add_row(count, 1.0, n - 1.0, "proper");
    add_data_terms();
    grid_bounds();
    for (int i = 0; i < n; ++i) add_prosumer(i);
    add_balance();
    add_shares();
    add_robust_rows();
    if (model_ == RadiusModel::kExact && !radius_rows_.empty()) install_refiner();
  }

 private:
  double big_m(double bound) const {
    if (cfg_.big_m > 0) return cfg_.big_m;
    return cfg_.big_m_safety * std::max(std::abs(bound), 1e-6);
  }

  int product(int binary, int continuous, double bound, std::string name) {
    return conic::linearize_product(p_, binary, continuous, big_m(bound),
                                    &out_.products, std::move(name));
  }

  int quadratic_epigraph(int x, double q) {
    const int e = p_.add_variable(0.0, kInf, 1.0);
    const int h = p_.add_variable(0.5 / q, 0.5 / q, 0.0);
    p_.add_rotated_cone(e, h, {x});
    return e;
  }

  void choose_set() {
    ellipsoid_ = false;
    const double k_h = s_.contributions.k_h;
    if (s_.uncertainty.ellipsoid && s_.num_drgs() > 0) {
      if (mode_ == dispatch::DispatchMode::kJointData) {
        ellipsoid_ = true;
        varying_ = !s_.contributions.terms.empty();
      } else if (s_.config.electricity_only_set == ElectricityOnlySet::kHistorical) {
        ellipsoid_ = true;
      }
    }
    if (!ellipsoid_) return;
    // rho(s) ~ alpha + slope * s over the attainable range of s.
    double lo = 0.0, hi = 0.0;
    if (varying_) {
      for (const auto& term : s_.contributions.terms) {
        (term.k < 0 ? lo : hi) += term.k;
      }
    }
    if (hi - lo <= 0) {
      varying_ = false;
      alpha_ = std::sqrt(k_h);
      slope_ = 0.0;
      return;
    }
    if (model_ == RadiusModel::kConservative) {
      alpha_ = std::sqrt(k_h);
      slope_ = -0.5 / std::sqrt(k_h);
    } else {
      const double r_lo = std::sqrt(std::max(k_h - lo, 0.0));
      const double r_hi = std::sqrt(std::max(k_h - hi, 0.0));
      slope_ = (r_hi - r_lo) / (hi - lo);
      alpha_ = r_lo - slope_ * lo;
    }
  }

  // z_T = AND of the key's members; singleton keys reuse I directly.
  void add_data_terms() {
    if (!varying_) return;
    for (const auto& term : s_.contributions.terms) {
      const auto members = term.key.members();
      int z = -1;
      if (members.size() == 1) {
        z = out_.membership[members[0]];
      } else {
        z = p_.add_binary(0.0, "z" + term.key.to_string());
        std::vector<Term> all{{z, -1.0}};
        for (int i : members) {
          p_.add_row({{z, 1.0}, {out_.membership[i], -1.0}}, -kInf, 0.0);
          all.push_back({out_.membership[i], 1.0});
        }
        p_.add_row(all, -kInf, members.size() - 1.0);
      }
      z_.push_back({z, term.k});
    }
  }

  void grid_bounds() {
    const int T = s_.periods();
    gen_total_.assign(T, 0.0);
    load_total_.assign(T, 0.0);
    for (const ProsumerSpec& q : s_.prosumers) {
      for (int t = 0; t < T; ++t) {
        for (const MachineSpec& g : q.machines) gen_total_[t] += g.pg_max;
        for (const DrgSpec& w : q.drgs) gen_total_[t] += w.pw0[t];
        load_total_[t] += q.pd_max[t];
      }
    }
    // Per period and block: coefficient of y_{g,j} in L^{-T} Y, center
    // weight of player j, and worst support over any coalition.
    const int D = s_.num_drgs();
    const bool horizon = s_.uncertainty.scope == BudgetScope::kHorizon;
    const int n = s_.num_players();
    s_max_.assign(T, 0.0);
    if (!ellipsoid_) {
      for (int t = 0; t < T; ++t) {
        for (const ProsumerSpec& q : s_.prosumers) {
          for (const DrgSpec& w : q.drgs) s_max_[t] += w.dpw_max[t];
        }
      }
      return;
    }
    const double k_max = std::max(s_.contributions.k_h, alpha_ * alpha_);
    whitened_.assign(T, std::vector<Eigen::VectorXd>(n));
    center_.assign(T, std::vector<double>(n, 0.0));
    tau_max_.assign(T, 0.0);
    for (int t = 0; t < T; ++t) {
      const int b = horizon ? 0 : t;
      const int off = horizon ? t * D : 0;
      const Eigen::VectorXd& c = s_.uncertainty.centers[b];
      const uncertainty::CholFactor f = uncertainty::cholesky(s_.uncertainty.shapes[b]);
      double spread = 0.0;
      for (int j = 0; j < n; ++j) {
        Eigen::VectorXd a = Eigen::VectorXd::Zero(c.size());
        for (std::size_t w = 0; w < s_.prosumers[j].drgs.size(); ++w) {
          const int u = off + s_.drg_index(j, static_cast<int>(w));
          a[u] = 1.0;
          center_[t][j] += c[u];
          spread += std::abs(c[u]);
        }
        whitened_[t][j] = f.solve_transpose(a);
        tau_max_[t] += whitened_[t][j].norm();
      }
      s_max_[t] = spread + std::sqrt(k_max) * tau_max_[t];
    }
  }

  void add_prosumer(int i) {
    const ProsumerSpec& pr = s_.prosumers[i];
    const TariffSchedule& tf = s_.tariff;
    const int T = s_.periods();
    const int member = out_.membership[i];
    ProsumerVars v;
    for (int t = 0; t < T; ++t) {
      const double lo = pr.pd_min[t];
      const double hi = pr.pd_max[t];
      const int pd = p_.add_variable(lo, hi, 0.0, tag("PD", i, t));
      const int id = product(member, pd, std::max(std::abs(lo), std::abs(hi)),
                             tag("ID", i, t));
      p_.cost[id] = -pr.lambda[t];
      if (pr.beta[t] > 0) quadratic_epigraph(id, pr.beta[t]);
      const double sell_cap = std::min(pr.exchange_cap, gen_total_[t]);
      const double buy_cap = std::min(pr.exchange_cap, load_total_[t]);
      const int ps = p_.add_variable(0.0, sell_cap, 0.0, tag("PS", i, t));
      const int pb = p_.add_variable(0.0, buy_cap, 0.0, tag("PB", i, t));
      const int is = product(member, ps, sell_cap, tag("IS", i, t));
      const int ib = product(member, pb, buy_cap, tag("IB", i, t));
      p_.cost[is] = -tf.pi_sell[t];
      p_.cost[ib] = tf.pi_buy[t];
      const int rdu = p_.add_variable(0.0, hi - lo, pr.pi_d_up[t], tag("rd_up", i, t));
      const int rdd = p_.add_variable(0.0, hi - lo, pr.pi_d_dw[t], tag("rd_dw", i, t));
      p_.add_row({{id, 1.0}, {rdu, 1.0}, {member, -hi}}, -kInf, 0.0);
      p_.add_row({{id, 1.0}, {rdd, -1.0}, {member, -lo}}, 0.0, kInf);
      const int rmu = p_.add_variable(0.0, s_max_[t], tf.pi_m_up[t], tag("rm_up", i, t));
      const int rmd = p_.add_variable(0.0, s_max_[t], tf.pi_m_dw[t], tag("rm_dw", i, t));
      p_.add_row({{rmu, 1.0}, {member, -s_max_[t]}}, -kInf, 0.0);
      p_.add_row({{rmd, 1.0}, {member, -s_max_[t]}}, -kInf, 0.0);
      v.injection.push_back({{id, 1.0}, {is, 1.0}, {ib, -1.0}});
      v.rd_up.push_back(rdu);
      v.rd_dw.push_back(rdd);
      v.rm_up.push_back(rmu);
      v.rm_dw.push_back(rmd);
    }
    for (std::size_t g = 0; g < pr.machines.size(); ++g) {
      const MachineSpec& mt = pr.machines[g];
      p_.cost[member] += mt.c * T;
      std::vector<int> up, dw;
      for (int t = 0; t < T; ++t) {
        const int pg = p_.add_variable(0.0, mt.pg_max, 0.0, tag("PG", i, t));
        const int ig = product(member, pg, mt.pg_max, tag("IG", i, t));
        p_.cost[ig] = mt.b;
        if (mt.a > 0) quadratic_epigraph(ig, mt.a);
        const int rgu = p_.add_variable(0.0, mt.pg_max, mt.pi_g_up[t], tag("rg_up", i, t));
        const int rgd = p_.add_variable(0.0, mt.pg_max, mt.pi_g_dw[t], tag("rg_dw", i, t));
        p_.add_row({{ig, 1.0}, {rgu, 1.0}, {member, -mt.pg_max}}, -kInf, 0.0);
        p_.add_row({{ig, 1.0}, {rgd, -1.0}}, 0.0, kInf);
        v.injection[t].push_back({ig, -1.0});
        up.push_back(rgu);
        dw.push_back(rgd);
      }
      v.rg_up.push_back(up);
      v.rg_dw.push_back(dw);
    }
    vars_.push_back(std::move(v));
  }

  void add_balance() {
    for (int t = 0; t < s_.periods(); ++t) {
      std::vector<Term> terms;
      for (int i = 0; i < s_.num_players(); ++i) {
        double forecast = 0.0;
        for (const DrgSpec& w : s_.prosumers[i].drgs) forecast += w.pw0[t];
        for (const Term& term : vars_[i].injection[t]) terms.push_back(term);
        if (forecast != 0) terms.push_back({out_.membership[i], -forecast});
      }
      p_.add_row(std::move(terms), 0.0, 0.0, "balance t=" + std::to_string(t));
    }
  }

  void add_shares() {
    const int T = s_.periods();
    const bool per_period = s_.config.per_period_shares;
    const int blocks = per_period ? T : 1;
    for (int b = 0; b < blocks; ++b) {
      std::vector<Term> sum;
      const int t0 = per_period ? b : 0;
      const int t1 = per_period ? b + 1 : T;
      auto share = [&](int owner, const std::vector<int>& up_side,
                       const std::vector<int>& dw_side, const char* what) {
        const int g = p_.add_variable(0.0, 1.0, 0.0, tag(what, owner, b));
        sum.push_back({g, 1.0});
        p_.add_row({{g, 1.0}, {out_.membership[owner], -1.0}}, -kInf, 0.0);
        std::vector<int> y(s_.num_players());
        for (int j = 0; j < s_.num_players(); ++j) {
          y[j] = product(out_.membership[j], g, 1.0, tag("Y", j, b));
        }
        for (int t = t0; t < t1; ++t) {
          shares_.push_back({g, owner, up_side[t], dw_side[t], t});
          share_products_.push_back(y);
        }
      };
      for (int i = 0; i < s_.num_players(); ++i) {
        const ProsumerVars& v = vars_[i];
        share(i, v.rd_up, v.rd_dw, "gamma_d");
        share(i, v.rm_dw, v.rm_up, "gamma_m");
        for (std::size_t g = 0; g < v.rg_up.size(); ++g) {
          share(i, v.rg_dw[g], v.rg_up[g], "gamma_g");
        }
      }
      p_.add_row(std::move(sum), 1.0, 1.0, "shares b=" + std::to_string(b));
    }
  }

  void add_robust_rows() {
    const int n = s_.num_players();
    for (std::size_t k = 0; k < shares_.size(); ++k) {
      const Share& sh = shares_[k];
      const std::vector<int>& y = share_products_[k];
      const int t = sh.period;
      if (!ellipsoid_) {
        std::vector<Term> row;
        for (int j = 0; j < n; ++j) {
          double w = 0.0;
          for (const DrgSpec& d : s_.prosumers[j].drgs) w += d.dpw_max[t];
          if (w != 0) row.push_back({y[j], w});
        }
        if (row.empty()) continue;
        auto up = row;
        up.push_back({sh.reserve_up_side, -1.0});
        p_.add_row(std::move(up), -kInf, 0.0, tag("robust up", sh.owner, t));
        row.push_back({sh.reserve_dw_side, -1.0});
        p_.add_row(std::move(row), -kInf, 0.0, tag("robust dw", sh.owner, t));
        continue;
      }
      // tau >= ||L^{-T} Y|| with Y_u = y_{owner(u)}.
      const int dim = static_cast<int>(whitened_[t][0].size());
      std::vector<int> tail;
      for (int r = 0; r < dim; ++r) {
        std::vector<Term> def;
        for (int j = 0; j < n; ++j) {
          const double a = whitened_[t][j][r];
          if (a != 0) def.push_back({y[j], -a});
        }
        if (def.empty()) continue;
        const int w = p_.add_variable(-tau_max_[t], tau_max_[t]);
        def.push_back({w, 1.0});
        p_.add_row(std::move(def), 0.0, 0.0);
        tail.push_back(w);
      }
      if (tail.empty()) continue;
      const int tau = p_.add_variable(0.0, tau_max_[t], 0.0, tag("tau", sh.owner, t));
      p_.add_cone(tau, tail);
      std::vector<Term> radius{{tau, alpha_}};
      std::vector<int> qs;
      if (varying_ && slope_ != 0) {
        for (const auto& [z, kz] : z_) {
          const int q = product(z, tau, tau_max_[t], tag("q", sh.owner, t));
          radius.push_back({q, slope_ * kz});
          qs.push_back(q);
        }
      }
      for (int sign : {1, -1}) {
        std::vector<Term> row = radius;
        for (int j = 0; j < n; ++j) {
          if (center_[t][j] != 0) row.push_back({y[j], sign * center_[t][j]});
        }
        row.push_back({sign > 0 ? sh.reserve_up_side : sh.reserve_dw_side, -1.0});
        const int r = p_.add_row(std::move(row), -kInf, 0.0,
                                 tag(sign > 0 ? "robust up" : "robust dw", sh.owner, t));
        if (varying_) radius_rows_.push_back({r, tau, qs});
      }
    }
  }

  void install_refiner() {
    auto rows = radius_rows_;
    auto membership = out_.membership;
    const uncertainty::DataContribution contributions = s_.contributions;
    out_.refiner = [rows, membership, contributions](conic::ConicProgram& leaf) {
      std::uint64_t mask = 0;
      for (std::size_t i = 0; i < membership.size(); ++i) {
        if (leaf.lower[membership[i]] > 0.5) mask |= std::uint64_t{1} << i;
      }
      const double r = uncertainty::effective_budget(contributions, Coalition(mask));
      const double rho = std::sqrt(std::max(r, 0.0));
      for (const RadiusRow& rr : rows) {
        for (Term& term : leaf.rows[rr.row].terms) {
          if (term.var == rr.tau) {
            term.coef = rho;
          } else if (std::find(rr.q.begin(), rr.q.end(), term.var) != rr.q.end()) {
            term.coef = 0.0;
          }
        }
      }
    };
  }

  struct ProsumerVars {
    std::vector<std::vector<Term>> injection;  // [t]
    std::vector<int> rd_up, rd_dw, rm_up, rm_dw;
    std::vector<std::vector<int>> rg_up, rg_dw;  // [machine][t]
  };

  const Scenario& s_;
  dispatch::DispatchMode mode_;
  const std::vector<double>& x_;
  RadiusModel model_;
  const conic::SolverConfig& cfg_;
  SubproblemModel& out_;
  conic::ConicProgram& p_;

  bool ellipsoid_ = false;
  bool varying_ = false;
  double alpha_ = 0.0;
  double slope_ = 0.0;
  std::vector<std::pair<int, double>> z_;
  std::vector<double> gen_total_, load_total_, s_max_, tau_max_;
  std::vector<std::vector<Eigen::VectorXd>> whitened_;  // [t][j]
  std::vector<std::vector<double>> center_;             // [t][j]
  std::vector<ProsumerVars> vars_;
  std::vector<Share> shares_;
  std::vector<std::vector<int>> share_products_;
  std::vector<RadiusRow> radius_rows_;
};

conic::SolverConfig subproblem_config(const Scenario& s, const conic::SolverConfig& cfg) {
  conic::SolverConfig out = s.config.solver;
  out.rel_gap = std::min(cfg.rel_gap, 1e-10);
  out.node_limit = cfg.node_limit;
  out.time_limit = cfg.time_limit;
  out.big_m = cfg.big_m;
  out.big_m_safety = cfg.big_m_safety;
  return out;
}

}  // namespace

std::string_view radius_model_name(RadiusModel model) {
  return model == RadiusModel::kExact ? "exact" : "conservative";
}

SubproblemModel build_subproblem(const Scenario& s, dispatch::DispatchMode mode,
                                 const std::vector<double>& x, RadiusModel model,
                                 const conic::SolverConfig& cfg) {
  require_valid(s);
  SubproblemModel out;
  Builder(s, mode, x, model, cfg, out).build();
  return out;
}

SubproblemResult solve_subproblem_misocp(const Scenario& s, dispatch::DispatchMode mode,
                                         const std::vector<double>& x,
                                         RadiusModel model,
                                         const conic::SolverConfig& cfg) {
  const SubproblemModel m = build_subproblem(s, mode, x, model, cfg);
  conic::MixedOptions options;
  options.refine_leaf = m.refiner;
  const conic::Solution sol = conic::solve_mixed(m.program, subproblem_config(s, cfg),
                                                 options);
  if (sol.x.empty()) {
    throw Error(sol.status == conic::SolveStatus::kInfeasible ? ErrorCode::kInfeasible
                                                              : ErrorCode::kSolverFailure,
                "max-excess program ended " + std::string(conic::status_name(sol.status)));
  }
  SubproblemResult out;
  std::uint64_t mask = 0;
  for (std::size_t i = 0; i < m.membership.size(); ++i) {
    if (sol.x[m.membership[i]] > 0.5) mask |= std::uint64_t{1} << i;
  }
  out.coalition = Coalition(mask);
  out.excess = -sol.objective;
  out.status = sol.status;
  out.nodes = sol.stats.nodes;
  out.audit = conic::audit_big_m(sol.x, m.products);
  out.method = "misocp-" + std::string(radius_model_name(model));
  out.value = dispatch::coalition_value(s, out.coalition, mode);
  return out;
}

SubproblemResult subproblem_max_excess(const Scenario& s, const std::vector<double>& x,
                                       const conic::SolverConfig& cfg,
                                       dispatch::DispatchMode mode) {
  const ScenarioOracle oracle(s, mode);
  const MaxExcess best = MembershipSearch(oracle, cfg.node_limit).maximize(x);
  SubproblemResult out;
  out.coalition = best.coalition;
  out.excess = best.excess;
  out.status = best.proven ? conic::SolveStatus::kOptimal : conic::SolveStatus::kIterLimit;
  out.nodes = best.nodes;
  out.method = "membership";
  out.value = oracle.solved(best.coalition);
  return out;
}

MaxExcess MisocpSearch::maximize(const std::vector<double>& x) const {
  const SubproblemResult r = solve_subproblem_misocp(s_, mode_, x, model_, cfg_);
  MaxExcess out;
  out.coalition = r.coalition;
  out.excess = r.excess;
  out.proven = r.status == conic::SolveStatus::kOptimal;
  out.nodes = r.nodes;
  return out;
}

}  // namespace coopgrid::imputation
