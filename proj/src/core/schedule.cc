#include "coopgrid/core/schedule.h"

#include "coopgrid/error.h"

namespace coopgrid {

DispatchSchedule DispatchSchedule::zeros(const Scenario& s, Coalition c) {
  const int n = s.num_players();
  const int T = s.periods();
  DispatchSchedule d;
  d.coalition = c;
  d.periods = T;
  const PerProsumer flat(n, Series(T, 0.0));
  for (PerProsumer* v : {&d.pd0, &d.ps, &d.pb, &d.rd_up, &d.rd_dw, &d.rm_up,
                         &d.rm_dw, &d.gamma_d, &d.gamma_m}) {
    *v = flat;
  }
  for (PerMachine* v : {&d.pg0, &d.rg_up, &d.rg_dw, &d.gamma_g}) {
    v->resize(n);
    for (int i = 0; i < n; ++i) {
      (*v)[i].assign(s.prosumers[i].machines.size(), Series(T, 0.0));
    }
  }
  return d;
}

double PayoffBreakdown::total() const {
  return sale_revenue - purchase_cost + utility - generation_cost -
         load_reserve_cost - machine_reserve_cost - operator_reserve_up_cost -
         operator_reserve_dw_cost;
}

PayoffBreakdown& PayoffBreakdown::operator+=(const PayoffBreakdown& o) {
  utility += o.utility;
  generation_cost += o.generation_cost;
  sale_revenue += o.sale_revenue;
  purchase_cost += o.purchase_cost;
  load_reserve_cost += o.load_reserve_cost;
  machine_reserve_cost += o.machine_reserve_cost;
  operator_reserve_up_cost += o.operator_reserve_up_cost;
  operator_reserve_dw_cost += o.operator_reserve_dw_cost;
  return *this;
}

namespace {

void check_shape(const Scenario& s, const DispatchSchedule& d) {
  const int n = s.num_players();
  const int T = s.periods();
  auto bad = [] {
    throw Error(ErrorCode::kDimensionMismatch,
                "schedule does not match the scenario dimensions");
  };
  if (d.periods != T) bad();
  for (const PerProsumer* v : {&d.pd0, &d.ps, &d.pb, &d.rd_up, &d.rd_dw,
                               &d.rm_up, &d.rm_dw, &d.gamma_d, &d.gamma_m}) {
    if (static_cast<int>(v->size()) != n) bad();
    for (const Series& x : *v) {
      if (static_cast<int>(x.size()) != T) bad();
    }
  }
  for (const PerMachine* v : {&d.pg0, &d.rg_up, &d.rg_dw, &d.gamma_g}) {
    if (static_cast<int>(v->size()) != n) bad();
    for (int i = 0; i < n; ++i) {
      if ((*v)[i].size() != s.prosumers[i].machines.size()) bad();
      for (const Series& x : (*v)[i]) {
        if (static_cast<int>(x.size()) != T) bad();
      }
    }
  }
}

}  // namespace

PayoffBreakdown payoff_breakdown(const Scenario& s, const DispatchSchedule& d,
                                 int i) {
  check_shape(s, d);
  if (i < 0 || i >= s.num_players()) {
    throw Error(ErrorCode::kDimensionMismatch, "prosumer index out of range");
  }
  const ProsumerSpec& p = s.prosumers[i];
  const TariffSchedule& tf = s.tariff;
  PayoffBreakdown b;
  for (int t = 0; t < s.periods(); ++t) {
    const double pd = d.pd0[i][t];
    b.utility += p.lambda[t] * pd - p.beta[t] * pd * pd;
    b.sale_revenue += tf.pi_sell[t] * d.ps[i][t];
    b.purchase_cost += tf.pi_buy[t] * d.pb[i][t];
    b.load_reserve_cost += p.pi_d_up[t] * d.rd_up[i][t] + p.pi_d_dw[t] * d.rd_dw[i][t];
    b.operator_reserve_up_cost += tf.pi_m_up[t] * d.rm_up[i][t];
    b.operator_reserve_dw_cost += tf.pi_m_dw[t] * d.rm_dw[i][t];
    for (std::size_t m = 0; m < p.machines.size(); ++m) {
      const MachineSpec& g = p.machines[m];
      const double pg = d.pg0[i][m][t];
      b.generation_cost += g.a * pg * pg + g.b * pg + g.c;
      b.machine_reserve_cost +=
          g.pi_g_up[t] * d.rg_up[i][m][t] + g.pi_g_dw[t] * d.rg_dw[i][m][t];
    }
  }
  return b;
}

double evaluate_payoff(const Scenario& s, Coalition c, const DispatchSchedule& d) {
  check_shape(s, d);
  if (!c.subset_of(Coalition::grand(s.num_players()))) {
    throw Error(ErrorCode::kDimensionMismatch, "coalition names unknown prosumers");
  }
  double total = 0.0;
  for (int i : c.members()) total += payoff_breakdown(s, d, i).total();
  return total;
}

}  // namespace coopgrid
