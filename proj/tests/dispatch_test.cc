#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "coopgrid/conic/interior_point.h"
#include "coopgrid/dispatch/characteristic.h"
#include "coopgrid/dispatch/robust.h"
#include "scenarios.h"

namespace coopgrid::dispatch {
namespace {

using testing::fixed_load_prosumer;
using testing::random_scenario;

TEST(SolveDispatch, UniqueFeasiblePoint) {
  const Scenario s = fixed_load_prosumer();
  const CoalitionValue v = solve_dispatch(s, Coalition(1), DispatchMode::kJointData);
  EXPECT_NEAR(v.value, 5.0, 1e-7);
  EXPECT_NEAR(v.schedule.pb[0][0], 1.0, 1e-7);
}

TEST(SolveDispatch, CertainRenewableCoversLoad) {
  Scenario s = fixed_load_prosumer();
  s.prosumers[0].drgs.push_back({{1.0}, {0.0}});
  const CoalitionValue v = solve_dispatch(s, Coalition(1), DispatchMode::kElectricityOnly);
  EXPECT_NEAR(v.value, 10.0, 1e-7);
  EXPECT_NEAR(v.schedule.pb[0][0], 0.0, 1e-7);
}

TEST(SolveDispatch, OperatorIsOnlyReserveProvider) {
  Scenario s = fixed_load_prosumer();
  s.prosumers[0].drgs.push_back({{1.0}, {0.2}});
  const CoalitionValue v = solve_dispatch(s, Coalition(1), DispatchMode::kElectricityOnly);
  EXPECT_NEAR(v.value, 9.6, 1e-7);
  EXPECT_NEAR(v.schedule.gamma_m[0][0], 1.0, 1e-7);
  EXPECT_NEAR(v.schedule.rm_up[0][0], 0.2, 1e-7);
  EXPECT_NEAR(v.schedule.rm_dw[0][0], 0.2, 1e-7);
}

TEST(Counterpart, NoRenewableHasNoRobustRows) {
  const Scenario s = fixed_load_prosumer();
  const RobustCounterpart rc = build_counterpart(s, Coalition(1), DispatchMode::kJointData);
  EXPECT_EQ(rc.robust_rows, 0);
  EXPECT_TRUE(rc.program.cones.empty());
  int balance = 0;
  for (std::size_t r = 0; r < rc.program.rows.size(); ++r) {
    if (rc.row_class[r] != RowClass::kBalance) continue;
    ++balance;
    const conic::LinearRow& row = rc.program.rows[r];
    EXPECT_EQ(row.lower, 0.0);
    EXPECT_EQ(row.upper, 0.0);
    // pd0 + ps - pb
    ASSERT_EQ(row.terms.size(), 3u);
  }
  EXPECT_EQ(balance, 1);
}

TEST(Counterpart, RobustRowCount) {
  testing::RandomSpec spec;
  spec.players = 3;
  spec.periods = 24;
  const Scenario s = random_scenario(spec);
  const RobustCounterpart rc = build_counterpart(s, Coalition(7), DispatchMode::kJointData);
  int loads = 3;
  int machines = 0;
  for (const ProsumerSpec& p : s.prosumers) machines += static_cast<int>(p.machines.size());
  EXPECT_EQ(rc.robust_rows, 24 * (2 * loads + 2 * machines + 2 * 3));
}

TEST(Counterpart, Guards) {
  const Scenario s = random_scenario({});
  try {
    build_counterpart(s, Coalition(3), DispatchMode::kIsolated);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kModeMismatch);
  }
  try {
    build_counterpart(s, Coalition(), DispatchMode::kJointData);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyCoalition);
  }
}

TEST(Counterpart, VariableMapIsInjective) {
  const Scenario s = random_scenario({.players = 3, .periods = 2});
  const RobustCounterpart rc = build_counterpart(s, Coalition(5), DispatchMode::kJointData);
  std::vector<int> owners(rc.program.num_vars(), 0);
  const VariableMap& m = rc.map;
  for (const IndexPerProsumer* v : {&m.pd0, &m.ps, &m.pb, &m.rd_up, &m.rd_dw, &m.rm_up,
                                    &m.rm_dw}) {
    for (std::size_t i = 0; i < v->size(); ++i) {
      for (int idx : (*v)[i]) {
        EXPECT_EQ(idx >= 0, rc.coalition.contains(static_cast<int>(i)));
        if (idx >= 0) ++owners[idx];
      }
    }
  }
  for (const IndexPerMachine* v : {&m.pg0, &m.rg_up, &m.rg_dw}) {
    for (const auto& pi : *v) {
      for (const auto& series : pi) {
        for (int idx : series) {
          if (idx >= 0) ++owners[idx];
        }
      }
    }
  }
  for (int count : owners) EXPECT_LE(count, 1);
}

TEST(SolveDispatch, ObjectiveMatchesPayoffAndSharesSumToOne) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    testing::RandomSpec spec;
    spec.players = 4;
    spec.periods = 3;
    spec.seed = seed;
    spec.horizon_scope = seed % 2 == 0;
    Scenario s = random_scenario(spec);
    s.config.per_period_shares = seed == 5;
    for (DispatchMode mode : {DispatchMode::kElectricityOnly, DispatchMode::kJointData}) {
      const Coalition c(seed % 2 ? 15 : 11);
      const RobustCounterpart rc = build_counterpart(s, c, mode);
      const conic::Solution sol = conic::solve_continuous(rc.program, s.config.solver);
      ASSERT_TRUE(sol.optimal());
      const DispatchSchedule d = extract_schedule(s, rc, sol.x);
      const double payoff = evaluate_payoff(s, c, d);
      EXPECT_NEAR(-sol.objective, payoff, 1e-6 * (1 + std::abs(payoff)));
      for (int t = 0; t < s.periods(); ++t) {
        double total = 0.0;
        for (int i : c.members()) {
          for (double g : {d.gamma_d[i][t], d.gamma_m[i][t]}) {
            EXPECT_GE(g, -1e-8);
            EXPECT_LE(g, 1 + 1e-8);
            total += g;
          }
          for (const auto& gg : d.gamma_g[i]) total += gg[t];
        }
        EXPECT_NEAR(total, 1.0, 1e-8);
      }
    }
  }
}

TEST(Characteristic, Superadditive) {
  std::mt19937_64 rng(21);
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const Scenario s = random_scenario({.players = 5, .periods = 3, .seed = seed});
    ValueCache cache;
    for (int k = 0; k < 8; ++k) {
      const std::uint64_t a = (rng() & 31) | 1;
      const std::uint64_t b = rng() & 31 & ~a;
      if (b == 0) continue;
      const double v1 = characteristic_value(s, Coalition(a), DispatchMode::kJointData, &cache);
      const double v2 = characteristic_value(s, Coalition(b), DispatchMode::kJointData, &cache);
      const double v12 =
          characteristic_value(s, Coalition(a | b), DispatchMode::kJointData, &cache);
      EXPECT_GE(v12, v1 + v2 - 1e-6) << "seed " << seed << " a=" << a << " b=" << b;
    }
  }
}

TEST(Characteristic, JointDataDominatesHistoricalEllipsoid) {
  Scenario s = random_scenario({.players = 4, .periods = 3, .seed = 8});
  s.config.electricity_only_set = ElectricityOnlySet::kHistorical;
  ValueCache cache;
  for (std::uint64_t m = 1; m < 16; ++m) {
    const double joint = characteristic_value(s, Coalition(m), DispatchMode::kJointData, &cache);
    const double elec =
        characteristic_value(s, Coalition(m), DispatchMode::kElectricityOnly, &cache);
    EXPECT_GE(joint, elec - 1e-6);
  }
}

TEST(Characteristic, PayoffMonotoneInBudget) {
  Scenario s = random_scenario({.players = 3, .periods = 2, .seed = 9});
  s.config.electricity_only_set = ElectricityOnlySet::kHistorical;
  s.contributions.terms.clear();
  double previous = 1e300;
  for (double r : {0.25, 0.5, 1.0, 2.0, 4.0}) {
    s.contributions.k_h = r;
    const double v = solve_dispatch(s, Coalition(7), DispatchMode::kElectricityOnly).value;
    EXPECT_LE(v, previous + 1e-6);
    previous = v;
  }
}

TEST(Characteristic, EmptyIsZeroAndCacheIsBitIdentical) {
  const Scenario s = random_scenario({.players = 3, .periods = 2, .seed = 4});
  ValueCache cache;
  EXPECT_EQ(characteristic_value(s, Coalition(), DispatchMode::kJointData, &cache), 0.0);
  const double a = characteristic_value(s, Coalition(5), DispatchMode::kJointData, &cache);
  const double b = characteristic_value(s, Coalition(5), DispatchMode::kJointData, &cache);
  EXPECT_EQ(std::memcmp(&a, &b, sizeof a), 0);
  EXPECT_EQ(cache.size(), 1u);
}

TEST(Characteristic, ParallelPrefetchMatchesSerial) {
  const Scenario s = random_scenario({.players = 4, .periods = 2, .seed = 6});
  ValueCache serial, parallel;
  const auto all = enumerate_coalitions(4, false);
  prefetch_values(s, all, DispatchMode::kJointData, 4, &parallel);
  EXPECT_EQ(parallel.size(), 15u);
  for (Coalition c : all) {
    const double a = characteristic_value(s, c, DispatchMode::kJointData, &serial);
    const double b = characteristic_value(s, c, DispatchMode::kJointData, &parallel);
    EXPECT_EQ(std::memcmp(&a, &b, sizeof a), 0);
  }
}

TEST(SolveDispatch, InfeasibleBalanceIsDiagnosed) {
  Scenario s = fixed_load_prosumer();
  s.prosumers[0].exchange_cap = 0.0;
  try {
    solve_dispatch(s, Coalition(1), DispatchMode::kJointData);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInfeasible);
    EXPECT_NE(std::string(e.what()).find("balance"), std::string::npos) << e.what();
  }
}

TEST(Recourse, Examples) {
  Scenario s = fixed_load_prosumer();
  s.prosumers[0].drgs.push_back({{1.0}, {0.2}});
  DispatchSchedule d = DispatchSchedule::zeros(s, Coalition(1));
  d.gamma_m[0][0] = 1.0;
  Recourse r = recourse_response(s, d, {Eigen::VectorXd::Constant(1, 0.15)});
  EXPECT_DOUBLE_EQ(r.rm[0][0], 0.15);
  EXPECT_DOUBLE_EQ(r.rd[0][0], 0.0);
  r = recourse_response(s, d, {Eigen::VectorXd::Zero(1)});
  EXPECT_DOUBLE_EQ(r.rm[0][0], 0.0);
  d.gamma_m[0][0] = 0.5;
  d.gamma_d[0][0] = 0.5;
  r = recourse_response(s, d, {Eigen::VectorXd::Constant(1, -0.3)});
  EXPECT_DOUBLE_EQ(r.rd[0][0], -0.15);
  EXPECT_DOUBLE_EQ(r.rm[0][0], -0.15);
  EXPECT_EQ(r.balance_residual[0], 0.0);
  EXPECT_THROW(recourse_response(s, d, {Eigen::VectorXd::Zero(2)}), Error);
}

TEST(Verify, OptimalSchedulesHoldOnBoundarySamples) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    testing::RandomSpec spec;
    spec.players = 3;
    spec.periods = 3;
    spec.seed = seed;
    spec.horizon_scope = seed == 2;
    const Scenario s = random_scenario(spec);
    for (DispatchMode mode : {DispatchMode::kElectricityOnly, DispatchMode::kJointData}) {
      const Coalition c(seed == 3 ? 6 : 7);
      const CoalitionValue v = solve_dispatch(s, c, mode);
      const ViolationReport rep = verify_robust_feasibility(v.schedule, s, c, mode, 10000, seed);
      EXPECT_EQ(rep.violations, 0) << rep.worst << " " << rep.max_violation;
      EXPECT_EQ(rep.samples, 10000);
    }
  }
}

TEST(Verify, ReducedReserveIsCaught) {
  const Scenario s = random_scenario({.players = 3, .periods = 2, .seed = 2});
  const Coalition c(7);
  const CoalitionValue v = solve_dispatch(s, c, DispatchMode::kJointData);
  DispatchSchedule d = v.schedule;
  // Halve every reserve that is actually used.
  for (PerProsumer* r : {&d.rd_up, &d.rd_dw, &d.rm_up, &d.rm_dw}) {
    for (Series& x : *r) {
      for (double& e : x) e *= 0.5;
    }
  }
  for (PerMachine* r : {&d.rg_up, &d.rg_dw}) {
    for (PerProsumer& pi : *r) {
      for (Series& x : pi) {
        for (double& e : x) e *= 0.5;
      }
    }
  }
  const ViolationReport rep = verify_robust_feasibility(d, s, c, DispatchMode::kJointData, 10000, 1);
  EXPECT_GT(rep.violations, 0);
}

TEST(Verify, ZeroUncertainty) {
  Scenario s = fixed_load_prosumer();
  s.prosumers[0].drgs.push_back({{1.0}, {0.0}});
  const CoalitionValue v = solve_dispatch(s, Coalition(1), DispatchMode::kElectricityOnly);
  const ViolationReport rep = verify_robust_feasibility(
      v.schedule, s, Coalition(1), DispatchMode::kElectricityOnly, 1000, 3);
  EXPECT_EQ(rep.violations, 0);
  EXPECT_EQ(rep.max_violation, 0.0);
}

}  // namespace
}  // namespace coopgrid::dispatch
