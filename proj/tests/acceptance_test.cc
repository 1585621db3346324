// Prints one PASS/FAIL line per acceptance criterion and exits non-zero if
// any criterion fails. Usage: acceptance_test <coopgrid-cli> [criterion...]

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "coopgrid/dispatch/characteristic.h"
#include "coopgrid/dispatch/robust.h"
#include "coopgrid/error.h"
#include "coopgrid/imputation/allocation.h"
#include "coopgrid/imputation/benders.h"
#include "coopgrid/imputation/subproblem.h"
#include "coopgrid/report/report.h"
#include "coopgrid/report/scenario_io.h"
#include "coopgrid/uncertainty/contribution.h"
#include "coopgrid/uncertainty/sets.h"
#include "games.h"
#include "scenarios.h"

using namespace coopgrid;
using namespace coopgrid::imputation;
using dispatch::DispatchMode;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string cli;

double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

Scenario desk(const char* name) { return report::load_scenario(std::string("data/") + name); }

// The random scenarios shared by criteria 3, 4, 5, 8 and 10.
Scenario small(int n, std::uint64_t seed, int periods = 2) {
  coopgrid::testing::RandomSpec spec;
  spec.players = n;
  spec.periods = periods;
  spec.seed = seed;
  spec.horizon_scope = seed % 5 == 0;
  return coopgrid::testing::random_scenario(spec);
}

Outcome case_ordering() {
  const auto t0 = Clock::now();
  const report::CaseReport r = report::run_cases(desk("desk3.scn"));
  const double secs = since(t0);
  Outcome out;
  for (const auto& c : r.cases) {
    if (!c.ok) return {false, "case " + c.name + " failed: " + c.error};
  }
  const double p1 = r.cases[0].total_payoff, p2 = r.cases[1].total_payoff,
               p3 = r.cases[2].total_payoff;
  const double m12 = (p2 - p1) / std::abs(p1), m23 = (p3 - p2) / std::abs(p2);
  out.pass = m12 >= 0.01 && m23 >= 0.01 && secs <= 10.0;
  out.detail = fmt("I %.2f < II %.2f < III %.2f", p1, p2, p3) +
               fmt(", margins %.2f%% %.2f%%, %.2f s", 100 * m12, 100 * m23, secs);
  return out;
}

Outcome reserve_elimination() {
  const Scenario s = desk("desk3.scn");
  const Coalition grand = Coalition::grand(s.num_players());
  const double shrink = 1.0 - uncertainty::effective_budget(s.contributions, grand) /
                                  s.contributions.k_h;
  const report::CaseReport r = report::run_cases(s);
  auto op = [](const report::CaseRow& c) {
    return c.operator_side.operator_reserve_up_cost + c.operator_side.operator_reserve_dw_cost;
  };
  const double two = op(r.cases[1]), three = op(r.cases[2]);
  Outcome out;
  out.pass = r.cases[1].ok && r.cases[2].ok && shrink >= 0.5 && two > 0 && three <= 0.1 * two;
  out.detail = fmt("budget shrink %.0f%%, operator reserve II %.4f III %.4f", 100 * shrink,
                   two, three);
  return out;
}

// Criteria 3 and 4 share the Benders runs.
struct BendersCheck {
  int instances = 0;
  double worst_mu_gap = 0, worst_excess_gap = -1e300, worst_secs = 0, worst_mu = -1e300;
  int core_failures = 0;
};

const BendersCheck& benders_check() {
  static const BendersCheck check = [] {
    BendersCheck c;
    for (int k = 0; k < 20; ++k) {
      const int n = 3 + k % 4;
      const Scenario s = small(n, 300 + k);
      const ScenarioOracle o(s, DispatchMode::kJointData);
      const auto t0 = Clock::now();
      const BendersResult r = leastcore_benders(o, s.config.solver);
      c.worst_secs = std::max(c.worst_secs, since(t0));
      const LeastCore ref = leastcore_enumeration(o);
      const auto& x = r.least_core.imputation.x;
      c.worst_mu_gap = std::max(c.worst_mu_gap, std::abs(r.least_core.mu - ref.mu));
      c.worst_excess_gap = std::max(
          c.worst_excess_gap, coopgrid::testing::true_max_excess(o, x) - r.least_core.mu);
      c.worst_mu = std::max(c.worst_mu, r.least_core.mu);
      if (!check_core(o, x).empty()) ++c.core_failures;
      ++c.instances;
    }
    // The 3-prosumer desk case joins the core check.
    const Scenario s = desk("desk3.scn");
    const ScenarioOracle o(s, DispatchMode::kJointData);
    const BendersResult r = leastcore_benders(o, s.config.solver);
    c.worst_mu = std::max(c.worst_mu, r.least_core.mu);
    if (!check_core(o, r.least_core.imputation.x).empty()) ++c.core_failures;
    return c;
  }();
  return check;
}

Outcome benders_equivalence() {
  const BendersCheck& c = benders_check();
  Outcome out;
  out.pass = c.worst_mu_gap <= 1e-6 && c.worst_excess_gap <= 1e-6 && c.worst_secs <= 60;
  out.detail = std::to_string(c.instances) + " scenarios" +
               fmt(", max |mu diff| %.2e, max excess - mu %.2e, slowest %.2f s",
                   c.worst_mu_gap, c.worst_excess_gap, c.worst_secs);
  return out;
}

Outcome core_membership() {
  const BendersCheck& c = benders_check();
  Outcome out;
  out.pass = c.worst_mu <= 1e-6 && c.core_failures == 0;
  out.detail = fmt("largest mu %.4f", c.worst_mu) + ", " +
               std::to_string(c.core_failures) + " core violations over " +
               std::to_string(c.instances + 1) + " scenarios";
  return out;
}

Outcome superadditivity() {
  std::mt19937_64 rng(39);
  int pairs = 0;
  double worst = 1e300;
  for (int k = 0; k < 10; ++k) {
    const int n = 3 + k % 4;
    const Scenario s = small(n, 500 + k);
    dispatch::ValueCache cache;
    auto v = [&](std::uint64_t m) {
      return dispatch::characteristic_value(s, Coalition(m), DispatchMode::kJointData, &cache);
    };
    for (int p = 0; p < 10; ++p) {
      // Each player lands in C1, C2 or neither; both sides nonempty.
      std::uint64_t a = 0, b = 0;
      while (a == 0 || b == 0) {
        a = b = 0;
        for (int i = 0; i < n; ++i) {
          const auto side = rng() % 3;
          if (side == 0) a |= std::uint64_t{1} << i;
          if (side == 1) b |= std::uint64_t{1} << i;
        }
      }
      worst = std::min(worst, v(a | b) - v(a) - v(b));
      ++pairs;
    }
  }
  return {worst >= -1e-6, std::to_string(pairs) + " pairs" +
                              fmt(", smallest v(C1+C2) - v(C1) - v(C2) = %.3e", worst)};
}

Outcome shapley_axioms() {
  double eff = 0, sym = 0;
  std::mt19937_64 rng(77);
  for (int k = 0; k < 20; ++k) {
    const int n = 3 + k % 6;
    const TableGame g = coopgrid::testing::random_game(n, 1000 + k);
    const std::vector<double> phi = shapley(g).x;
    double total = 0;
    for (double v : phi) total += v;
    eff = std::max(eff, std::abs(total - g.value(Coalition::grand(n))));
    const std::vector<double> ref = coopgrid::testing::shapley_by_orderings(g);
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    const std::vector<double> pphi = shapley(coopgrid::testing::permuted(g, perm)).x;
    for (int i = 0; i < n; ++i) {
      sym = std::max(sym, std::abs(phi[i] - ref[i]));
      sym = std::max(sym, std::abs(pphi[perm[i]] - phi[i]));
    }
  }
  const std::vector<double> glove = shapley(TableGame::glove()).x;
  const double gerr = std::max({std::abs(glove[0] - 2.0 / 3), std::abs(glove[1] - 1.0 / 6),
                                std::abs(glove[2] - 1.0 / 6)});
  return {eff <= 1e-6 && gerr <= 1e-9 && sym <= 1e-9,
          fmt("efficiency %.1e, glove %.1e, permutation/ordering oracle %.1e on 20 games", eff,
              gerr, sym)};
}

Outcome nucleolus_oracle() {
  const std::vector<double> g = nucleolus(TableGame::glove()).x;
  const double gerr = std::max({std::abs(g[0] - 1), std::abs(g[1]), std::abs(g[2])});
  int singletons = 0;
  double worst = 0;
  for (int k = 0; k < 30; ++k) {
    const int n = 3 + k % 2;
    const TableGame game = coopgrid::testing::random_game(n, 500 + k);
    const LeastCore lc = leastcore_enumeration(game);
    if (coopgrid::testing::least_core_width(game, lc) > 1e-6) continue;
    ++singletons;
    const std::vector<double> x = nucleolus(game).x;
    for (int i = 0; i < n; ++i) worst = std::max(worst, std::abs(x[i] - lc.imputation.x[i]));
  }
  return {gerr <= 1e-8 && singletons > 0 && worst <= 1e-6,
          fmt("glove %.1e; %.0f singleton least cores, max gap %.1e", gerr, singletons, worst)};
}

Outcome robust_feasibility() {
  struct Item {
    Scenario s;
    Coalition c;
    DispatchMode mode;
  };
  std::vector<Item> suite;
  for (const char* name : {"desk1.scn", "desk3.scn"}) {
    const Scenario s = desk(name);
    for (int i = 0; i < s.num_players(); ++i) {
      suite.push_back({s, Coalition::singleton(i), DispatchMode::kIsolated});
    }
    suite.push_back({s, Coalition::grand(s.num_players()), DispatchMode::kElectricityOnly});
    suite.push_back({s, Coalition::grand(s.num_players()), DispatchMode::kJointData});
  }
  for (int k = 0; k < 6; ++k) {
    const Scenario s = small(3 + k % 4, 300 + k);
    suite.push_back({s, Coalition::grand(s.num_players()), DispatchMode::kElectricityOnly});
    suite.push_back({s, Coalition::grand(s.num_players()), DispatchMode::kJointData});
    suite.push_back({s, Coalition(3), DispatchMode::kJointData});
  }
  int bad = 0;
  double worst = 0;
  for (std::size_t k = 0; k < suite.size(); ++k) {
    const Item& it = suite[k];
    const auto v = dispatch::coalition_value(it.s, it.c, it.mode);
    const auto rep =
        dispatch::verify_robust_feasibility(v->schedule, it.s, it.c, it.mode, 10000, 11 + k);
    bad += rep.violations;
    worst = std::max(worst, rep.max_violation);
  }
  return {bad == 0, std::to_string(suite.size()) + " schedules x 10000 samples, " +
                        std::to_string(bad) + fmt(" violations, largest excess %.2e", worst)};
}

Outcome support_function() {
  std::mt19937_64 rng(91);
  std::normal_distribution<double> g;
  double worst_rel = 0, worst_scale = 0;
  for (int k = 0; k < 50; ++k) {
    const int n = 2 + k % 2;
    Eigen::MatrixXd b(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) b(i, j) = g(rng);
    const Eigen::MatrixXd q = b * b.transpose() + 0.5 * Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd c(n), a(n);
    for (int i = 0; i < n; ++i) {
      c[i] = 0.2 * g(rng);
      a[i] = g(rng);
    }
    const double r = 0.2 + std::abs(g(rng));
    const uncertainty::EllipsoidSet e(c, q, r);
    const double exact = uncertainty::support_ellipsoid(a, e);
    double best = -1e300;
    for (const auto& d : uncertainty::sample_ellipsoid(e, 100000, 100 + k,
                                                       uncertainty::SampleMode::kBoundary)) {
      best = std::max(best, a.dot(d));
    }
    worst_rel = std::max(worst_rel, std::abs(best - exact) / std::abs(exact));
    // Support minus the centre term scales with sqrt(r).
    const double unit = uncertainty::support_ellipsoid(a, e.with_budget(1.0)) - a.dot(c);
    worst_scale = std::max(worst_scale, std::abs((exact - a.dot(c)) - std::sqrt(r) * unit));
  }
  return {worst_rel <= 1e-3 && worst_scale <= 1e-10,
          fmt("max relative error vs sampling %.2e, sqrt(r) identity %.1e", worst_rel,
              worst_scale)};
}

Outcome linearization() {
  std::mt19937_64 rng(17);
  double worst = 0;
  int audits = 0, runs = 0;
  for (int k = 0; k < 6; ++k) {
    const int n = 3 + k % 4;
    Scenario s = small(n, 700 + k);
    if (k == 4) s.config.per_period_shares = true;
    const ScenarioOracle o(s, DispatchMode::kJointData);
    const double share = o.value(Coalition::grand(n)) / n;
    std::vector<double> x(n);
    for (auto& a : x) a = share * std::uniform_real_distribution<double>(0.5, 1.5)(rng);
    const SubproblemResult bb = subproblem_max_excess(s, x, s.config.solver);
    const SubproblemResult mi = solve_subproblem_misocp(s, DispatchMode::kJointData, x,
                                                        RadiusModel::kExact, s.config.solver);
    worst = std::max(worst, std::abs(mi.excess - bb.excess));
    if (!mi.audit.ok()) ++audits;
    ++runs;
  }
  return {worst <= 1e-6 && audits == 0,
          std::to_string(runs) + fmt(" scenarios, max |misocp - membership| %.2e", worst) +
              ", " + std::to_string(audits) + " big-M audit failures"};
}

Outcome scalability() {
  const Scenario s = desk("desk16.scn");
  const ScenarioOracle o(s, DispatchMode::kJointData);
  const auto t0 = Clock::now();
  const BendersResult r = leastcore_benders(o, s.config.solver);
  const double secs = since(t0);
  const auto& its = r.log.iterations;
  double drop = 0;
  for (std::size_t i = 1; i < its.size(); ++i) drop = std::max(drop, its[i - 1].mu - its[i].mu);
  const bool monotone = drop <= 1e-9 * (1 + std::abs(r.least_core.mu));
  return {r.log.converged && its.size() <= 200 && secs <= 1800 && monotone,
          std::to_string(its.size()) + " iterations" +
              fmt(", %.1f s, mu %.4f, largest master decrease %.1e", secs, r.least_core.mu,
                  drop)};
}

Outcome price_sweep() {
  const auto rows = report::run_sweep(desk("desk3.scn"), {0.5, 1.0, 1.5, 2.0});
  bool ok = true;
  std::string values;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (k > 0 && rows[k].data_value() < rows[k - 1].data_value() - 1e-9) ok = false;
    values += (k ? " " : "") + fmt("%.2f", rows[k].data_value());
  }
  return {ok, "data value " + values};
}

std::string run(const std::string& args) {
  const std::string cmd = cli + " " + args + " 2>&1";
  std::FILE* p = popen(cmd.c_str(), "r");
  if (!p) return "<popen failed>";
  std::string out;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) out.append(buf.data(), n);
  const int status = pclose(p);
  return out + "\n<exit " + std::to_string(status) + ">";
}

Outcome determinism() {
  const std::vector<std::string> commands = {
      "validate data/desk3.scn",
      "solve data/desk3.scn -j 1",
      "solve data/desk1.scn -m electricity -j 1",
      "value data/desk3.scn -c 5 -m joint -j 1",
      "cases data/desk3.scn -j 1",
      "impute data/desk3.scn --method shapley -j 1",
      "impute data/desk3.scn --method nucleolus -j 1",
      "impute data/desk3.scn --method leastcore -j 1",
      "impute data/desk3.scn --method leastcore --search misocp -j 1",
      "sweep data/desk3.scn -j 1",
      "verify data/desk3.scn -c 7 -n 2000 --seed 5 -j 1",
      "dump-program data/desk1.scn -c 1 -m joint",
  };
  int differing = 0;
  std::string which;
  for (const auto& c : commands) {
    if (run(c) != run(c)) {
      ++differing;
      which += " [" + c + "]";
    }
  }
  return {differing == 0, std::to_string(commands.size()) + " commands run twice, " +
                              std::to_string(differing) + " differ" + which};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance_test <coopgrid-cli> [criterion...]\n";
    return 2;
  }
  cli = argv[1];
  std::set<int> only;
  for (int i = 2; i < argc; ++i) only.insert(std::stoi(argv[i]));

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"case ordering", case_ordering},
      {"reserve elimination", reserve_elimination},
      {"benders matches enumeration", benders_equivalence},
      {"core membership", core_membership},
      {"superadditivity", superadditivity},
      {"shapley axioms", shapley_axioms},
      {"nucleolus oracle", nucleolus_oracle},
      {"robust feasibility", robust_feasibility},
      {"support function", support_function},
      {"big-M linearization", linearization},
      {"scalability", scalability},
      {"price sweep", price_sweep},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, criteria[k].first,
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
