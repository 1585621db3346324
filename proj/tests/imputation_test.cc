#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "coopgrid/conic/interior_point.h"
#include "coopgrid/dispatch/characteristic.h"
#include "coopgrid/error.h"
#include "coopgrid/imputation/allocation.h"
#include "coopgrid/imputation/benders.h"
#include "coopgrid/imputation/subproblem.h"
#include "games.h"
#include "scenarios.h"

using namespace coopgrid;
using namespace coopgrid::imputation;
using dispatch::DispatchMode;
using coopgrid::testing::convex_game;
using coopgrid::testing::permuted;
using coopgrid::testing::random_game;
using coopgrid::testing::shapley_by_orderings;
using coopgrid::testing::true_max_excess;

namespace {

double total(const std::vector<double>& x) { return std::accumulate(x.begin(), x.end(), 0.0); }

void expect_near(const std::vector<double>& a, const std::vector<double>& b, double tol) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], tol) << "i=" << i;
}

Scenario small_scenario(int n, std::uint64_t seed, int periods = 2) {
  coopgrid::testing::RandomSpec spec;
  spec.players = n;
  spec.periods = periods;
  spec.seed = seed;
  return coopgrid::testing::random_scenario(spec);
}

}  // namespace

TEST(Excess, Examples) {
  const TableGame g = TableGame::additive({4.0, 6.0});
  EXPECT_DOUBLE_EQ(excess(g, {5.0, 7.0}, Coalition::grand(2)), -2.0);
  EXPECT_DOUBLE_EQ(excess(g, {4.0, 6.0}, Coalition::singleton(1)), 0.0);
  EXPECT_DOUBLE_EQ(excess(TableGame::glove(), {1, 0, 0}, Coalition::of({1, 2})), 0.0);
}

TEST(Shapley, KnownGames) {
  expect_near(shapley(TableGame::symmetric3()).x, {1, 1, 1}, 1e-12);
  expect_near(shapley(TableGame::additive({1.5, -2, 4, 0.25})).x, {1.5, -2, 4, 0.25},
              1e-12);
  expect_near(shapley(TableGame::glove()).x, {2.0 / 3, 1.0 / 6, 1.0 / 6}, 1e-9);
}

TEST(Shapley, EfficiencyAndPermutationSymmetry) {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 20; ++k) {
    const int n = 2 + k % 7;
    const TableGame g = random_game(n, 100 + k);
    const auto phi = shapley(g).x;
    EXPECT_NEAR(total(phi), g.value(Coalition::grand(n)), 1e-6);
    expect_near(phi, shapley_by_orderings(g), 1e-9);
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const auto psi = shapley(permuted(g, perm)).x;
    for (int i = 0; i < n; ++i) EXPECT_NEAR(psi[perm[i]], phi[i], 1e-9);
  }
}

TEST(Nucleolus, KnownGames) {
  expect_near(nucleolus(TableGame::glove()).x, {1, 0, 0}, 1e-8);
  expect_near(nucleolus(TableGame::symmetric3()).x, {1, 1, 1}, 1e-8);
  expect_near(nucleolus(TableGame::additive({2, -1, 3})).x, {2, -1, 3}, 1e-8);
}

TEST(Nucleolus, PermutationSymmetryAndLeastCoreMembership) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 8; ++k) {
    const int n = 3 + k % 3;
    const TableGame g = random_game(n, 300 + k);
    const auto nu = nucleolus(g).x;
    EXPECT_NEAR(total(nu), g.value(Coalition::grand(n)), 1e-6);
    const LeastCore lc = leastcore_enumeration(g);
    EXPECT_NEAR(true_max_excess(g, nu), lc.mu, 1e-6);
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const auto pn = nucleolus(permuted(g, perm)).x;
    for (int i = 0; i < n; ++i) EXPECT_NEAR(pn[perm[i]], nu[i], 1e-7);
  }
}

// When min and max of every x_i over the least core coincide, the least
// core is a point and must be the nucleolus.
TEST(Nucleolus, MatchesSingletonLeastCore) {
  int singletons = 0;
  for (int k = 0; k < 30; ++k) {
    const int n = 3 + k % 2;
    const TableGame g = random_game(n, 500 + k);
    const LeastCore lc = leastcore_enumeration(g);
    const double width = coopgrid::testing::least_core_width(g, lc);
    if (width > 1e-6) continue;
    ++singletons;
    expect_near(nucleolus(g).x, lc.imputation.x, 1e-6);
  }
  EXPECT_GE(singletons, 3);
}

TEST(CheckCore, Examples) {
  EXPECT_TRUE(check_core(TableGame::glove(), {1, 0, 0}).empty());
  const auto v = check_core(TableGame::glove(), {1.0 / 3, 1.0 / 3, 1.0 / 3});
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v[0].coalition, Coalition::of({0, 1}));
  EXPECT_EQ(v[1].coalition, Coalition::of({0, 2}));
  EXPECT_NEAR(v[0].excess, 1.0 / 3, 1e-12);
  EXPECT_TRUE(check_core(TableGame::additive({1, 2, 3}), {1, 2, 3}).empty());
}

TEST(Guards, PlayerLimits) {
  const TableGame g13 = TableGame::additive(std::vector<double>(13, 1.0));
  const TableGame g17 = TableGame::additive(std::vector<double>(17, 1.0));
  auto code = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kInvalidValue;
  };
  EXPECT_EQ(code([&] { nucleolus(g13); }), ErrorCode::kTooManyPlayers);
  EXPECT_EQ(code([&] { shapley(g17); }), ErrorCode::kTooManyPlayers);
  EXPECT_EQ(code([&] { check_core(g17, std::vector<double>(17, 1.0)); }),
            ErrorCode::kTooManyPlayers);
}

TEST(LeastCore, KnownGames) {
  for (bool benders : {false, true}) {
    auto solve = [&](const TableGame& g) {
      return benders ? leastcore_benders(g).least_core : leastcore_enumeration(g);
    };
    const LeastCore glove = solve(TableGame::glove());
    expect_near(glove.imputation.x, {1, 0, 0}, 1e-6);
    EXPECT_NEAR(glove.mu, 0.0, 1e-6);
    const LeastCore sym = solve(TableGame::symmetric3());
    expect_near(sym.imputation.x, {1, 1, 1}, 1e-6);
    EXPECT_NEAR(sym.mu, -1.0, 1e-6);
    const LeastCore add = solve(TableGame::additive({2, 5, -1}));
    expect_near(add.imputation.x, {2, 5, -1}, 1e-6);
    EXPECT_NEAR(add.mu, 0.0, 1e-6);
  }
}

TEST(Benders, LogInvariantsOnRandomGames) {
  for (int k = 0; k < 10; ++k) {
    const int n = 3 + k % 4;
    const TableGame g = random_game(n, 700 + k);
    const EnumerationSearch search(g);
    const BendersResult r = leastcore_benders(g, search);
    const LeastCore ref = leastcore_enumeration(g);
    EXPECT_TRUE(r.log.converged);
    EXPECT_NEAR(r.least_core.mu, ref.mu, 1e-6);
    EXPECT_LE(true_max_excess(g, r.least_core.imputation.x), ref.mu + 1e-6);
    EXPECT_NEAR(total(r.least_core.imputation.x), g.value(Coalition::grand(n)), 1e-6);
    const auto& its = r.log.iterations;
    ASSERT_FALSE(its.empty());
    EXPECT_LE(its.size(), (std::size_t{1} << n) - 1);
    std::set<std::uint64_t> cut;
    for (std::size_t i = 0; i < its.size(); ++i) {
      if (i > 0) EXPECT_GE(its[i].mu, its[i - 1].mu - 1e-9);
      if (i + 1 < its.size()) {
        EXPECT_TRUE(cut.insert(its[i].coalition.mask()).second);
        // The true least core satisfies every cut.
        EXPECT_LE(excess(g, ref.imputation.x, its[i].coalition), ref.mu + 1e-6);
      }
    }
    EXPECT_LE(std::abs(its.back().excess - its.back().mu), 1e-6 + 1e-12);
  }
}

TEST(Benders, CsvShape) {
  const BendersResult r = leastcore_benders(TableGame::glove());
  std::ostringstream plain, timed;
  r.log.write_csv(plain);
  r.log.write_csv(timed, true);
  EXPECT_EQ(plain.str().rfind("iteration,mu,coalition,excess\n", 0), 0u);
  EXPECT_EQ(timed.str().rfind("iteration,mu,coalition,excess,master_seconds,"
                              "subproblem_seconds\n", 0), 0u);
  const std::string text = plain.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'),
            static_cast<long>(r.log.iterations.size()) + 1);
}

TEST(Benders, IterationCap) {
  conic::SolverConfig cfg;
  cfg.benders_max_iterations = 1;
  try {
    const TableGame g = random_game(8, 3);
    leastcore_benders(g, EnumerationSearch(g), cfg);
    FAIL() << "expected IterLimit";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIterLimit);
  }
}

TEST(MembershipSearch, MatchesEnumerationOnSuperadditiveGames) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 20; ++k) {
    const int n = 3 + k % 6;
    const TableGame g = convex_game(n, 900 + k);
    std::vector<double> x(n);
    const double share = g.value(Coalition::grand(n)) / n;
    for (auto& a : x) a = share * std::uniform_real_distribution<double>(0.2, 1.8)(rng);
    const MaxExcess a = EnumerationSearch(g).maximize(x);
    const MaxExcess b = MembershipSearch(g).maximize(x);
    EXPECT_NEAR(a.excess, b.excess, 1e-12);
    EXPECT_TRUE(b.proven);
    if (n >= 6) EXPECT_LT(b.evaluations, (1L << n) - 2);
  }
}

TEST(Subproblem, MatchesBruteForceOnScenario) {
  const Scenario s = small_scenario(3, 21);
  dispatch::ValueCache cache;
  const ScenarioOracle o(s, DispatchMode::kJointData, {1, false, &cache});
  const double vn = o.value(Coalition::grand(3));
  const std::vector<double> x{0.0, 0.0, vn};
  const SubproblemResult r = subproblem_max_excess(s, x);
  EXPECT_NEAR(r.excess, true_max_excess(o, x), 1e-9);
  EXPECT_NEAR(r.excess, excess(o, x, r.coalition), 1e-9);
  ASSERT_TRUE(r.value);
  EXPECT_EQ(r.value->coalition, r.coalition);
}

TEST(Subproblem, SingleShotAgreesWithMembershipSearch) {
  std::mt19937_64 rng(17);
  for (int k = 0; k < 4; ++k) {
    const int n = 3 + k % 2;
    Scenario s = small_scenario(n, 40 + k, 2);
    if (k == 3) s.config.per_period_shares = true;
    const ScenarioOracle o(s, DispatchMode::kJointData);
    const double share = o.value(Coalition::grand(n)) / n;
    std::vector<double> x(n);
    for (auto& a : x) a = share * std::uniform_real_distribution<double>(0.5, 1.5)(rng);
    const SubproblemResult bb = subproblem_max_excess(s, x);
    const SubproblemResult exact =
        solve_subproblem_misocp(s, DispatchMode::kJointData, x, RadiusModel::kExact);
    EXPECT_NEAR(exact.excess, bb.excess, 1e-6) << "k=" << k;
    EXPECT_TRUE(exact.audit.ok());
    const SubproblemResult cons = solve_subproblem_misocp(
        s, DispatchMode::kJointData, x, RadiusModel::kConservative);
    EXPECT_LE(cons.excess, exact.excess + 1e-6);
    EXPECT_TRUE(cons.audit.ok());
  }
}

TEST(Subproblem, SingleShotBoxSet) {
  coopgrid::testing::RandomSpec spec;
  spec.players = 3;
  spec.periods = 2;
  spec.seed = 61;
  spec.ellipsoid = false;
  const Scenario s = coopgrid::testing::random_scenario(spec);
  const ScenarioOracle o(s, DispatchMode::kJointData);
  const double vn = o.value(Coalition::grand(3));
  const std::vector<double> x{vn / 2, vn / 4, vn / 4};
  const auto r = solve_subproblem_misocp(s, DispatchMode::kJointData, x, RadiusModel::kExact);
  EXPECT_NEAR(r.excess, true_max_excess(o, x), 1e-6);
}

TEST(Benders, ScenarioMatchesEnumerationAndCore) {
  for (int k = 0; k < 4; ++k) {
    const int n = 3 + k;
    const Scenario s = small_scenario(n, 80 + k, 2);
    const ScenarioOracle o(s, DispatchMode::kJointData, {4, false, nullptr});
    const BendersResult r = leastcore_benders(o);
    const LeastCore ref = leastcore_enumeration(o);
    EXPECT_NEAR(r.least_core.mu, ref.mu, 1e-6) << "n=" << n;
    EXPECT_LE(true_max_excess(o, r.least_core.imputation.x), ref.mu + 1e-6);
    EXPECT_LE(r.least_core.mu, 1e-6);
    EXPECT_TRUE(check_core(o, r.least_core.imputation.x).empty());
  }
}

TEST(ScenarioOracle, ElectricityOnlyAttribution) {
  const Scenario s = small_scenario(3, 99);
  Scenario plain = s;
  plain.contributions.terms.clear();
  const ScenarioOracle et(s, DispatchMode::kJointData, {1, true, nullptr});
  const Coalition grand = Coalition::grand(3);
  EXPECT_EQ(et.value(grand),
            dispatch::characteristic_value(s, grand, DispatchMode::kJointData));
  const Coalition pair = Coalition::of({0, 2});
  EXPECT_EQ(et.value(pair),
            dispatch::characteristic_value(plain, pair, DispatchMode::kJointData));
  EXPECT_EQ(et.value(Coalition()), 0.0);
}
