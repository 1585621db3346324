#include "coopgrid/imputation/benders.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <queue>
#include <set>

#include "coopgrid/error.h"

namespace coopgrid::imputation {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double sum_over(const std::vector<double>& x, std::uint64_t mask) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if ((mask >> i) & 1) s += x[i];
  }
  return s;
}

// Larger excess wins; exact ties go to the smaller mask.
bool better(double e, std::uint64_t m, const MaxExcess& best) {
  if (e > best.excess) return true;
  return e == best.excess && m < best.coalition.mask();
}

}  // namespace

MaxExcess EnumerationSearch::maximize(const std::vector<double>& x) const {
  const auto proper = enumerate_coalitions(o_.num_players(), true);
  o_.prefetch(proper);
  MaxExcess best;
  for (Coalition c : proper) {
    const double e = o_.value(c) - sum_over(x, c.mask());
    ++best.evaluations;
    if (better(e, c.mask(), best)) {
      best.excess = e;
      best.coalition = c;
    }
  }
  best.nodes = best.evaluations;
  return best;
}

MaxExcess MembershipSearch::maximize(const std::vector<double>& x) const {
  const int n = o_.num_players();
  if (n < 2) throw Error(ErrorCode::kInvalidValue, "no proper coalition exists");
  const std::uint64_t grand = Coalition::grand(n).mask();

  std::vector<Coalition> singles;
  for (int i = 0; i < n; ++i) singles.push_back(Coalition::singleton(i));
  o_.prefetch(singles);
  std::vector<double> v1(n), floor(n);
  for (int i = 0; i < n; ++i) {
    v1[i] = o_.value(singles[i]);
    floor[i] = std::min(x[i], v1[i]);
  }

  MaxExcess best;
  std::set<std::uint64_t> seen;
  auto value = [&](std::uint64_t m) {
    if (seen.insert(m).second) ++best.evaluations;
    return o_.value(Coalition(m));
  };
  auto offer = [&](std::uint64_t m, double u) {
    if (m == 0 || m == grand) return;
    const double e = u - sum_over(x, m);
    if (better(e, m, best)) {
      best.excess = e;
      best.coalition = Coalition(m);
    }
  };
  // Singletons are always evaluated, so they seed the incumbent.
  for (int i = 0; i < n; ++i) offer(singles[i].mask(), v1[i]);

  struct Node {
    double bound;
    std::uint64_t in, free;
    long seq;
    bool operator<(const Node& o) const {
      return bound != o.bound ? bound < o.bound : seq > o.seq;
    }
  };
  long seq = 0;
  std::priority_queue<Node> open;
  auto push = [&](std::uint64_t in, std::uint64_t free) {
    const std::uint64_t all = in | free;
    if (all == 0) return;
    const double u = value(all);
    offer(all, u);
    if (free == 0) return;
    double bound = u - sum_over(x, in);
    for (int j = 0; j < n; ++j) {
      if ((free >> j) & 1) bound -= floor[j];
    }
    open.push({bound, in, free, seq++});
  };
  push(0, grand);
  auto pruned = [&](double bound) {
    return bound <= best.excess + 1e-9 * (1.0 + std::abs(best.excess));
  };
  while (!open.empty()) {
    const Node node = open.top();
    open.pop();
    if (pruned(node.bound)) continue;
    if (++best.nodes > node_limit_) {
      best.proven = false;
      break;
    }
    // Branch on the free player whose removal looks most attractive.
    int j = -1;
    double key = -conic::kInf;
    for (int i = 0; i < n; ++i) {
      if (((node.free >> i) & 1) && x[i] - v1[i] > key) {
        key = x[i] - v1[i];
        j = i;
      }
    }
    const std::uint64_t bit = std::uint64_t{1} << j;
    push(node.in, node.free & ~bit);
    push(node.in | bit, node.free & ~bit);
  }
  return best;
}

void BendersLog::write_csv(std::ostream& out, bool timing) const {
  out << "iteration,mu,coalition,excess";
  if (timing) out << ",master_seconds,subproblem_seconds";
  out << '\n';
  char buf[160];
  for (const BendersIteration& it : iterations) {
    std::snprintf(buf, sizeof buf, "%d,%.9f,%llu,%.9f", it.iteration, it.mu,
                  static_cast<unsigned long long>(it.coalition.mask()), it.excess);
    out << buf;
    if (timing) {
      std::snprintf(buf, sizeof buf, ",%.6f,%.6f", it.master_seconds,
                    it.subproblem_seconds);
      out << buf;
    }
    out << '\n';
  }
}

BendersResult leastcore_benders(const CharacteristicOracle& o,
                                const ExcessSearch& search,
                                const conic::SolverConfig& cfg) {
  cfg.check();
  const int n = o.num_players();
  const Coalition grand = Coalition::grand(n);
  const double v_grand = o.value(grand);
  BendersResult out;
  if (n == 1) {
    out.least_core.imputation = {{v_grand}, "leastcore"};
    out.least_core.mu = cfg.mu_min;
    out.log.converged = true;
    return out;
  }
  std::vector<Coalition> singles;
  for (int i = 0; i < n; ++i) singles.push_back(Coalition::singleton(i));
  o.prefetch(singles);
  double box = std::abs(v_grand) + 1.0;
  for (Coalition c : singles) box += std::abs(o.value(c));
  box *= 10.0;

  // Singleton and complement cuts are constraints of the full problem, so
  // they leave the optimum alone, but they bound every x_i from both sides
  // and keep the first masters away from the box corners.
  std::vector<Coalition> cuts;
  std::vector<double> cut_values;
  std::set<std::uint64_t> cut_masks;
  std::vector<Coalition> seeds = singles;
  for (Coalition c : singles) seeds.push_back(Coalition(grand.mask() & ~c.mask()));
  o.prefetch(seeds);
  for (Coalition c : seeds) {
    if (c.empty() || c == grand || !cut_masks.insert(c.mask()).second) continue;
    cuts.push_back(c);
    cut_values.push_back(o.value(c));
  }
  for (int k = 0;; ++k) {
    if (k >= cfg.benders_max_iterations) {
      throw Error(ErrorCode::kIterLimit,
                  "least-core cutting planes stopped after " + std::to_string(k) +
                      " iterations at mu " + std::to_string(out.least_core.mu));
    }
    BendersIteration it;
    it.iteration = k + 1;
    auto t0 = Clock::now();
    LeastCore master = solve_least_core_master(n, v_grand, cuts, cut_values, box, cfg);
    it.master_seconds = seconds_since(t0);
    it.mu = master.mu;
    it.x = master.imputation.x;

    t0 = Clock::now();
    const MaxExcess sub = search.maximize(it.x);
    it.subproblem_seconds = seconds_since(t0);
    it.coalition = sub.coalition;
    it.excess = sub.excess;
    out.log.iterations.push_back(it);
    out.least_core = master;
    out.least_core.imputation.method = "leastcore";

    if (sub.excess <= master.mu + cfg.epsilon) {
      out.log.converged = sub.proven;
      break;
    }
    if (!cut_masks.insert(sub.coalition.mask()).second) {
      // A repeated cut cannot move the master; only solver noise gets here.
      throw Error(ErrorCode::kSolverFailure,
                  "coalition " + sub.coalition.to_string() +
                      " was cut already but still exceeds mu by " +
                      std::to_string(sub.excess - master.mu));
    }
    cuts.push_back(sub.coalition);
    cut_values.push_back(o.value(sub.coalition));
  }
  return out;
}

BendersResult leastcore_benders(const CharacteristicOracle& o,
                                const conic::SolverConfig& cfg) {
  return leastcore_benders(o, MembershipSearch(o, cfg.node_limit), cfg);
}

}  // namespace coopgrid::imputation
