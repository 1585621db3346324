#include "coopgrid/imputation/allocation.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "coopgrid/conic/interior_point.h"
#include "coopgrid/error.h"

namespace coopgrid::imputation {
namespace {

void require_players(const CharacteristicOracle& o, int limit, const char* what) {
  if (o.num_players() > limit) {
    throw Error(ErrorCode::kTooManyPlayers,
                std::string(what) + " supports at most " + std::to_string(limit) +
                    " players");
  }
}

double sum_over(const std::vector<double>& x, std::uint64_t mask) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if ((mask >> i) & 1) s += x[i];
  }
  return s;
}

double scale_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double a : v) m = std::max(m, std::abs(a));
  return 1.0 + m;
}

void check_solved(const conic::Solution& sol, const char* what) {
  if (!sol.optimal()) {
    throw Error(ErrorCode::kSolverFailure,
                std::string(what) + " LP ended " +
                    std::string(conic::status_name(sol.status)));
  }
}

}  // namespace

double excess(const CharacteristicOracle& o, const std::vector<double>& x,
              Coalition c) {
  return o.value(c) - sum_over(x, c.mask());
}

Imputation shapley(const CharacteristicOracle& o) {
  require_players(o, 16, "shapley");
  const int n = o.num_players();
  const auto v = value_table(o);
  std::vector<double> fact(n + 1, 1.0);
  for (int k = 1; k <= n; ++k) fact[k] = fact[k - 1] * k;
  std::vector<double> weight(n);
  for (int s = 0; s < n; ++s) weight[s] = fact[s] * fact[n - s - 1] / fact[n];

  std::vector<double> phi(n, 0.0);
  for (std::uint64_t m = 0; m < v.size(); ++m) {
    const int s = std::popcount(m);
    for (int i = 0; i < n; ++i) {
      if ((m >> i) & 1) continue;
      phi[i] += weight[s] * (v[m | (std::uint64_t{1} << i)] - v[m]);
    }
  }
  return {phi, "shapley"};
}

std::vector<CoreViolation> check_core(const CharacteristicOracle& o,
                                      const std::vector<double>& x, double tol) {
  require_players(o, 16, "check_core");
  const auto coalitions = enumerate_coalitions(o.num_players(), true);
  o.prefetch(coalitions);
  std::vector<CoreViolation> out;
  for (Coalition c : coalitions) {
    const double e = excess(o, x, c);
    if (e > tol) out.push_back({c, e});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.excess > b.excess; });
  return out;
}

conic::SolverConfig lp_config(const conic::SolverConfig& cfg) {
  conic::SolverConfig lp = cfg;
  lp.feas_tol = std::min(cfg.feas_tol, 1e-9);
  lp.abs_tol = std::min(cfg.abs_tol, 1e-10);
  lp.rel_tol = std::min(cfg.rel_tol, 1e-11);
  lp.max_iterations = std::max(cfg.max_iterations, 200);
  return lp;
}

LeastCore solve_least_core_master(int n, double grand_value,
                                  const std::vector<Coalition>& cuts,
                                  const std::vector<double>& cut_values,
                                  double box, const conic::SolverConfig& cfg) {
  const auto lp = lp_config(cfg);
  conic::ConicProgram p;
  std::vector<int> x(n);
  for (int i = 0; i < n; ++i) x[i] = p.add_variable(-box, box, 0.0, "x" + std::to_string(i));
  const int mu = p.add_variable(cfg.mu_min, conic::kInf, 1.0, "mu");
  std::vector<conic::Term> sum;
  for (int i = 0; i < n; ++i) sum.push_back({x[i], 1.0});
  p.add_row(sum, grand_value, grand_value, "grand");
  for (std::size_t k = 0; k < cuts.size(); ++k) {
    std::vector<conic::Term> row{{mu, 1.0}};
    for (int i : cuts[k].members()) row.push_back({x[i], 1.0});
    p.add_row(row, cut_values[k], conic::kInf, "cut" + std::to_string(k));
  }
  const auto first = conic::solve_continuous(p, lp);
  check_solved(first, "least-core");
  const double mu_star = first.x[mu];

  // Minimum-norm allocation within the optimal face.
  const double slack = 1e-9 * (1.0 + std::abs(mu_star));
  p.cost.assign(p.num_vars(), 0.0);
  p.upper[mu] = mu_star + slack;
  const int t = p.add_variable(0.0, conic::kInf, 1.0, "norm");
  p.add_cone(t, x);
  auto second = conic::solve_continuous(p, lp);
  LeastCore out;
  out.mu = mu_star;
  const auto& sol = second.optimal() ? second.x : first.x;
  out.imputation.x.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    out.imputation.x[i] = sol[x[i]];
    if (std::abs(sol[x[i]]) > box * (1.0 - 1e-6)) out.box_active = true;
  }
  out.imputation.method = "leastcore";
  return out;
}

LeastCore leastcore_enumeration(const CharacteristicOracle& o,
                                const conic::SolverConfig& cfg) {
  require_players(o, 16, "least-core enumeration");
  const int n = o.num_players();
  const auto v = value_table(o);
  const auto proper = enumerate_coalitions(n, true);
  std::vector<double> values;
  for (Coalition c : proper) values.push_back(v[c.mask()]);
  const double box = 4.0 * n * scale_of(v);
  auto out = solve_least_core_master(n, v.back(), proper, values, box, cfg);
  out.imputation.method = "leastcore-enum";
  return out;
}

namespace {

// Rank tracker over characteristic vectors; rows kept orthonormalized.
class Span {
 public:
  explicit Span(int n) : n_(n) {}
  int rank() const { return static_cast<int>(basis_.size()); }
  bool contains(std::uint64_t mask) const { return residual(mask).norm() < 1e-9; }
  bool add(std::uint64_t mask) {
    Eigen::VectorXd r = residual(mask);
    const double nr = r.norm();
    if (nr < 1e-9) return false;
    basis_.push_back(r / nr);
    return true;
  }

 private:
  Eigen::VectorXd residual(std::uint64_t mask) const {
    Eigen::VectorXd r(n_);
    for (int i = 0; i < n_; ++i) r[i] = ((mask >> i) & 1) ? 1.0 : 0.0;
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& b : basis_) r -= b.dot(r) * b;
    }
    return r;
  }
  int n_;
  std::vector<Eigen::VectorXd> basis_;
};

struct Fixed {
  std::uint64_t mask;
  double excess;
};

}  // namespace

Imputation nucleolus(const CharacteristicOracle& o, const conic::SolverConfig& cfg) {
  require_players(o, 12, "nucleolus");
  const int n = o.num_players();
  const auto v = value_table(o);
  const std::uint64_t grand = v.size() - 1;
  if (n == 1) return {{v[1]}, "nucleolus"};

  const auto lp = lp_config(cfg);
  const double scale = scale_of(v);
  const double box = 4.0 * n * scale;
  const double tight = 1e-7 * scale;

  Span span(n);
  span.add(grand);
  std::vector<Fixed> fixed;       // independent rows with known excess
  std::vector<std::uint64_t> active;
  for (std::uint64_t m = 1; m < grand; ++m) active.push_back(m);

  auto build = [&](conic::ConicProgram& p, std::vector<int>& x, int& eps) {
    x.resize(n);
    for (int i = 0; i < n; ++i) x[i] = p.add_variable(-box, box);
    eps = p.add_variable(cfg.mu_min, conic::kInf);
    std::vector<conic::Term> sum;
    for (int i = 0; i < n; ++i) sum.push_back({x[i], 1.0});
    p.add_row(sum, v[grand], v[grand]);
    for (const auto& f : fixed) {
      std::vector<conic::Term> row;
      for (int i = 0; i < n; ++i) {
        if ((f.mask >> i) & 1) row.push_back({x[i], 1.0});
      }
      const double rhs = v[f.mask] - f.excess;
      p.add_row(row, rhs, rhs);
    }
    for (std::uint64_t m : active) {
      std::vector<conic::Term> row{{eps, 1.0}};
      for (int i = 0; i < n; ++i) {
        if ((m >> i) & 1) row.push_back({x[i], 1.0});
      }
      p.add_row(row, v[m], conic::kInf);
    }
  };

  while (span.rank() < n && !active.empty()) {
    conic::ConicProgram p;
    std::vector<int> x;
    int eps = 0;
    build(p, x, eps);
    p.cost[eps] = 1.0;
    const auto sol = conic::solve_continuous(p, lp);
    check_solved(sol, "nucleolus");
    const double level = sol.x[eps];

    // Interior-point solutions sit in the relative interior of the optimal
    // face, so near-tight coalitions are the only candidates; a probe that
    // maximizes x(C) at the optimal level confirms each one.
    std::vector<std::uint64_t> candidates;
    std::vector<double> xs(n);
    for (int i = 0; i < n; ++i) xs[i] = sol.x[x[i]];
    for (std::uint64_t m : active) {
      if (v[m] - sum_over(xs, m) >= level - tight) candidates.push_back(m);
    }
    bool progressed = false;
    std::uint64_t best_mask = 0;
    double best_probe = -conic::kInf;
    for (std::uint64_t m : candidates) {
      if (span.contains(m)) continue;
      conic::ConicProgram q;
      std::vector<int> xq;
      int eq = 0;
      build(q, xq, eq);
      q.lower[eq] = q.upper[eq] = level + 1e-9 * scale;
      for (int i = 0; i < n; ++i) {
        if ((m >> i) & 1) q.cost[xq[i]] = 1.0;
      }
      const auto probe = conic::solve_continuous(q, lp);
      const double min_excess =
          probe.optimal() ? v[m] - sum_over([&] {
            std::vector<double> z(n);
            for (int i = 0; i < n; ++i) z[i] = probe.x[xq[i]];
            return z;
          }(), m)
                          : level;
      if (min_excess >= level - tight) {
        if (span.add(m)) fixed.push_back({m, level});
        progressed = true;
      } else if (min_excess > best_probe) {
        best_probe = min_excess;
        best_mask = m;
      }
    }
    if (!progressed) {
      if (best_mask == 0) {
        throw Error(ErrorCode::kSolverFailure, "nucleolus made no progress");
      }
      if (span.add(best_mask)) fixed.push_back({best_mask, level});
    }
    std::vector<std::uint64_t> rest;
    for (std::uint64_t m : active) {
      if (!span.contains(m)) rest.push_back(m);
    }
    active.swap(rest);
  }

  // The fixed coalitions and the grand coalition pin x uniquely.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(fixed.size() + 1, n);
  Eigen::VectorXd b(fixed.size() + 1);
  a.row(0).setOnes();
  b[0] = v[grand];
  for (std::size_t k = 0; k < fixed.size(); ++k) {
    for (int i = 0; i < n; ++i) {
      if ((fixed[k].mask >> i) & 1) a(k + 1, i) = 1.0;
    }
    b[k + 1] = v[fixed[k].mask] - fixed[k].excess;
  }
  Eigen::VectorXd sol = a.colPivHouseholderQr().solve(b);
  return {std::vector<double>(sol.data(), sol.data() + n), "nucleolus"};
}

}  // namespace coopgrid::imputation
