#include "coopgrid/conic/branch_and_bound.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <queue>

#include "coopgrid/error.h"

namespace coopgrid::conic {
namespace {

struct Node {
  std::vector<std::pair<int, int>> fixes;
  double bound = -kInf;  // parent relaxation
  int depth = 0;
  long seq = 0;
};

struct WorseNode {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.seq > b.seq;
  }
};

class Search {
 public:
  Search(const ConicProgram& p, const SolverConfig& cfg, const MixedOptions& o)
      : p_(p), cfg_(cfg), opt_(o), start_(std::chrono::steady_clock::now()) {
    for (int j = 0; j < p.num_vars(); ++j) {
      if (p.binary[j]) binaries_.push_back(j);
    }
  }

  Solution run() {
    Solution out;
    open_.push(Node{{}, -kInf, 0, seq_++});
    bool limit_hit = false;
    while (!open_.empty()) {
      if (limit_reached()) {
        limit_hit = true;
        break;
      }
      Node node = open_.top();
      open_.pop();
      // Plunge: keep diving into one child while it survives.
      std::optional<Node> current = std::move(node);
      while (current) {
        if (pruned(current->bound)) break;
        if (limit_reached()) {
          open_.push(std::move(*current));
          limit_hit = true;
          break;
        }
        current = process(std::move(*current));
        if (unbounded_) break;
      }
      if (unbounded_ || limit_hit) break;
    }

    out.stats.nodes = static_cast<int>(nodes_);
    out.stats.iterations = iterations_;
    out.stats.seconds = elapsed();
    if (unbounded_) {
      out.status = SolveStatus::kUnbounded;
      return out;
    }
    double open_bound = kInf;
    for (auto q = open_; !q.empty(); q.pop()) {
      if (!pruned(q.top().bound)) open_bound = std::min(open_bound, q.top().bound);
    }
    open_bound = std::min(open_bound, failed_bound_);
    if (!has_incumbent_) {
      out.status = (limit_hit || std::isfinite(failed_bound_))
                       ? (limit_hit ? SolveStatus::kIterLimit
                                    : SolveStatus::kNumericalFailure)
                       : SolveStatus::kInfeasible;
      out.bound = open_bound;
      return out;
    }
    out.x = incumbent_x_;
    out.objective = incumbent_;
    out.bound = std::min(open_bound, incumbent_);
    const bool proven = out.bound >= incumbent_ - gap_allowance();
    out.status = proven ? SolveStatus::kOptimal : SolveStatus::kIterLimit;
    out.stats.gap = incumbent_ - out.bound;
    return out;
  }

 private:
  double gap_allowance() const {
    return cfg_.rel_gap * std::abs(incumbent_) + 1e-9;
  }

  bool pruned(double bound) const {
    return has_incumbent_ && bound >= incumbent_ - gap_allowance();
  }

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

  bool limit_reached() const {
    return nodes_ >= cfg_.node_limit || elapsed() > cfg_.time_limit;
  }

  bool all_fixed(const ConicProgram& q) const {
    return std::all_of(binaries_.begin(), binaries_.end(),
                       [&](int j) { return q.lower[j] == q.upper[j]; });
  }

  Solution solve_node(const ConicProgram& q) {
    Solution s = solve_continuous(q, cfg_, opt_.backend);
    iterations_ += s.stats.iterations;
    return s;
  }

  void offer(const ConicProgram& q, std::vector<double> x) {
    for (int j : binaries_) x[j] = std::round(x[j]);
    const double obj = q.objective_value(x);
    if (!has_incumbent_ || obj < incumbent_) {
      has_incumbent_ = true;
      incumbent_ = obj;
      incumbent_x_ = std::move(x);
    }
  }

  // Returns the child to plunge into, if any.
  std::optional<Node> process(Node node) {
    ConicProgram q = p_;
    for (auto [j, v] : node.fixes) q.lower[j] = q.upper[j] = v;
    const bool leaf = all_fixed(q);
    if (leaf && opt_.refine_leaf) opt_.refine_leaf(q);
    const Solution s = solve_node(q);
    NodeRecord rec{nodes_++, node.depth, node.fixes, s.status, s.objective};
    if (opt_.on_node) opt_.on_node(rec);

    if (s.status == SolveStatus::kInfeasible) return std::nullopt;
    if (s.status == SolveStatus::kUnbounded) {
      unbounded_ = true;
      return std::nullopt;
    }
    double bound = node.bound;
    const bool solved = s.optimal();
    if (solved) bound = std::max(bound, s.objective);
    if (leaf) {
      if (solved) {
        offer(q, s.x);
      } else {
        failed_bound_ = std::min(failed_bound_, node.bound);
      }
      return std::nullopt;
    }
    if (solved && pruned(bound)) return std::nullopt;

    int branch_var = -1;
    double branch_val = 0.0;
    if (solved) {
      double best = cfg_.integrality_tol;
      for (int j : binaries_) {
        if (q.lower[j] == q.upper[j]) continue;
        const double f = s.x[j] - std::floor(s.x[j]);
        const double dist = std::min(f, 1.0 - f);
        if (dist > best) {
          best = dist;
          branch_var = j;
          branch_val = s.x[j];
        }
      }
      if (branch_var < 0) {
        // Integral relaxation: re-solve with the binaries pinned so the
        // candidate is exactly feasible (and refined, when asked).
        ConicProgram r = q;
        for (int j : binaries_) r.lower[j] = r.upper[j] = std::round(s.x[j]);
        if (opt_.refine_leaf) opt_.refine_leaf(r);
        const Solution ls = solve_node(r);
        ++nodes_;
        if (ls.optimal()) {
          offer(r, ls.x);
        } else if (!opt_.refine_leaf) {
          offer(q, s.x);
        }
        if (!opt_.refine_leaf || pruned(bound)) return std::nullopt;
      }
    }
    if (branch_var < 0) {
      // Relaxation failed or refined leaf still open: split the first free
      // binary.
      for (int j : binaries_) {
        if (q.lower[j] != q.upper[j]) {
          branch_var = j;
          branch_val = solved ? s.x[j] : 0.5;
          break;
        }
      }
    }
    const int first = branch_val >= 0.5 ? 1 : 0;
    Node dive{node.fixes, bound, node.depth + 1, seq_++};
    dive.fixes.emplace_back(branch_var, first);
    Node other{node.fixes, bound, node.depth + 1, seq_++};
    other.fixes.emplace_back(branch_var, 1 - first);
    open_.push(std::move(other));
    return dive;
  }

  const ConicProgram& p_;
  const SolverConfig& cfg_;
  const MixedOptions& opt_;
  const std::chrono::steady_clock::time_point start_;
  std::vector<int> binaries_;
  std::priority_queue<Node, std::vector<Node>, WorseNode> open_;
  long seq_ = 0;
  long nodes_ = 0;
  int iterations_ = 0;
  bool has_incumbent_ = false;
  double incumbent_ = kInf;
  std::vector<double> incumbent_x_;
  double failed_bound_ = kInf;
  bool unbounded_ = false;
};

}  // namespace

Solution solve_mixed(const ConicProgram& program, const SolverConfig& cfg,
                     const MixedOptions& options) {
  program.check();
  cfg.check();
  return Search(program, cfg, options).run();
}

}  // namespace coopgrid::conic
