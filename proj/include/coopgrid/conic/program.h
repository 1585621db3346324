#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace coopgrid::conic {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Term {
  int var = 0;
  double coef = 0.0;
};

/// lower <= sum(coef * x[var]) <= upper; equality when lower == upper.
struct LinearRow {
  std::vector<Term> terms;
  double lower = -kInf;
  double upper = kInf;
  std::string label;
};

/// ||x[tail]||_2 <= x[head]
struct SecondOrderCone {
  int head = 0;
  std::vector<int> tail;
};

/// 2 * x[first] * x[second] >= ||x[tail]||_2^2 with x[first], x[second] >= 0.
struct RotatedCone {
  int first = 0;
  int second = 0;
  std::vector<int> tail;
};

/// Solver-agnostic exchange format between the model builders and the
/// backends. The objective is always minimized.
class ConicProgram {
 public:
  int add_variable(double lower, double upper, double cost = 0.0,
                   std::string name = {});
  int add_binary(double cost = 0.0, std::string name = {});
  int add_row(std::vector<Term> terms, double lower, double upper,
              std::string label = {});
  void add_cone(int head, std::vector<int> tail);
  void add_rotated_cone(int first, int second, std::vector<int> tail);

  int num_vars() const { return static_cast<int>(lower.size()); }
  int num_binaries() const;
  bool has_integrality() const { return num_binaries() > 0; }

  double objective_value(std::span<const double> x) const;

  /// Largest violation of bounds, rows and cones at x. Row violations are
  /// measured relative to 1 + |rhs|.
  double max_violation(std::span<const double> x) const;

  /// Throws Error(kInvalidValue) when an index is out of range, a binary sits
  /// in a cone head or has bounds other than [0,1], or bounds are inverted.
  void check() const;

  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> cost;
  std::vector<std::uint8_t> binary;
  std::vector<std::string> names;
  double objective_offset = 0.0;
  std::vector<LinearRow> rows;
  std::vector<SecondOrderCone> cones;
  std::vector<RotatedCone> rotated_cones;
};

enum class SolveStatus {
  kOptimal,
  kInfeasible,
  kUnbounded,
  kIterLimit,
  kNumericalFailure,
};

std::string_view status_name(SolveStatus status);

struct SolverStats {
  int iterations = 0;
  int nodes = 0;
  double seconds = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
};

struct Solution {
  SolveStatus status = SolveStatus::kNumericalFailure;
  std::vector<double> x;
  double objective = 0.0;
  /// Multiplier per linear row with c = sum(dual_r * a_r) + (bound and cone
  /// terms); empty for mixed-integer solves.
  std::vector<double> row_duals;
  /// Best proven lower bound for mixed-integer solves.
  double bound = -kInf;
  SolverStats stats;

  bool optimal() const { return status == SolveStatus::kOptimal; }
};

struct SolverConfig {
  double feas_tol = 1e-8;
  double abs_tol = 1e-8;
  double rel_tol = 1e-8;
  int max_iterations = 150;
  double rel_gap = 1e-6;
  double integrality_tol = 1e-6;
  double epsilon = 1e-6;
  double mu_min = -1e9;
  double big_m = 0.0;  // 0 selects per-product bounds
  double big_m_safety = 1.2;
  long node_limit = 200000;
  double time_limit = kInf;
  std::uint64_t seed = 0;
  int workers = 1;
  int benders_max_iterations = 1000;

  void check() const;
};

}  // namespace coopgrid::conic
