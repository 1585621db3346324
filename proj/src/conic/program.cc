#include "coopgrid/conic/program.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "coopgrid/error.h"

namespace coopgrid::conic {

int ConicProgram::add_variable(double lo, double up, double c,
                               std::string name) {
  lower.push_back(lo);
  upper.push_back(up);
  cost.push_back(c);
  binary.push_back(0);
  names.push_back(std::move(name));
  return num_vars() - 1;
}

int ConicProgram::add_binary(double c, std::string name) {
  const int v = add_variable(0.0, 1.0, c, std::move(name));
  binary[v] = 1;
  return v;
}

int ConicProgram::add_row(std::vector<Term> terms, double lo, double up,
                          std::string label) {
  rows.push_back(LinearRow{std::move(terms), lo, up, std::move(label)});
  return static_cast<int>(rows.size()) - 1;
}

void ConicProgram::add_cone(int head, std::vector<int> tail) {
  cones.push_back(SecondOrderCone{head, std::move(tail)});
}

void ConicProgram::add_rotated_cone(int first, int second,
                                    std::vector<int> tail) {
  rotated_cones.push_back(RotatedCone{first, second, std::move(tail)});
}

int ConicProgram::num_binaries() const {
  return static_cast<int>(std::count(binary.begin(), binary.end(), 1));
}

double ConicProgram::objective_value(std::span<const double> x) const {
  double v = objective_offset;
  for (int j = 0; j < num_vars(); ++j) v += cost[j] * x[j];
  return v;
}

double ConicProgram::max_violation(std::span<const double> x) const {
  double worst = 0.0;
  for (int j = 0; j < num_vars(); ++j) {
    worst = std::max(worst, lower[j] - x[j]);
    worst = std::max(worst, x[j] - upper[j]);
  }
  for (const LinearRow& row : rows) {
    double act = 0.0;
    for (const Term& t : row.terms) act += t.coef * x[t.var];
    if (std::isfinite(row.lower)) {
      worst = std::max(worst, (row.lower - act) / (1.0 + std::abs(row.lower)));
    }
    if (std::isfinite(row.upper)) {
      worst = std::max(worst, (act - row.upper) / (1.0 + std::abs(row.upper)));
    }
  }
  for (const SecondOrderCone& k : cones) {
    double sq = 0.0;
    for (int v : k.tail) sq += x[v] * x[v];
    worst = std::max(worst, std::sqrt(sq) - x[k.head]);
  }
  for (const RotatedCone& k : rotated_cones) {
    double sq = 0.0;
    for (int v : k.tail) sq += x[v] * x[v];
    const double a = x[k.first];
    const double b = x[k.second];
    worst = std::max(worst, -a);
    worst = std::max(worst, -b);
    // Same test in Lorentz form: ||(a - b, sqrt(2) x)|| <= a + b.
    const double lhs = std::sqrt((a - b) * (a - b) + 2.0 * sq);
    worst = std::max(worst, lhs - (a + b));
  }
  return worst;
}

void ConicProgram::check() const {
  const int n = num_vars();
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidValue, "conic program: " + what);
  };
  if (static_cast<int>(upper.size()) != n ||
      static_cast<int>(cost.size()) != n ||
      static_cast<int>(binary.size()) != n) {
    fail("inconsistent variable arrays");
  }
  auto in_range = [n](int v) { return v >= 0 && v < n; };
  for (int j = 0; j < n; ++j) {
    if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] > upper[j]) {
      fail("inverted bounds on variable " + std::to_string(j));
    }
    if (binary[j] && (lower[j] < 0.0 || upper[j] > 1.0)) {
      fail("binary variable " + std::to_string(j) + " has bounds beyond [0,1]");
    }
  }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (const Term& t : rows[r].terms) {
      if (!in_range(t.var)) fail("row " + std::to_string(r) + " index");
    }
    if (rows[r].lower > rows[r].upper) {
      fail("row " + std::to_string(r) + " has lower > upper");
    }
  }
  auto check_cone_vars = [&](const std::vector<int>& vars) {
    for (int v : vars) {
      if (!in_range(v)) fail("cone index out of range");
    }
  };
  for (const SecondOrderCone& k : cones) {
    if (!in_range(k.head)) fail("cone head out of range");
    if (binary[k.head]) fail("binary variable in a cone head");
    check_cone_vars(k.tail);
  }
  for (const RotatedCone& k : rotated_cones) {
    if (!in_range(k.first) || !in_range(k.second)) {
      fail("rotated cone head out of range");
    }
    if (binary[k.first] || binary[k.second]) {
      fail("binary variable in a cone head");
    }
    check_cone_vars(k.tail);
  }
}

std::string_view status_name(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal:
      return "Optimal";
    case SolveStatus::kInfeasible:
      return "Infeasible";
    case SolveStatus::kUnbounded:
      return "Unbounded";
    case SolveStatus::kIterLimit:
      return "IterLimit";
    case SolveStatus::kNumericalFailure:
      return "NumericalFailure";
  }
  return "Unknown";
}

void SolverConfig::check() const {
  if (!(feas_tol > 0 && abs_tol > 0 && rel_tol > 0 && rel_gap > 0 &&
        integrality_tol > 0 && epsilon > 0 && big_m_safety > 0)) {
    throw Error(ErrorCode::kInvalidValue, "solver tolerances must be positive");
  }
  if (big_m < 0) throw Error(ErrorCode::kInvalidValue, "big_m must be >= 0");
  if (workers < 1) throw Error(ErrorCode::kInvalidValue, "workers must be >= 1");
}

}  // namespace coopgrid::conic
