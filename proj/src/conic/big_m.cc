#include "coopgrid/conic/big_m.h"

#include <algorithm>
#include <cmath>

#include "coopgrid/error.h"

namespace coopgrid::conic {

int linearize_product(ConicProgram& program, int binary, int continuous,
                      double big_m, std::vector<ProductLinearization>* registry,
                      std::string name) {
  if (!(big_m > 0) || !std::isfinite(big_m)) {
    throw Error(ErrorCode::kInvalidValue, "big-M must be positive and finite");
  }
  const double m = big_m;
  const int ip = program.add_variable(-m, m, 0.0, std::move(name));
  // IP - M*I <= 0 and IP + M*I >= 0
  program.add_row({{ip, 1.0}, {binary, -m}}, -kInf, 0.0);
  program.add_row({{ip, 1.0}, {binary, m}}, 0.0, kInf);
  // IP - P - M*I >= -M and IP - P + M*I <= M
  program.add_row({{ip, 1.0}, {continuous, -1.0}, {binary, -m}}, -m, kInf);
  program.add_row({{ip, 1.0}, {continuous, -1.0}, {binary, m}}, -kInf, m);
  if (registry) registry->push_back({binary, continuous, ip, m});
  return ip;
}

bool BigMReport::ok() const {
  return std::none_of(findings.begin(), findings.end(),
                      [](const BigMFinding& f) { return f.too_small; });
}

BigMReport audit_big_m(std::span<const double> x,
                       std::span<const ProductLinearization> registry) {
  BigMReport report;
  for (const ProductLinearization& e : registry) {
    BigMFinding f;
    f.entry = e;
    const double i = x[e.binary];
    const double p = x[e.continuous];
    f.product_error = std::abs(x[e.product] - i * p);
    f.magnitude = std::abs(p);
    f.too_small = f.product_error > 1e-6 || f.magnitude > e.big_m * (1 + 1e-9);
    f.saturated = f.magnitude > 0.99 * e.big_m;
    if (f.too_small || f.saturated) report.findings.push_back(f);
  }
  return report;
}

}  // namespace coopgrid::conic
