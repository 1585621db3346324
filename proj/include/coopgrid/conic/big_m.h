#pragma once

#include <span>
#include <string>
#include <vector>

#include "coopgrid/conic/program.h"

namespace coopgrid::conic {

/// Records one binary-continuous product IP = I * P replaced by linear rows.
struct ProductLinearization {
  int binary = 0;
  int continuous = 0;
  int product = 0;
  double big_m = 0.0;
};

/// Adds IP with -M*I <= IP <= M*I and -M(1-I) <= IP - P <= M(1-I).
/// Returns the index of IP. The caller guarantees |P| <= M.
int linearize_product(ConicProgram& program, int binary, int continuous,
                      double big_m, std::vector<ProductLinearization>* registry,
                      std::string name = {});

struct BigMFinding {
  ProductLinearization entry;
  double product_error = 0.0;  // |IP - I*P|
  double magnitude = 0.0;      // |P|
  bool too_small = false;
  bool saturated = false;
};

struct BigMReport {
  std::vector<BigMFinding> findings;  // only flagged entries
  bool ok() const;
};

/// Flags |IP - I*P| > 1e-6 (too small) and |P| > 0.99*M (saturated).
BigMReport audit_big_m(std::span<const double> x,
                       std::span<const ProductLinearization> registry);

}  // namespace coopgrid::conic
