#pragma once

#include <vector>

#include "coopgrid/core/coalition.h"

namespace coopgrid::uncertainty {

struct ContributionTerm {
  Coalition key;
  double k = 0.0;
};

/// Historical budget k_h and the budget reductions k_C bought by shared data.
struct DataContribution {
  double k_h = 1.0;
  std::vector<ContributionTerm> terms;

  double total() const;
  static DataContribution singletons(double k_h, const std::vector<double>& k);
};

/// k_h minus every k_C whose key is a subset of C. Nonincreasing in C.
double effective_budget(const DataContribution& d, Coalition c);

}  // namespace coopgrid::uncertainty
