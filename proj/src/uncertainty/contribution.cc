#include "coopgrid/uncertainty/contribution.h"

namespace coopgrid::uncertainty {

double DataContribution::total() const {
  double s = 0.0;
  for (const ContributionTerm& t : terms) s += t.k;
  return s;
}

DataContribution DataContribution::singletons(double k_h,
                                              const std::vector<double>& k) {
  DataContribution d;
  d.k_h = k_h;
  for (int i = 0; i < static_cast<int>(k.size()); ++i) {
    d.terms.push_back({Coalition::singleton(i), k[i]});
  }
  return d;
}

double effective_budget(const DataContribution& d, Coalition c) {
  double r = d.k_h;
  for (const ContributionTerm& t : d.terms) {
    if (!t.key.empty() && t.key.subset_of(c)) r -= t.k;
  }
  return r;
}

}  // namespace coopgrid::uncertainty
