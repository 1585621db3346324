#include "coopgrid/dispatch/modes.h"

#include <cmath>

#include "coopgrid/error.h"

namespace coopgrid::dispatch {

std::string_view mode_name(DispatchMode mode) {
  switch (mode) {
    case DispatchMode::kIsolated:
      return "isolated";
    case DispatchMode::kElectricityOnly:
      return "electricity";
    case DispatchMode::kJointData:
      return "joint";
  }
  return "unknown";
}

DispatchMode parse_mode(std::string_view text) {
  if (text == "isolated" || text == "I") return DispatchMode::kIsolated;
  if (text == "electricity" || text == "electricity-only" || text == "II") {
    return DispatchMode::kElectricityOnly;
  }
  if (text == "joint" || text == "joint-data" || text == "III") {
    return DispatchMode::kJointData;
  }
  throw Error(ErrorCode::kInvalidValue, "unknown mode '" + std::string(text) + "'");
}

Eigen::VectorXd member_indicator(const Scenario& s, Coalition c, int period) {
  const int d = s.num_drgs();
  const bool horizon = s.uncertainty.scope == BudgetScope::kHorizon;
  Eigen::VectorXd a = Eigen::VectorXd::Zero(horizon ? d * s.periods() : d);
  const int offset = horizon ? period * d : 0;
  for (int i : c.members()) {
    for (std::size_t w = 0; w < s.prosumers[i].drgs.size(); ++w) {
      a[offset + s.drg_index(i, static_cast<int>(w))] = 1.0;
    }
  }
  return a;
}

CoalitionSet coalition_set(const Scenario& s, Coalition c, DispatchMode mode) {
  if (c.empty()) throw Error(ErrorCode::kEmptyCoalition, "coalition is empty");
  if (!c.subset_of(Coalition::grand(s.num_players()))) {
    throw Error(ErrorCode::kInvalidValue, "coalition names unknown prosumers");
  }
  if (mode == DispatchMode::kIsolated && c.size() != 1) {
    throw Error(ErrorCode::kModeMismatch,
                "isolated mode accepts singletons only, got " + c.to_string());
  }
  const int T = s.periods();
  CoalitionSet out;
  out.s_up.assign(T, 0.0);
  out.s_dw.assign(T, 0.0);

  bool use_ellipsoid = false;
  double budget = 0.0;
  if (s.uncertainty.ellipsoid && s.num_drgs() > 0) {
    if (mode == DispatchMode::kJointData) {
      use_ellipsoid = true;
      budget = uncertainty::effective_budget(s.contributions, c);
    } else if (s.config.electricity_only_set == ElectricityOnlySet::kHistorical) {
      use_ellipsoid = true;
      budget = s.contributions.k_h;
    }
  }

  if (!use_ellipsoid) {
    out.label = "box";
    for (int t = 0; t < T; ++t) {
      double w = 0.0;
      for (int i : c.members()) {
        for (const DrgSpec& g : s.prosumers[i].drgs) w += g.dpw_max[t];
      }
      out.s_up[t] = out.s_dw[t] = w;
    }
    return out;
  }

  out.ellipsoid = true;
  out.budget = budget;
  out.label = "ellipsoid";
  for (std::size_t b = 0; b < s.uncertainty.shapes.size(); ++b) {
    out.ellipsoids.emplace_back(s.uncertainty.centers[b], s.uncertainty.shapes[b],
                                budget);
  }
  const bool horizon = s.uncertainty.scope == BudgetScope::kHorizon;
  for (int t = 0; t < T; ++t) {
    const uncertainty::EllipsoidSet& e = out.ellipsoids[horizon ? 0 : t];
    const Eigen::VectorXd a = member_indicator(s, c, t);
    out.s_up[t] = uncertainty::support_ellipsoid(a, e);
    out.s_dw[t] = uncertainty::support_ellipsoid(-a, e);
  }
  return out;
}

}  // namespace coopgrid::dispatch
