#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "coopgrid/core/coalition.h"
#include "coopgrid/core/scenario.h"
#include "coopgrid/uncertainty/sets.h"

namespace coopgrid::dispatch {

enum class DispatchMode { kIsolated, kElectricityOnly, kJointData };

std::string_view mode_name(DispatchMode mode);
/// Accepts "isolated", "electricity", "joint" (and the long names).
DispatchMode parse_mode(std::string_view text);

/// The uncertainty set a coalition faces under a mode, reduced to what the
/// robust rows need: per period the worst surplus S_up = max sum(dev) and
/// worst shortfall S_dw = max -sum(dev) over member units.
struct CoalitionSet {
  bool ellipsoid = false;
  double budget = 0.0;
  std::string label;
  std::vector<double> s_up;
  std::vector<double> s_dw;
  /// One ellipsoid per period (per-period scope) or one over the horizon.
  std::vector<uncertainty::EllipsoidSet> ellipsoids;
};

/// Throws EmptyCoalition, ModeMismatch (Isolated with more than one member).
CoalitionSet coalition_set(const Scenario& s, Coalition c, DispatchMode mode);

/// Member-unit indicator over the stacked deviations of one ellipsoid block.
Eigen::VectorXd member_indicator(const Scenario& s, Coalition c, int period);

}  // namespace coopgrid::dispatch
