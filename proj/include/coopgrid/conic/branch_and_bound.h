#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "coopgrid/conic/interior_point.h"
#include "coopgrid/conic/program.h"

namespace coopgrid::conic {

/// Called on a copy of the program once every binary is fixed. May tighten
/// the leaf (e.g. replace an under-estimator by the exact expression) as long
/// as the leaf optimum stays >= the relaxation bound of its parent.
using LeafRefiner = std::function<void(ConicProgram& leaf)>;

struct NodeRecord {
  long id = 0;
  int depth = 0;
  std::vector<std::pair<int, int>> fixes;  // (binary var, value)
  SolveStatus status = SolveStatus::kNumericalFailure;
  double relaxation = 0.0;
};

struct MixedOptions {
  const ContinuousSolver* backend = nullptr;
  LeafRefiner refine_leaf;
  std::function<void(const NodeRecord&)> on_node;
};

/// Best-bound branch-and-bound with depth-first plunging. Branches on the
/// most fractional binary (lowest index on ties). Serial and deterministic.
Solution solve_mixed(const ConicProgram& program, const SolverConfig& cfg,
                     const MixedOptions& options = {});

}  // namespace coopgrid::conic
