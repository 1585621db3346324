#pragma once

#include <memory>
#include <vector>

#include "coopgrid/conic/big_m.h"
#include "coopgrid/conic/branch_and_bound.h"
#include "coopgrid/core/scenario.h"
#include "coopgrid/dispatch/modes.h"
#include "coopgrid/imputation/benders.h"
#include "coopgrid/imputation/oracle.h"

namespace coopgrid::imputation {

/// How the single-shot model handles the membership-dependent radius
/// sqrt(k_h - s) with s the data budget bought by the coalition.
enum class RadiusModel {
  /// Chord under-estimator in relaxations; leaves get the exact radius.
  kExact,
  /// Tangent at s = 0, an over-estimate everywhere: over-robust values.
  kConservative,
};

std::string_view radius_model_name(RadiusModel model);

/// Max-excess search over all proper coalitions as one mixed-integer conic
/// program: binaries I_i select members, and every schedule quantity of a
/// non-member is forced to zero through big-M product rows.
struct SubproblemModel {
  conic::ConicProgram program;
  std::vector<int> membership;  // I_i
  std::vector<conic::ProductLinearization> products;
  conic::LeafRefiner refiner;   // set for RadiusModel::kExact
};

SubproblemModel build_subproblem(const Scenario& s, dispatch::DispatchMode mode,
                                 const std::vector<double>& x, RadiusModel model,
                                 const conic::SolverConfig& cfg = {});

struct SubproblemResult {
  Coalition coalition;
  double excess = 0.0;
  std::shared_ptr<const CoalitionValue> value;  // plain dispatch solve of C
  conic::SolveStatus status = conic::SolveStatus::kOptimal;
  long nodes = 0;
  conic::BigMReport audit;  // empty on the membership path
  std::string method;
};

/// Single-shot path through solve_mixed.
SubproblemResult solve_subproblem_misocp(const Scenario& s, dispatch::DispatchMode mode,
                                         const std::vector<double>& x,
                                         RadiusModel model,
                                         const conic::SolverConfig& cfg = {});

/// Default path: membership branch-and-bound with one dispatch solve per
/// visited union.
SubproblemResult subproblem_max_excess(const Scenario& s, const std::vector<double>& x,
                                       const conic::SolverConfig& cfg = {},
                                       dispatch::DispatchMode mode =
                                           dispatch::DispatchMode::kJointData);

class MisocpSearch final : public ExcessSearch {
 public:
  MisocpSearch(const Scenario& s, dispatch::DispatchMode mode, RadiusModel model,
               conic::SolverConfig cfg = {})
      : s_(s), mode_(mode), model_(model), cfg_(cfg) {}
  MaxExcess maximize(const std::vector<double>& x) const override;

 private:
  const Scenario& s_;
  dispatch::DispatchMode mode_;
  RadiusModel model_;
  conic::SolverConfig cfg_;
};

}  // namespace coopgrid::imputation
