#pragma once

#include <vector>

#include "slicepart/cost_model.hpp"
#include "slicepart/graph_model.hpp"
#include "slicepart/search.hpp"

namespace slicepart {

struct SolveResult {
  SolveStatus status = SolveStatus::kNoIncumbent;
  HardAssignment assignment;
  ObjectiveValue value;  // true standardized objective
  BnbStats stats;

  bool has_assignment() const {
    return status == SolveStatus::kOptimal || status == SolveStatus::kBudgetExhausted;
  }
};

// Branch and bound on the exact objective. The initial incumbent is the
// configured seed when it is feasible, otherwise every node in the cheapest
// compute domain (clamped to the mask).
SolveResult solve_bnb(const VnfFg& g, const DomainChain& chain, const ObjectiveWeights& w,
                      const AssignmentMask& mask, const DeploymentState& state,
                      const BnbConfig& config = {},
                      NormalizationMode mode = NormalizationMode::kDemandWeighted);

// Admissible bound on the objective of any feasible completion of `prefix`,
// which fixes the first prefix.size() nodes of topological_order(g).
double lower_bound(const std::vector<int>& prefix, const VnfFg& g, const DomainChain& chain,
                   const ObjectiveWeights& w, const NormalizationBounds& bounds,
                   const DeploymentState& state, KlBound kl_bound = KlBound::kZero);

}  // namespace slicepart
