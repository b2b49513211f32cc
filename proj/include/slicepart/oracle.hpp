#pragma once

#include <cstdint>
#include <optional>

#include "slicepart/cost_model.hpp"
#include "slicepart/graph_model.hpp"

namespace slicepart {

struct ExactResult {
  std::optional<HardAssignment> best;  // empty when nothing is feasible
  ObjectiveValue value;
  std::uint64_t enumerated = 0;
};

inline constexpr std::uint64_t kDefaultEnumerationLimit = 10'000'000;

// Exhaustive search over every assignment satisfying the ordering constraint
// and the mask, depth-first in topological order with domains ascending.
// Ties go to the lexicographically smallest domain vector. Throws
// InvalidInput before enumerating when the predicted count exceeds `limit`.
ExactResult solve_exact(const VnfFg& g, const DomainChain& chain, const ObjectiveWeights& w,
                        const AssignmentMask& mask, const DeploymentState& state,
                        std::uint64_t limit = kDefaultEnumerationLimit,
                        NormalizationMode mode = NormalizationMode::kDemandWeighted);

}  // namespace slicepart
