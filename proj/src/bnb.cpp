#include "slicepart/bnb.hpp"

namespace slicepart {

SolveResult solve_bnb(const VnfFg& g, const DomainChain& chain, const ObjectiveWeights& w,
                      const AssignmentMask& mask, const DeploymentState& state,
                      const BnbConfig& config, NormalizationMode mode) {
  chain.validate();
  const NormalizationBounds bounds = normalization_bounds(g, chain, mode);
  const QuadraticModel model = true_objective_model(g, chain, w, bounds, state);
  const PartitionSearch search(g, model, mask, config.kl_bound);

  SolveResult result;
  SearchOutcome outcome = search.solve(config);
  result.status = outcome.status;
  result.stats = std::move(outcome.stats);
  if (result.has_assignment()) {
    result.assignment = std::move(outcome.assignment);
    result.value = objective(g, chain, result.assignment, w, bounds, state);
  }
  return result;
}

double lower_bound(const std::vector<int>& prefix, const VnfFg& g, const DomainChain& chain,
                   const ObjectiveWeights& w, const NormalizationBounds& bounds,
                   const DeploymentState& state, KlBound kl_bound) {
  const QuadraticModel model = true_objective_model(g, chain, w, bounds, state);
  return PartitionSearch(g, model, {}, kl_bound).lower_bound(prefix);
}

}  // namespace slicepart
