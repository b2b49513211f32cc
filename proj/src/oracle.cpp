#include "slicepart/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

namespace slicepart {

ExactResult solve_exact(const VnfFg& g, const DomainChain& chain, const ObjectiveWeights& w,
                        const AssignmentMask& mask, const DeploymentState& state,
                        std::uint64_t limit, NormalizationMode mode) {
  chain.validate();
  w.validate();
  const int n_count = g.num_nodes();
  const int m_count = chain.size();
  mask.validate(n_count, m_count);

  // Upper bound on the candidate count: masked nodes have one choice.
  double predicted = 1.0;
  for (int n = 0; n < n_count; ++n) {
    predicted *= mask.fixed.contains(n) ? 1.0 : static_cast<double>(m_count);
  }
  if (predicted > static_cast<double>(limit)) {
    char count[32];
    std::snprintf(count, sizeof count, "%.3g", predicted);
    throw InvalidInput(std::string("exhaustive enumeration would visit up to ") + count +
                       " assignments (limit " + std::to_string(limit) + ")");
  }

  const NormalizationBounds bounds = normalization_bounds(g, chain, mode);
  const std::vector<int> order = topological_order(g);
  const auto preds = predecessors(g);

  ExactResult result;
  double best_total = std::numeric_limits<double>::infinity();
  HardAssignment current(n_count, -1);

  auto visit = [&](auto&& self, int depth) -> void {
    if (depth == n_count) {
      ++result.enumerated;
      ObjectiveValue v = objective(g, chain, current, w, bounds, state);
      const bool better = v.total < best_total;
      const bool tie = result.best && v.total == best_total && current < *result.best;
      if (better || tie) {
        best_total = v.total;
        result.best = current;
        result.value = std::move(v);
      }
      return;
    }
    const int n = order[depth];
    int lo = 0;
    for (int p : preds[n]) lo = std::max(lo, current[p]);
    int hi = m_count - 1;
    if (auto it = mask.fixed.find(n); it != mask.fixed.end()) {
      if (it->second < lo) return;
      lo = hi = it->second;
    }
    for (int m = lo; m <= hi; ++m) {
      current[n] = m;
      self(self, depth + 1);
    }
    current[n] = -1;
  };
  visit(visit, 0);
  return result;
}

}  // namespace slicepart
