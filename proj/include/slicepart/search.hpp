#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "slicepart/cost_model.hpp"
#include "slicepart/graph_model.hpp"

namespace slicepart {

// cost(m_first, m_second) is charged when both endpoints are placed.
// Ordered pairs (graph edges) additionally require m_first <= m_second.
struct PairTerm {
  int first = 0;
  int second = 0;
  bool ordered = false;
  Eigen::MatrixXd cost;
};

// weight * KL(r || target) with r_m = (occupied_m + sum of demand placed in m) / total.
struct LoadTerm {
  double weight = 0.0;
  std::vector<double> target;
  std::vector<double> occupied;
  std::vector<double> demand;  // per node
  double total = 0.0;
};

// Objective over hard assignments expressed as indicator polynomials:
// constant + unary + pairwise products + an optional exact KL term.
struct QuadraticModel {
  int num_nodes = 0;
  int num_domains = 0;
  double constant = 0.0;
  Eigen::MatrixXd unary;
  std::vector<PairTerm> pairs;
  std::optional<LoadTerm> load;

  double evaluate(const HardAssignment& a) const;
};

// The standardized objective (no penalty) as a QuadraticModel; ordering is
// carried by the `ordered` flag of edge pairs.
QuadraticModel true_objective_model(const VnfFg& g, const DomainChain& chain,
                                    const ObjectiveWeights& w, const NormalizationBounds& bounds,
                                    const DeploymentState& state);

enum class KlBound {
  kZero,       // KL relaxed to 0 below a complete assignment
  kWaterFill,  // min KL over distributions dominating the placed load
};

struct BnbConfig {
  double time_limit = 60.0;              // seconds
  std::uint64_t node_limit = 50'000'000;  // search-tree nodes
  std::optional<HardAssignment> incumbent_seed;
  KlBound kl_bound = KlBound::kWaterFill;
};

struct BnbStats {
  std::uint64_t explored = 0;
  std::uint64_t pruned = 0;
  bool proven_optimal = false;
  double wall_time = 0.0;
  std::vector<double> incumbent_trace;  // every accepted incumbent value, in order
};

enum class SolveStatus { kOptimal, kBudgetExhausted, kInfeasible, kNoIncumbent };

const char* to_string(SolveStatus s);

struct SearchOutcome {
  SolveStatus status = SolveStatus::kNoIncumbent;
  HardAssignment assignment;
  double model_value = 0.0;
  BnbStats stats;
};

// Per-node domain windows implied by the mask and the ordering constraint.
// Empty optional when the mask admits no ordering-feasible assignment.
struct DomainWindows {
  std::vector<int> lo;
  std::vector<int> hi;
};
std::optional<DomainWindows> domain_windows(const VnfFg& g, int num_domains,
                                            const AssignmentMask& mask);

// Smallest KL(r || p) over distributions r with r >= floor componentwise.
double min_kl_above(std::span<const double> floor, std::span<const double> p);

// Depth-first branch and bound over nodes in topological order with domains
// ascending. Children respect the running ordering maximum and the mask.
class PartitionSearch {
 public:
  PartitionSearch(const VnfFg& g, const QuadraticModel& model, const AssignmentMask& mask,
                  KlBound kl_bound = KlBound::kWaterFill);

  bool feasible() const { return windows_.has_value(); }
  const std::vector<int>& order() const { return order_; }

  // Admissible bound over completions of `prefix` (domains for the first
  // prefix.size() nodes of order()). Exact for a complete prefix.
  double lower_bound(const std::vector<int>& prefix) const;

  // Cheapest-compute placement clamped into the feasible windows.
  HardAssignment default_incumbent() const;

  SearchOutcome solve(const BnbConfig& config) const;

 private:
  struct Frame;
  double free_bound(const std::vector<int>& assign, int depth, const std::vector<double>& load) const;

  const QuadraticModel& model_;
  std::vector<int> order_;
  std::vector<int> position_;
  std::vector<std::vector<int>> preds_;
  std::vector<std::vector<int>> pairs_of_;  // pair indices touching each node
  std::optional<DomainWindows> windows_;
  KlBound kl_bound_;
};

}  // namespace slicepart
