#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace slicepart {

// Raised for malformed graphs, chains, assignments, or parameters.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when no assignment can satisfy the ordering constraint and mask.
class Infeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct VnfNode {
  int id = 0;
  int cpu = 1;  // cores
  int ram = 1;  // GB

  bool operator==(const VnfNode&) const = default;
};

struct VnfEdge {
  int src = 0;
  int dst = 0;
  double bandwidth = 0.0;  // Mbps

  bool operator==(const VnfEdge&) const = default;
};

// A slice's forwarding graph. Node ids equal their position in `nodes`.
struct VnfFg {
  std::vector<VnfNode> nodes;
  std::vector<VnfEdge> edges;
  double latency_budget = 0.0;  // ms

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int num_edges() const { return static_cast<int>(edges.size()); }

  bool operator==(const VnfFg&) const = default;
};

struct Domain {
  std::string name;
  double cpu_cost = 0.0;     // per core
  double ram_cost = 0.0;     // per GB
  double link_cost = 0.0;    // per Mbps, intra-domain
  double vnf_latency = 0.0;  // ms per hosted VNF
};

// Ordered, linear chain of domains (RAN -> edge -> core -> cloud).
struct DomainChain {
  std::vector<Domain> domains;
  // inter_link_cost[m] is the per-Mbps cost between domains m and m+1.
  std::vector<double> inter_link_cost;
  std::vector<double> target_distribution;

  int size() const { return static_cast<int>(domains.size()); }

  // Per-Mbps cost between any two domains: the sum of adjacent-pair costs
  // along the chain, 0 for a == b.
  double inter_cost(int a, int b) const;

  // Largest inter-domain cost between any pair (the end-to-end path).
  double max_inter_cost() const;

  // Throws InvalidInput when an invariant does not hold.
  void validate() const;
};

// Four-domain chain with the RAN/edge/core/cloud cost table used in the
// experiments and target CPU distribution [0.1, 0.2, 0.3, 0.4].
DomainChain default_chain();

// Hard form: domain index per node.
using HardAssignment = std::vector<int>;
// Soft form: |N| x |M| row-stochastic matrix.
using SoftAssignment = Eigen::MatrixXd;
using Assignment = std::variant<HardAssignment, SoftAssignment>;

// Throws InvalidInput if the assignment has the wrong shape, an out-of-range
// index, or (soft) rows that are not stochastic within 1e-6.
void validate_assignment(const Assignment& a, int num_nodes, int num_domains);

SoftAssignment one_hot(const HardAssignment& a, int num_domains);

struct DeploymentState {
  std::vector<std::int64_t> occupied_cpu;

  static DeploymentState empty(int num_domains) {
    return DeploymentState{std::vector<std::int64_t>(num_domains, 0)};
  }
};

struct AssignmentMask {
  std::map<int, int> fixed;  // node id -> required domain

  bool empty() const { return fixed.empty(); }
  void validate(int num_nodes, int num_domains) const;
};

struct ValidationIssue {
  enum class Kind { kBadNodeId, kBadAttribute, kSelfLoop, kDanglingEndpoint, kDuplicateEdge, kCycle };
  Kind kind;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool ok() const { return issues.empty(); }
  bool has(ValidationIssue::Kind kind) const;
};

ValidationReport validate(const VnfFg& g);

// Kahn's algorithm with ascending-id tie-break. Throws InvalidInput on cycles.
std::vector<int> topological_order(const VnfFg& g);

// Predecessor / successor lists indexed by node id.
std::vector<std::vector<int>> predecessors(const VnfFg& g);
std::vector<std::vector<int>> successors(const VnfFg& g);

bool weakly_connected(const VnfFg& g);

struct DagParams {
  int num_nodes = 10;
  int num_edges = 15;
  std::vector<int> cpu_levels{2, 4, 8, 16};
  std::vector<int> ram_levels{8, 16, 32, 64};
  std::vector<double> bw_levels{100, 200, 500, 1000};
  std::uint64_t seed = 0;
};

// Weakly connected random DAG. Nodes get a random order; a random spanning
// arborescence is laid first, then the remaining edges are drawn uniformly
// among the unused forward pairs. The edge count is clamped to
// [num_nodes - 1, num_nodes * (num_nodes - 1) / 2].
VnfFg generate_random_dag(const DagParams& params);

// Per-VNF latency allowance used for generated graphs' latency budgets.
inline constexpr double kGeneratedLatencyPerVnf = 10.0;

}  // namespace slicepart
