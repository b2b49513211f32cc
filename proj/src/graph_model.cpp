#include "slicepart/graph_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <set>
#include <string>
#include <utility>

#include "slicepart/rng.hpp"

namespace slicepart {

double DomainChain::inter_cost(int a, int b) const {
  if (a > b) std::swap(a, b);
  double cost = 0.0;
  for (int m = a; m < b; ++m) cost += inter_link_cost[m];
  return cost;
}

double DomainChain::max_inter_cost() const {
  double best = 0.0;
  for (int a = 0; a < size(); ++a) {
    for (int b = a + 1; b < size(); ++b) best = std::max(best, inter_cost(a, b));
  }
  return best;
}

void DomainChain::validate() const {
  if (domains.size() < 2) throw InvalidInput("domain chain needs at least two domains");
  for (const Domain& d : domains) {
    if (d.cpu_cost < 0 || d.ram_cost < 0 || d.link_cost < 0 || d.vnf_latency < 0) {
      throw InvalidInput("domain '" + d.name + "' has a negative cost");
    }
  }
  if (inter_link_cost.size() != domains.size() - 1) {
    throw InvalidInput("inter_link_cost must cover every adjacent domain pair");
  }
  for (double c : inter_link_cost) {
    if (c < 0) throw InvalidInput("negative inter-domain link cost");
  }
  if (target_distribution.size() != domains.size()) {
    throw InvalidInput("target distribution length differs from the number of domains");
  }
  double sum = 0.0;
  for (double p : target_distribution) {
    if (!(p > 0)) throw InvalidInput("target distribution entries must be positive");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw InvalidInput("target distribution must sum to 1");
}

DomainChain default_chain() {
  DomainChain chain;
  chain.domains = {
      {"RAN", 100, 10, 1.0, 1.0},
      {"edge", 50, 5, 0.5, 2.0},
      {"core", 20, 2, 0.2, 5.0},
      {"cloud", 5, 1, 0.1, 10.0},
  };
  chain.inter_link_cost = {10, 5, 2};
  chain.target_distribution = {0.1, 0.2, 0.3, 0.4};
  return chain;
}

void validate_assignment(const Assignment& a, int num_nodes, int num_domains) {
  if (const auto* hard = std::get_if<HardAssignment>(&a)) {
    if (static_cast<int>(hard->size()) != num_nodes) {
      throw InvalidInput("hard assignment length differs from the node count");
    }
    for (int m : *hard) {
      if (m < 0 || m >= num_domains) {
        throw InvalidInput("domain index " + std::to_string(m) + " out of range");
      }
    }
    return;
  }
  const auto& soft = std::get<SoftAssignment>(a);
  if (soft.rows() != num_nodes || soft.cols() != num_domains) {
    throw InvalidInput("soft assignment has the wrong shape");
  }
  for (int n = 0; n < num_nodes; ++n) {
    if (soft.row(n).minCoeff() < 0.0 || soft.row(n).maxCoeff() > 1.0) {
      throw InvalidInput("soft assignment entries must lie in [0, 1]");
    }
    if (std::abs(soft.row(n).sum() - 1.0) > 1e-6) {
      throw InvalidInput("soft assignment row " + std::to_string(n) + " does not sum to 1");
    }
  }
}

SoftAssignment one_hot(const HardAssignment& a, int num_domains) {
  SoftAssignment x = SoftAssignment::Zero(static_cast<Eigen::Index>(a.size()), num_domains);
  for (std::size_t n = 0; n < a.size(); ++n) x(static_cast<Eigen::Index>(n), a[n]) = 1.0;
  return x;
}

void AssignmentMask::validate(int num_nodes, int num_domains) const {
  for (const auto& [node, domain] : fixed) {
    if (node < 0 || node >= num_nodes) {
      throw InvalidInput("mask references missing node " + std::to_string(node));
    }
    if (domain < 0 || domain >= num_domains) {
      throw InvalidInput("mask domain " + std::to_string(domain) + " out of range");
    }
  }
}

bool ValidationReport::has(ValidationIssue::Kind kind) const {
  return std::any_of(issues.begin(), issues.end(),
                     [kind](const ValidationIssue& i) { return i.kind == kind; });
}

namespace {

// Kahn's algorithm; returns fewer than n ids when a cycle exists.
std::vector<int> kahn(int n, const std::vector<std::pair<int, int>>& arcs) {
  std::vector<std::vector<int>> out(n);
  std::vector<int> indegree(n, 0);
  for (const auto& [s, d] : arcs) {
    out[s].push_back(d);
    ++indegree[d];
  }
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (int v = 0; v < n; ++v) {
    if (indegree[v] == 0) ready.push(v);
  }
  std::vector<int> order;
  order.reserve(n);
  while (!ready.empty()) {
    const int v = ready.top();
    ready.pop();
    order.push_back(v);
    for (int w : out[v]) {
      if (--indegree[w] == 0) ready.push(w);
    }
  }
  return order;
}

}  // namespace

ValidationReport validate(const VnfFg& g) {
  using Kind = ValidationIssue::Kind;
  ValidationReport report;
  const int n = g.num_nodes();
  for (int i = 0; i < n; ++i) {
    const VnfNode& node = g.nodes[i];
    if (node.id != i) {
      report.issues.push_back({Kind::kBadNodeId, "node at position " + std::to_string(i) +
                                                     " has id " + std::to_string(node.id)});
    }
    if (node.cpu <= 0 || node.ram <= 0) {
      report.issues.push_back(
          {Kind::kBadAttribute, "node " + std::to_string(i) + " needs positive cpu and ram"});
    }
  }
  if (!(g.latency_budget >= 0)) {
    report.issues.push_back({Kind::kBadAttribute, "latency budget must be nonnegative"});
  }

  std::set<std::pair<int, int>> seen;
  std::vector<std::pair<int, int>> arcs;
  for (const VnfEdge& e : g.edges) {
    const std::string label = "(" + std::to_string(e.src) + "," + std::to_string(e.dst) + ")";
    if (e.src < 0 || e.src >= n || e.dst < 0 || e.dst >= n) {
      report.issues.push_back({Kind::kDanglingEndpoint, "edge " + label + " references a missing node"});
      continue;
    }
    if (e.src == e.dst) {
      report.issues.push_back({Kind::kSelfLoop, "edge " + label + " is a self-loop"});
      continue;
    }
    if (!(e.bandwidth > 0)) {
      report.issues.push_back({Kind::kBadAttribute, "edge " + label + " needs positive bandwidth"});
    }
    if (!seen.insert({e.src, e.dst}).second) {
      report.issues.push_back({Kind::kDuplicateEdge, "edge " + label + " appears twice"});
      continue;
    }
    arcs.emplace_back(e.src, e.dst);
  }
  if (static_cast<int>(kahn(n, arcs).size()) != n) {
    report.issues.push_back({Kind::kCycle, "edge relation contains a cycle"});
  }
  return report;
}

std::vector<int> topological_order(const VnfFg& g) {
  const int n = g.num_nodes();
  std::vector<std::pair<int, int>> arcs;
  arcs.reserve(g.edges.size());
  for (const VnfEdge& e : g.edges) {
    if (e.src < 0 || e.src >= n || e.dst < 0 || e.dst >= n) {
      throw InvalidInput("edge references a missing node");
    }
    arcs.emplace_back(e.src, e.dst);
  }
  std::vector<int> order = kahn(n, arcs);
  if (static_cast<int>(order.size()) != n) throw InvalidInput("graph contains a cycle");
  return order;
}

std::vector<std::vector<int>> predecessors(const VnfFg& g) {
  std::vector<std::vector<int>> preds(g.nodes.size());
  for (const VnfEdge& e : g.edges) preds[e.dst].push_back(e.src);
  return preds;
}

std::vector<std::vector<int>> successors(const VnfFg& g) {
  std::vector<std::vector<int>> succs(g.nodes.size());
  for (const VnfEdge& e : g.edges) succs[e.src].push_back(e.dst);
  return succs;
}

bool weakly_connected(const VnfFg& g) {
  const int n = g.num_nodes();
  if (n == 0) return true;
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  int components = n;
  for (const VnfEdge& e : g.edges) {
    const int a = find(e.src);
    const int b = find(e.dst);
    if (a != b) {
      parent[a] = b;
      --components;
    }
  }
  return components == 1;
}

VnfFg generate_random_dag(const DagParams& params) {
  const int n = params.num_nodes;
  if (n < 2) throw InvalidInput("random DAG needs at least two nodes");
  if (params.cpu_levels.empty() || params.ram_levels.empty() || params.bw_levels.empty()) {
    throw InvalidInput("attribute level sets must be non-empty");
  }
  const long max_edges = static_cast<long>(n) * (n - 1) / 2;
  const long target = std::clamp<long>(params.num_edges, n - 1, max_edges);

  Rng rng(params.seed);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);

  // used[a][b] for order positions a < b.
  std::vector<std::vector<char>> used(n, std::vector<char>(n, 0));
  std::vector<std::pair<int, int>> picked;  // order positions
  picked.reserve(target);
  for (int k = 1; k < n; ++k) {
    const int parent = static_cast<int>(rng.uniform_index(k));
    used[parent][k] = 1;
    picked.emplace_back(parent, k);
  }
  std::vector<std::pair<int, int>> remaining;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      if (!used[a][b]) remaining.emplace_back(a, b);
    }
  }
  // Partial Fisher-Yates: the first `extra` slots become a uniform sample.
  const long extra = target - (n - 1);
  for (long i = 0; i < extra; ++i) {
    const std::size_t j = i + rng.uniform_index(remaining.size() - i);
    std::swap(remaining[i], remaining[j]);
    picked.push_back(remaining[i]);
  }

  VnfFg g;
  g.nodes.resize(n);
  for (int i = 0; i < n; ++i) {
    g.nodes[i].id = i;
    g.nodes[i].cpu = rng.pick(params.cpu_levels);
    g.nodes[i].ram = rng.pick(params.ram_levels);
  }
  g.edges.reserve(picked.size());
  for (const auto& [a, b] : picked) {
    g.edges.push_back({order[a], order[b], 0.0});
  }
  std::sort(g.edges.begin(), g.edges.end(), [](const VnfEdge& x, const VnfEdge& y) {
    return std::pair(x.src, x.dst) < std::pair(y.src, y.dst);
  });
  for (VnfEdge& e : g.edges) e.bandwidth = rng.pick(params.bw_levels);
  g.latency_budget = kGeneratedLatencyPerVnf * n;
  return g;
}

}  // namespace slicepart
