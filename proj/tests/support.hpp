#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "slicepart/cost_model.hpp"
#include "slicepart/gnn.hpp"
#include "slicepart/graph_model.hpp"
#include "slicepart/rng.hpp"

namespace slicepart::testing {

// n0 (cpu 2, ram 8) -> n1 (cpu 4, ram 16), 100 Mbps.
inline VnfFg two_node_graph() {
  VnfFg g;
  g.nodes = {{0, 2, 8}, {1, 4, 16}};
  g.edges = {{0, 1, 100.0}};
  return g;
}

inline VnfFg path_graph(int n, int cpu = 2, int ram = 8, double bw = 100.0) {
  VnfFg g;
  for (int i = 0; i < n; ++i) g.nodes.push_back({i, cpu, ram});
  for (int i = 0; i + 1 < n; ++i) g.edges.push_back({i, i + 1, bw});
  return g;
}

// a -> b, a -> c, b -> d, c -> d with identical attributes.
inline VnfFg diamond_graph() {
  VnfFg g;
  for (int i = 0; i < 4; ++i) g.nodes.push_back({i, 4, 16});
  g.edges = {{0, 1, 200.0}, {0, 2, 200.0}, {1, 3, 200.0}, {2, 3, 200.0}};
  return g;
}

inline DomainChain two_domain_chain() {
  DomainChain c;
  c.domains = {{"near", 10, 2, 1, 1}, {"far", 2, 1, 0.5, 5}};
  c.inter_link_cost = {3};
  c.target_distribution = {0.4, 0.6};
  return c;
}

// Random generated DAG with a node count in [lo, hi] and a random edge count.
inline VnfFg random_instance(Rng& rng, int lo, int hi) {
  DagParams p;
  p.num_nodes = lo + static_cast<int>(rng.uniform_index(static_cast<std::size_t>(hi - lo + 1)));
  const int max_edges = p.num_nodes * (p.num_nodes - 1) / 2;
  p.num_edges = p.num_nodes - 1 + static_cast<int>(rng.uniform_index(max_edges - p.num_nodes + 2));
  p.seed = rng.next();
  return generate_random_dag(p);
}

// Uniform choice within the ordering window of each node, in topological order.
inline HardAssignment random_feasible(const VnfFg& g, int m_count, Rng& rng) {
  const auto preds = predecessors(g);
  HardAssignment a(g.num_nodes(), 0);
  for (int n : topological_order(g)) {
    int lo = 0;
    for (int p : preds[n]) lo = std::max(lo, a[p]);
    a[n] = lo + static_cast<int>(rng.uniform_index(static_cast<std::size_t>(m_count - lo)));
  }
  return a;
}

inline HardAssignment random_any(const VnfFg& g, int m_count, Rng& rng) {
  HardAssignment a(g.num_nodes());
  for (int& m : a) m = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(m_count)));
  return a;
}

inline SoftAssignment random_soft(int n, int m, Rng& rng) {
  SoftAssignment x(n, m);
  for (int i = 0; i < n; ++i) {
    double total = 0;
    for (int j = 0; j < m; ++j) total += x(i, j) = 0.05 + rng.uniform01();
    x.row(i) /= total;
  }
  return x;
}

struct BruteForce {
  double best = std::numeric_limits<double>::infinity();
  long feasible = 0;
};

// Filter-then-minimize over all |M|^|N| vectors; independent of the
// oracle's pruned enumeration.
inline BruteForce brute_force(const VnfFg& g, const DomainChain& chain, const ObjectiveWeights& w,
                              const AssignmentMask& mask, const DeploymentState& state,
                              NormalizationMode mode = NormalizationMode::kDemandWeighted) {
  const int n = g.num_nodes();
  const int m = chain.size();
  const NormalizationBounds bounds = normalization_bounds(g, chain, mode);
  BruteForce out;
  HardAssignment a(n, 0);
  long total = 1;
  for (int i = 0; i < n; ++i) total *= m;
  for (long code = 0; code < total; ++code) {
    long c = code;
    for (int i = n - 1; i >= 0; --i) {
      a[i] = static_cast<int>(c % m);
      c /= m;
    }
    if (!check_feasibility(g, chain, a, mask).feasible()) continue;
    ++out.feasible;
    out.best = std::min(out.best, objective(g, chain, a, w, bounds, state).total);
  }
  return out;
}

// Largest relative gap between the analytic gradient and central
// differences with step h, over every model parameter.
inline double max_gradient_error(const GnnModel& model, const VnfFg& g, const DomainChain& chain,
                                 const ObjectiveWeights& w, double h = 1e-5) {
  const NormalizationBounds b = normalization_bounds(g, chain);
  const DeploymentState s = DeploymentState::empty(chain.size());
  const std::vector<double> grad = backward(model, g, chain, w, b, s).gradient.flatten();
  const std::vector<double> params = model.flatten();
  GnnModel probe = model;
  double worst = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    std::vector<double> q = params;
    q[i] = params[i] + h;
    probe.unflatten(q);
    const double up = loss_relaxed(forward(probe, g), g, chain, w, b, s);
    q[i] = params[i] - h;
    probe.unflatten(q);
    const double down = loss_relaxed(forward(probe, g), g, chain, w, b, s);
    const double fd = (up - down) / (2 * h);
    const double scale = std::max({std::abs(fd), std::abs(grad[i]), 1e-8});
    worst = std::max(worst, std::abs(fd - grad[i]) / scale);
  }
  return worst;
}

}  // namespace slicepart::testing
