#include "slicepart/search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

namespace slicepart {

namespace {

double load_kl(const LoadTerm& term, const std::vector<double>& load) {
  std::vector<double> r(load.size());
  for (std::size_t m = 0; m < load.size(); ++m) r[m] = load[m] / term.total;
  return term.weight * kl_divergence(r, term.target);
}

}  // namespace

double QuadraticModel::evaluate(const HardAssignment& a) const {
  double total = constant;
  for (int n = 0; n < num_nodes; ++n) total += unary(n, a[n]);
  for (const PairTerm& p : pairs) total += p.cost(a[p.first], a[p.second]);
  if (load) {
    std::vector<double> placed(load->occupied);
    for (int n = 0; n < num_nodes; ++n) placed[a[n]] += load->demand[n];
    total += load_kl(*load, placed);
  }
  return total;
}

QuadraticModel true_objective_model(const VnfFg& g, const DomainChain& chain,
                                    const ObjectiveWeights& w, const NormalizationBounds& bounds,
                                    const DeploymentState& state) {
  w.validate();
  if (static_cast<int>(state.occupied_cpu.size()) != chain.size()) {
    throw InvalidInput("deployment state length differs from the number of domains");
  }
  CostTables tables = cost_tables(g, chain, w, bounds);
  QuadraticModel model;
  model.num_nodes = g.num_nodes();
  model.num_domains = chain.size();
  model.constant = tables.constant;
  model.unary = std::move(tables.unary);
  for (const VnfEdge& e : g.edges) {
    model.pairs.push_back({e.src, e.dst, true, e.bandwidth * tables.link});
  }
  LoadTerm load;
  load.weight = w.delta;
  load.target = chain.target_distribution;
  for (std::int64_t v : state.occupied_cpu) {
    load.occupied.push_back(static_cast<double>(v));
    load.total += static_cast<double>(v);
  }
  for (const VnfNode& node : g.nodes) {
    load.demand.push_back(node.cpu);
    load.total += node.cpu;
  }
  if (!(load.total > 0)) throw InvalidInput("no CPU demand or occupancy anywhere");
  model.load = std::move(load);
  return model;
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kBudgetExhausted: return "budget_exhausted";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kNoIncumbent: return "no_incumbent";
  }
  return "unknown";
}

std::optional<DomainWindows> domain_windows(const VnfFg& g, int num_domains,
                                            const AssignmentMask& mask) {
  mask.validate(g.num_nodes(), num_domains);
  const std::vector<int> order = topological_order(g);
  const auto preds = predecessors(g);
  const auto succs = successors(g);
  DomainWindows w;
  w.lo.assign(g.num_nodes(), 0);
  w.hi.assign(g.num_nodes(), num_domains - 1);
  for (const auto& [node, domain] : mask.fixed) w.lo[node] = w.hi[node] = domain;
  for (int n : order) {
    for (int p : preds[n]) w.lo[n] = std::max(w.lo[n], w.lo[p]);
  }
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    for (int s : succs[*it]) w.hi[*it] = std::min(w.hi[*it], w.hi[s]);
  }
  for (int n = 0; n < g.num_nodes(); ++n) {
    if (w.lo[n] > w.hi[n]) return std::nullopt;
  }
  return w;
}

double min_kl_above(std::span<const double> floor, std::span<const double> p) {
  const std::size_t m_count = p.size();
  const double placed = std::accumulate(floor.begin(), floor.end(), 0.0);
  std::vector<double> r(floor.begin(), floor.end());
  if (placed < 1.0) {
    std::vector<std::size_t> idx(m_count);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return floor[a] / p[a] < floor[b] / p[b]; });
    // Raise the k lowest floor/p ratios to c * p; keep the rest at their floor.
    double raised_p = 0.0, kept = placed;
    for (std::size_t k = 0; k < m_count; ++k) {
      raised_p += p[idx[k]];
      kept -= floor[idx[k]];
      const double c = (1.0 - kept) / raised_p;
      const bool last = k + 1 == m_count;
      if (last || c <= floor[idx[k + 1]] / p[idx[k + 1]]) {
        for (std::size_t i = 0; i <= k; ++i) r[idx[i]] = c * p[idx[i]];
        break;
      }
    }
  }
  return kl_divergence(r, p);
}

PartitionSearch::PartitionSearch(const VnfFg& g, const QuadraticModel& model,
                                 const AssignmentMask& mask, KlBound kl_bound)
    : model_(model),
      order_(topological_order(g)),
      preds_(predecessors(g)),
      windows_(domain_windows(g, model.num_domains, mask)),
      kl_bound_(kl_bound) {
  position_.assign(g.num_nodes(), 0);
  for (int i = 0; i < g.num_nodes(); ++i) position_[order_[i]] = i;
  pairs_of_.assign(g.num_nodes(), {});
  for (int i = 0; i < static_cast<int>(model.pairs.size()); ++i) {
    pairs_of_[model.pairs[i].first].push_back(i);
    pairs_of_[model.pairs[i].second].push_back(i);
  }
}

double PartitionSearch::free_bound(const std::vector<int>& assign, int depth,
                                   const std::vector<double>& load) const {
  const int n_count = model_.num_nodes;
  const int m_count = model_.num_domains;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<int> lo(windows_->lo);
  for (int i = depth; i < n_count; ++i) {
    const int n = order_[i];
    for (int p : preds_[n]) lo[n] = std::max(lo[n], assign[p] >= 0 ? assign[p] : lo[p]);
  }
  const std::vector<int>& hi = windows_->hi;

  Eigen::MatrixXd best(n_count, m_count);
  for (int i = depth; i < n_count; ++i) best.row(order_[i]) = model_.unary.row(order_[i]);

  double bound = 0.0;
  for (const PairTerm& p : model_.pairs) {
    const int a = assign[p.first];
    const int b = assign[p.second];
    if (a >= 0 && b >= 0) continue;
    if (a >= 0) {
      best.row(p.second) += p.cost.row(a);
    } else if (b >= 0) {
      best.row(p.first) += p.cost.col(b).transpose();
    } else {
      double cheapest = inf;
      for (int ma = lo[p.first]; ma <= hi[p.first]; ++ma) {
        for (int mb = std::max(lo[p.second], p.ordered ? ma : 0); mb <= hi[p.second]; ++mb) {
          cheapest = std::min(cheapest, p.cost(ma, mb));
        }
      }
      bound += cheapest;
    }
  }
  for (int i = depth; i < n_count; ++i) {
    const int n = order_[i];
    bound += best.row(n).segment(lo[n], hi[n] - lo[n] + 1).minCoeff();
  }

  if (model_.load) {
    const LoadTerm& term = *model_.load;
    if (depth == n_count) {
      bound += load_kl(term, load);
    } else if (kl_bound_ == KlBound::kWaterFill && term.weight > 0) {
      std::vector<double> floor(load.size());
      for (std::size_t m = 0; m < load.size(); ++m) floor[m] = load[m] / term.total;
      bound += term.weight * min_kl_above(floor, term.target);
    }
  }
  return bound;
}

double PartitionSearch::lower_bound(const std::vector<int>& prefix) const {
  if (!feasible()) return std::numeric_limits<double>::infinity();
  const int n_count = model_.num_nodes;
  if (static_cast<int>(prefix.size()) > n_count) throw InvalidInput("prefix longer than the node count");
  std::vector<int> assign(n_count, -1);
  double fixed = model_.constant;
  std::vector<double> load = model_.load ? model_.load->occupied : std::vector<double>{};
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    const int n = order_[i];
    const int m = prefix[i];
    if (m < windows_->lo[n] || m > windows_->hi[n]) return std::numeric_limits<double>::infinity();
    for (int p : preds_[n]) {
      if (assign[p] > m) return std::numeric_limits<double>::infinity();
    }
    assign[n] = m;
    fixed += model_.unary(n, m);
    if (model_.load) load[m] += model_.load->demand[n];
  }
  for (const PairTerm& p : model_.pairs) {
    if (assign[p.first] >= 0 && assign[p.second] >= 0) fixed += p.cost(assign[p.first], assign[p.second]);
  }
  return fixed + free_bound(assign, static_cast<int>(prefix.size()), load);
}

HardAssignment PartitionSearch::default_incumbent() const {
  if (!feasible()) throw Infeasible("mask admits no ordering-feasible assignment");
  const int m_count = model_.num_domains;
  int cheapest = 0;
  double cheapest_cost = std::numeric_limits<double>::infinity();
  for (int m = 0; m < m_count; ++m) {
    const double c = model_.unary.col(m).sum();
    if (c < cheapest_cost) {
      cheapest_cost = c;
      cheapest = m;
    }
  }
  HardAssignment a(model_.num_nodes, 0);
  for (int n : order_) {
    int lo = windows_->lo[n];
    for (int p : preds_[n]) lo = std::max(lo, a[p]);
    a[n] = std::clamp(cheapest, lo, windows_->hi[n]);
  }
  return a;
}

struct PartitionSearch::Frame {
  const BnbConfig& config;
  std::chrono::steady_clock::time_point start;
  std::vector<int> assign;
  std::vector<double> load;
  HardAssignment incumbent;
  double incumbent_value = std::numeric_limits<double>::infinity();
  BnbStats stats;
  bool stopped = false;

  bool out_of_budget() {
    if (stats.explored >= config.node_limit) return true;
    if ((stats.explored & 127u) == 0) {
      const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
      if (elapsed.count() >= config.time_limit) return true;
    }
    return false;
  }
};

SearchOutcome PartitionSearch::solve(const BnbConfig& config) const {
  SearchOutcome out;
  const auto start = std::chrono::steady_clock::now();
  if (!feasible()) {
    out.status = SolveStatus::kInfeasible;
    return out;
  }
  if (!(config.time_limit > 0) || config.node_limit == 0) {
    throw InvalidInput("search budgets must be positive");
  }
  const int n_count = model_.num_nodes;
  const int m_count = model_.num_domains;

  Frame frame{config, start, std::vector<int>(n_count, -1),
              model_.load ? model_.load->occupied : std::vector<double>(m_count, 0.0),
              {}, std::numeric_limits<double>::infinity(), {}, false};

  auto admissible_seed = [&](const HardAssignment& a) {
    if (static_cast<int>(a.size()) != n_count) return false;
    for (int n = 0; n < n_count; ++n) {
      if (a[n] < windows_->lo[n] || a[n] > windows_->hi[n]) return false;
      for (int p : preds_[n]) {
        if (a[p] > a[n]) return false;
      }
    }
    return true;
  };
  frame.incumbent = config.incumbent_seed && admissible_seed(*config.incumbent_seed)
                        ? *config.incumbent_seed
                        : default_incumbent();
  frame.incumbent_value = model_.evaluate(frame.incumbent);
  frame.stats.incumbent_trace.push_back(frame.incumbent_value);

  // Recursive descent; `fixed` holds constant + cost of all terms whose
  // nodes are already placed.
  auto descend = [&](auto&& self, int depth, double fixed) -> void {
    if (frame.stopped) return;
    if (frame.out_of_budget()) {
      frame.stopped = true;
      return;
    }
    ++frame.stats.explored;
    if (depth == n_count) {
      double value = fixed;
      if (model_.load) value += load_kl(*model_.load, frame.load);
      if (value < frame.incumbent_value) {
        frame.incumbent_value = value;
        frame.incumbent = frame.assign;
        frame.stats.incumbent_trace.push_back(value);
      }
      return;
    }
    const int n = order_[depth];
    int lo = windows_->lo[n];
    for (int p : preds_[n]) lo = std::max(lo, frame.assign[p]);
    for (int m = lo; m <= windows_->hi[n]; ++m) {
      frame.assign[n] = m;
      double added = model_.unary(n, m);
      for (int pi : pairs_of_[n]) {
        const PairTerm& p = model_.pairs[pi];
        const int other = p.first == n ? p.second : p.first;
        if (frame.assign[other] < 0) continue;
        added += p.first == n ? p.cost(m, frame.assign[other]) : p.cost(frame.assign[other], m);
      }
      if (model_.load) frame.load[m] += model_.load->demand[n];
      const double bound = fixed + added + free_bound(frame.assign, depth + 1, frame.load);
      if (bound >= frame.incumbent_value) {
        ++frame.stats.pruned;
      } else {
        self(self, depth + 1, fixed + added);
      }
      if (model_.load) frame.load[m] -= model_.load->demand[n];
      if (frame.stopped) break;
    }
    frame.assign[n] = -1;
  };
  descend(descend, 0, model_.constant);

  out.assignment = frame.incumbent;
  out.model_value = frame.incumbent_value;
  out.stats = std::move(frame.stats);
  out.stats.proven_optimal = !frame.stopped;
  out.status = frame.stopped ? SolveStatus::kBudgetExhausted : SolveStatus::kOptimal;
  out.stats.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace slicepart
