#include "slicepart/cost_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace slicepart {

void ObjectiveWeights::validate() const {
  for (double v : {alpha, beta, gamma, delta, mu}) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw InvalidInput("objective weights must be finite and nonnegative");
    }
  }
}

namespace {

double node_dc(const VnfNode& node, const Domain& d) {
  return d.cpu_cost * node.cpu + d.ram_cost * node.ram;
}

void check_hard(const VnfFg& g, const DomainChain& chain, const HardAssignment& a) {
  validate_assignment(Assignment{a}, g.num_nodes(), chain.size());
}

}  // namespace

RawCosts raw_costs(const VnfFg& g, const DomainChain& chain, const HardAssignment& a) {
  check_hard(g, chain, a);
  RawCosts c;
  for (const VnfNode& node : g.nodes) c.dc += node_dc(node, chain.domains[a[node.id]]);
  for (const VnfEdge& e : g.edges) {
    const int mi = a[e.src];
    const int mj = a[e.dst];
    if (mi == mj) {
      c.dl += e.bandwidth * chain.domains[mi].link_cost;
    } else {
      c.ic += e.bandwidth * chain.inter_cost(mi, mj);
    }
  }
  return c;
}

RawCosts expected_raw_costs(const VnfFg& g, const DomainChain& chain, const SoftAssignment& x) {
  validate_assignment(Assignment{x}, g.num_nodes(), chain.size());
  const int m_count = chain.size();
  RawCosts c;
  for (const VnfNode& node : g.nodes) {
    for (int m = 0; m < m_count; ++m) c.dc += x(node.id, m) * node_dc(node, chain.domains[m]);
  }
  for (const VnfEdge& e : g.edges) {
    for (int mi = 0; mi < m_count; ++mi) {
      for (int mj = 0; mj < m_count; ++mj) {
        const double p = x(e.src, mi) * x(e.dst, mj);
        if (mi == mj) {
          c.dl += p * e.bandwidth * chain.domains[mi].link_cost;
        } else {
          c.ic += p * e.bandwidth * chain.inter_cost(mi, mj);
        }
      }
    }
  }
  return c;
}

NormalizationBounds normalization_bounds(const VnfFg& g, const DomainChain& chain,
                                         NormalizationMode mode) {
  NormalizationBounds b;
  if (mode == NormalizationMode::kNone) {
    b.dc_max = b.dl_max = b.ic_max = 1.0;
    return b;
  }
  double cpu_lo = std::numeric_limits<double>::infinity(), cpu_hi = 0.0;
  double ram_lo = cpu_lo, ram_hi = 0.0, link_hi = 0.0;
  for (const Domain& d : chain.domains) {
    cpu_lo = std::min(cpu_lo, d.cpu_cost);
    cpu_hi = std::max(cpu_hi, d.cpu_cost);
    ram_lo = std::min(ram_lo, d.ram_cost);
    ram_hi = std::max(ram_hi, d.ram_cost);
    link_hi = std::max(link_hi, d.link_cost);
  }
  const double inter_hi = chain.max_inter_cost();

  if (mode == NormalizationMode::kLiteral) {
    const double n = g.num_nodes();
    const double e = g.num_edges();
    b.dc_min = n * (cpu_lo + ram_lo);
    b.dc_max = n * (cpu_hi + ram_hi);
    b.dl_max = e * link_hi;
    b.ic_max = e * inter_hi;
    return b;
  }

  for (const VnfNode& node : g.nodes) {
    b.dc_min += node.cpu * cpu_lo + node.ram * ram_lo;
    b.dc_max += node.cpu * cpu_hi + node.ram * ram_hi;
  }
  double bw = 0.0;
  for (const VnfEdge& e : g.edges) bw += e.bandwidth;
  b.dl_max = bw * link_hi;
  b.ic_max = bw * inter_hi;
  return b;
}

std::vector<double> load_ratios(const VnfFg& g, const Assignment& a, const DeploymentState& state) {
  const int m_count = static_cast<int>(state.occupied_cpu.size());
  validate_assignment(a, g.num_nodes(), m_count);
  double total = 0.0;
  std::vector<double> r(m_count, 0.0);
  for (int m = 0; m < m_count; ++m) {
    if (state.occupied_cpu[m] < 0) throw InvalidInput("occupied CPU counts must be nonnegative");
    r[m] = static_cast<double>(state.occupied_cpu[m]);
    total += r[m];
  }
  for (const VnfNode& node : g.nodes) total += node.cpu;
  if (!(total > 0)) throw InvalidInput("no CPU demand or occupancy anywhere");

  if (const auto* hard = std::get_if<HardAssignment>(&a)) {
    for (const VnfNode& node : g.nodes) r[(*hard)[node.id]] += node.cpu;
  } else {
    const auto& soft = std::get<SoftAssignment>(a);
    for (const VnfNode& node : g.nodes) {
      for (int m = 0; m < m_count; ++m) r[m] += soft(node.id, m) * node.cpu;
    }
  }
  for (double& v : r) v /= total;
  return r;
}

double entropy(std::span<const double> r) {
  double h = 0.0;
  for (double v : r) {
    if (v > 0) h -= v * std::log(v);
  }
  return h;
}

double kl_divergence(std::span<const double> r, std::span<const double> p) {
  if (r.size() != p.size()) throw InvalidInput("KL divergence needs equal-length distributions");
  double kl = 0.0;
  for (std::size_t m = 0; m < r.size(); ++m) {
    if (!(p[m] > 0)) throw InvalidInput("target distribution has a zero entry");
    if (r[m] > 0) kl += r[m] * std::log(r[m] / p[m]);
  }
  return kl;
}

int FeasibilityReport::count(Violation::Kind kind) const {
  return static_cast<int>(std::count_if(violations.begin(), violations.end(),
                                        [kind](const Violation& v) { return v.kind == kind; }));
}

FeasibilityReport check_feasibility(const VnfFg& g, const DomainChain& chain,
                                    const HardAssignment& a, const AssignmentMask& mask,
                                    bool enforce_latency) {
  FeasibilityReport report;
  const int m_count = chain.size();
  if (static_cast<int>(a.size()) != g.num_nodes()) {
    report.violations.push_back({Violation::Kind::kDomainRange, -1, -1,
                                 "assignment does not cover every node exactly once"});
    return report;
  }
  for (int n = 0; n < g.num_nodes(); ++n) {
    if (a[n] < 0 || a[n] >= m_count) {
      report.violations.push_back({Violation::Kind::kDomainRange, n, -1,
                                   "node " + std::to_string(n) + " has no valid domain"});
    }
  }
  if (!report.feasible()) return report;

  for (const VnfEdge& e : g.edges) {
    if (a[e.src] > a[e.dst]) {
      report.violations.push_back(
          {Violation::Kind::kOrdering, e.src, e.dst,
           "edge (" + std::to_string(e.src) + "," + std::to_string(e.dst) + ") goes from domain " +
               std::to_string(a[e.src]) + " back to " + std::to_string(a[e.dst])});
    }
  }
  for (const auto& [node, domain] : mask.fixed) {
    if (node < 0 || node >= g.num_nodes() || a[node] != domain) {
      report.violations.push_back({Violation::Kind::kMask, node, -1,
                                   "node " + std::to_string(node) + " must be in domain " +
                                       std::to_string(domain)});
    }
  }
  if (enforce_latency) {
    double latency = 0.0;
    for (int m : a) latency += chain.domains[m].vnf_latency;
    if (latency > g.latency_budget) {
      report.violations.push_back({Violation::Kind::kLatency, -1, -1,
                                   "latency " + std::to_string(latency) + " exceeds budget " +
                                       std::to_string(g.latency_budget)});
    }
  }
  return report;
}

ObjectiveValue objective(const VnfFg& g, const DomainChain& chain, const Assignment& a,
                         const ObjectiveWeights& w, const NormalizationBounds& bounds,
                         const DeploymentState& state) {
  w.validate();
  if (const auto* hard = std::get_if<HardAssignment>(&a)) {
    ObjectiveValue v;
    v.raw = raw_costs(g, chain, *hard);
    v.load = load_ratios(g, a, state);
    v.breakdown.dc_hat = min_max(v.raw.dc, bounds.dc_min, bounds.dc_max);
    v.breakdown.dl_hat = min_max(v.raw.dl, bounds.dl_min, bounds.dl_max);
    v.breakdown.ic_hat = min_max(v.raw.ic, bounds.ic_min, bounds.ic_max);
    v.breakdown.kl = kl_divergence(v.load, chain.target_distribution);
    v.total = w.alpha * v.breakdown.dc_hat + w.beta * v.breakdown.dl_hat +
              w.gamma * v.breakdown.ic_hat + w.delta * v.breakdown.kl;
    return v;
  }
  const auto& soft = std::get<SoftAssignment>(a);
  validate_assignment(a, g.num_nodes(), chain.size());
  return RelaxedObjective(g, chain, w, bounds, state).evaluate(soft);
}

CostTables cost_tables(const VnfFg& g, const DomainChain& chain, const ObjectiveWeights& w,
                       const NormalizationBounds& bounds) {
  const int m_count = chain.size();
  auto scale = [](double weight, double lo, double hi) { return hi > lo ? weight / (hi - lo) : 0.0; };
  const double s_dc = scale(w.alpha, bounds.dc_min, bounds.dc_max);
  const double s_dl = scale(w.beta, bounds.dl_min, bounds.dl_max);
  const double s_ic = scale(w.gamma, bounds.ic_min, bounds.ic_max);

  CostTables t;
  t.constant = -(s_dc * bounds.dc_min + s_dl * bounds.dl_min + s_ic * bounds.ic_min);
  t.unary.resize(g.num_nodes(), m_count);
  for (const VnfNode& node : g.nodes) {
    for (int m = 0; m < m_count; ++m) t.unary(node.id, m) = s_dc * node_dc(node, chain.domains[m]);
  }
  t.link.resize(m_count, m_count);
  for (int mi = 0; mi < m_count; ++mi) {
    for (int mj = 0; mj < m_count; ++mj) {
      t.link(mi, mj) = mi == mj ? s_dl * chain.domains[mi].link_cost : s_ic * chain.inter_cost(mi, mj);
    }
  }
  return t;
}

RelaxedObjective::RelaxedObjective(const VnfFg& g, const DomainChain& chain,
                                   const ObjectiveWeights& w, const NormalizationBounds& bounds,
                                   const DeploymentState& state)
    : weights_(w), tables_(cost_tables(g, chain, w, bounds)), bounds_(bounds) {
  w.validate();
  const int m_count = chain.size();
  if (static_cast<int>(state.occupied_cpu.size()) != m_count) {
    throw InvalidInput("deployment state length differs from the number of domains");
  }
  violation_ = Eigen::MatrixXd::Zero(m_count, m_count);
  for (int mi = 0; mi < m_count; ++mi) {
    for (int mj = 0; mj < mi; ++mj) violation_(mi, mj) = 1.0;
  }
  for (const VnfEdge& e : g.edges) arcs_.push_back({e.src, e.dst, e.bandwidth});
  for (const VnfNode& node : g.nodes) {
    cpu_.push_back(node.cpu);
    total_cpu_ += node.cpu;
  }
  for (std::int64_t v : state.occupied_cpu) {
    occupied_.push_back(static_cast<double>(v));
    total_cpu_ += static_cast<double>(v);
  }
  if (!(total_cpu_ > 0)) throw InvalidInput("no CPU demand or occupancy anywhere");
  target_ = chain.target_distribution;

  dc_raw_.resize(g.num_nodes(), m_count);
  for (const VnfNode& node : g.nodes) {
    for (int m = 0; m < m_count; ++m) dc_raw_(node.id, m) = node_dc(node, chain.domains[m]);
  }
  dl_raw_ = Eigen::MatrixXd::Zero(m_count, m_count);
  ic_raw_ = Eigen::MatrixXd::Zero(m_count, m_count);
  for (int mi = 0; mi < m_count; ++mi) {
    for (int mj = 0; mj < m_count; ++mj) {
      if (mi == mj) {
        dl_raw_(mi, mj) = chain.domains[mi].link_cost;
      } else {
        ic_raw_(mi, mj) = chain.inter_cost(mi, mj);
      }
    }
  }
}

std::vector<double> RelaxedObjective::loads(const SoftAssignment& x) const {
  std::vector<double> r(occupied_);
  for (int n = 0; n < num_nodes(); ++n) {
    for (int m = 0; m < num_domains(); ++m) r[m] += x(n, m) * cpu_[n];
  }
  for (double& v : r) v /= total_cpu_;
  return r;
}

double RelaxedObjective::value(const SoftAssignment& x) const {
  double total = tables_.constant + tables_.unary.cwiseProduct(x).sum();
  for (const Arc& arc : arcs_) {
    const auto xi = x.row(arc.src);
    const auto xj = x.row(arc.dst);
    total += arc.bandwidth * xi.dot(tables_.link * xj.transpose());
    total += weights_.mu * xi.dot(violation_ * xj.transpose());
  }
  return total + weights_.delta * kl_divergence(loads(x), target_);
}

ObjectiveValue RelaxedObjective::evaluate(const SoftAssignment& x) const {
  ObjectiveValue v;
  v.raw.dc = dc_raw_.cwiseProduct(x).sum();
  for (const Arc& arc : arcs_) {
    const auto xi = x.row(arc.src);
    const auto xj = x.row(arc.dst);
    v.raw.dl += arc.bandwidth * xi.dot(dl_raw_ * xj.transpose());
    v.raw.ic += arc.bandwidth * xi.dot(ic_raw_ * xj.transpose());
    v.breakdown.penalty += xi.dot(violation_ * xj.transpose());
  }
  v.load = loads(x);
  v.breakdown.dc_hat = min_max(v.raw.dc, bounds_.dc_min, bounds_.dc_max);
  v.breakdown.dl_hat = min_max(v.raw.dl, bounds_.dl_min, bounds_.dl_max);
  v.breakdown.ic_hat = min_max(v.raw.ic, bounds_.ic_min, bounds_.ic_max);
  v.breakdown.kl = kl_divergence(v.load, target_);
  v.total = weights_.alpha * v.breakdown.dc_hat + weights_.beta * v.breakdown.dl_hat +
            weights_.gamma * v.breakdown.ic_hat + weights_.delta * v.breakdown.kl +
            weights_.mu * v.breakdown.penalty;
  return v;
}

double RelaxedObjective::value_and_gradient(const SoftAssignment& x, SoftAssignment& grad) const {
  grad = tables_.unary;
  double total = tables_.constant + tables_.unary.cwiseProduct(x).sum();
  const Eigen::MatrixXd pair = tables_.link;
  for (const Arc& arc : arcs_) {
    const Eigen::MatrixXd edge = arc.bandwidth * pair + weights_.mu * violation_;
    const Eigen::RowVectorXd xi = x.row(arc.src);
    const Eigen::RowVectorXd xj = x.row(arc.dst);
    const Eigen::VectorXd edge_xj = edge * xj.transpose();
    total += xi.dot(edge_xj);
    grad.row(arc.src) += edge_xj.transpose();
    grad.row(arc.dst) += xi * edge;
  }
  const std::vector<double> r = loads(x);
  total += weights_.delta * kl_divergence(r, target_);
  if (weights_.delta != 0.0) {
    for (int m = 0; m < num_domains(); ++m) {
      const double rm = std::max(r[m], std::numeric_limits<double>::min());
      const double dkl_dr = std::log(rm / target_[m]) + 1.0;
      const double coef = weights_.delta * dkl_dr / total_cpu_;
      for (int n = 0; n < num_nodes(); ++n) grad(n, m) += coef * cpu_[n];
    }
  }
  return total;
}

}  // namespace slicepart
