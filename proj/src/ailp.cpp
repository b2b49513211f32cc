#include "slicepart/ailp.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace slicepart {

void TaylorParams::validate() const {
  if (!(a > 0.0 && a < 1.0)) throw InvalidInput("Taylor expansion point must lie in (0, 1)");
}

double taylor_xlogx(double r, double a) {
  const double d = r - a;
  return a * std::log(a) + d * (std::log(a) + 1.0) + d * d / (2.0 * a);
}

int LinearizedProblem::forced_zero_count() const {
  int count = 0;
  for (const YVar& v : y) count += v.forced_zero ? 1 : 0;
  return count;
}

double LinearizedProblem::evaluate(const HardAssignment& a) const {
  double total = constant;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (a[x[i].node] == x[i].domain) total += x_cost[i];
  }
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (a[y[i].src] == y[i].src_domain && a[y[i].dst] == y[i].dst_domain) total += y_cost[i];
  }
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (a[z[i].first] == z[i].domain && a[z[i].second] == z[i].domain) total += z_cost[i];
  }
  return total;
}

QuadraticModel LinearizedProblem::to_model() const {
  QuadraticModel model;
  model.num_nodes = num_nodes;
  model.num_domains = num_domains;
  model.constant = constant;
  model.unary.resize(num_nodes, num_domains);
  for (std::size_t i = 0; i < x.size(); ++i) model.unary(x[i].node, x[i].domain) = x_cost[i];

  const int block = num_domains * num_domains;
  for (std::size_t start = 0; start < y.size(); start += block) {
    PairTerm term{y[start].src, y[start].dst, true, Eigen::MatrixXd::Zero(num_domains, num_domains)};
    for (int k = 0; k < block; ++k) {
      const YVar& v = y[start + k];
      term.cost(v.src_domain, v.dst_domain) = y_cost[start + k];
    }
    model.pairs.push_back(std::move(term));
  }
  for (std::size_t start = 0; start < z.size(); start += num_domains) {
    PairTerm term{z[start].first, z[start].second, false,
                  Eigen::MatrixXd::Zero(num_domains, num_domains)};
    bool any = false;
    for (int m = 0; m < num_domains; ++m) {
      term.cost(m, m) = z_cost[start + m];
      any = any || z_cost[start + m] != 0.0;
    }
    if (any) model.pairs.push_back(std::move(term));
  }
  return model;
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string LinearizedProblem::to_lp() const {
  auto xn = [](const XVar& v) { return "x_" + std::to_string(v.node) + "_" + std::to_string(v.domain); };
  auto yn = [](const YVar& v) {
    return "y_" + std::to_string(v.edge) + "_" + std::to_string(v.src_domain) + "_" +
           std::to_string(v.dst_domain);
  };
  auto zn = [](const ZVar& v) {
    return "z_" + std::to_string(v.first) + "_" + std::to_string(v.second) + "_" +
           std::to_string(v.domain);
  };
  auto term = [](double c, const std::string& name) {
    return (c < 0 ? " - " : " + ") + num(std::abs(c)) + " " + name;
  };

  std::ostringstream out;
  out << "\\ linearized slice partition: " << num_nodes << " nodes, " << num_domains << " domains\n";
  out << "\\ objective constant: " << num(constant) << "\n";
  out << "Minimize\n obj:";
  for (std::size_t i = 0; i < x.size(); ++i) out << term(x_cost[i], xn(x[i]));
  for (std::size_t i = 0; i < y.size(); ++i) out << term(y_cost[i], yn(y[i]));
  for (std::size_t i = 0; i < z.size(); ++i) out << term(z_cost[i], zn(z[i]));
  out << "\nSubject To\n";
  for (int n = 0; n < num_nodes; ++n) {
    out << " one_" << n << ":";
    for (int m = 0; m < num_domains; ++m) out << " + " << xn(x[x_index(n, m)]);
    out << " = 1\n";
  }
  auto linking = [&](const std::string& aux, const std::string& a, const std::string& b) {
    out << " " << aux << "_a: " << aux << " - " << a << " <= 0\n";
    out << " " << aux << "_b: " << aux << " - " << b << " <= 0\n";
    out << " " << aux << "_c: " << aux << " - " << a << " - " << b << " >= -1\n";
  };
  for (const YVar& v : y) {
    linking(yn(v), xn(x[x_index(v.src, v.src_domain)]), xn(x[x_index(v.dst, v.dst_domain)]));
  }
  for (const ZVar& v : z) {
    linking(zn(v), xn(x[x_index(v.first, v.domain)]), xn(x[x_index(v.second, v.domain)]));
  }
  out << "Bounds\n";
  for (const YVar& v : y) {
    if (v.forced_zero) out << " " << yn(v) << " = 0\n";
  }
  for (const auto& [node, domain] : fixed) {
    for (int m = 0; m < num_domains; ++m) {
      out << " " << xn(x[x_index(node, m)]) << " = " << (m == domain ? 1 : 0) << "\n";
    }
  }
  out << "Binary\n";
  for (const XVar& v : x) out << " " << xn(v) << "\n";
  for (const YVar& v : y) out << " " << yn(v) << "\n";
  for (const ZVar& v : z) out << " " << zn(v) << "\n";
  out << "End\n";
  return out.str();
}

LinearizedProblem linearize(const VnfFg& g, const DomainChain& chain, const ObjectiveWeights& w,
                            const NormalizationBounds& bounds, const DeploymentState& state,
                            const TaylorParams& taylor, const AssignmentMask& mask) {
  chain.validate();
  w.validate();
  taylor.validate();
  const int n_count = g.num_nodes();
  const int m_count = chain.size();
  mask.validate(n_count, m_count);
  if (static_cast<int>(state.occupied_cpu.size()) != m_count) {
    throw InvalidInput("deployment state length differs from the number of domains");
  }
  const CostTables tables = cost_tables(g, chain, w, bounds);

  LinearizedProblem lp;
  lp.num_nodes = n_count;
  lp.num_domains = m_count;
  lp.constant = tables.constant;
  lp.fixed = mask.fixed;

  double total = 0.0;
  for (std::int64_t v : state.occupied_cpu) total += static_cast<double>(v);
  for (const VnfNode& node : g.nodes) total += node.cpu;
  if (!(total > 0)) throw InvalidInput("no CPU demand or occupancy anywhere");

  // r_m = base_m + sum_n share_n x(n, m); the KL surrogate is
  // sum_m taylor(r_m) - r_m ln p_m, expanded with x^2 = x.
  const double a = taylor.a;
  const double log_a = std::log(a);
  std::vector<double> share(n_count);
  for (const VnfNode& node : g.nodes) share[node.id] = node.cpu / total;
  for (int m = 0; m < m_count; ++m) {
    const double base = static_cast<double>(state.occupied_cpu[m]) / total;
    const double offset = base - a;
    const double log_p = std::log(chain.target_distribution[m]);
    lp.constant += w.delta * (a * log_a - a * (log_a + 1.0) + base * (log_a + 1.0 - log_p) +
                              offset * offset / (2.0 * a));
  }

  for (int n = 0; n < n_count; ++n) {
    for (int m = 0; m < m_count; ++m) {
      const double base = static_cast<double>(state.occupied_cpu[m]) / total;
      const double offset = base - a;
      const double log_p = std::log(chain.target_distribution[m]);
      const double s = share[n];
      lp.x.push_back({n, m});
      lp.x_cost.push_back(tables.unary(n, m) +
                          w.delta * (s * (log_a + 1.0 - log_p) + (2.0 * offset * s + s * s) / (2.0 * a)));
    }
  }
  for (int e = 0; e < g.num_edges(); ++e) {
    const VnfEdge& edge = g.edges[e];
    for (int mi = 0; mi < m_count; ++mi) {
      for (int mj = 0; mj < m_count; ++mj) {
        lp.y.push_back({e, edge.src, edge.dst, mi, mj, mi > mj});
        lp.y_cost.push_back(edge.bandwidth * tables.link(mi, mj));
      }
    }
  }
  for (int n = 0; n < n_count; ++n) {
    for (int k = n + 1; k < n_count; ++k) {
      for (int m = 0; m < m_count; ++m) {
        lp.z.push_back({n, k, m});
        lp.z_cost.push_back(w.delta * share[n] * share[k] / a);
      }
    }
  }
  return lp;
}

SolveResult solve_ailp(const VnfFg& g, const DomainChain& chain, const ObjectiveWeights& w,
                       const AssignmentMask& mask, const DeploymentState& state,
                       const TaylorParams& taylor, const BnbConfig& config, NormalizationMode mode) {
  const NormalizationBounds bounds = normalization_bounds(g, chain, mode);
  const LinearizedProblem lp = linearize(g, chain, w, bounds, state, taylor, mask);
  const QuadraticModel model = lp.to_model();
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

}  // namespace slicepart
