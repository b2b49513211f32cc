#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "slicepart/graph_model.hpp"

namespace slicepart {

struct RawCosts {
  double dc = 0.0;  // compute + memory
  double dl = 0.0;  // intra-domain links
  double ic = 0.0;  // inter-domain links

  double total() const { return dc + dl + ic; }
};

enum class NormalizationMode {
  kDemandWeighted,  // demand-weighted cheapest / dearest placement (default)
  kLiteral,         // |N| * (c_CPU + c_RAM) extremes, |E| * link-cost extremes
  kNone,            // identity: raw costs enter the objective unscaled
};

struct NormalizationBounds {
  double dc_min = 0.0, dc_max = 0.0;
  double dl_min = 0.0, dl_max = 0.0;
  double ic_min = 0.0, ic_max = 0.0;
};

// Min-max scaling; a degenerate range maps every value to 0.
inline double min_max(double value, double lo, double hi) {
  return hi > lo ? (value - lo) / (hi - lo) : 0.0;
}

struct ObjectiveWeights {
  double alpha = 1.0;  // compute cost
  double beta = 1.0;   // intra-domain link cost
  double gamma = 1.0;  // inter-domain link cost
  double delta = 2.0;  // KL load imbalance
  double mu = 10.0;    // ordering penalty (soft form only)

  // Throws InvalidInput on a negative or non-finite weight.
  void validate() const;
};

struct ObjectiveBreakdown {
  double dc_hat = 0.0;
  double dl_hat = 0.0;
  double ic_hat = 0.0;
  double kl = 0.0;
  double penalty = 0.0;  // unweighted ordering-violation mass
};

struct ObjectiveValue {
  double total = 0.0;
  ObjectiveBreakdown breakdown;
  RawCosts raw;
  std::vector<double> load;  // CPU load ratios r
};

RawCosts raw_costs(const VnfFg& g, const DomainChain& chain, const HardAssignment& a);

// Expected raw costs under independent per-node probability rows.
RawCosts expected_raw_costs(const VnfFg& g, const DomainChain& chain, const SoftAssignment& x);

NormalizationBounds normalization_bounds(const VnfFg& g, const DomainChain& chain,
                                         NormalizationMode mode = NormalizationMode::kDemandWeighted);

std::vector<double> load_ratios(const VnfFg& g, const Assignment& a, const DeploymentState& state);

// Natural-log entropy with 0 ln 0 = 0.
double entropy(std::span<const double> r);

// KL(r || p) in nats with 0 ln(0 / p) = 0. Throws InvalidInput if p has a
// non-positive entry or the lengths differ.
double kl_divergence(std::span<const double> r, std::span<const double> p);

struct Violation {
  enum class Kind { kOrdering, kMask, kLatency, kDomainRange };
  Kind kind;
  int node = -1;  // offending node, or edge source for ordering violations
  int other = -1;  // edge target for ordering violations
  std::string message;
};

struct FeasibilityReport {
  std::vector<Violation> violations;

  bool feasible() const { return violations.empty(); }
  int count(Violation::Kind kind) const;
};

FeasibilityReport check_feasibility(const VnfFg& g, const DomainChain& chain,
                                    const HardAssignment& a, const AssignmentMask& mask = {},
                                    bool enforce_latency = false);

// Standardized weighted objective. Hard assignments are evaluated term by
// term from raw costs with no ordering penalty; soft assignments use
// expectations plus mu times the ordering-violation mass.
ObjectiveValue objective(const VnfFg& g, const DomainChain& chain, const Assignment& a,
                         const ObjectiveWeights& w, const NormalizationBounds& bounds,
                         const DeploymentState& state);

// Per-instance coefficient tables of the objective in the assignment
// indicators: total = constant + sum_n unary(n, m_n)
//   + sum_e bw_e * link(m_src, m_dst) + delta * KL(r) [+ mu * penalty].
struct CostTables {
  double constant = 0.0;
  Eigen::MatrixXd unary;  // |N| x |M|, weighted normalized compute cost
  Eigen::MatrixXd link;   // |M| x |M|, weighted normalized link cost per Mbps
};

CostTables cost_tables(const VnfFg& g, const DomainChain& chain, const ObjectiveWeights& w,
                       const NormalizationBounds& bounds);

// The relaxed (soft) objective with its analytic gradient in the
// probability entries. Holds its own copy of every table it needs.
class RelaxedObjective {
 public:
  RelaxedObjective(const VnfFg& g, const DomainChain& chain, const ObjectiveWeights& w,
                   const NormalizationBounds& bounds, const DeploymentState& state);

  double value(const SoftAssignment& x) const;
  ObjectiveValue evaluate(const SoftAssignment& x) const;

  // Returns the objective; writes d objective / d x into `grad` (same shape).
  double value_and_gradient(const SoftAssignment& x, SoftAssignment& grad) const;

  int num_nodes() const { return static_cast<int>(cpu_.size()); }
  int num_domains() const { return static_cast<int>(target_.size()); }

 private:
  std::vector<double> loads(const SoftAssignment& x) const;

  struct Arc {
    int src, dst;
    double bandwidth;
  };

  ObjectiveWeights weights_;
  CostTables tables_;
  Eigen::MatrixXd violation_;  // 1 where m_src > m_dst
  std::vector<Arc> arcs_;
  std::vector<double> cpu_;
  std::vector<double> occupied_;
  std::vector<double> target_;
  double total_cpu_ = 0.0;
  // Unscaled pieces for the breakdown.
  NormalizationBounds bounds_;
  Eigen::MatrixXd dc_raw_;
  Eigen::MatrixXd dl_raw_;
  Eigen::MatrixXd ic_raw_;
};

}  // namespace slicepart
