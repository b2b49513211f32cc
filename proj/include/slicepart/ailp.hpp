#pragma once

#include <map>
#include <string>
#include <vector>

#include "slicepart/bnb.hpp"
#include "slicepart/cost_model.hpp"
#include "slicepart/graph_model.hpp"
#include "slicepart/search.hpp"

namespace slicepart {

struct TaylorParams {
  double a = 0.3;  // expansion point, 0 < a < 1

  void validate() const;
};

// Second-order expansion of r ln r around r = a.
double taylor_xlogx(double r, double a);

// Binary linear program equivalent to the standardized objective with
// r ln r replaced by its quadratic expansion. Every product of two binaries
// has an auxiliary variable with McCormick linking rows:
//   y(i,mi,j,mj) for each edge and domain pair (ordering: y = 0 for mi > mj),
//   z(n,n',m) for each node pair and domain (the squared load term).
struct LinearizedProblem {
  struct XVar {
    int node;
    int domain;
  };
  struct YVar {
    int edge;
    int src, dst;
    int src_domain, dst_domain;
    bool forced_zero;
  };
  struct ZVar {
    int first, second;
    int domain;
  };

  int num_nodes = 0;
  int num_domains = 0;
  std::vector<XVar> x;
  std::vector<double> x_cost;
  std::vector<YVar> y;
  std::vector<double> y_cost;
  std::vector<ZVar> z;
  std::vector<double> z_cost;
  double constant = 0.0;
  std::map<int, int> fixed;  // mask: node -> domain

  int x_index(int node, int domain) const { return node * num_domains + domain; }
  int forced_zero_count() const;

  // Linear objective at a binary point, with every auxiliary set to the
  // product it stands for.
  double evaluate(const HardAssignment& a) const;

  // The same objective over x for the branch-and-bound engine.
  QuadraticModel to_model() const;

  // CPLEX LP text: objective, assignment rows, linking rows, bounds, binaries.
  std::string to_lp() const;
};

LinearizedProblem linearize(const VnfFg& g, const DomainChain& chain, const ObjectiveWeights& w,
                            const NormalizationBounds& bounds, const DeploymentState& state,
                            const TaylorParams& taylor = {}, const AssignmentMask& mask = {});

// Minimizes the linearized model with branch and bound; the returned value
// is the true objective of the chosen assignment.
SolveResult solve_ailp(const VnfFg& g, const DomainChain& chain, const ObjectiveWeights& w,
                       const AssignmentMask& mask, const DeploymentState& state,
                       const TaylorParams& taylor = {}, const BnbConfig& config = {},
                       NormalizationMode mode = NormalizationMode::kDemandWeighted);

}  // namespace slicepart
