#include <doctest.h>

#include <algorithm>
#include <set>

#include "slicepart/json_io.hpp"
#include "support.hpp"

using namespace slicepart;
using namespace slicepart::testing;

namespace {

bool in_levels(int v, const std::vector<int>& levels) {
  return std::find(levels.begin(), levels.end(), v) != levels.end();
}

}  // namespace

TEST_CASE("random DAG with the experiment levels") {
  DagParams p;
  p.num_nodes = 10;
  p.num_edges = 15;
  p.seed = 7;
  const VnfFg g = generate_random_dag(p);
  CHECK(g.num_nodes() == 10);
  CHECK(g.num_edges() == 15);
  CHECK(validate(g).ok());
  for (const VnfNode& n : g.nodes) {
    CHECK(in_levels(n.cpu, p.cpu_levels));
    CHECK(in_levels(n.ram, p.ram_levels));
  }
  for (const VnfEdge& e : g.edges) {
    CHECK(std::find(p.bw_levels.begin(), p.bw_levels.end(), e.bandwidth) != p.bw_levels.end());
  }
}

TEST_CASE("two-node DAG is fully determined") {
  DagParams p;
  p.num_nodes = 2;
  p.num_edges = 1;
  p.cpu_levels = {1};
  p.ram_levels = {1};
  p.bw_levels = {1};
  p.seed = 0;
  const VnfFg g = generate_random_dag(p);
  REQUIRE(g.num_edges() == 1);
  CHECK(g.nodes[0].cpu == 1);
  CHECK(g.nodes[1].ram == 1);
  CHECK(g.edges[0].bandwidth == 1.0);
  CHECK(g.edges[0].src != g.edges[0].dst);
}

TEST_CASE("edge count is clamped to the DAG maximum") {
  DagParams p;
  p.num_nodes = 10;
  p.num_edges = 60;
  p.seed = 3;
  const VnfFg g = generate_random_dag(p);
  CHECK(g.num_edges() == 45);
  CHECK(validate(g).ok());

  p.num_edges = 2;  // below a spanning tree
  CHECK(generate_random_dag(p).num_edges() == 9);
}

TEST_CASE("generator rejects fewer than two nodes") {
  DagParams p;
  p.num_nodes = 1;
  CHECK_THROWS_AS(generate_random_dag(p), InvalidInput);
  p.num_nodes = 5;
  p.cpu_levels.clear();
  CHECK_THROWS_AS(generate_random_dag(p), InvalidInput);
}

TEST_CASE("generated graphs are valid, connected and reproducible") {
  Rng rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    DagParams p;
    p.num_nodes = 2 + static_cast<int>(rng.uniform_index(24));
    p.num_edges = static_cast<int>(rng.uniform_index(80));
    p.seed = rng.next();
    const VnfFg g = generate_random_dag(p);
    REQUIRE(validate(g).ok());
    REQUIRE(weakly_connected(g));
    if (trial % 50 == 0) {
      CHECK(generate_random_dag(p) == g);
      CHECK(graph_from_json(Json::parse(to_json(g).dump())) == g);
    }
  }
}

TEST_CASE("validate reports each kind of defect") {
  CHECK(validate(path_graph(3)).ok());

  VnfFg two_cycle = path_graph(2);
  two_cycle.edges.push_back({1, 0, 100});
  CHECK(validate(two_cycle).has(ValidationIssue::Kind::kCycle));

  VnfFg dangling = path_graph(3);
  dangling.edges.push_back({0, 99, 100});
  CHECK(validate(dangling).has(ValidationIssue::Kind::kDanglingEndpoint));

  VnfFg dup = path_graph(3);
  dup.edges.push_back({0, 1, 200});
  CHECK(validate(dup).has(ValidationIssue::Kind::kDuplicateEdge));

  VnfFg loop = path_graph(3);
  loop.edges.push_back({2, 2, 100});
  CHECK(validate(loop).has(ValidationIssue::Kind::kSelfLoop));

  VnfFg bad = path_graph(3);
  bad.nodes[1].cpu = 0;
  CHECK(validate(bad).has(ValidationIssue::Kind::kBadAttribute));

  VnfFg ids = path_graph(3);
  ids.nodes[2].id = 7;
  CHECK(validate(ids).has(ValidationIssue::Kind::kBadNodeId));
}

TEST_CASE("topological order") {
  CHECK(topological_order(path_graph(3)) == std::vector<int>{0, 1, 2});
  CHECK(topological_order(path_graph(1)) == std::vector<int>{0});
  CHECK(topological_order(diamond_graph()) == std::vector<int>{0, 1, 2, 3});

  // Ties between ready nodes go to the smaller id.
  VnfFg g;
  for (int i = 0; i < 4; ++i) g.nodes.push_back({i, 1, 1});
  g.edges = {{3, 0, 1}, {2, 1, 1}};
  CHECK(topological_order(g) == std::vector<int>{2, 1, 3, 0});

  VnfFg cyc = path_graph(3);
  cyc.edges.push_back({2, 0, 1});
  CHECK_THROWS_AS(topological_order(cyc), InvalidInput);
}

TEST_CASE("topological order respects every edge on random graphs") {
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const VnfFg g = random_instance(rng, 2, 20);
    const auto order = topological_order(g);
    std::vector<int> pos(g.num_nodes());
    for (int i = 0; i < g.num_nodes(); ++i) pos[order[i]] = i;
    for (const VnfEdge& e : g.edges) REQUIRE(pos[e.src] < pos[e.dst]);
  }
}

TEST_CASE("default chain") {
  const DomainChain c = default_chain();
  REQUIRE(c.size() == 4);
  c.validate();
  CHECK(c.domains[0].cpu_cost == 100);
  CHECK(c.domains[3].ram_cost == 1);
  CHECK(c.inter_cost(0, 1) == 10);
  CHECK(c.inter_cost(1, 0) == 10);
  CHECK(c.inter_cost(0, 3) == 17);
  CHECK(c.inter_cost(1, 3) == 7);
  CHECK(c.inter_cost(2, 2) == 0);
  CHECK(c.max_inter_cost() == 17);
}

TEST_CASE("chain validation") {
  DomainChain c = default_chain();
  c.target_distribution = {0.1, 0.2, 0.3, 0.3};
  CHECK_THROWS_AS(c.validate(), InvalidInput);
  c = default_chain();
  c.target_distribution = {0.0, 0.3, 0.3, 0.4};
  CHECK_THROWS_AS(c.validate(), InvalidInput);
  c = default_chain();
  c.inter_link_cost.pop_back();
  CHECK_THROWS_AS(c.validate(), InvalidInput);
  c = default_chain();
  c.domains.resize(1);
  CHECK_THROWS_AS(c.validate(), InvalidInput);
}

TEST_CASE("assignment and mask validation") {
  CHECK_NOTHROW(validate_assignment(HardAssignment{0, 3}, 2, 4));
  CHECK_THROWS_AS(validate_assignment(HardAssignment{0, 4}, 2, 4), InvalidInput);
  CHECK_THROWS_AS(validate_assignment(HardAssignment{0}, 2, 4), InvalidInput);
  SoftAssignment x = SoftAssignment::Constant(2, 4, 0.25);
  CHECK_NOTHROW(validate_assignment(x, 2, 4));
  x(0, 0) = 0.5;
  CHECK_THROWS_AS(validate_assignment(x, 2, 4), InvalidInput);

  const SoftAssignment oh = one_hot({1, 3}, 4);
  CHECK(oh(0, 1) == 1.0);
  CHECK(oh.row(1).sum() == 1.0);

  AssignmentMask mask;
  mask.fixed = {{0, 2}};
  CHECK_NOTHROW(mask.validate(2, 4));
  mask.fixed = {{5, 2}};
  CHECK_THROWS_AS(mask.validate(2, 4), InvalidInput);
  mask.fixed = {{0, 4}};
  CHECK_THROWS_AS(mask.validate(2, 4), InvalidInput);
}

TEST_CASE("rng draws are in range and reproducible") {
  Rng a(9), b(9);
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.uniform_index(7);
    CHECK(x < 7);
    CHECK(x == b.uniform_index(7));
    const double u = a.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    b.uniform01();
  }
  std::vector<int> v{1, 2, 3, 4, 5};
  a.shuffle(v);
  std::sort(v.begin(), v.end());
  CHECK(v == std::vector<int>{1, 2, 3, 4, 5});
}
