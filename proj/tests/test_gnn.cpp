#include <doctest.h>

#include <cmath>
#include <limits>
#include <numeric>

#include "slicepart/gnn.hpp"
#include "slicepart/oracle.hpp"
#include "support.hpp"

using namespace slicepart;
using namespace slicepart::testing;

namespace {

GnnModel scaled(GnnModel m, double factor) {
  std::vector<double> p = m.flatten();
  for (double& v : p) v *= factor;
  m.unflatten(p);
  return m;
}

VnfFg five_node_instance(Rng& rng) {
  DagParams p;
  p.num_nodes = 5;
  p.num_edges = 4 + static_cast<int>(rng.uniform_index(7));
  p.seed = rng.next();
  return generate_random_dag(p);
}

}  // namespace

TEST_CASE("model shapes") {
  const GnnModel m = GnnModel::initialize(10, 3, 4, 1);
  CHECK_NOTHROW(m.validate());
  CHECK(m.layers.size() == 3);
  CHECK(m.layers[0].weight.rows() == 2);
  CHECK(m.layers[0].weight.cols() == 10);
  CHECK(m.head.weight.rows() == 10);
  CHECK(m.head.weight.cols() == 4);
  CHECK(m.parameter_count() == (2 * 10 + 10) + 2 * (10 * 10 + 10) + (10 * 4 + 4));
  for (double b : m.flatten()) CHECK(std::abs(b) <= std::sqrt(6.0 / 12) + 1e-12);

  GnnModel broken = m;
  broken.layers[1].weight.resize(3, 10);
  CHECK_THROWS_AS(broken.validate(), InvalidInput);
  CHECK_THROWS_AS(GnnModel::initialize(0, 3, 4, 1), InvalidInput);

  GnnModel copy = m;
  std::vector<double> p = m.flatten();
  copy.unflatten(p);
  CHECK(copy.flatten() == p);
  p.pop_back();
  CHECK_THROWS_AS(copy.unflatten(p), InvalidInput);
}

TEST_CASE("graph input features and propagation") {
  const VnfFg g = two_node_graph();
  const GraphInput in = graph_input(g);
  CHECK(in.features(0, 0) == doctest::Approx(2.0 / 16));
  CHECK(in.features(1, 1) == doctest::Approx(16.0 / 64));
  // Both nodes have one undirected neighbour plus the self-loop.
  CHECK(in.propagation(0, 0) == doctest::Approx(0.5));
  CHECK(in.propagation(0, 1) == doctest::Approx(0.5));
  CHECK(in.propagation(1, 0) == doctest::Approx(0.5));
  CHECK((in.propagation - in.propagation.transpose()).norm() == 0);

  const GraphInput d = graph_input(diamond_graph());
  // Node 0 has degree 3 with the self-loop, node 1 degree 3.
  CHECK(d.propagation(0, 1) == doctest::Approx(1.0 / 3));
  CHECK(d.propagation(0, 3) == 0);
}

TEST_CASE("forward rows are stochastic, even for huge parameters") {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const VnfFg g = random_instance(rng, 2, 20);
    const GnnModel m = scaled(GnnModel::initialize(10, 3, 4, trial), trial % 2 ? 1.0 : 1e3);
    const SoftAssignment x = forward(m, g);
    REQUIRE(x.rows() == g.num_nodes());
    REQUIRE(x.cols() == 4);
    for (int i = 0; i < x.rows(); ++i) {
      CHECK(std::abs(x.row(i).sum() - 1.0) < 1e-6);
      CHECK(x.row(i).minCoeff() >= 0.0);
      CHECK(std::isfinite(x.row(i).sum()));
    }
  }
}

TEST_CASE("zero parameters give uniform rows") {
  const GnnModel z = GnnModel::zeros_like(GnnModel::initialize(10, 3, 4, 1));
  const SoftAssignment x = forward(z, diamond_graph());
  for (int i = 0; i < x.rows(); ++i) {
    for (int m = 0; m < 4; ++m) CHECK(x(i, m) == doctest::Approx(0.25));
  }
}

TEST_CASE("symmetric positions of a diamond get identical rows") {
  const SoftAssignment x = forward(GnnModel::initialize(10, 3, 4, 5), diamond_graph());
  CHECK((x.row(1) - x.row(2)).norm() < 1e-12);
}

TEST_CASE("permuting node ids permutes output rows") {
  Rng rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const VnfFg g = random_instance(rng, 3, 15);
    std::vector<int> perm(g.num_nodes());
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    VnfFg h = g;
    for (int i = 0; i < g.num_nodes(); ++i) h.nodes[perm[i]] = {perm[i], g.nodes[i].cpu, g.nodes[i].ram};
    for (VnfEdge& e : h.edges) e = {perm[e.src], perm[e.dst], e.bandwidth};
    const GnnModel m = GnnModel::initialize(8, 2, 4, trial);
    const SoftAssignment a = forward(m, g);
    const SoftAssignment b = forward(m, h);
    for (int i = 0; i < g.num_nodes(); ++i) CHECK((a.row(i) - b.row(perm[i])).norm() < 1e-12);
  }
}

TEST_CASE("forward rejects a mismatched model") {
  GnnModel m = GnnModel::initialize(10, 3, 4, 1);
  m.input_dim = 3;
  m.layers[0].weight.resize(3, 10);
  CHECK_THROWS_AS(forward(m, two_node_graph()), InvalidInput);
}

TEST_CASE("relaxed loss") {
  const VnfFg g = two_node_graph();
  const DomainChain c = default_chain();
  const NormalizationBounds b = normalization_bounds(g, c);
  const DeploymentState s = DeploymentState::empty(4);
  const ObjectiveWeights w;

  const HardAssignment a{1, 3};
  CHECK(loss_relaxed(one_hot(a, 4), g, c, w, b, s) == doctest::Approx(objective(g, c, a, w, b, s).total));

  const SoftAssignment u = SoftAssignment::Constant(2, 4, 0.25);
  ObjectiveWeights no_penalty = w;
  no_penalty.mu = 0;
  CHECK(loss_relaxed(u, g, c, w, b, s) - loss_relaxed(u, g, c, no_penalty, b, s) == doctest::Approx(3.75));
}

TEST_CASE("analytic gradients match central differences") {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const VnfFg g = five_node_instance(rng);
    const GnnModel m = GnnModel::initialize(6, 3, 4, 100 + trial);
    CHECK(max_gradient_error(m, g, default_chain(), {}) < 1e-4);
  }
}

TEST_CASE("edgeless graphs have no penalty gradient") {
  VnfFg g = path_graph(4);
  g.edges.clear();
  const DomainChain c = default_chain();
  const NormalizationBounds b = normalization_bounds(g, c);
  const GnnModel m = GnnModel::initialize(6, 2, 4, 4);
  ObjectiveWeights with = {1, 1, 1, 2, 10};
  ObjectiveWeights without = with;
  without.mu = 0;
  const auto ga = backward(m, g, c, with, b, DeploymentState::empty(4)).gradient.flatten();
  const auto gb = backward(m, g, c, without, b, DeploymentState::empty(4)).gradient.flatten();
  for (std::size_t i = 0; i < ga.size(); ++i) CHECK(ga[i] == doctest::Approx(gb[i]).epsilon(1e-14));
}

TEST_CASE("all-zero weights give zero gradients") {
  Rng rng(4);
  const VnfFg g = five_node_instance(rng);
  const GnnModel m = GnnModel::initialize(6, 3, 4, 7);
  const auto grad = backward(m, g, default_chain(), {0, 0, 0, 0, 0}, normalization_bounds(g, default_chain()),
                             DeploymentState::empty(4))
                        .gradient.flatten();
  for (double v : grad) CHECK(v == 0.0);
}

TEST_CASE("training lowers the loss on a fixed graph") {
  Rng rng(5);
  const VnfFg g = random_instance(rng, 8, 12);
  TrainConfig cfg;
  cfg.epochs = 60;
  cfg.seed = 1;
  const TrainResult r = train(GnnModel::initialize(10, 3, 4, 1), {g}, {g}, default_chain(), {}, cfg);
  const auto& h = r.history;
  REQUIRE(h.epochs_completed() > 0);
  CHECK(*std::min_element(h.val_loss.begin(), h.val_loss.end()) < h.initial_val_loss);
  CHECK(h.train_loss.size() == h.val_loss.size());
  CHECK(h.val_objective.size() == h.wall_time.size());
}

TEST_CASE("training a single node reaches the oracle optimum") {
  VnfFg g;
  g.nodes = {{0, 4, 16}};
  const DomainChain c = default_chain();
  const ObjectiveWeights w{1, 0, 0, 2, 10};
  TrainConfig cfg;
  cfg.epochs = 200;
  cfg.seed = 3;
  const TrainResult r = train(GnnModel::initialize(10, 3, 4, 3), {g}, {g}, c, w, cfg);
  const ExactResult best = solve_exact(g, c, w, {}, DeploymentState::empty(4));
  const auto& h = r.history;
  const double best_val = *std::min_element(h.val_objective.begin(), h.val_objective.end());
  CHECK(std::abs(best_val - best.value.total) <= 0.05);
  // The relaxation may undercut the hard optimum but not exceed it by more.
  CHECK(*std::min_element(h.train_loss.begin(), h.train_loss.end()) <= best.value.total + 0.05);
}

TEST_CASE("training is deterministic for a fixed seed") {
  Rng rng(6);
  std::vector<VnfFg> train_set, val_set;
  for (int i = 0; i < 12; ++i) train_set.push_back(random_instance(rng, 5, 12));
  for (int i = 0; i < 4; ++i) val_set.push_back(random_instance(rng, 5, 12));
  TrainConfig cfg;
  cfg.epochs = 15;
  cfg.seed = 9;
  const GnnModel init = GnnModel::initialize(10, 3, 4, 9);
  const TrainResult a = train(init, train_set, val_set, default_chain(), {}, cfg);
  const TrainResult b = train(init, train_set, val_set, default_chain(), {}, cfg);
  CHECK(a.history.train_loss == b.history.train_loss);
  CHECK(a.history.val_loss == b.history.val_loss);
  CHECK(a.history.val_objective == b.history.val_objective);
  CHECK(a.model.flatten() == b.model.flatten());
}

TEST_CASE("returned parameters have the best validation objective") {
  Rng rng(7);
  std::vector<VnfFg> train_set, val_set;
  for (int i = 0; i < 10; ++i) train_set.push_back(random_instance(rng, 5, 12));
  for (int i = 0; i < 5; ++i) val_set.push_back(random_instance(rng, 5, 12));
  TrainConfig cfg;
  cfg.epochs = 25;
  const TrainResult r = train(GnnModel::initialize(10, 3, 4, 2), train_set, val_set, default_chain(), {}, cfg);
  double best = r.history.initial_val_objective;
  for (double v : r.history.val_objective) best = std::min(best, v);
  double mean = 0;
  for (const VnfFg& g : val_set) {
    const HardAssignment a = infer_with_repair(r.model, g, default_chain());
    mean += objective(g, default_chain(), a, {}, normalization_bounds(g, default_chain()), DeploymentState::empty(4)).total;
  }
  CHECK(mean / val_set.size() == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("training guards") {
  const VnfFg g = two_node_graph();
  TrainConfig cfg;
  CHECK_THROWS_AS(train(GnnModel::initialize(4, 1, 4, 1), {}, {g}, default_chain(), {}, cfg), InvalidInput);
  cfg.learning_rate = 0;
  CHECK_THROWS_AS(train(GnnModel::initialize(4, 1, 4, 1), {g}, {g}, default_chain(), {}, cfg), InvalidInput);
  cfg = {};
  GnnModel nan_model = GnnModel::initialize(4, 1, 4, 1);
  nan_model.head.bias(0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(train(nan_model, {g}, {g}, default_chain(), {}, cfg), TrainingDiverged);
}

TEST_CASE("repair keeps feasible one-hot rows") {
  const VnfFg g = path_graph(3);
  const HardAssignment a{0, 2, 3};
  CHECK(repair_assignment(one_hot(a, 4), g, {}) == a);
}

TEST_CASE("repair lifts a node to its predecessor's domain") {
  const VnfFg g = two_node_graph();
  CHECK(repair_assignment(one_hot({2, 1}, 4), g, {}) == HardAssignment{2, 2});
}

TEST_CASE("repair breaks ties toward the lower domain") {
  VnfFg g;
  g.nodes = {{0, 1, 1}};
  SoftAssignment x(1, 4);
  x << 0.1, 0.4, 0.4, 0.1;
  CHECK(repair_assignment(x, g, {}) == HardAssignment{1});
}

TEST_CASE("repair honours masks") {
  const VnfFg g = path_graph(3);
  AssignmentMask mask;
  mask.fixed = {{2, 1}};
  // Argmax would place node 0 in cloud; the masked descendant caps it.
  const HardAssignment a = repair_assignment(one_hot({3, 0, 3}, 4), g, mask);
  CHECK(a[2] == 1);
  CHECK(check_feasibility(g, default_chain(), a, mask).feasible());

  mask.fixed = {{0, 3}, {2, 0}};
  CHECK_THROWS_AS(repair_assignment(one_hot({3, 3, 3}, 4), g, mask), Infeasible);
}

TEST_CASE("repaired outputs are always feasible") {
  Rng rng(8);
  const GnnModel m = GnnModel::initialize(10, 3, 4, 8);
  for (int trial = 0; trial < 200; ++trial) {
    const VnfFg g = random_instance(rng, 4, 20);
    AssignmentMask mask;
    if (trial % 2) {
      const HardAssignment f = random_feasible(g, 4, rng);
      for (int n = 0; n < g.num_nodes(); n += 4) mask.fixed[n] = f[n];
    }
    const SoftAssignment noise = random_soft(g.num_nodes(), 4, rng);
    CHECK(check_feasibility(g, default_chain(), repair_assignment(noise, g, mask), mask).feasible());
    const HardAssignment a = infer_with_repair(m, g, default_chain(), mask);
    CHECK(check_feasibility(g, default_chain(), a, mask).feasible());
    for (const auto& [node, domain] : mask.fixed) CHECK(a[node] == domain);
  }
}
