#include "slicepart/gnn.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <set>

#include "slicepart/rng.hpp"
#include "slicepart/search.hpp"

namespace slicepart {

namespace {

DenseLayer glorot(int fan_in, int fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  DenseLayer layer{Eigen::MatrixXd(fan_in, fan_out), Eigen::VectorXd::Zero(fan_out)};
  for (int r = 0; r < fan_in; ++r) {
    for (int c = 0; c < fan_out; ++c) layer.weight(r, c) = rng.uniform(-limit, limit);
  }
  return layer;
}

DenseLayer zero_layer(const DenseLayer& shape) {
  return {Eigen::MatrixXd::Zero(shape.weight.rows(), shape.weight.cols()),
          Eigen::VectorXd::Zero(shape.bias.size())};
}

template <typename Fn>
void for_each_layer(GnnModel& m, Fn&& fn) {
  for (DenseLayer& l : m.layers) fn(l);
  fn(m.head);
}

template <typename Fn>
void for_each_layer(const GnnModel& m, Fn&& fn) {
  for (const DenseLayer& l : m.layers) fn(l);
  fn(m.head);
}

}  // namespace

GnnModel GnnModel::initialize(int latent_size, int num_layers, int num_domains, std::uint64_t seed) {
  if (latent_size < 1 || num_layers < 1 || num_domains < 2) {
    throw InvalidInput("GNN needs latent_size >= 1, num_layers >= 1 and at least two domains");
  }
  Rng rng(seed);
  GnnModel model;
  model.latent_size = latent_size;
  model.num_layers = num_layers;
  model.num_domains = num_domains;
  int fan_in = model.input_dim;
  for (int k = 0; k < num_layers; ++k) {
    model.layers.push_back(glorot(fan_in, latent_size, rng));
    fan_in = latent_size;
  }
  model.head = glorot(latent_size, num_domains, rng);
  return model;
}

GnnModel GnnModel::zeros_like(const GnnModel& shape) {
  GnnModel z = shape;
  for_each_layer(z, [](DenseLayer& l) { l = zero_layer(l); });
  return z;
}

void GnnModel::validate() const {
  if (static_cast<int>(layers.size()) != num_layers || num_layers < 1) {
    throw InvalidInput("GNN layer count does not match num_layers");
  }
  int fan_in = input_dim;
  for (const DenseLayer& l : layers) {
    if (l.weight.rows() != fan_in || l.weight.cols() != latent_size || l.bias.size() != latent_size) {
      throw InvalidInput("GNN layer dimensions do not chain");
    }
    fan_in = latent_size;
  }
  if (head.weight.rows() != latent_size || head.weight.cols() != num_domains ||
      head.bias.size() != num_domains) {
    throw InvalidInput("GNN head dimensions do not match the domain count");
  }
}

std::size_t GnnModel::parameter_count() const {
  std::size_t count = 0;
  for_each_layer(*this, [&](const DenseLayer& l) { count += l.weight.size() + l.bias.size(); });
  return count;
}

std::vector<double> GnnModel::flatten() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for_each_layer(*this, [&](const DenseLayer& l) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) out.push_back(l.weight(r, c));
    }
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) out.push_back(l.bias(i));
  });
  return out;
}

void GnnModel::unflatten(const std::vector<double>& values) {
  if (values.size() != parameter_count()) throw InvalidInput("parameter vector has the wrong length");
  std::size_t at = 0;
  for_each_layer(*this, [&](DenseLayer& l) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = values[at++];
    }
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias(i) = values[at++];
  });
}

GraphInput graph_input(const VnfFg& g) {
  const int n = g.num_nodes();
  GraphInput input;
  input.features.resize(n, 2);
  for (const VnfNode& node : g.nodes) {
    input.features(node.id, 0) = node.cpu / 16.0;
    input.features(node.id, 1) = node.ram / 64.0;
  }
  std::vector<std::set<int>> neighbours(n);
  for (const VnfEdge& e : g.edges) {
    neighbours[e.src].insert(e.dst);
    neighbours[e.dst].insert(e.src);
  }
  std::vector<double> inv_sqrt_deg(n);
  for (int i = 0; i < n; ++i) inv_sqrt_deg[i] = 1.0 / std::sqrt(neighbours[i].size() + 1.0);
  input.propagation = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    input.propagation(i, i) = inv_sqrt_deg[i] * inv_sqrt_deg[i];
    for (int j : neighbours[i]) input.propagation(i, j) = inv_sqrt_deg[i] * inv_sqrt_deg[j];
  }
  return input;
}

ForwardPass forward_pass(const GnnModel& model, const GraphInput& input) {
  model.validate();
  if (input.features.cols() != model.input_dim) throw InvalidInput("feature width mismatch");
  ForwardPass pass;
  pass.hidden.reserve(model.num_layers + 1);
  pass.hidden.push_back(input.features);
  for (const DenseLayer& layer : model.layers) {
    Eigen::MatrixXd z = pass.hidden.back() * layer.weight;
    z.rowwise() += layer.bias.transpose();
    Eigen::MatrixXd h = input.propagation * z;
    pass.hidden.push_back(h);
  }
  Eigen::MatrixXd logits = pass.hidden.back() * model.head.weight;
  logits.rowwise() += model.head.bias.transpose();
  // Max-subtracted SoftMax.
  Eigen::VectorXd row_max = logits.rowwise().maxCoeff();
  logits.colwise() -= row_max;
  pass.probs = logits.array().exp().matrix();
  Eigen::VectorXd row_sum = pass.probs.rowwise().sum();
  for (Eigen::Index i = 0; i < pass.probs.rows(); ++i) pass.probs.row(i) /= row_sum(i);
  return pass;
}

SoftAssignment forward(const GnnModel& model, const VnfFg& g) {
  return forward_pass(model, graph_input(g)).probs;
}

double loss_relaxed(const SoftAssignment& soft, const VnfFg& g, const DomainChain& chain,
                    const ObjectiveWeights& w, const NormalizationBounds& bounds,
                    const DeploymentState& state) {
  return objective(g, chain, soft, w, bounds, state).total;
}

LossGradient backward(const GnnModel& model, const GraphInput& input, const RelaxedObjective& loss) {
  const ForwardPass pass = forward_pass(model, input);
  LossGradient out;
  out.gradient = GnnModel::zeros_like(model);

  SoftAssignment d_probs;
  out.loss = loss.value_and_gradient(pass.probs, d_probs);

  // SoftMax: d logits = P .* (dP - rowsum(dP .* P)).
  const Eigen::VectorXd inner = d_probs.cwiseProduct(pass.probs).rowwise().sum();
  Eigen::MatrixXd d_logits = d_probs;
  d_logits.colwise() -= inner;
  d_logits = d_logits.cwiseProduct(pass.probs);

  const Eigen::MatrixXd& top = pass.hidden.back();
  out.gradient.head.weight = top.transpose() * d_logits;
  out.gradient.head.bias = d_logits.colwise().sum().transpose();
  Eigen::MatrixXd d_hidden = d_logits * model.head.weight.transpose();

  for (int k = model.num_layers - 1; k >= 0; --k) {
    // hidden[k+1] = A * (hidden[k] * W + 1 b^T), A symmetric.
    const Eigen::MatrixXd d_z = input.propagation.transpose() * d_hidden;
    out.gradient.layers[k].weight = pass.hidden[k].transpose() * d_z;
    out.gradient.layers[k].bias = d_z.colwise().sum().transpose();
    if (k > 0) {
      d_hidden = d_z * model.layers[k].weight.transpose();
    }
  }
  return out;
}

LossGradient backward(const GnnModel& model, const VnfFg& g, const DomainChain& chain,
                      const ObjectiveWeights& w, const NormalizationBounds& bounds,
                      const DeploymentState& state) {
  const RelaxedObjective loss(g, chain, w, bounds, state);
  return backward(model, graph_input(g), loss);
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0) || epochs < 1 || patience < 1 || penalty_warmup < 0 || !(epsilon > 0) ||
      !(beta1 > 0 && beta1 < 1) || !(beta2 > 0 && beta2 < 1)) {
    throw InvalidInput("training configuration values must be positive");
  }
}

HardAssignment repair_assignment(const SoftAssignment& probs, const VnfFg& g,
                                 const AssignmentMask& mask) {
  const int m_count = static_cast<int>(probs.cols());
  const auto windows = domain_windows(g, m_count, mask);
  if (!windows) throw Infeasible("mask violates the ordering constraint");
  const auto preds = predecessors(g);
  HardAssignment a(g.num_nodes(), 0);
  for (int n : topological_order(g)) {
    if (auto it = mask.fixed.find(n); it != mask.fixed.end()) {
      a[n] = it->second;
      continue;
    }
    int best = 0;
    for (int m = 1; m < m_count; ++m) {
      if (probs(n, m) > probs(n, best)) best = m;
    }
    int floor = 0;
    for (int p : preds[n]) floor = std::max(floor, a[p]);
    a[n] = std::min(std::max(best, floor), windows->hi[n]);
  }
  return a;
}

HardAssignment infer_with_repair(const GnnModel& model, const VnfFg& g, const DomainChain& chain,
                                 const AssignmentMask& mask) {
  if (model.num_domains != chain.size()) throw InvalidInput("model and chain disagree on domain count");
  return repair_assignment(forward(model, g), g, mask);
}

namespace {

struct PreparedGraph {
  const VnfFg* graph;
  GraphInput input;
  NormalizationBounds bounds;
  RelaxedObjective loss;
};

std::vector<PreparedGraph> prepare(const std::vector<VnfFg>& graphs, const DomainChain& chain,
                                   const ObjectiveWeights& w, NormalizationMode mode) {
  std::vector<PreparedGraph> out;
  out.reserve(graphs.size());
  const DeploymentState state = DeploymentState::empty(chain.size());
  for (const VnfFg& g : graphs) {
    const NormalizationBounds bounds = normalization_bounds(g, chain, mode);
    out.push_back({&g, graph_input(g), bounds, RelaxedObjective(g, chain, w, bounds, state)});
  }
  return out;
}

struct Evaluation {
  double loss = 0.0;
  double objective = 0.0;
};

Evaluation evaluate(const GnnModel& model, const std::vector<PreparedGraph>& set,
                    const DomainChain& chain, const ObjectiveWeights& w) {
  Evaluation e;
  const DeploymentState state = DeploymentState::empty(chain.size());
  for (const PreparedGraph& p : set) {
    const SoftAssignment probs = forward_pass(model, p.input).probs;
    e.loss += p.loss.value(probs);
    const HardAssignment hard = repair_assignment(probs, *p.graph, {});
    e.objective += objective(*p.graph, chain, hard, w, p.bounds, state).total;
  }
  e.loss /= static_cast<double>(set.size());
  e.objective /= static_cast<double>(set.size());
  return e;
}

class AdamState {
 public:
  AdamState(const TrainConfig& config, std::size_t size)
      : config_(config), first_(size, 0.0), second_(size, 0.0) {}

  void step(std::vector<double>& params, const std::vector<double>& grad) {
    if (config_.optimizer == Optimizer::kGradientDescent) {
      for (std::size_t i = 0; i < params.size(); ++i) params[i] -= config_.learning_rate * grad[i];
      return;
    }
    ++t_;
    const double c1 = 1.0 - std::pow(config_.beta1, t_);
    const double c2 = 1.0 - std::pow(config_.beta2, t_);
    for (std::size_t i = 0; i < params.size(); ++i) {
      first_[i] = config_.beta1 * first_[i] + (1.0 - config_.beta1) * grad[i];
      second_[i] = config_.beta2 * second_[i] + (1.0 - config_.beta2) * grad[i] * grad[i];
      const double m_hat = first_[i] / c1;
      const double v_hat = second_[i] / c2;
      params[i] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
  }

 private:
  const TrainConfig& config_;
  std::vector<double> first_;
  std::vector<double> second_;
  long t_ = 0;
};

}  // namespace

TrainResult train(const GnnModel& initial, const std::vector<VnfFg>& train_set,
                  const std::vector<VnfFg>& val_set, const DomainChain& chain,
                  const ObjectiveWeights& w, const TrainConfig& config) {
  config.validate();
  chain.validate();
  w.validate();
  initial.validate();
  if (train_set.empty() || val_set.empty()) throw InvalidInput("training and validation sets must be non-empty");
  if (initial.num_domains != chain.size()) throw InvalidInput("model and chain disagree on domain count");

  const auto start = std::chrono::steady_clock::now();
  const std::vector<PreparedGraph> train_graphs_full = prepare(train_set, chain, w, config.normalization);
  const std::vector<PreparedGraph> val_graphs = prepare(val_set, chain, w, config.normalization);

  TrainResult result{initial, {}};
  GnnModel model = initial;
  std::vector<double> params = model.flatten();
  AdamState optimizer(config, params.size());
  Rng rng(config.seed);

  const Evaluation first = evaluate(model, val_graphs, chain, w);
  result.history.initial_val_loss = first.loss;
  result.history.initial_val_objective = first.objective;
  double best_objective = first.objective;
  double best_loss = first.loss;
  int since_improved = 0;

  std::vector<std::size_t> order(train_graphs_full.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<PreparedGraph> ramped;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    // Linear penalty ramp: mu * epoch / warmup for the first warmup epochs.
    const bool warming = epoch < config.penalty_warmup;
    if (warming) {
      ObjectiveWeights ramp = w;
      ramp.mu = w.mu * static_cast<double>(epoch) / config.penalty_warmup;
      ramped = prepare(train_set, chain, ramp, config.normalization);
    }
    const std::vector<PreparedGraph>& train_graphs = warming ? ramped : train_graphs_full;
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t idx : order) {
      const PreparedGraph& p = train_graphs[idx];
      const LossGradient lg = backward(model, p.input, p.loss);
      if (!std::isfinite(lg.loss)) {
        throw TrainingDiverged("training loss became non-finite at epoch " + std::to_string(epoch));
      }
      epoch_loss += lg.loss;
      optimizer.step(params, lg.gradient.flatten());
      model.unflatten(params);
    }
    const Evaluation val = evaluate(model, val_graphs, chain, w);
    if (!std::isfinite(val.loss)) throw TrainingDiverged("validation loss became non-finite");
    result.history.train_loss.push_back(epoch_loss / static_cast<double>(train_graphs.size()));
    result.history.val_loss.push_back(val.loss);
    result.history.val_objective.push_back(val.objective);
    result.history.wall_time.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());

    if (val.objective < best_objective) {
      best_objective = val.objective;
      result.model = model;
      result.history.best_epoch = epoch;
    }
    if (val.loss < best_loss) {
      best_loss = val.loss;
      since_improved = 0;
    } else if (!warming && ++since_improved >= config.patience) {
      break;
    }
  }
  return result;
}

}  // namespace slicepart
