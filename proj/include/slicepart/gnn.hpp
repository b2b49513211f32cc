#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "slicepart/cost_model.hpp"
#include "slicepart/graph_model.hpp"

namespace slicepart {

// Maps rows x to x * weight + bias; weight is fan_in x fan_out.
struct DenseLayer {
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;
};

// Graph convolutional partitioner: input_dim -> latent (num_layers times,
// no activation between layers) -> num_domains logits -> SoftMax.
struct GnnModel {
  int input_dim = 2;
  int latent_size = 10;
  int num_layers = 3;
  int num_domains = 4;
  std::vector<DenseLayer> layers;
  DenseLayer head;

  // Glorot-uniform weights, zero biases.
  static GnnModel initialize(int latent_size, int num_layers, int num_domains, std::uint64_t seed);
  static GnnModel zeros_like(const GnnModel& shape);

  // Throws InvalidInput if the layer shapes do not chain.
  void validate() const;
  std::size_t parameter_count() const;

  // Flat views in a fixed order (layers, then head; weight then bias).
  std::vector<double> flatten() const;
  void unflatten(const std::vector<double>& values);
};

// Node features (CPU/16, RAM/64) and the normalized propagation matrix
// D^-1/2 (A + I) D^-1/2 over the undirected neighbourhood.
struct GraphInput {
  Eigen::MatrixXd features;
  Eigen::MatrixXd propagation;
};

GraphInput graph_input(const VnfFg& g);

struct ForwardPass {
  std::vector<Eigen::MatrixXd> hidden;  // hidden[0] = features, hidden[k] after layer k
  Eigen::MatrixXd probs;                // |N| x |M|
};

ForwardPass forward_pass(const GnnModel& model, const GraphInput& input);

// Row-stochastic per-node domain probabilities.
SoftAssignment forward(const GnnModel& model, const VnfFg& g);

// Relaxed training loss: the soft objective including mu * ordering penalty.
double loss_relaxed(const SoftAssignment& soft, const VnfFg& g, const DomainChain& chain,
                    const ObjectiveWeights& w, const NormalizationBounds& bounds,
                    const DeploymentState& state);

struct LossGradient {
  double loss = 0.0;
  GnnModel gradient;  // same shapes as the model
};

// Reverse-mode gradient of the relaxed loss with respect to every weight
// and bias.
LossGradient backward(const GnnModel& model, const GraphInput& input, const RelaxedObjective& loss);
LossGradient backward(const GnnModel& model, const VnfFg& g, const DomainChain& chain,
                      const ObjectiveWeights& w, const NormalizationBounds& bounds,
                      const DeploymentState& state);

enum class Optimizer { kGradientDescent, kAdam };

struct TrainConfig {
  double learning_rate = 0.01;
  int epochs = 200;
  Optimizer optimizer = Optimizer::kAdam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
  int patience = 20;  // epochs without validation-loss improvement
  // Epochs over which mu ramps up from 0; 0 trains at full mu throughout.
  int penalty_warmup = 20;
  NormalizationMode normalization = NormalizationMode::kDemandWeighted;

  void validate() const;
};

struct TrainHistory {
  double initial_val_loss = 0.0;
  double initial_val_objective = 0.0;
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  std::vector<double> val_objective;  // mean true objective after repair
  std::vector<double> wall_time;      // seconds since training began
  int best_epoch = -1;                // -1: the initial parameters were best

  int epochs_completed() const { return static_cast<int>(train_loss.size()); }
};

struct TrainResult {
  GnnModel model;
  TrainHistory history;
};

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Per-graph updates over a seeded shuffle of the training set each epoch;
// returns the parameters with the best validation true objective.
TrainResult train(const GnnModel& initial, const std::vector<VnfFg>& train_set,
                  const std::vector<VnfFg>& val_set, const DomainChain& chain,
                  const ObjectiveWeights& w, const TrainConfig& config);

// Argmax (ties to the lower index), mask overrides, then an ordering repair
// in topological order that lifts each node to the largest domain among its
// predecessors and keeps it below any masked descendant.
HardAssignment repair_assignment(const SoftAssignment& probs, const VnfFg& g,
                                 const AssignmentMask& mask);

HardAssignment infer_with_repair(const GnnModel& model, const VnfFg& g, const DomainChain& chain,
                                 const AssignmentMask& mask = {});

}  // namespace slicepart
