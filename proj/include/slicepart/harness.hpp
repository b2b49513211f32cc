#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "slicepart/cost_model.hpp"
#include "slicepart/gnn.hpp"
#include "slicepart/graph_model.hpp"
#include "slicepart/json_io.hpp"
#include "slicepart/search.hpp"

namespace slicepart {

struct CorpusSpec {
  int count = 200;
  std::vector<int> node_choices{10, 15, 20};
  std::vector<int> edge_choices{15, 30, 60};
  std::vector<int> cpu_levels{2, 4, 8, 16};
  std::vector<int> ram_levels{8, 16, 32, 64};
  std::vector<double> bw_levels{100, 200, 500, 1000};
  std::uint64_t seed = 1;

  void validate() const;
};

// Each graph draws its node and edge counts uniformly from the choice sets,
// then a per-graph seed for generate_random_dag.
std::vector<VnfFg> build_corpus(const CorpusSpec& spec);

// Writes graph_0000.json ... plus manifest.json listing them in order.
void write_corpus(const std::filesystem::path& dir, const std::vector<VnfFg>& graphs,
                  const CorpusSpec& spec);
std::vector<VnfFg> load_corpus(const std::filesystem::path& dir);

Json to_json(const CorpusSpec& spec);

enum class SolverKind { kGnnp, kAilp, kBnb, kOracle };

const char* to_string(SolverKind s);
// Throws InvalidInput for an unknown name.
SolverKind solver_from_string(const std::string& name);

// One solver call, timed. status is optimal, budget_exhausted, infeasible,
// no_incumbent, or heuristic (GNNP, which proves nothing).
struct SolverRun {
  std::string status;
  HardAssignment assignment;
  ObjectiveValue value;
  BnbStats stats;
  double seconds = 0.0;

  bool has_assignment() const { return !assignment.empty(); }
};

// gnn_model is required for kGnnp and ignored otherwise.
SolverRun run_solver(SolverKind solver, const VnfFg& g, const DomainChain& chain,
                     const ObjectiveWeights& w, const AssignmentMask& mask,
                     const DeploymentState& state, const BnbConfig& budget,
                     const GnnModel* gnn_model = nullptr,
                     NormalizationMode mode = NormalizationMode::kDemandWeighted);

struct InstanceRow {
  int instance = 0;
  SolverKind solver = SolverKind::kBnb;
  std::string status;  // optimal, budget_exhausted, infeasible, no_incumbent, error
  bool feasible = false;
  double objective = 0.0;
  double raw_cost = 0.0;
  double kl = 0.0;
  std::vector<double> load;
  double seconds = 0.0;
  std::string error;
  HardAssignment assignment;
};

struct SolverSummary {
  SolverKind solver = SolverKind::kBnb;
  int instances = 0;
  int solved = 0;
  double total_cost = 0.0;
  double mean_kl = 0.0;
  double aggregate_kl = 0.0;  // KL of the CPU distribution pooled over the corpus
  std::vector<double> cpu_share;
  double total_seconds = 0.0;
  double mean_seconds = 0.0;
  double feasibility_rate = 0.0;
};

struct ComparisonReport {
  std::vector<SolverSummary> summaries;
  std::vector<InstanceRow> rows;

  const SolverSummary* summary(SolverKind s) const;
};

struct ComparisonConfig {
  std::vector<SolverKind> solvers{SolverKind::kGnnp, SolverKind::kAilp, SolverKind::kBnb};
  BnbConfig budget;                   // shared by BnB and AILP
  std::optional<GnnModel> gnn_model;  // required when gnnp is requested
  bool sequential = false;            // thread occupied CPU through the corpus
  NormalizationMode normalization = NormalizationMode::kDemandWeighted;
  AssignmentMask mask;                // applied to every instance when non-empty
};

ComparisonReport run_comparison(const std::vector<VnfFg>& corpus, const DomainChain& chain,
                                const ObjectiveWeights& w, const ComparisonConfig& config);

// Five-number summary; quartiles by linear interpolation between order
// statistics.
struct BoxStats {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  int count = 0;

  static BoxStats of(std::vector<double> values);
};

struct SweepPoint {
  std::string axis;  // "latent" or "layers"
  int latent_size = 10;
  int num_layers = 3;
  std::vector<double> scores;  // best validation objective per run
  BoxStats stats;
};

struct SweepConfig {
  std::vector<int> latent_sizes{5, 10, 25, 50};
  std::vector<int> layer_counts{1, 3, 5, 7};
  int fixed_latent = 10;
  int fixed_layers = 3;
  int repeats = 10;
  TrainConfig train;
  std::uint64_t seed = 0;  // run r uses seed + r for initialization and shuffling
  int jobs = 1;

  void validate() const;
};

struct SweepReport {
  std::vector<SweepPoint> points;
};

SweepReport sweep_hyperparams(const std::vector<VnfFg>& train_set, const std::vector<VnfFg>& val_set,
                              const DomainChain& chain, const ObjectiveWeights& w,
                              const SweepConfig& config);

struct KlSample {
  std::vector<double> values;
  std::vector<double> bin_edges;  // bins + 1 edges
  std::vector<int> counts;
  double mean = 0.0;
  double median = 0.0;
  double max = 0.0;
};

// KL(r || p) for r drawn uniformly from the simplex (Dirichlet with unit
// concentration).
KlSample sample_kl_distribution(int n_samples, std::span<const double> p, std::uint64_t seed,
                                int bins = 40);

struct AblationArm {
  std::string label;
  ObjectiveWeights weights;
  NormalizationMode normalization = NormalizationMode::kDemandWeighted;
  double mean_kl = 0.0;
  double aggregate_kl = 0.0;
  double cpu_cost = 0.0;  // raw CPU-only cost summed over the corpus
  double total_cost = 0.0;
  std::vector<double> cpu_share;
  double extreme_share = 0.0;  // share in the first and last domain
};

struct AblationPair {
  std::string name;
  std::string expectation;
  AblationArm baseline;
  AblationArm variant;
  bool direction_holds = false;
};

struct AblationConfig {
  TrainConfig train;
  int latent_size = 10;
  int num_layers = 3;
  std::uint64_t init_seed = 0;
  int jobs = 1;
};

struct AblationReport {
  std::vector<AblationPair> pairs;
};

// Pairs: A halves delta, B turns standardization off, C doubles alpha,
// D doubles gamma. Each arm retrains GNNP with the same seeds.
AblationReport run_ablations(const std::vector<VnfFg>& train_set, const std::vector<VnfFg>& val_set,
                             const std::vector<VnfFg>& eval_set, const DomainChain& chain,
                             const ObjectiveWeights& base, const AblationConfig& config);

// Runs fn(i) for i in [0, count) on up to `jobs` threads.
void parallel_for(int count, int jobs, const std::function<void(int)>& fn);

Json to_json(const ComparisonReport& r, bool include_timing = true);
Json to_json(const SweepReport& r);
Json to_json(const KlSample& s);
Json to_json(const AblationReport& r);

std::string to_csv(const ComparisonReport& r, bool include_timing = true);
std::string to_csv(const SweepReport& r);
std::string to_csv(const KlSample& s);
std::string to_csv(const AblationReport& r);

}  // namespace slicepart
