// slicepart: generate corpora, solve single instances, train the GNN
// partitioner and run the benchmark programs.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "slicepart/harness.hpp"
#include "slicepart/json_io.hpp"

namespace fs = std::filesystem;
using namespace slicepart;

namespace {

enum ExitCode { kOk = 0, kInfeasible = 1, kBadInput = 2, kNoIncumbent = 3 };

DomainChain load_chain(const std::string& path) {
  return path.empty() ? default_chain() : chain_from_json(read_json(path));
}

void emit(const Json& j, const std::string& path) {
  if (path.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    write_json(path, j);
  }
}

struct GenArgs {
  int count = 200;
  std::vector<int> nodes{10, 15, 20};
  std::vector<int> edges{15, 30, 60};
  std::uint64_t seed = 1;
  std::string out;
};

int run_gen(const GenArgs& a) {
  CorpusSpec spec;
  spec.count = a.count;
  spec.node_choices = a.nodes;
  spec.edge_choices = a.edges;
  spec.seed = a.seed;
  const std::vector<VnfFg> graphs = build_corpus(spec);
  write_corpus(a.out, graphs, spec);
  write_json(fs::path(a.out) / "chain.json", to_json(default_chain()));
  std::printf("wrote %zu graphs to %s\n", graphs.size(), a.out.c_str());
  return kOk;
}

struct SolveArgs {
  std::string solver = "bnb";
  std::string graph;
  std::string chain;
  std::string weights = "1,1,1,2,10";
  std::string mask;
  std::string checkpoint;
  std::string out;
  double time_limit = 60.0;
  std::uint64_t node_limit = 0;  // 0: unlimited
  bool deterministic = false;
};

int run_solve(const SolveArgs& a) {
  const SolverKind kind = solver_from_string(a.solver);
  const VnfFg g = graph_from_json(read_json(a.graph));
  const ValidationReport report = validate(g);
  if (!report.ok()) throw InvalidInput(report.issues.front().message);
  const DomainChain chain = load_chain(a.chain);
  const ObjectiveWeights w = parse_weights(a.weights);
  AssignmentMask mask;
  if (!a.mask.empty()) {
    mask = mask_from_json(read_json(a.mask));
    mask.validate(g.num_nodes(), chain.size());
  }
  std::optional<GnnModel> model;
  if (kind == SolverKind::kGnnp) {
    if (a.checkpoint.empty()) throw InvalidInput("--checkpoint is required for gnnp");
    model = model_from_checkpoint(read_json(a.checkpoint));
  }
  BnbConfig budget;
  budget.time_limit = a.time_limit;
  if (a.node_limit > 0) budget.node_limit = a.node_limit;
  const SolverRun run = run_solver(kind, g, chain, w, mask, DeploymentState::empty(chain.size()), budget,
                                   model ? &*model : nullptr);

  Json j{{"solver", to_string(kind)}, {"status", run.status}};
  if (run.has_assignment()) {
    j["assignment"] = run.assignment;
    j["objective"] = to_json(run.value);
    j["feasible"] = check_feasibility(g, chain, run.assignment, mask).feasible();
  }
  if (kind == SolverKind::kBnb || kind == SolverKind::kAilp) j["stats"] = to_json(run.stats, !a.deterministic);
  if (!a.deterministic) j["seconds"] = run.seconds;
  emit(j, a.out);

  if (run.status == "infeasible") return kInfeasible;
  if (run.status == "no_incumbent") return kNoIncumbent;
  return kOk;
}

struct TrainArgs {
  std::string corpus;
  std::string val;
  std::string chain;
  std::string weights = "1,1,1,2,10";
  int latent = 10;
  int layers = 3;
  TrainConfig config;
  std::string out;
  std::string history;
  bool deterministic = false;
};

int run_train(const TrainArgs& a) {
  const std::vector<VnfFg> train_set = load_corpus(a.corpus);
  const std::vector<VnfFg> val_set = load_corpus(a.val);
  const DomainChain chain = load_chain(a.chain);
  const ObjectiveWeights w = parse_weights(a.weights);
  const GnnModel init = GnnModel::initialize(a.latent, a.layers, chain.size(), a.config.seed);
  const TrainResult result = train(init, train_set, val_set, chain, w, a.config);
  write_json(a.out, checkpoint_json(result.model, a.config, w));
  if (!a.history.empty()) write_json(a.history, to_json(result.history, !a.deterministic));
  const TrainHistory& h = result.history;
  double best = h.initial_val_objective;
  for (double v : h.val_objective) best = std::min(best, v);
  std::printf("epochs %d, best epoch %d, validation objective %.6f -> %.6f\n", h.epochs_completed(),
              h.best_epoch, h.initial_val_objective, best);
  return kOk;
}

struct BenchArgs {
  std::string corpus;
  std::string val;
  std::string eval;
  std::string chain;
  std::string weights = "1,1,1,2,10";
  std::string checkpoint;
  std::vector<std::string> solvers{"gnnp", "ailp", "bnb"};
  double time_limit = 10.0;
  std::uint64_t node_limit = 0;
  bool sequential = false;
  std::string report;
  std::string csv;
  bool deterministic = false;
  int jobs = 1;
  // training knobs for sweep and ablate
  TrainConfig train;
  int repeats = 10;
  std::vector<int> latents{5, 10, 25, 50};
  std::vector<int> layer_counts{1, 3, 5, 7};
  // klsample
  int samples = 10000;
  int bins = 40;
  std::uint64_t seed = 0;
};

void write_outputs(const BenchArgs& a, const Json& j, const std::string& csv) {
  if (!a.report.empty()) write_json(a.report, j);
  if (!a.csv.empty()) write_text(a.csv, csv);
}

int run_compare(const BenchArgs& a) {
  const std::vector<VnfFg> corpus = load_corpus(a.corpus);
  const DomainChain chain = load_chain(a.chain);
  const ObjectiveWeights w = parse_weights(a.weights);
  ComparisonConfig config;
  config.solvers.clear();
  for (const std::string& s : a.solvers) config.solvers.push_back(solver_from_string(s));
  config.budget.time_limit = a.time_limit;
  if (a.node_limit > 0) config.budget.node_limit = a.node_limit;
  config.sequential = a.sequential;
  for (SolverKind s : config.solvers) {
    if (s == SolverKind::kGnnp) {
      if (a.checkpoint.empty()) throw InvalidInput("--checkpoint is required for gnnp");
      config.gnn_model = model_from_checkpoint(read_json(a.checkpoint));
    }
  }
  const ComparisonReport r = run_comparison(corpus, chain, w, config);
  write_outputs(a, to_json(r, !a.deterministic), to_csv(r, !a.deterministic));
  std::printf("%-7s %10s %16s %10s %10s %12s\n", "solver", "solved", "total_cost", "mean_kl", "feasible",
              "mean_time_s");
  for (const SolverSummary& s : r.summaries) {
    std::printf("%-7s %6d/%-3d %16.1f %10.4f %10.3f %12.4f\n", to_string(s.solver), s.solved, s.instances,
                s.total_cost, s.mean_kl, s.feasibility_rate, s.mean_seconds);
  }
  return kOk;
}

int run_sweep(const BenchArgs& a) {
  const std::vector<VnfFg> train_set = load_corpus(a.corpus);
  const std::vector<VnfFg> val_set = load_corpus(a.val);
  SweepConfig config;
  config.latent_sizes = a.latents;
  config.layer_counts = a.layer_counts;
  config.repeats = a.repeats;
  config.train = a.train;
  config.seed = a.seed;
  config.jobs = a.jobs;
  const SweepReport r =
      sweep_hyperparams(train_set, val_set, load_chain(a.chain), parse_weights(a.weights), config);
  write_outputs(a, to_json(r), to_csv(r));
  for (const SweepPoint& p : r.points) {
    std::printf("%-6s latent %3d layers %d  median %.4f  [%.4f, %.4f]\n", p.axis.c_str(), p.latent_size,
                p.num_layers, p.stats.median, p.stats.min, p.stats.max);
  }
  return kOk;
}

int run_klsample(const BenchArgs& a) {
  const DomainChain chain = load_chain(a.chain);
  const KlSample s = sample_kl_distribution(a.samples, chain.target_distribution, a.seed, a.bins);
  write_outputs(a, to_json(s), to_csv(s));
  std::printf("samples %d  mean %.4f  median %.4f  max %.4f\n", a.samples, s.mean, s.median, s.max);
  return kOk;
}

int run_ablate(const BenchArgs& a) {
  const std::vector<VnfFg> train_set = load_corpus(a.corpus);
  const std::vector<VnfFg> val_set = load_corpus(a.val);
  const std::vector<VnfFg> eval_set = load_corpus(a.eval);
  AblationConfig config;
  config.train = a.train;
  config.init_seed = a.seed;
  config.jobs = a.jobs;
  const AblationReport r =
      run_ablations(train_set, val_set, eval_set, load_chain(a.chain), parse_weights(a.weights), config);
  write_outputs(a, to_json(r), to_csv(r));
  for (const AblationPair& p : r.pairs) {
    std::printf("%-18s %-5s %s\n", p.name.c_str(), p.direction_holds ? "holds" : "fails", p.expectation.c_str());
  }
  return kOk;
}

void add_train_options(CLI::App* cmd, TrainConfig& c) {
  cmd->add_option("--lr", c.learning_rate, "learning rate");
  cmd->add_option("--epochs", c.epochs, "maximum epochs");
  cmd->add_option("--patience", c.patience, "early-stop patience in epochs");
  cmd->add_option("--warmup", c.penalty_warmup, "epochs over which mu ramps up from 0");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"VNF forwarding-graph partitioning across a domain chain"};
  app.require_subcommand(1);

  GenArgs gen;
  CLI::App* gen_cmd = app.add_subcommand("gen", "generate a random DAG corpus");
  gen_cmd->add_option("--count", gen.count, "number of graphs");
  gen_cmd->add_option("--nodes", gen.nodes, "node-count choices")->delimiter(',');
  gen_cmd->add_option("--edges", gen.edges, "edge-count choices")->delimiter(',');
  gen_cmd->add_option("--seed", gen.seed, "corpus seed");
  gen_cmd->add_option("--out", gen.out, "output directory")->required();

  SolveArgs solve;
  CLI::App* solve_cmd = app.add_subcommand("solve", "partition one graph");
  solve_cmd->add_option("--solver", solve.solver, "bnb, ailp, gnnp or oracle")
      ->check(CLI::IsMember({"bnb", "ailp", "gnnp", "oracle"}));
  solve_cmd->add_option("--graph", solve.graph, "graph JSON")->required();
  solve_cmd->add_option("--chain", solve.chain, "domain chain JSON (default chain if omitted)");
  solve_cmd->add_option("--weights", solve.weights, "alpha,beta,gamma,delta,mu");
  solve_cmd->add_option("--mask", solve.mask, "mask JSON fixing nodes to domains");
  solve_cmd->add_option("--time-limit", solve.time_limit, "seconds for bnb and ailp");
  solve_cmd->add_option("--node-limit", solve.node_limit, "search-node budget for bnb and ailp (0: none)");
  solve_cmd->add_option("--checkpoint", solve.checkpoint, "GNN checkpoint for gnnp");
  solve_cmd->add_option("--out", solve.out, "result JSON (stdout if omitted)");
  solve_cmd->add_flag("--deterministic", solve.deterministic, "omit wall-clock fields");

  TrainArgs tr;
  CLI::App* train_cmd = app.add_subcommand("train", "train the GNN partitioner");
  train_cmd->add_option("--corpus", tr.corpus, "training corpus directory")->required();
  train_cmd->add_option("--val", tr.val, "validation corpus directory")->required();
  train_cmd->add_option("--chain", tr.chain, "domain chain JSON");
  train_cmd->add_option("--weights", tr.weights, "alpha,beta,gamma,delta,mu");
  train_cmd->add_option("--latent", tr.latent, "latent size");
  train_cmd->add_option("--layers", tr.layers, "number of GCN layers");
  train_cmd->add_option("--seed", tr.config.seed, "initialization and shuffle seed");
  add_train_options(train_cmd, tr.config);
  train_cmd->add_option("--out", tr.out, "checkpoint path")->required();
  train_cmd->add_option("--history", tr.history, "training history JSON");
  train_cmd->add_flag("--deterministic", tr.deterministic, "omit wall-clock fields from the history");

  BenchArgs bench;
  CLI::App* bench_cmd = app.add_subcommand("bench", "benchmark programs");
  bench_cmd->require_subcommand(1);
  auto common = [&](CLI::App* cmd) {
    cmd->add_option("--chain", bench.chain, "domain chain JSON");
    cmd->add_option("--weights", bench.weights, "alpha,beta,gamma,delta,mu");
    cmd->add_option("--report", bench.report, "JSON report path");
    cmd->add_option("--csv", bench.csv, "CSV data path");
    cmd->add_option("--jobs", bench.jobs, "worker threads");
    cmd->add_flag("--deterministic", bench.deterministic, "omit wall-clock fields");
  };
  CLI::App* compare_cmd = bench_cmd->add_subcommand("compare", "solver comparison over a corpus");
  common(compare_cmd);
  compare_cmd->add_option("--corpus", bench.corpus, "corpus directory")->required();
  compare_cmd->add_option("--checkpoint", bench.checkpoint, "GNN checkpoint");
  compare_cmd->add_option("--solvers", bench.solvers, "subset of gnnp,ailp,bnb,oracle")->delimiter(',');
  compare_cmd->add_option("--time-limit", bench.time_limit, "seconds per instance for bnb and ailp");
  compare_cmd->add_option("--node-limit", bench.node_limit,
                          "search nodes per instance for bnb and ailp; reproducible across machines");
  compare_cmd->add_flag("--sequential", bench.sequential, "carry deployed CPU load across instances");

  CLI::App* sweep_cmd = bench_cmd->add_subcommand("sweep", "latent-size and depth sweeps");
  common(sweep_cmd);
  sweep_cmd->add_option("--corpus", bench.corpus, "training corpus directory")->required();
  sweep_cmd->add_option("--val", bench.val, "validation corpus directory")->required();
  sweep_cmd->add_option("--repeats", bench.repeats, "trainings per configuration");
  sweep_cmd->add_option("--latents", bench.latents, "latent sizes")->delimiter(',');
  sweep_cmd->add_option("--layer-counts", bench.layer_counts, "layer counts")->delimiter(',');
  sweep_cmd->add_option("--seed", bench.seed, "base seed");
  add_train_options(sweep_cmd, bench.train);

  CLI::App* kl_cmd = bench_cmd->add_subcommand("klsample", "KL values of random load distributions");
  common(kl_cmd);
  kl_cmd->add_option("--samples", bench.samples, "number of samples");
  kl_cmd->add_option("--bins", bench.bins, "histogram bins");
  kl_cmd->add_option("--seed", bench.seed, "sampler seed");

  CLI::App* ablate_cmd = bench_cmd->add_subcommand("ablate", "weight and standardization ablations");
  common(ablate_cmd);
  ablate_cmd->add_option("--corpus", bench.corpus, "training corpus directory")->required();
  ablate_cmd->add_option("--val", bench.val, "validation corpus directory")->required();
  ablate_cmd->add_option("--eval", bench.eval, "evaluation corpus directory")->required();
  ablate_cmd->add_option("--seed", bench.seed, "training seed");
  add_train_options(ablate_cmd, bench.train);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kBadInput;
  }

  try {
    if (*gen_cmd) return run_gen(gen);
    if (*solve_cmd) return run_solve(solve);
    if (*train_cmd) return run_train(tr);
    bench.train.seed = bench.seed;
    if (*compare_cmd) return run_compare(bench);
    if (*sweep_cmd) return run_sweep(bench);
    if (*kl_cmd) return run_klsample(bench);
    if (*ablate_cmd) return run_ablate(bench);
  } catch (const Infeasible& e) {
    std::fprintf(stderr, "infeasible: %s\n", e.what());
    return kInfeasible;
  } catch (const InvalidInput& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kBadInput;
  } catch (const TrainingDiverged& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kBadInput;
  }
  return kOk;
}
