#include "slicepart/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "slicepart/ailp.hpp"
#include "slicepart/bnb.hpp"
#include "slicepart/oracle.hpp"
#include "slicepart/rng.hpp"

namespace slicepart {

namespace {

constexpr const char* kManifestSchema = "slicepart.corpus.v1";

std::string graph_file_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "graph_%04d.json", index);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Shortest round-trip formatting for CSV cells.
std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<double> cpu_per_domain(const VnfFg& g, const HardAssignment& a, int m_count) {
  std::vector<double> out(m_count, 0.0);
  for (const VnfNode& n : g.nodes) out[a[n.id]] += n.cpu;
  return out;
}

std::vector<double> shares(const std::vector<double>& amounts) {
  const double total = std::accumulate(amounts.begin(), amounts.end(), 0.0);
  std::vector<double> out(amounts.size(), 0.0);
  if (total > 0) {
    for (std::size_t m = 0; m < amounts.size(); ++m) out[m] = amounts[m] / total;
  }
  return out;
}

}  // namespace

void CorpusSpec::validate() const {
  if (count <= 0) throw InvalidInput("corpus count must be positive");
  if (node_choices.empty() || edge_choices.empty() || cpu_levels.empty() || ram_levels.empty() ||
      bw_levels.empty()) {
    throw InvalidInput("corpus choice sets must be non-empty");
  }
  for (int n : node_choices) {
    if (n < 1) throw InvalidInput("node counts must be positive");
  }
  for (int e : edge_choices) {
    if (e < 0) throw InvalidInput("edge counts must be non-negative");
  }
}

std::vector<VnfFg> build_corpus(const CorpusSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  std::vector<VnfFg> out;
  out.reserve(spec.count);
  for (int i = 0; i < spec.count; ++i) {
    DagParams p;
    p.num_nodes = rng.pick(spec.node_choices);
    p.num_edges = rng.pick(spec.edge_choices);
    p.cpu_levels = spec.cpu_levels;
    p.ram_levels = spec.ram_levels;
    p.bw_levels = spec.bw_levels;
    p.seed = rng.next();
    out.push_back(generate_random_dag(p));
  }
  return out;
}

Json to_json(const CorpusSpec& spec) {
  return Json{{"count", spec.count},
              {"node_choices", spec.node_choices},
              {"edge_choices", spec.edge_choices},
              {"cpu_levels", spec.cpu_levels},
              {"ram_levels", spec.ram_levels},
              {"bw_levels", spec.bw_levels},
              {"seed", spec.seed}};
}

void write_corpus(const std::filesystem::path& dir, const std::vector<VnfFg>& graphs,
                  const CorpusSpec& spec) {
  Json files = Json::array();
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    const std::string name = graph_file_name(static_cast<int>(i));
    write_json(dir / name, to_json(graphs[i]));
    files.push_back(name);
  }
  write_json(dir / "manifest.json",
             Json{{"schema", kManifestSchema}, {"spec", to_json(spec)}, {"graphs", files}});
}

std::vector<VnfFg> load_corpus(const std::filesystem::path& dir) {
  const Json manifest = read_json(dir / "manifest.json");
  std::vector<VnfFg> out;
  try {
    for (const auto& name : manifest.at("graphs")) {
      VnfFg g = graph_from_json(read_json(dir / name.get<std::string>()));
      const ValidationReport report = validate(g);
      if (!report.ok()) {
        throw InvalidInput(name.get<std::string>() + ": " + report.issues.front().message);
      }
      out.push_back(std::move(g));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed manifest: ") + e.what());
  }
  if (out.empty()) throw InvalidInput("corpus " + dir.string() + " is empty");
  return out;
}

const char* to_string(SolverKind s) {
  switch (s) {
    case SolverKind::kGnnp: return "gnnp";
    case SolverKind::kAilp: return "ailp";
    case SolverKind::kBnb: return "bnb";
    case SolverKind::kOracle: return "oracle";
  }
  return "unknown";
}

SolverKind solver_from_string(const std::string& name) {
  for (SolverKind s : {SolverKind::kGnnp, SolverKind::kAilp, SolverKind::kBnb, SolverKind::kOracle}) {
    if (name == to_string(s)) return s;
  }
  throw InvalidInput("unknown solver '" + name + "'");
}

SolverRun run_solver(SolverKind solver, const VnfFg& g, const DomainChain& chain,
                     const ObjectiveWeights& w, const AssignmentMask& mask,
                     const DeploymentState& state, const BnbConfig& budget, const GnnModel* gnn_model,
                     NormalizationMode mode) {
  SolverRun run;
  const auto start = std::chrono::steady_clock::now();
  switch (solver) {
    case SolverKind::kBnb:
    case SolverKind::kAilp: {
      const SolveResult r = solver == SolverKind::kBnb
                                ? solve_bnb(g, chain, w, mask, state, budget, mode)
                                : solve_ailp(g, chain, w, mask, state, {}, budget, mode);
      run.status = to_string(r.status);
      run.stats = r.stats;
      if (r.has_assignment()) {
        run.assignment = r.assignment;
        run.value = r.value;
      }
      break;
    }
    case SolverKind::kOracle: {
      const ExactResult r = solve_exact(g, chain, w, mask, state, kDefaultEnumerationLimit, mode);
      run.status = r.best ? "optimal" : "infeasible";
      if (r.best) {
        run.assignment = *r.best;
        run.value = r.value;
      }
      break;
    }
    case SolverKind::kGnnp: {
      if (gnn_model == nullptr) throw InvalidInput("gnnp needs a trained checkpoint");
      try {
        run.assignment = infer_with_repair(*gnn_model, g, chain, mask);
      } catch (const Infeasible&) {
        run.status = "infeasible";
        break;
      }
      run.status = "heuristic";
      run.value = objective(g, chain, run.assignment, w, normalization_bounds(g, chain, mode), state);
      break;
    }
  }
  run.seconds = seconds_since(start);
  return run;
}

const SolverSummary* ComparisonReport::summary(SolverKind s) const {
  for (const SolverSummary& sum : summaries) {
    if (sum.solver == s) return &sum;
  }
  return nullptr;
}

ComparisonReport run_comparison(const std::vector<VnfFg>& corpus, const DomainChain& chain,
                                const ObjectiveWeights& w, const ComparisonConfig& config) {
  chain.validate();
  w.validate();
  const int m_count = chain.size();
  const bool wants_gnn =
      std::find(config.solvers.begin(), config.solvers.end(), SolverKind::kGnnp) != config.solvers.end();
  if (wants_gnn && !config.gnn_model) throw InvalidInput("gnnp needs a trained checkpoint");

  ComparisonReport report;
  for (SolverKind solver : config.solvers) {
    SolverSummary sum;
    sum.solver = solver;
    std::vector<double> pooled(m_count, 0.0);
    DeploymentState state = DeploymentState::empty(m_count);
    double kl_sum = 0.0;
    int feasible = 0;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      const VnfFg& g = corpus[i];
      if (!config.sequential) state = DeploymentState::empty(m_count);
      InstanceRow row;
      row.instance = static_cast<int>(i);
      row.solver = solver;
      try {
        const SolverRun run = run_solver(solver, g, chain, w, config.mask, state, config.budget,
                                         config.gnn_model ? &*config.gnn_model : nullptr,
                                         config.normalization);
        row.status = run.status;
        row.seconds = run.seconds;
        if (run.has_assignment()) {
          row.assignment = run.assignment;
          row.feasible = check_feasibility(g, chain, run.assignment, config.mask).feasible();
          row.objective = run.value.total;
          row.raw_cost = run.value.raw.total();
          row.kl = run.value.breakdown.kl;
          row.load = run.value.load;
          const std::vector<double> cpu = cpu_per_domain(g, run.assignment, m_count);
          for (int m = 0; m < m_count; ++m) {
            pooled[m] += cpu[m];
            state.occupied_cpu[m] += static_cast<std::int64_t>(cpu[m]);
          }
        }
      } catch (const std::exception& e) {
        row.status = "error";
        row.error = e.what();
      }
      ++sum.instances;
      if (!row.assignment.empty()) {
        ++sum.solved;
        sum.total_cost += row.raw_cost;
        kl_sum += row.kl;
      }
      if (row.feasible) ++feasible;
      sum.total_seconds += row.seconds;
      report.rows.push_back(std::move(row));
    }
    if (sum.solved > 0) sum.mean_kl = kl_sum / sum.solved;
    if (sum.instances > 0) {
      sum.mean_seconds = sum.total_seconds / sum.instances;
      sum.feasibility_rate = static_cast<double>(feasible) / sum.instances;
    }
    sum.cpu_share = shares(pooled);
    if (std::accumulate(pooled.begin(), pooled.end(), 0.0) > 0) {
      sum.aggregate_kl = kl_divergence(sum.cpu_share, chain.target_distribution);
    }
    report.summaries.push_back(std::move(sum));
  }
  return report;
}

BoxStats BoxStats::of(std::vector<double> values) {
  BoxStats s;
  s.count = static_cast<int>(values.size());
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  s.min = values.front();
  s.q1 = quantile(0.25);
  s.median = quantile(0.5);
  s.q3 = quantile(0.75);
  s.max = values.back();
  return s;
}

void parallel_for(int count, int jobs, const std::function<void(int)>& fn) {
  if (jobs <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_lock;
  std::vector<std::thread> pool;
  for (int t = 0; t < std::min(jobs, count); ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_lock);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

void SweepConfig::validate() const {
  if (latent_sizes.empty() && layer_counts.empty()) throw InvalidInput("sweep grid is empty");
  if (repeats < 1) throw InvalidInput("sweep repeats must be positive");
  for (int v : latent_sizes) {
    if (v < 1) throw InvalidInput("latent sizes must be positive");
  }
  for (int v : layer_counts) {
    if (v < 1) throw InvalidInput("layer counts must be positive");
  }
  train.validate();
}

namespace {

double best_val_objective(const TrainHistory& h) {
  double best = h.initial_val_objective;
  for (double v : h.val_objective) best = std::min(best, v);
  return best;
}

}  // namespace

SweepReport sweep_hyperparams(const std::vector<VnfFg>& train_set, const std::vector<VnfFg>& val_set,
                              const DomainChain& chain, const ObjectiveWeights& w,
                              const SweepConfig& config) {
  config.validate();
  SweepReport report;
  for (int latent : config.latent_sizes) report.points.push_back({"latent", latent, config.fixed_layers, {}, {}});
  for (int layers : config.layer_counts) report.points.push_back({"layers", config.fixed_latent, layers, {}, {}});
  for (SweepPoint& p : report.points) p.scores.assign(config.repeats, 0.0);

  const int runs = static_cast<int>(report.points.size()) * config.repeats;
  parallel_for(runs, config.jobs, [&](int task) {
    SweepPoint& p = report.points[task / config.repeats];
    const int r = task % config.repeats;
    TrainConfig tc = config.train;
    tc.seed = config.seed + static_cast<std::uint64_t>(r);
    const GnnModel init = GnnModel::initialize(p.latent_size, p.num_layers, chain.size(), tc.seed);
    p.scores[r] = best_val_objective(train(init, train_set, val_set, chain, w, tc).history);
  });
  for (SweepPoint& p : report.points) p.stats = BoxStats::of(p.scores);
  return report;
}

KlSample sample_kl_distribution(int n_samples, std::span<const double> p, std::uint64_t seed, int bins) {
  if (n_samples < 1) throw InvalidInput("sample count must be positive");
  if (bins < 1) throw InvalidInput("bin count must be positive");
  Rng rng(seed);
  KlSample out;
  out.values.reserve(n_samples);
  std::vector<double> r(p.size());
  for (int s = 0; s < n_samples; ++s) {
    double total = 0.0;
    for (double& x : r) {
      x = -std::log(1.0 - rng.uniform01());  // unit exponential; 1 - u lies in (0, 1]
      total += x;
    }
    if (total <= 0) {
      std::fill(r.begin(), r.end(), 1.0 / static_cast<double>(r.size()));
    } else {
      for (double& x : r) x /= total;
    }
    out.values.push_back(kl_divergence(r, p));
  }
  const BoxStats box = BoxStats::of(out.values);
  out.mean = std::accumulate(out.values.begin(), out.values.end(), 0.0) / n_samples;
  out.median = box.median;
  out.max = box.max;
  const double width = box.max > 0 ? box.max / bins : 1.0;
  for (int b = 0; b <= bins; ++b) out.bin_edges.push_back(width * b);
  out.counts.assign(bins, 0);
  for (double v : out.values) {
    const int b = std::min(bins - 1, static_cast<int>(v / width));
    ++out.counts[b];
  }
  return out;
}

namespace {

AblationArm evaluate_arm(std::string label, const ObjectiveWeights& w, NormalizationMode mode,
                         const std::vector<VnfFg>& train_set, const std::vector<VnfFg>& val_set,
                         const std::vector<VnfFg>& eval_set, const DomainChain& chain,
                         const AblationConfig& config) {
  AblationArm arm;
  arm.label = std::move(label);
  arm.weights = w;
  arm.normalization = mode;
  TrainConfig tc = config.train;
  tc.normalization = mode;
  const GnnModel init =
      GnnModel::initialize(config.latent_size, config.num_layers, chain.size(), config.init_seed);
  const GnnModel model = train(init, train_set, val_set, chain, w, tc).model;

  const int m_count = chain.size();
  std::vector<double> pooled(m_count, 0.0);
  const DeploymentState state = DeploymentState::empty(m_count);
  for (const VnfFg& g : eval_set) {
    const HardAssignment a = infer_with_repair(model, g, chain);
    const std::vector<double> cpu = cpu_per_domain(g, a, m_count);
    const std::vector<double> r = shares(cpu);
    arm.mean_kl += kl_divergence(r, chain.target_distribution);
    arm.total_cost += raw_costs(g, chain, a).total();
    for (int m = 0; m < m_count; ++m) {
      pooled[m] += cpu[m];
      arm.cpu_cost += cpu[m] * chain.domains[m].cpu_cost;
    }
  }
  arm.mean_kl /= static_cast<double>(eval_set.size());
  arm.cpu_share = shares(pooled);
  arm.aggregate_kl = kl_divergence(arm.cpu_share, chain.target_distribution);
  arm.extreme_share = arm.cpu_share.front() + arm.cpu_share.back();
  return arm;
}

}  // namespace

AblationReport run_ablations(const std::vector<VnfFg>& train_set, const std::vector<VnfFg>& val_set,
                             const std::vector<VnfFg>& eval_set, const DomainChain& chain,
                             const ObjectiveWeights& base, const AblationConfig& config) {
  base.validate();
  config.train.validate();
  if (eval_set.empty()) throw InvalidInput("ablation eval set is empty");
  const NormalizationMode standard = config.train.normalization;

  ObjectiveWeights half_delta = base;
  half_delta.delta = base.delta / 2;
  ObjectiveWeights double_alpha = base;
  double_alpha.alpha = base.alpha * 2;
  ObjectiveWeights double_gamma = base;
  double_gamma.gamma = base.gamma * 2;

  struct ArmSpec {
    std::string label;
    ObjectiveWeights w;
    NormalizationMode mode;
  };
  const std::vector<ArmSpec> specs{{"baseline", base, standard},
                                   {"delta_halved", half_delta, standard},
                                   {"unstandardized", base, NormalizationMode::kNone},
                                   {"alpha_doubled", double_alpha, standard},
                                   {"gamma_doubled", double_gamma, standard}};
  std::vector<AblationArm> arms(specs.size());
  parallel_for(static_cast<int>(specs.size()), config.jobs, [&](int i) {
    arms[i] = evaluate_arm(specs[i].label, specs[i].w, specs[i].mode, train_set, val_set, eval_set, chain,
                           config);
  });
  const AblationArm& baseline = arms[0];
  const int cloud = chain.size() - 1;

  AblationReport report;
  report.pairs.push_back({"A_delta", "mean KL lower with the larger delta", arms[1], baseline,
                          baseline.mean_kl < arms[1].mean_kl});
  report.pairs.push_back({"B_standardization", "mean KL higher without standardization", baseline, arms[2],
                          arms[2].mean_kl > baseline.mean_kl});
  report.pairs.push_back({"C_alpha", "CPU cost lower and cloud CPU share higher with alpha doubled", baseline,
                          arms[3],
                          arms[3].cpu_cost < baseline.cpu_cost &&
                              arms[3].cpu_share[cloud] > baseline.cpu_share[cloud]});
  report.pairs.push_back({"D_gamma", "less CPU share in the extreme domains with gamma doubled", baseline,
                          arms[4], arms[4].extreme_share < baseline.extreme_share});
  return report;
}

Json to_json(const ComparisonReport& r, bool include_timing) {
  Json summaries = Json::array();
  for (const SolverSummary& s : r.summaries) {
    Json j{{"solver", to_string(s.solver)},
           {"instances", s.instances},
           {"solved", s.solved},
           {"total_cost", s.total_cost},
           {"mean_kl", s.mean_kl},
           {"aggregate_kl", s.aggregate_kl},
           {"cpu_share", s.cpu_share},
           {"feasibility_rate", s.feasibility_rate}};
    if (include_timing) {
      j["total_seconds"] = s.total_seconds;
      j["mean_seconds"] = s.mean_seconds;
    }
    summaries.push_back(std::move(j));
  }
  Json rows = Json::array();
  for (const InstanceRow& row : r.rows) {
    Json j{{"instance", row.instance},
           {"solver", to_string(row.solver)},
           {"status", row.status},
           {"feasible", row.feasible},
           {"objective", row.objective},
           {"raw_cost", row.raw_cost},
           {"kl", row.kl},
           {"load", row.load},
           {"assignment", row.assignment}};
    if (include_timing) j["seconds"] = row.seconds;
    if (!row.error.empty()) j["error"] = row.error;
    rows.push_back(std::move(j));
  }
  return Json{{"summaries", summaries}, {"rows", rows}};
}

std::string to_csv(const ComparisonReport& r, bool include_timing) {
  std::ostringstream out;
  out << "solver,instance,status,feasible,objective,raw_cost,kl";
  if (include_timing) out << ",seconds";
  out << "\n";
  for (const InstanceRow& row : r.rows) {
    out << to_string(row.solver) << ',' << row.instance << ',' << row.status << ',' << (row.feasible ? 1 : 0)
        << ',' << num(row.objective) << ',' << num(row.raw_cost) << ',' << num(row.kl);
    if (include_timing) out << ',' << num(row.seconds);
    out << "\n";
  }
  return out.str();
}

namespace {

Json to_json(const BoxStats& s) {
  return Json{{"count", s.count}, {"min", s.min}, {"q1", s.q1}, {"median", s.median}, {"q3", s.q3}, {"max", s.max}};
}

Json to_json(const AblationArm& a) {
  return Json{{"label", a.label},
              {"weights", slicepart::to_json(a.weights)},
              {"normalization", to_string(a.normalization)},
              {"mean_kl", a.mean_kl},
              {"aggregate_kl", a.aggregate_kl},
              {"cpu_cost", a.cpu_cost},
              {"total_cost", a.total_cost},
              {"cpu_share", a.cpu_share},
              {"extreme_share", a.extreme_share}};
}

}  // namespace

Json to_json(const SweepReport& r) {
  Json points = Json::array();
  for (const SweepPoint& p : r.points) {
    points.push_back({{"axis", p.axis},
                      {"latent_size", p.latent_size},
                      {"num_layers", p.num_layers},
                      {"scores", p.scores},
                      {"stats", to_json(p.stats)}});
  }
  return Json{{"points", points}};
}

std::string to_csv(const SweepReport& r) {
  std::ostringstream out;
  out << "axis,latent_size,num_layers,count,min,q1,median,q3,max\n";
  for (const SweepPoint& p : r.points) {
    const BoxStats& s = p.stats;
    out << p.axis << ',' << p.latent_size << ',' << p.num_layers << ',' << s.count << ',' << num(s.min) << ','
        << num(s.q1) << ',' << num(s.median) << ',' << num(s.q3) << ',' << num(s.max) << "\n";
  }
  return out.str();
}

Json to_json(const KlSample& s) {
  return Json{{"samples", s.values.size()},
              {"mean", s.mean},
              {"median", s.median},
              {"max", s.max},
              {"bin_edges", s.bin_edges},
              {"counts", s.counts}};
}

std::string to_csv(const KlSample& s) {
  std::ostringstream out;
  out << "bin_lo,bin_hi,count\n";
  for (std::size_t b = 0; b < s.counts.size(); ++b) {
    out << num(s.bin_edges[b]) << ',' << num(s.bin_edges[b + 1]) << ',' << s.counts[b] << "\n";
  }
  return out.str();
}

Json to_json(const AblationReport& r) {
  Json pairs = Json::array();
  for (const AblationPair& p : r.pairs) {
    pairs.push_back({{"name", p.name},
                     {"expectation", p.expectation},
                     {"direction_holds", p.direction_holds},
                     {"baseline", to_json(p.baseline)},
                     {"variant", to_json(p.variant)}});
  }
  return Json{{"pairs", pairs}};
}

std::string to_csv(const AblationReport& r) {
  std::ostringstream out;
  out << "pair,arm,label,mean_kl,aggregate_kl,cpu_cost,total_cost,extreme_share";
  for (int m = 0; m < 4; ++m) out << ",share_" << m;
  out << "\n";
  for (const AblationPair& p : r.pairs) {
    for (const AblationArm* a : {&p.baseline, &p.variant}) {
      out << p.name << ',' << (a == &p.baseline ? "baseline" : "variant") << ',' << a->label << ','
          << num(a->mean_kl) << ',' << num(a->aggregate_kl) << ',' << num(a->cpu_cost) << ','
          << num(a->total_cost) << ',' << num(a->extreme_share);
      for (std::size_t m = 0; m < 4; ++m) out << ',' << (m < a->cpu_share.size() ? num(a->cpu_share[m]) : "");
      out << "\n";
    }
  }
  return out.str();
}

}  // namespace slicepart
