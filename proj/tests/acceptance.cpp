// Acceptance suite: one PASS/FAIL line per criterion. Exits 0 once every
// criterion has been evaluated, whatever the verdicts; a crash exits non-zero.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "slicepart/ailp.hpp"
#include "slicepart/bnb.hpp"
#include "slicepart/harness.hpp"
#include "slicepart/json_io.hpp"
#include "slicepart/oracle.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace slicepart;
using namespace slicepart::testing;

namespace {

constexpr double kTaylorMaxError = 0.3126939;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Shared {
  std::vector<VnfFg> small;  // 100 instances, 4..10 nodes
  std::vector<VnfFg> train_set, val_set, eval_set;
  GnnModel model;
  ComparisonReport comparison;
  double comparison_seconds = 0;
};

Verdict oracle_equivalence(const Shared& s) {
  BnbConfig cfg;
  cfg.time_limit = 600;
  cfg.node_limit = UINT64_MAX;
  const DomainChain c = default_chain();
  int mismatches = 0;
  double worst = 0, bnb_seconds = 0;
  for (const VnfFg& g : s.small) {
    const ExactResult exact = solve_exact(g, c, {}, {}, DeploymentState::empty(4));
    const auto t0 = std::chrono::steady_clock::now();
    const SolveResult r = solve_bnb(g, c, {}, {}, DeploymentState::empty(4), cfg);
    bnb_seconds += seconds_since(t0);
    const double gap = std::abs(r.value.total - exact.value.total);
    worst = std::max(worst, gap);
    mismatches += r.status != SolveStatus::kOptimal || gap > 1e-9;
  }
  return {mismatches == 0 && bnb_seconds < 60,
          std::to_string(s.small.size()) + " instances, " + std::to_string(mismatches) + " mismatches, max gap " +
              fmt("%.2e", worst) + ", BnB total " + fmt("%.2f s", bnb_seconds)};
}

Verdict ailp_consistency(const Shared& s) {
  const DomainChain c = default_chain();
  const ObjectiveWeights no_kl{1, 1, 1, 0, 10};
  BnbConfig cfg;
  cfg.time_limit = 600;
  int equal_fail = 0, below_exact = 0;
  for (const VnfFg& g : s.small) {
    const SolveResult a = solve_ailp(g, c, no_kl, {}, DeploymentState::empty(4), {}, cfg);
    const SolveResult b = solve_bnb(g, c, no_kl, {}, DeploymentState::empty(4), cfg);
    equal_fail += std::abs(a.value.total - b.value.total) > 1e-9;
    const SolveResult ad = solve_ailp(g, c, {}, {}, DeploymentState::empty(4), {}, cfg);
    const ExactResult exact = solve_exact(g, c, {}, {}, DeploymentState::empty(4));
    below_exact += ad.value.total < exact.value.total - 1e-9;
  }
  const SolverSummary* ailp = s.comparison.summary(SolverKind::kAilp);
  const SolverSummary* bnb = s.comparison.summary(SolverKind::kBnb);
  const bool kl_order = ailp->mean_kl >= bnb->mean_kl;
  return {equal_fail == 0 && below_exact == 0 && kl_order,
          "delta=0 mismatches " + std::to_string(equal_fail) + ", below exact " + std::to_string(below_exact) +
              ", mean KL AILP " + fmt("%.4f", ailp->mean_kl) + " vs BnB " + fmt("%.4f", bnb->mean_kl)};
}

Verdict gradient_check() {
  Rng rng(2024);
  double worst = 0;
  for (int i = 0; i < 10; ++i) {
    DagParams p;
    p.num_nodes = 5;
    p.num_edges = 4 + static_cast<int>(rng.uniform_index(7));
    p.seed = rng.next();
    const VnfFg g = generate_random_dag(p);
    const GnnModel m = GnnModel::initialize(10, 3, 4, rng.next());
    worst = std::max(worst, max_gradient_error(m, g, default_chain(), {}, 1e-5));
  }
  return {worst < 1e-4, "10 five-node instances, max relative error " + fmt("%.2e", worst)};
}

Verdict feasibility(const Shared& s) {
  int rows = 0, bad = 0;
  for (const InstanceRow& r : s.comparison.rows) {
    ++rows;
    bad += !r.feasible;
  }
  // Same three solvers again with a mask pinning node 5 to the last domain.
  ComparisonConfig cfg;
  cfg.gnn_model = s.model;
  cfg.budget.time_limit = 10;
  cfg.mask.fixed = {{5, 3}};
  const std::vector<VnfFg> subset(s.eval_set.begin(), s.eval_set.begin() + 50);
  const ComparisonReport masked = run_comparison(subset, default_chain(), {}, cfg);
  for (const InstanceRow& r : masked.rows) {
    ++rows;
    bad += !r.feasible || r.assignment.empty() || r.assignment[5] != 3;
  }
  return {bad == 0, std::to_string(rows) + " assignments (50x3 masked), " + std::to_string(bad) + " infeasible"};
}

Verdict table_replication(const Shared& s) {
  const SolverSummary* gnn = s.comparison.summary(SolverKind::kGnnp);
  const SolverSummary* ailp = s.comparison.summary(SolverKind::kAilp);
  const SolverSummary* bnb = s.comparison.summary(SolverKind::kBnb);
  const bool time_ok = gnn->mean_seconds < ailp->mean_seconds && gnn->mean_seconds < bnb->mean_seconds;
  const bool kl_ok = gnn->mean_kl < ailp->mean_kl;
  const double cost_gap = std::abs(gnn->total_cost - bnb->total_cost) / bnb->total_cost;
  const bool cost_ok = cost_gap <= 0.25;
  const bool budget_ok = s.comparison_seconds < 1800;
  std::string d = std::string("time ") + (time_ok ? "ok" : "FAIL") + " (gnnp " + fmt("%.4f", gnn->mean_seconds) +
                  " s, ailp " + fmt("%.4f", ailp->mean_seconds) + " s, bnb " + fmt("%.4f", bnb->mean_seconds) +
                  " s); KL " + (kl_ok ? "ok" : "FAIL") + " (gnnp " + fmt("%.4f", gnn->mean_kl) + " vs ailp " +
                  fmt("%.4f", ailp->mean_kl) + "); cost " + (cost_ok ? "ok" : "FAIL") + " (gnnp " +
                  fmt("%.0f", gnn->total_cost) + " vs bnb " + fmt("%.0f", bnb->total_cost) + ", gap " +
                  fmt("%.1f%%", 100 * cost_gap) + "); run " + fmt("%.0f s", s.comparison_seconds);
  return {time_ok && kl_ok && cost_ok && budget_ok, d};
}

Verdict ablations(const Shared& s, int jobs) {
  AblationConfig cfg;
  cfg.jobs = jobs;
  const AblationReport r = run_ablations(s.train_set, s.val_set, s.eval_set, default_chain(), {}, cfg);
  bool all = true;
  std::string d;
  for (const AblationPair& p : r.pairs) {
    all = all && p.direction_holds;
    if (!d.empty()) d += "; ";
    d += p.name + (p.direction_holds ? " ok" : " FAIL");
    d += " (KL " + fmt("%.4f", p.baseline.mean_kl) + "->" + fmt("%.4f", p.variant.mean_kl);
    d += ", cpu " + fmt("%.0f", p.baseline.cpu_cost) + "->" + fmt("%.0f", p.variant.cpu_cost);
    d += ", cloud " + fmt("%.3f", p.baseline.cpu_share.back()) + "->" + fmt("%.3f", p.variant.cpu_share.back());
    d += ", extreme " + fmt("%.3f", p.baseline.extreme_share) + "->" + fmt("%.3f", p.variant.extreme_share) + ")";
  }
  return {all, d};
}

Verdict normalization_soundness() {
  Rng rng(77);
  const DomainChain c = default_chain();
  int violations = 0;
  for (int i = 0; i < 10000; ++i) {
    const VnfFg g = random_instance(rng, 2, 20);
    const HardAssignment a = random_feasible(g, 4, rng);
    const ObjectiveValue v = objective(g, c, a, {}, normalization_bounds(g, c), DeploymentState::empty(4));
    const ObjectiveBreakdown& b = v.breakdown;
    for (double t : {b.dc_hat, b.dl_hat, b.ic_hat}) violations += t < 0 || t > 1;
    violations += b.kl < 0;
  }
  double worst = 0;
  for (int i = 0; i <= 99000; ++i) {
    const double r = 0.01 + 0.99 * i / 99000.0;
    worst = std::max(worst, std::abs(taylor_xlogx(r, 0.3) - r * std::log(r)));
  }
  const bool taylor_ok = std::abs(worst - kTaylorMaxError) < 1e-6;
  return {violations == 0 && taylor_ok, "10000 pairs, " + std::to_string(violations) +
                                            " out-of-range terms; Taylor max error " + fmt("%.7f", worst) +
                                            " (recorded " + fmt("%.7f", kTaylorMaxError) + ")"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// Relative path -> bytes for every regular file below root.
std::vector<std::pair<std::string, std::string>> tree(const fs::path& root) {
  std::vector<std::pair<std::string, std::string>> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files.emplace_back(fs::relative(e.path(), root).string(), slurp(e.path()));
  }
  std::sort(files.begin(), files.end());
  return files;
}

Verdict determinism(const fs::path& cli, const fs::path& work) {
  const std::vector<std::string> steps{
      "gen --count 40 --seed 5 --out {d}/train",
      "gen --count 10 --seed 6 --out {d}/val",
      "gen --count 10 --nodes 8,10 --edges 10,20 --seed 7 --out {d}/eval",
      "train --corpus {d}/train --val {d}/val --epochs 15 --seed 3 --out {d}/ckpt.json "
      "--history {d}/history.json --deterministic",
      "bench compare --corpus {d}/eval --checkpoint {d}/ckpt.json --node-limit 200000 --time-limit 600 "
      "--report {d}/compare.json --csv {d}/compare.csv --deterministic",
      "bench sweep --corpus {d}/train --val {d}/val --repeats 2 --latents 4,8 --layer-counts 1,2 --epochs 4 "
      "--seed 1 --jobs 2 --report {d}/sweep.json --csv {d}/sweep.csv --deterministic",
      "bench klsample --samples 2000 --seed 4 --report {d}/kl.json --csv {d}/kl.csv --deterministic",
      "bench ablate --corpus {d}/train --val {d}/val --eval {d}/eval --epochs 4 --seed 2 --jobs 2 "
      "--report {d}/ablate.json --csv {d}/ablate.csv --deterministic"};
  fs::remove_all(work);
  for (const char* run : {"a", "b"}) {
    const fs::path dir = work / run;
    fs::create_directories(dir);
    for (std::string step : steps) {
      for (auto at = step.find("{d}"); at != std::string::npos; at = step.find("{d}")) {
        step.replace(at, 3, dir.string());
      }
      const std::string cmd = "\"" + cli.string() + "\" " + step + " > /dev/null";
      if (std::system(cmd.c_str()) != 0) return {false, "command failed: " + step};
    }
  }
  const auto a = tree(work / "a");
  const auto b = tree(work / "b");
  int differing = 0;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
    differing += a[i].first != b[i].first || a[i].second != b[i].second;
  }
  const bool same = a.size() == b.size() && differing == 0 && !a.empty();
  return {same, std::to_string(a.size()) + " artifacts per run, " + std::to_string(differing) + " differ"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("slicepart acceptance suite");
  std::string cli_path;
  std::string work = (fs::temp_directory_path() / "slicepart_acceptance").string();
  std::string report;
  int jobs = 4;
  app.add_option("--cli", cli_path, "path to the slicepart executable")->required();
  app.add_option("--work", work, "scratch directory");
  app.add_option("--report", report, "optional JSON summary");
  app.add_option("--jobs", jobs, "threads for ablation training");
  CLI11_PARSE(app, argc, argv);

  try {
    Shared s;
    Rng rng(1234);
    for (int i = 0; i < 100; ++i) s.small.push_back(random_instance(rng, 4, 10));

    CorpusSpec spec;
    spec.count = 700;
    spec.seed = 11;
    s.train_set = build_corpus(spec);
    spec.count = 100;
    spec.seed = 12;
    s.val_set = build_corpus(spec);
    spec.count = 200;
    spec.seed = 13;
    s.eval_set = build_corpus(spec);

    TrainConfig tc;
    tc.seed = 1;
    s.model = train(GnnModel::initialize(10, 3, 4, 1), s.train_set, s.val_set, default_chain(), {}, tc).model;

    ComparisonConfig cc;
    cc.gnn_model = s.model;
    cc.budget.time_limit = 10;
    const auto t0 = std::chrono::steady_clock::now();
    s.comparison = run_comparison(s.eval_set, default_chain(), {}, cc);
    s.comparison_seconds = seconds_since(t0);

    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"oracle equivalence", [&] { return oracle_equivalence(s); }},
        {"AILP consistency", [&] { return ailp_consistency(s); }},
        {"gradient correctness", [] { return gradient_check(); }},
        {"feasibility", [&] { return feasibility(s); }},
        {"directional comparison", [&] { return table_replication(s); }},
        {"ablation directions", [&] { return ablations(s, jobs); }},
        {"normalization soundness", [] { return normalization_soundness(); }},
        {"determinism", [&] { return determinism(cli_path, work); }},
    };
    Json summary = Json::array();
    int passed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
      const Verdict v = criteria[i].second();
      passed += v.pass;
      std::printf("[%s] %zu %s: %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), v.detail.c_str());
      std::fflush(stdout);
      summary.push_back({{"criterion", i + 1}, {"name", criteria[i].first}, {"pass", v.pass}, {"detail", v.detail}});
    }
    std::printf("%d/%zu criteria pass\n", passed, criteria.size());
    if (!report.empty()) write_json(report, summary);
    fs::remove_all(work);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "acceptance run aborted: %s\n", e.what());
    return 2;
  }
  return 0;
}
