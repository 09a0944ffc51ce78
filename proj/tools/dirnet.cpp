// Command-line front end: simulate, estimate, predict, verify, run.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "dirnet/config.hpp"
#include "dirnet/pipeline.hpp"

namespace fs = std::filesystem;
using namespace dirnet;

namespace {

struct Overrides {
  std::string config;
  std::optional<int> horizon;
  std::optional<int> trials;
  std::optional<int> depth;
  std::optional<double> threshold;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "experiment config file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--horizon", o.horizon, "samples per trajectory (n)");
  cmd->add_option("--trials", o.trials, "number of independent trials");
  cmd->add_option("--depth", o.depth, "context-tree depth D");
  cmd->add_option("--threshold", o.threshold, "edge threshold in bits");
  cmd->add_option("--seed", o.seed, "base RNG seed");
  cmd->add_option("--out", o.out, "output directory");
}

ExperimentConfig load(const Overrides& o) {
  ExperimentConfig cfg = load_config(o.config);
  if (o.horizon) cfg.horizon = *o.horizon;
  if (o.trials) cfg.trials = *o.trials;
  if (o.depth) cfg.depth = *o.depth;
  if (o.threshold) cfg.threshold = *o.threshold;
  if (o.seed) cfg.seed = *o.seed;
  if (o.out) cfg.output_dir = *o.out;
  cfg.validate();
  return cfg;
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

void print_edges(const char* label, const DirectedGraph& g) {
  std::cout << label << ":";
  for (const auto& e : g.edges()) std::cout << " " << edge_label(e);
  std::cout << "\n";
}

int cmd_simulate(const Overrides& o) {
  const ExperimentConfig cfg = load(o);
  const TrajectorySet traj = sample(cfg.net(), cfg.corruption, cfg.horizon, trial_seed(cfg.seed, 0));
  fs::create_directories(cfg.output_dir);
  const fs::path path = fs::path(cfg.output_dir) / "trajectories.csv";
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_trajectories_csv(out, traj);
  std::cout << "wrote " << path.string() << "\n";
  return 0;
}

int cmd_estimate(const Overrides& o, const std::string& data) {
  ExperimentConfig cfg = load(o);
  TrajectorySet traj;
  if (!data.empty()) {
    std::ifstream in(data);
    if (!in) throw std::runtime_error("cannot open " + data);
    traj = read_trajectories_csv(in, cfg.net().alphabets());
  } else {
    traj = sample(cfg.net(), cfg.corruption, cfg.horizon, trial_seed(cfg.seed, 0));
  }
  std::cout << "source,target,conditioning,n,rate_bits,edge\n";
  for (const auto& est : estimate_all_pairs(traj, cfg.depth)) {
    std::string cond;
    for (std::size_t k = 0; k < est.conditioning.size(); ++k)
      cond += (k ? ";" : "") + std::to_string(est.conditioning[k] + 1);
    std::cout << est.source + 1 << "," << est.target + 1 << "," << cond << "," << est.sample_count << ","
              << est.final_rate << "," << (threshold_decision(est, cfg.threshold) ? 1 : 0) << "\n";
  }
  return 0;
}

int cmd_predict(const Overrides& o) {
  const ExperimentConfig cfg = load(o);
  const DirectedGraph truth = cfg.net().generative_graph();
  const DirectedGraph predicted = perturbed_graph(truth, cfg.corruption.corrupted_set());
  print_edges("generative", truth);
  print_edges("predicted", predicted);
  if (o.out) {
    fs::create_directories(*o.out);
    std::ofstream(fs::path(*o.out) / "predicted.dot") << to_dot(predicted, truth, "predicted");
  }
  return 0;
}

int cmd_verify(const Overrides& o, std::optional<int> horizon_struct) {
  ExperimentConfig cfg = load(o);
  if (horizon_struct) cfg.horizon_struct = horizon_struct;
  const TheoremReport rep = verify_theorems(cfg);
  std::cout << to_json(rep);
  return rep.all_pass() ? 0 : 2;
}

int cmd_run(const Overrides& o, unsigned threads) {
  const ExperimentConfig cfg = load(o);
  print_warnings(cfg.warnings());
  const ExperimentReport rep = run_experiment(cfg, RunOptions{threads});
  emit_report(rep, cfg.output_dir);
  print_edges("predicted", rep.predicted);
  print_edges("inferred ", rep.inferred);
  for (const auto& p : rep.pairs)
    std::cout << "  I(" << p.source + 1 << "->" << p.target + 1 << ") = " << p.mean_rate << " bits"
              << (p.edge ? "  edge" : "") << "\n";
  std::cout << (rep.diff.empty() ? "diff: empty" : "diff: MISMATCH") << " (artifacts in " << cfg.output_dir << ")\n";
  return rep.diff.empty() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Directed-information network inference from corrupted data streams"};
  app.require_subcommand(1);

  Overrides sim_o, est_o, pred_o, ver_o, run_o;
  auto* sim = app.add_subcommand("simulate", "sample one trajectory set to CSV");
  add_common(sim, sim_o);
  auto* est = app.add_subcommand("estimate", "all-pairs conditional DIR on one trajectory set");
  add_common(est, est_o);
  std::string data;
  est->add_option("--data", data, "trajectory CSV (default: simulate from the config)")->check(CLI::ExistingFile);
  auto* pred = app.add_subcommand("predict", "perturbed-graph prediction");
  add_common(pred, pred_o);
  auto* ver = app.add_subcommand("verify", "structural d-separation checks on the perturbed DBN");
  add_common(ver, ver_o);
  std::optional<int> horizon_struct;
  ver->add_option("--horizon-struct", horizon_struct, "time window of the structural checks");
  auto* run = app.add_subcommand("run", "full pipeline with report files");
  add_common(run, run_o);
  unsigned threads = 0;
  run->add_option("--threads", threads, "worker threads (0 = all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*sim) return cmd_simulate(sim_o);
    if (*est) return cmd_estimate(est_o, data);
    if (*pred) return cmd_predict(pred_o);
    if (*ver) return cmd_verify(ver_o, horizon_struct);
    if (*run) return cmd_run(run_o, threads);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
