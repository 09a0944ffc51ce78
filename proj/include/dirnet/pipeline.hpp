#ifndef DIRNET_PIPELINE_HPP
#define DIRNET_PIPELINE_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dirnet/config.hpp"
#include "dirnet/estimator.hpp"
#include "dirnet/graph.hpp"
#include "dirnet/sim.hpp"
#include "dirnet/unrolled.hpp"

namespace dirnet {

/// Rates for one ordered pair across all trials.
struct PairResult {
  int source = 0;
  int target = 0;
  std::vector<int> conditioning;
  /// rates[trial][c] is the running rate at checkpoint c.
  std::vector<std::vector<double>> rates;
  std::vector<double> thresholds;  // per trial; all equal unless calibrated
  double mean_rate = 0.0;
  int votes = 0;  // trials whose final rate exceeded their threshold
  bool edge = false;

  double final_rate(std::size_t trial) const { return rates.at(trial).back(); }
  /// Mean over trials of the rate at checkpoint c.
  double mean_at(std::size_t c) const;
};

struct ExperimentReport {
  int agent_count = 0;
  int horizon = 0;
  int depth = 0;
  double threshold = 0.0;
  Aggregation aggregation = Aggregation::Mean;
  std::vector<std::size_t> checkpoints;
  std::vector<std::uint64_t> trial_seeds;
  std::vector<PairResult> pairs;  // ordered by (source, target)
  DirectedGraph truth;
  DirectedGraph predicted;
  DirectedGraph inferred;
  DiffReport diff;
  NodeSet corrupted;
  std::vector<std::string> warnings;
  std::vector<std::string> assumptions;

  const PairResult& pair(int source, int target) const;
};

struct RunOptions {
  /// 0 uses the hardware concurrency.
  unsigned threads = 0;
};

std::uint64_t trial_seed(std::uint64_t base, int trial);

/// All ordered-pair conditional estimates I(w_i -> w_j || rest) on one
/// sampled trajectory set, final rates only, in (source, target) order.
std::vector<DirEstimate> estimate_all_pairs(const TrajectorySet& traj, int depth);

/// Simulate, estimate every ordered pair, aggregate over trials, threshold,
/// and compare with the perturbed-graph prediction.
ExperimentReport run_experiment(const ExperimentConfig& cfg, const RunOptions& options = {});

/// Writes dir_estimates.csv, inferred.dot, predicted.dot, diff.json and
/// rates_plotdata.csv into `dir` (created if needed).
void emit_report(const ExperimentReport& report, const std::filesystem::path& dir);

enum class CheckStatus { Pass, Fail, NotApplicable };
std::string to_string(CheckStatus s);

/// Syntactic check of the rule-set assumptions behind the present-edge test.
struct AssumptionCheck {
  bool holds = true;
  std::vector<std::string> violations;
};
AssumptionCheck check_assumptions(const GenerativeNetwork& net, const CorruptionSpec& corr);

struct PairCheck {
  int source = 0;
  int target = 0;
  bool predicted_edge = false;
  CheckStatus status = CheckStatus::Pass;
  /// Absent edges: first time step whose separation query failed.
  /// Present edges: time step of the witness.
  std::optional<int> time;
  std::vector<TimedNode> witness;
  std::string detail;
};

struct TheoremReport {
  int horizon_struct = 0;
  AssumptionCheck assumptions;
  std::vector<PairCheck> pairs;

  bool all_pass() const;  // no Fail entries
};

/// Default structural window: max generative lag + max corruption lag + 3.
int default_horizon_struct(const GenerativeNetwork& net, const CorruptionSpec& corr);

/// For every ordered pair: if i->j is absent from the perturbed graph, every
///   d-sep(w_i[0..t-1], w_j[t] | w_j[0..t-1], w_k[0..t-1] for k != i, j)
/// must hold for t = 1..H on the perturbed DBN; if it is present, some t must
/// admit an active trail, which is returned as the witness.
TheoremReport verify_theorems(const GenerativeNetwork& net, const CorruptionSpec& corr,
                              std::optional<int> horizon_struct = std::nullopt);
TheoremReport verify_theorems(const ExperimentConfig& cfg);

std::string to_json(const TheoremReport& report);

}  // namespace dirnet

#endif  // DIRNET_PIPELINE_HPP
