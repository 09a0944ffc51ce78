#include "dirnet/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include <json.hpp>

namespace dirnet {

double PairResult::mean_at(std::size_t c) const {
  if (rates.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& r : rates) sum += r.at(c);
  return sum / static_cast<double>(rates.size());
}

const PairResult& ExperimentReport::pair(int source, int target) const {
  for (const auto& p : pairs)
    if (p.source == source && p.target == target) return p;
  throw std::out_of_range("no such ordered pair");
}

std::uint64_t trial_seed(std::uint64_t base, int trial) {
  return mix_seed(base * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(trial));
}

std::vector<DirEstimate> estimate_all_pairs(const TrajectorySet& traj, int depth) {
  const int n = traj.agent_count();
  std::vector<DirEstimate> out;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      std::vector<StreamView> cond;
      std::vector<int> cond_ids;
      for (int k = 0; k < n; ++k)
        if (k != i && k != j) {
          cond.push_back({traj.measured(k), traj.alphabets[static_cast<std::size_t>(k)]});
          cond_ids.push_back(k);
        }
      DirEstimate est;
      try {
        est = estimate_conditional_dir({traj.measured(i), traj.alphabets[static_cast<std::size_t>(i)]},
                                       {traj.measured(j), traj.alphabets[static_cast<std::size_t>(j)]}, cond, depth);
      } catch (const std::exception& e) {
        throw EstimationError("pair " + edge_label({i, j}) + ": " + e.what());
      }
      est.source = i;
      est.target = j;
      est.conditioning = cond_ids;
      out.push_back(std::move(est));
    }
  return out;
}

namespace {

struct TrialResult {
  std::vector<std::vector<double>> rates;  // [pair][checkpoint]
  std::vector<double> thresholds;          // [pair]
};

TrialResult run_trial(const ExperimentConfig& cfg, const std::vector<std::size_t>& checkpoints, std::uint64_t seed) {
  const TrajectorySet traj = sample(cfg.net(), cfg.corruption, cfg.horizon, seed);
  const std::vector<DirEstimate> ests = estimate_all_pairs(traj, cfg.depth);
  TrialResult r;
  for (std::size_t p = 0; p < ests.size(); ++p) {
    const DirEstimate& est = ests[p];
    std::vector<double> at;
    for (auto c : checkpoints) at.push_back(est.rate_at(std::min(c, est.sample_count)));
    r.rates.push_back(std::move(at));
    double tau = cfg.threshold;
    if (cfg.calibrate) {
      Rng rng = Rng::stream(seed, 1000 + p);
      std::vector<StreamView> cond;
      for (int k : est.conditioning) cond.push_back({traj.measured(k), traj.alphabets[static_cast<std::size_t>(k)]});
      tau = surrogate_threshold({traj.measured(est.source), traj.alphabets[static_cast<std::size_t>(est.source)]},
                                {traj.measured(est.target), traj.alphabets[static_cast<std::size_t>(est.target)]},
                                cond, cfg.depth, cfg.surrogates, 0.95, rng);
    }
    r.thresholds.push_back(tau);
  }
  return r;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg, const RunOptions& options) {
  cfg.validate();
  const GenerativeNetwork& net = cfg.net();
  const int n = net.size();

  ExperimentReport rep;
  rep.agent_count = n;
  rep.horizon = cfg.horizon;
  rep.depth = cfg.depth;
  rep.threshold = cfg.threshold;
  rep.aggregation = cfg.aggregation;
  rep.checkpoints = cfg.checkpoint_schedule();
  rep.warnings = cfg.warnings();
  rep.assumptions = cfg.assumptions;
  rep.corrupted = cfg.corruption.corrupted_set();
  for (int t = 0; t < cfg.trials; ++t) rep.trial_seeds.push_back(trial_seed(cfg.seed, t));

  std::vector<TrialResult> trials(static_cast<std::size_t>(cfg.trials));
  std::vector<std::exception_ptr> errors(trials.size());
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int t; (t = next.fetch_add(1)) < cfg.trials;) {
      try {
        trials[static_cast<std::size_t>(t)] = run_trial(cfg, rep.checkpoints, rep.trial_seeds[static_cast<std::size_t>(t)]);
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    }
  };
  unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(cfg.trials));
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < threads; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (std::size_t t = 0; t < errors.size(); ++t) {
    if (!errors[t]) continue;
    try {
      std::rethrow_exception(errors[t]);
    } catch (const std::exception& e) {
      throw std::runtime_error("trial " + std::to_string(t) + ": " + e.what());
    }
  }

  std::vector<Edge> inferred;
  std::size_t p = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      PairResult pr;
      pr.source = i;
      pr.target = j;
      for (int k = 0; k < n; ++k)
        if (k != i && k != j) pr.conditioning.push_back(k);
      double rate_sum = 0.0, tau_sum = 0.0;
      for (const auto& tr : trials) {
        pr.rates.push_back(tr.rates[p]);
        pr.thresholds.push_back(tr.thresholds[p]);
        rate_sum += tr.rates[p].back();
        tau_sum += tr.thresholds[p];
        if (tr.rates[p].back() > tr.thresholds[p]) ++pr.votes;
      }
      pr.mean_rate = rate_sum / static_cast<double>(trials.size());
      if (cfg.aggregation == Aggregation::Mean)
        pr.edge = pr.mean_rate > tau_sum / static_cast<double>(trials.size());
      else
        pr.edge = 2 * pr.votes > cfg.trials;
      if (pr.edge) inferred.emplace_back(i, j);
      rep.pairs.push_back(std::move(pr));
      ++p;
    }

  rep.truth = net.generative_graph();
  rep.predicted = perturbed_graph(rep.truth, rep.corrupted);
  rep.inferred = DirectedGraph(n, inferred);
  rep.diff = predicted_vs_inferred(rep.predicted, rep.inferred, rep.truth);
  return rep;
}

std::string to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::NotApplicable: return "not applicable";
  }
  return "?";
}

AssumptionCheck check_assumptions(const GenerativeNetwork& net, const CorruptionSpec& corr) {
  AssumptionCheck out;
  auto violate = [&](const std::string& what) {
    out.holds = false;
    out.violations.push_back(what);
  };
  const DirectedGraph g = net.generative_graph();
  for (const auto& [i, j] : g.edges()) {
    const auto& lags = net.lags(j, i);
    if (lags.empty() || *lags.begin() < 1) violate("C1: y" + std::to_string(j + 1) + " has no lagged argument y" + std::to_string(i + 1));
  }
  for (int k : corr.corrupted_set()) {
    const std::string name = std::to_string(k + 1);
    const std::set<int> lags = corr.y_lags(k);
    const bool c2 = std::any_of(lags.begin(), lags.end(), [](int lag) { return lag >= 1; });
    if (!c2) violate("C2: g" + name + " never takes a strictly lagged y" + name);
    const bool b1 = !net.lags(k, k).empty();
    const bool b2 = lags.contains(0);
    if (!b1 && !b2) violate("B1/B2: y" + name + " has no self-lag and g" + name + " does not read y" + name + "[t]");
  }
  return out;
}

bool TheoremReport::all_pass() const {
  return std::none_of(pairs.begin(), pairs.end(), [](const PairCheck& p) { return p.status == CheckStatus::Fail; });
}

int default_horizon_struct(const GenerativeNetwork& net, const CorruptionSpec& corr) {
  return net.max_lag() + corr.max_lag() + 3;
}

TheoremReport verify_theorems(const GenerativeNetwork& net, const CorruptionSpec& corr, std::optional<int> horizon_struct) {
  TheoremReport rep;
  rep.horizon_struct = horizon_struct.value_or(default_horizon_struct(net, corr));
  rep.assumptions = check_assumptions(net, corr);
  const int n = net.size();
  const DirectedGraph predicted = perturbed_graph(net.generative_graph(), corr.corrupted_set());
  const UnrolledNetwork dbn = unroll_perturbed_dbn(net, corr, rep.horizon_struct);

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      PairCheck pc;
      pc.source = i;
      pc.target = j;
      pc.predicted_edge = predicted.has_edge(i, j);
      for (int t = 1; t <= rep.horizon_struct; ++t) {
        TrailQuery q;
        q.targets.insert(dbn.measured(j, t));
        for (int s = 0; s < t; ++s)
          for (int k = 0; k < n; ++k) (k == i ? q.sources : q.conditioning).insert(dbn.measured(k, s));
        const SeparationResult r = d_separation(dbn, q);
        if (!r.separated) {
          pc.time = t;
          for (int v : r.witness) pc.witness.push_back(dbn.node(v));
          break;
        }
      }
      if (pc.predicted_edge) {
        if (pc.time) {
          pc.status = CheckStatus::Pass;
        } else if (rep.assumptions.holds) {
          pc.status = CheckStatus::Fail;
          pc.detail = "no active trail found up to t = " + std::to_string(rep.horizon_struct);
        } else {
          pc.status = CheckStatus::NotApplicable;
          pc.detail = "no witness, and the rule set violates the assumptions";
        }
      } else {
        pc.status = pc.time ? CheckStatus::Fail : CheckStatus::Pass;
        if (pc.time) pc.detail = "active trail at t = " + std::to_string(*pc.time) + " for an absent edge";
      }
      rep.pairs.push_back(std::move(pc));
    }
  return rep;
}

TheoremReport verify_theorems(const ExperimentConfig& cfg) {
  return verify_theorems(cfg.net(), cfg.corruption, cfg.horizon_struct);
}

std::string to_json(const TheoremReport& report) {
  nlohmann::ordered_json j;
  j["horizon_struct"] = report.horizon_struct;
  j["assumptions_hold"] = report.assumptions.holds;
  j["assumption_violations"] = report.assumptions.violations;
  j["all_pass"] = report.all_pass();
  auto pairs = nlohmann::ordered_json::array();
  for (const auto& p : report.pairs) {
    nlohmann::ordered_json e;
    e["edge"] = edge_label({p.source, p.target});
    e["predicted"] = p.predicted_edge;
    e["status"] = to_string(p.status);
    if (p.time) e["t"] = *p.time;
    if (!p.witness.empty()) {
      std::vector<std::string> w;
      for (const auto& v : p.witness) w.push_back(to_string(v));
      e["witness"] = w;
    }
    if (!p.detail.empty()) e["detail"] = p.detail;
    pairs.push_back(e);
  }
  j["pairs"] = pairs;
  return j.dump(2) + "\n";
}

}  // namespace dirnet
