#include <cstdio>
#include <fstream>
#include <string>

#include <json.hpp>

#include "dirnet/pipeline.hpp"

namespace dirnet {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string agent_list(const std::vector<int>& agents) {
  std::string s;
  for (std::size_t k = 0; k < agents.size(); ++k) s += (k ? ";" : "") + std::to_string(agents[k] + 1);
  return s;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

void emit_report(const ExperimentReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());

  std::string estimates = "source,target,conditioning,n,rate_bits,trial,seed\n";
  std::string plot = "n,pair,rate\n";
  for (const auto& p : report.pairs) {
    const std::string head = std::to_string(p.source + 1) + "," + std::to_string(p.target + 1) + "," +
                             agent_list(p.conditioning) + ",";
    for (std::size_t t = 0; t < p.rates.size(); ++t)
      for (std::size_t c = 0; c < report.checkpoints.size(); ++c)
        estimates += head + std::to_string(report.checkpoints[c]) + "," + fmt(p.rates[t][c]) + "," +
                     std::to_string(t) + "," + std::to_string(report.trial_seeds.at(t)) + "\n";
    for (std::size_t c = 0; c < report.checkpoints.size(); ++c)
      plot += std::to_string(report.checkpoints[c]) + "," + edge_label({p.source, p.target}) + "," +
              fmt(p.mean_at(c)) + "\n";
  }
  write_file(dir / "dir_estimates.csv", estimates);
  write_file(dir / "rates_plotdata.csv", plot);
  write_file(dir / "inferred.dot", to_dot(report.inferred, report.truth, "inferred"));
  write_file(dir / "predicted.dot", to_dot(report.predicted, report.truth, "predicted"));
  write_file(dir / "diff.json", to_json(report.diff));

  nlohmann::ordered_json summary;
  summary["agents"] = report.agent_count;
  summary["horizon"] = report.horizon;
  summary["trials"] = report.trial_seeds.size();
  summary["depth"] = report.depth;
  summary["threshold_bits"] = report.threshold;
  summary["aggregation"] = report.aggregation == Aggregation::Mean ? "mean" : "vote";
  std::vector<int> z;
  for (int k : report.corrupted) z.push_back(k + 1);
  summary["corrupted"] = z;
  summary["warnings"] = report.warnings;
  summary["assumptions"] = report.assumptions;
  auto rates = nlohmann::ordered_json::array();
  for (const auto& p : report.pairs)
    rates.push_back({{"pair", edge_label({p.source, p.target})},
                     {"mean_rate_bits", p.mean_rate},
                     {"votes", p.votes},
                     {"edge", p.edge}});
  summary["pairs"] = rates;
  write_file(dir / "summary.json", summary.dump(2) + "\n");
}

}  // namespace dirnet
