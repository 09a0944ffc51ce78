#include "dirnet/graph.hpp"

#include <deque>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace dirnet {

DirectedGraph::DirectedGraph(int node_count) : node_count_(node_count) {
  if (node_count < 0) throw std::invalid_argument("negative node count");
  parents_.resize(static_cast<std::size_t>(node_count));
  children_.resize(static_cast<std::size_t>(node_count));
}

DirectedGraph::DirectedGraph(int node_count, const std::vector<Edge>& edges) : DirectedGraph(node_count) {
  for (const auto& [from, to] : edges) {
    if (from < 0 || to < 0 || from >= node_count || to >= node_count)
      throw std::invalid_argument("edge " + edge_label({from, to}) + " outside the node range");
    if (from == to) throw std::invalid_argument("self-loop " + edge_label({from, to}) + " is not stored");
    if (!edges_.insert({from, to}).second) continue;
    children_[static_cast<std::size_t>(from)].push_back(to);
    parents_[static_cast<std::size_t>(to)].push_back(from);
  }
}

DirectedGraph perturbed_graph(const DirectedGraph& g, const NodeSet& z) {
  const int n = g.node_count();
  for (int k : z)
    if (k < 0 || k >= n) throw std::invalid_argument("perturbed node outside the graph");

  // Walk state: current node and whether the edge used to enter it points
  // into it (v_prev -> v, `forward`) or away from it (v_prev <- v).
  auto state_index = [](int node, bool forward) { return 2 * node + (forward ? 1 : 0); };
  std::vector<Edge> result;
  std::vector<char> seen(static_cast<std::size_t>(2 * n));
  std::deque<std::pair<int, bool>> queue;

  for (int source = 0; source < n; ++source) {
    std::vector<char> reached(static_cast<std::size_t>(n), 0);
    std::fill(seen.begin(), seen.end(), 0);
    queue.clear();

    auto push = [&](int node, bool forward) {
      auto& s = seen[static_cast<std::size_t>(state_index(node, forward))];
      if (s) return;
      s = 1;
      queue.emplace_back(node, forward);
    };
    // The source is an endpoint and carries no constraint.
    for (int c : g.children(source)) push(c, true);
    for (int p : g.parents(source)) push(p, false);

    while (!queue.empty()) {
      const auto [v, forward] = queue.front();
      queue.pop_front();
      const bool v_in_z = z.contains(v);

      // Endpoint test (P1).
      if (v != source && (v_in_z || forward)) reached[static_cast<std::size_t>(v)] = 1;

      // Continuing makes v interior.
      if (forward) {
        // v_prev -> v -> w: non-collider, needs v in Z (P3).
        if (v_in_z)
          for (int w : g.children(v)) push(w, true);
        // v_prev -> v <- w: collider; outside Z the next node must be in Z (P2).
        for (int w : g.parents(v))
          if (v_in_z || z.contains(w)) push(w, false);
      } else if (v_in_z) {
        // v_prev <- v - w: never a collider (P3).
        for (int w : g.children(v)) push(w, true);
        for (int w : g.parents(v)) push(w, false);
      }
    }
    for (int target = 0; target < n; ++target)
      if (target != source && reached[static_cast<std::size_t>(target)]) result.emplace_back(source, target);
  }
  return DirectedGraph(n, result);
}

std::set<Edge> spurious_edges(const DirectedGraph& truth, const DirectedGraph& perturbed) {
  std::set<Edge> out;
  for (const Edge& e : perturbed.edges())
    if (!truth.edges().contains(e)) out.insert(e);
  return out;
}

DiffReport predicted_vs_inferred(const DirectedGraph& predicted, const DirectedGraph& inferred,
                                 const std::optional<DirectedGraph>& truth) {
  if (predicted.node_count() != inferred.node_count())
    throw std::invalid_argument("predicted and inferred graphs have different node counts");
  DiffReport r;
  r.node_count = predicted.node_count();
  for (const Edge& e : predicted.edges())
    if (!inferred.edges().contains(e)) r.missing.insert(e);
  for (const Edge& e : inferred.edges())
    if (!predicted.edges().contains(e)) r.extra.insert(e);
  if (truth) {
    if (truth->node_count() != predicted.node_count())
      throw std::invalid_argument("true graph has a different node count");
    r.predicted_spurious = spurious_edges(*truth, predicted);
    std::size_t found = 0;
    for (const Edge& e : r.predicted_spurious) {
      if (inferred.edges().contains(e))
        ++found;
      else
        r.missed_spurious.insert(e);
    }
    r.spurious_recall = r.predicted_spurious.empty()
                            ? 1.0
                            : static_cast<double>(found) / static_cast<double>(r.predicted_spurious.size());
  }
  return r;
}

std::string edge_label(const Edge& e) { return std::to_string(e.first + 1) + "->" + std::to_string(e.second + 1); }

std::string to_dot(const DirectedGraph& g, const std::optional<DirectedGraph>& base, const std::string& name) {
  std::ostringstream os;
  os << "digraph " << name << " {\n";
  for (int v = 0; v < g.node_count(); ++v) os << "  " << v + 1 << ";\n";
  for (const auto& [from, to] : g.edges()) {
    os << "  " << from + 1 << " -> " << to + 1;
    if (base && !base->has_edge(from, to)) os << " [style=dashed, color=red]";
    os << ";\n";
  }
  os << "}\n";
  return os.str();
}

std::string to_json(const DiffReport& report) {
  auto edges = [](const std::set<Edge>& s) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& [from, to] : s) a.push_back({from + 1, to + 1});
    return a;
  };
  nlohmann::json j;
  j["node_count"] = report.node_count;
  j["empty"] = report.empty();
  j["missing"] = edges(report.missing);
  j["extra"] = edges(report.extra);
  j["predicted_spurious"] = edges(report.predicted_spurious);
  j["missed_spurious"] = edges(report.missed_spurious);
  j["spurious_recall"] = report.spurious_recall ? nlohmann::json(*report.spurious_recall) : nlohmann::json(nullptr);
  return j.dump(2) + "\n";
}

}  // namespace dirnet
