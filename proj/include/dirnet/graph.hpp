#ifndef DIRNET_GRAPH_HPP
#define DIRNET_GRAPH_HPP

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace dirnet {

using Edge = std::pair<int, int>;  // (from, to), 0-based
using NodeSet = std::set<int>;

/// Directed graph over agents 0..n-1 without self-loops. Immutable.
class DirectedGraph {
 public:
  explicit DirectedGraph(int node_count = 0);
  DirectedGraph(int node_count, const std::vector<Edge>& edges);

  int node_count() const { return node_count_; }
  const std::set<Edge>& edges() const { return edges_; }
  bool has_edge(int from, int to) const { return edges_.contains({from, to}); }
  const std::vector<int>& parents(int node) const { return parents_.at(static_cast<std::size_t>(node)); }
  const std::vector<int>& children(int node) const { return children_.at(static_cast<std::size_t>(node)); }

  friend bool operator==(const DirectedGraph& a, const DirectedGraph& b) {
    return a.node_count_ == b.node_count_ && a.edges_ == b.edges_;
  }

 private:
  int node_count_;
  std::set<Edge> edges_;
  std::vector<std::vector<int>> parents_;
  std::vector<std::vector<int>> children_;
};

/// Perturbed graph G_Z: i->j is present iff some trail i = v1 - ... - vk = j
/// of g satisfies
///   P1  j not in Z  =>  the last hop is v(k-1) -> j,
///   P2  an interior collider outside Z is followed by a node in Z,
///   P3  every interior non-collider lies in Z.
/// The search runs over walk states (node, orientation of the entering edge).
DirectedGraph perturbed_graph(const DirectedGraph& g, const NodeSet& z);

/// Edges of `perturbed` that are absent from `truth`.
std::set<Edge> spurious_edges(const DirectedGraph& truth, const DirectedGraph& perturbed);

struct DiffReport {
  int node_count = 0;
  std::set<Edge> missing;  // predicted but not inferred
  std::set<Edge> extra;    // inferred but not predicted
  // Filled when the true generative graph is known.
  std::set<Edge> predicted_spurious;
  std::set<Edge> missed_spurious;
  std::optional<double> spurious_recall;

  bool empty() const { return missing.empty() && extra.empty(); }
};

/// Set differences between a prediction and an inference. With `truth`,
/// spurious edges (present in the prediction, absent from truth) are
/// classified and their recall reported.
DiffReport predicted_vs_inferred(const DirectedGraph& predicted, const DirectedGraph& inferred,
                                 const std::optional<DirectedGraph>& truth = std::nullopt);

/// DOT text; edges outside `base` are drawn dashed.
std::string to_dot(const DirectedGraph& g, const std::optional<DirectedGraph>& base = std::nullopt,
                   const std::string& name = "G");

/// JSON text of a diff report (1-based node labels).
std::string to_json(const DiffReport& report);

std::string edge_label(const Edge& e);

}  // namespace dirnet

#endif  // DIRNET_GRAPH_HPP
