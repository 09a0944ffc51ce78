#ifndef DIRNET_UNROLLED_HPP
#define DIRNET_UNROLLED_HPP

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dirnet/model.hpp"

namespace dirnet {

enum class NodeKind { Ideal, Corrupted };

/// y_agent[time] (ideal) or u_agent[time] (corrupted measurement).
struct TimedNode {
  NodeKind kind = NodeKind::Ideal;
  int agent = 0;
  int time = 0;

  auto operator<=>(const TimedNode&) const = default;
};

std::string to_string(const TimedNode& n);

class MalformedTrail : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Time-unrolled DAG over timed variables (DBN or perturbed DBN).
class UnrolledNetwork {
 public:
  using Arc = std::pair<int, int>;

  /// Arcs must increase time, except y_k[t] -> u_k[t].
  UnrolledNetwork(int horizon, int agent_count, std::vector<TimedNode> nodes, std::vector<Arc> arcs,
                  std::vector<bool> observed);

  int horizon() const { return horizon_; }
  int agent_count() const { return agent_count_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  const TimedNode& node(int index) const { return nodes_.at(static_cast<std::size_t>(index)); }
  const std::vector<TimedNode>& nodes() const { return nodes_; }
  std::optional<int> find(const TimedNode& n) const;
  int index_of(const TimedNode& n) const;

  const std::vector<int>& parents(int index) const { return parents_.at(static_cast<std::size_t>(index)); }
  const std::vector<int>& children(int index) const { return children_.at(static_cast<std::size_t>(index)); }
  const std::set<Arc>& arcs() const { return arcs_; }
  bool has_arc(int from, int to) const { return arcs_.contains({from, to}); }
  bool adjacent(int a, int b) const { return has_arc(a, b) || has_arc(b, a); }
  bool observed(int index) const { return observed_.at(static_cast<std::size_t>(index)); }

  bool corrupted(int agent) const;
  /// Index of the measured variable w_agent[time]: u if the agent is
  /// corrupted, y otherwise.
  int measured(int agent, int time) const;

  /// Kahn's algorithm; empty when a cycle exists.
  std::vector<int> topological_order() const;

  std::string to_dot(const std::string& name = "DBN") const;

 private:
  int horizon_;
  int agent_count_;
  std::vector<TimedNode> nodes_;
  std::map<TimedNode, int> index_;
  std::set<Arc> arcs_;
  std::vector<bool> observed_;
  std::vector<std::vector<int>> parents_;
  std::vector<std::vector<int>> children_;
};

/// DBN over y_i[t], t = 0..horizon: arcs y_j[t-k] -> y_i[t] for every lag k
/// declared by f_i with t-k >= 0. All nodes observed.
UnrolledNetwork unroll_dbn(const GenerativeNetwork& net, int horizon);

/// Perturbed DBN: adds u_k[t] for corrupted k with arcs from y_k[SY_k[t]] and
/// u_k[SU_k[t]]; y_k is latent for corrupted k.
UnrolledNetwork unroll_perturbed_dbn(const GenerativeNetwork& net, const CorruptionSpec& corr, int horizon);

/// True iff every interior triple of `trail` is active given `conditioning`:
/// non-colliders outside the set, colliders in the set or with a descendant
/// in it. Throws MalformedTrail when consecutive nodes are not adjacent.
bool is_active_trail(const UnrolledNetwork& g, const std::vector<int>& trail, const std::set<int>& conditioning);
bool is_active_trail(const UnrolledNetwork& g, const std::vector<TimedNode>& trail,
                     const std::set<TimedNode>& conditioning);

struct TrailQuery {
  std::set<int> sources;
  std::set<int> targets;
  std::set<int> conditioning;
};

struct SeparationResult {
  bool separated = true;
  /// One active trail (possibly revisiting nodes) when not separated.
  std::vector<int> witness;
};

/// Reachability over (node, direction) states.
SeparationResult d_separation(const UnrolledNetwork& g, const TrailQuery& q);
bool d_separated(const UnrolledNetwork& g, const TrailQuery& q);

}  // namespace dirnet

#endif  // DIRNET_UNROLLED_HPP
