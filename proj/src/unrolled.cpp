#include "dirnet/unrolled.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace dirnet {

std::string to_string(const TimedNode& n) {
  return (n.kind == NodeKind::Ideal ? "y" : "u") + std::to_string(n.agent + 1) + "[" + std::to_string(n.time) + "]";
}

UnrolledNetwork::UnrolledNetwork(int horizon, int agent_count, std::vector<TimedNode> nodes, std::vector<Arc> arcs,
                                 std::vector<bool> observed)
    : horizon_(horizon), agent_count_(agent_count), nodes_(std::move(nodes)), observed_(std::move(observed)) {
  if (observed_.size() != nodes_.size()) throw std::invalid_argument("one observation flag per node required");
  for (std::size_t k = 0; k < nodes_.size(); ++k)
    if (!index_.emplace(nodes_[k], static_cast<int>(k)).second)
      throw std::invalid_argument("duplicate node " + dirnet::to_string(nodes_[k]));
  parents_.resize(nodes_.size());
  children_.resize(nodes_.size());
  for (const auto& [from, to] : arcs) {
    if (from < 0 || to < 0 || from >= size() || to >= size()) throw std::invalid_argument("arc outside node range");
    const TimedNode& a = nodes_[static_cast<std::size_t>(from)];
    const TimedNode& b = nodes_[static_cast<std::size_t>(to)];
    const bool instantaneous = a.time == b.time && a.agent == b.agent && a.kind == NodeKind::Ideal &&
                               b.kind == NodeKind::Corrupted;
    if (!(a.time < b.time || instantaneous))
      throw std::invalid_argument("arc " + dirnet::to_string(a) + " -> " + dirnet::to_string(b) +
                                  " does not respect time order");
    if (!arcs_.insert({from, to}).second) continue;
    children_[static_cast<std::size_t>(from)].push_back(to);
    parents_[static_cast<std::size_t>(to)].push_back(from);
  }
}

std::optional<int> UnrolledNetwork::find(const TimedNode& n) const {
  auto it = index_.find(n);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int UnrolledNetwork::index_of(const TimedNode& n) const {
  auto it = index_.find(n);
  if (it == index_.end()) throw std::out_of_range("node " + dirnet::to_string(n) + " not in network");
  return it->second;
}

bool UnrolledNetwork::corrupted(int agent) const {
  return index_.contains(TimedNode{NodeKind::Corrupted, agent, 0});
}

int UnrolledNetwork::measured(int agent, int time) const {
  return index_of(TimedNode{corrupted(agent) ? NodeKind::Corrupted : NodeKind::Ideal, agent, time});
}

std::vector<int> UnrolledNetwork::topological_order() const {
  std::vector<int> indegree(nodes_.size());
  for (std::size_t k = 0; k < nodes_.size(); ++k) indegree[k] = static_cast<int>(parents_[k].size());
  std::deque<int> ready;
  for (std::size_t k = 0; k < nodes_.size(); ++k)
    if (indegree[k] == 0) ready.push_back(static_cast<int>(k));
  std::vector<int> order;
  while (!ready.empty()) {
    const int v = ready.front();
    ready.pop_front();
    order.push_back(v);
    for (int c : children(v))
      if (--indegree[static_cast<std::size_t>(c)] == 0) ready.push_back(c);
  }
  if (order.size() != nodes_.size()) order.clear();
  return order;
}

std::string UnrolledNetwork::to_dot(const std::string& name) const {
  std::ostringstream os;
  os << "digraph " << name << " {\n  node [shape=box];\n";
  for (int k = 0; k < size(); ++k) {
    os << "  \"" << dirnet::to_string(node(k)) << "\"";
    if (!observed(k)) os << " [style=filled, fillcolor=gray]";
    os << ";\n";
  }
  for (const auto& [from, to] : arcs_) {
    os << "  \"" << dirnet::to_string(node(from)) << "\" -> \"" << dirnet::to_string(node(to)) << "\"";
    if (node(to).kind == NodeKind::Corrupted && node(from).kind == NodeKind::Ideal)
      os << " [style=dashed, color=red]";
    os << ";\n";
  }
  os << "}\n";
  return os.str();
}

namespace {

void check_horizon(int horizon) {
  if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
}

}  // namespace

UnrolledNetwork unroll_perturbed_dbn(const GenerativeNetwork& net, const CorruptionSpec& corr, int horizon) {
  check_horizon(horizon);
  const int n = net.size();
  if (corr.agent_count() != 0 && corr.agent_count() != n)
    throw std::invalid_argument("corruption spec does not match the network");
  auto is_corrupt = [&](int k) { return corr.agent_count() != 0 && corr.corrupted(k); };

  std::vector<TimedNode> nodes;
  std::vector<bool> observed;
  for (int t = 0; t <= horizon; ++t)
    for (int i = 0; i < n; ++i) {
      nodes.push_back({NodeKind::Ideal, i, t});
      observed.push_back(!is_corrupt(i));
    }
  for (int t = 0; t <= horizon; ++t)
    for (int i = 0; i < n; ++i)
      if (is_corrupt(i)) {
        nodes.push_back({NodeKind::Corrupted, i, t});
        observed.push_back(true);
      }

  auto y_index = [n](int agent, int t) { return t * n + agent; };
  std::map<std::pair<int, int>, int> u_index;
  for (std::size_t k = static_cast<std::size_t>((horizon + 1) * n); k < nodes.size(); ++k)
    u_index[{nodes[k].agent, nodes[k].time}] = static_cast<int>(k);

  std::vector<UnrolledNetwork::Arc> arcs;
  for (int t = 1; t <= horizon; ++t)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int lag : net.lags(i, j))
          if (t - lag >= 0) arcs.emplace_back(y_index(j, t - lag), y_index(i, t));
  for (int t = 0; t <= horizon; ++t)
    for (int k = 0; k < n; ++k) {
      if (!is_corrupt(k)) continue;
      const MeasurementParents mp = corr.measurement_parents(k, t);
      const int u = u_index.at({k, t});
      for (int s : mp.y_times) arcs.emplace_back(y_index(k, s), u);
      for (int s : mp.u_times) arcs.emplace_back(u_index.at({k, s}), u);
    }
  return UnrolledNetwork(horizon, n, std::move(nodes), std::move(arcs), std::move(observed));
}

UnrolledNetwork unroll_dbn(const GenerativeNetwork& net, int horizon) {
  return unroll_perturbed_dbn(net, CorruptionSpec(net.size()), horizon);
}

namespace {

// Z together with all of its ancestors.
std::vector<char> ancestral_closure(const UnrolledNetwork& g, const std::set<int>& z) {
  std::vector<char> in(static_cast<std::size_t>(g.size()), 0);
  std::deque<int> queue(z.begin(), z.end());
  for (int v : z) in[static_cast<std::size_t>(v)] = 1;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (int p : g.parents(v))
      if (!in[static_cast<std::size_t>(p)]) {
        in[static_cast<std::size_t>(p)] = 1;
        queue.push_back(p);
      }
  }
  return in;
}

void check_member(const UnrolledNetwork& g, int v) {
  if (v < 0 || v >= g.size()) throw std::out_of_range("node index outside network");
}

}  // namespace

bool is_active_trail(const UnrolledNetwork& g, const std::vector<int>& trail, const std::set<int>& conditioning) {
  for (int v : trail) check_member(g, v);
  for (std::size_t k = 0; k + 1 < trail.size(); ++k)
    if (!g.adjacent(trail[k], trail[k + 1]))
      throw MalformedTrail("trail nodes " + dirnet::to_string(g.node(trail[k])) + " and " +
                           dirnet::to_string(g.node(trail[k + 1])) + " are not adjacent");
  const std::vector<char> active_collider = ancestral_closure(g, conditioning);
  for (std::size_t m = 1; m + 1 < trail.size(); ++m) {
    const int v = trail[m];
    const bool collider = g.has_arc(trail[m - 1], v) && g.has_arc(trail[m + 1], v);
    if (collider) {
      if (!active_collider[static_cast<std::size_t>(v)]) return false;
    } else if (conditioning.contains(v)) {
      return false;
    }
  }
  return true;
}

bool is_active_trail(const UnrolledNetwork& g, const std::vector<TimedNode>& trail,
                     const std::set<TimedNode>& conditioning) {
  std::vector<int> idx;
  idx.reserve(trail.size());
  for (const auto& n : trail) idx.push_back(g.index_of(n));
  std::set<int> cond;
  for (const auto& n : conditioning) cond.insert(g.index_of(n));
  return is_active_trail(g, idx, cond);
}

SeparationResult d_separation(const UnrolledNetwork& g, const TrailQuery& q) {
  for (const auto* s : {&q.sources, &q.targets, &q.conditioning})
    for (int v : *s) check_member(g, v);
  for (int v : q.sources)
    if (q.targets.contains(v) || q.conditioning.contains(v))
      throw std::invalid_argument("query sets must be pairwise disjoint");
  for (int v : q.targets)
    if (q.conditioning.contains(v)) throw std::invalid_argument("query sets must be pairwise disjoint");

  const std::vector<char> ancestor = ancestral_closure(g, q.conditioning);
  // State 2v: entered v from a child (moving up); 2v+1: entered from a
  // parent (moving down).
  const std::size_t states = 2 * static_cast<std::size_t>(g.size());
  std::vector<int> previous(states, -2);
  std::deque<int> queue;
  auto push = [&](int state, int from) {
    if (previous[static_cast<std::size_t>(state)] != -2) return;
    previous[static_cast<std::size_t>(state)] = from;
    queue.push_back(state);
  };
  for (int x : q.sources) push(2 * x, -1);

  SeparationResult result;
  while (!queue.empty()) {
    const int state = queue.front();
    queue.pop_front();
    const int v = state / 2;
    const bool down = state % 2 == 1;
    const bool in_z = q.conditioning.contains(v);
    if (!in_z && q.targets.contains(v)) {
      result.separated = false;
      for (int s = state; s != -1; s = previous[static_cast<std::size_t>(s)]) result.witness.push_back(s / 2);
      std::reverse(result.witness.begin(), result.witness.end());
      return result;
    }
    if (!down) {
      if (in_z) continue;
      for (int p : g.parents(v)) push(2 * p, state);
      for (int c : g.children(v)) push(2 * c + 1, state);
    } else {
      if (!in_z)
        for (int c : g.children(v)) push(2 * c + 1, state);
      if (ancestor[static_cast<std::size_t>(v)])
        for (int p : g.parents(v)) push(2 * p, state);
    }
  }
  return result;
}

bool d_separated(const UnrolledNetwork& g, const TrailQuery& q) { return d_separation(g, q).separated; }

}  // namespace dirnet
