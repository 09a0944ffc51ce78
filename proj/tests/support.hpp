// Shared test helpers: independent oracles and random instance generators.
// Nothing here calls the library routine it is used to check.

#ifndef DIRNET_TESTS_SUPPORT_HPP
#define DIRNET_TESTS_SUPPORT_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "dirnet/exact_chain.hpp"
#include "dirnet/graph.hpp"
#include "dirnet/model.hpp"
#include "dirnet/rng.hpp"
#include "dirnet/unrolled.hpp"

namespace testing_support {

using namespace dirnet;

inline double h2(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1 - p) * std::log2(1 - p);
}

// ---------------------------------------------------------------------------
// Exact chains built by exploring the states reachable from `start`.

using ChainState = std::vector<int>;
using Step = std::function<std::vector<std::pair<ChainState, double>>(const ChainState&)>;
using Emit = std::function<std::vector<int>(const ChainState&)>;

inline ExactChainSpec build_chain(const ChainState& start, const Step& step, const Emit& emit, std::vector<int> alphabets,
                                  int order) {
  std::map<ChainState, int> id;
  std::vector<ChainState> states;
  auto get = [&](const ChainState& s) {
    auto [it, inserted] = id.try_emplace(s, static_cast<int>(states.size()));
    if (inserted) states.push_back(s);
    return it->second;
  };
  get(start);
  std::vector<std::vector<std::pair<int, double>>> succ;
  for (std::size_t k = 0; k < states.size(); ++k) {
    std::vector<std::pair<int, double>> row;
    for (const auto& [next, p] : step(states[k]))
      if (p > 0) row.emplace_back(get(next), p);
    succ.push_back(row);
  }
  // Keep only the closed class reached from the start state's successors:
  // drop states that cannot be revisited (transient start-up states).
  const int n = static_cast<int>(states.size());
  auto reachable_from = [&](int s) {
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<int> stack{s};
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (auto [w, p] : succ[static_cast<std::size_t>(v)])
        if (!seen[static_cast<std::size_t>(w)]) {
          seen[static_cast<std::size_t>(w)] = 1;
          stack.push_back(w);
        }
    }
    return seen;
  };
  // A state lies in a closed class iff every state it reaches can reach it back.
  std::vector<std::vector<char>> r(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) r[static_cast<std::size_t>(s)] = reachable_from(s);
  int anchor = -1;
  for (int s = 0; s < n && anchor < 0; ++s) {
    bool closed = r[static_cast<std::size_t>(s)][static_cast<std::size_t>(s)];
    for (int v = 0; v < n && closed; ++v)
      if (r[static_cast<std::size_t>(s)][static_cast<std::size_t>(v)] && !r[static_cast<std::size_t>(v)][static_cast<std::size_t>(s)])
        closed = false;
    if (closed) anchor = s;
  }
  std::vector<int> keep;
  std::vector<int> remap(static_cast<std::size_t>(n), -1);
  for (int v = 0; v < n; ++v)
    if (r[static_cast<std::size_t>(anchor)][static_cast<std::size_t>(v)]) {
      remap[static_cast<std::size_t>(v)] = static_cast<int>(keep.size());
      keep.push_back(v);
    }

  ExactChainSpec spec;
  spec.state_count = static_cast<int>(keep.size());
  const auto m = static_cast<std::size_t>(spec.state_count);
  spec.transition.assign(m * m, 0.0);
  spec.initial.assign(m, 1.0 / static_cast<double>(m));
  spec.alphabets = std::move(alphabets);
  spec.emissions.assign(spec.alphabets.size(), std::vector<int>(m));
  spec.sufficient_order = order;
  for (std::size_t k = 0; k < m; ++k) {
    const int s = keep[k];
    for (auto [w, p] : succ[static_cast<std::size_t>(s)])
      spec.transition[k * m + static_cast<std::size_t>(remap[static_cast<std::size_t>(w)])] += p;
    const std::vector<int> e = emit(states[static_cast<std::size_t>(s)]);
    for (std::size_t q = 0; q < e.size(); ++q) spec.emissions[q][k] = e[q];
  }
  return spec;
}

// Enumerate independent binary components with given P(1) and combine.
inline std::vector<std::pair<ChainState, double>> product_step(
    const std::vector<double>& probs, const std::function<ChainState(const std::vector<int>&)>& next) {
  std::vector<std::pair<ChainState, double>> out;
  const std::size_t k = probs.size();
  for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
    std::vector<int> bits(k);
    double p = 1.0;
    for (std::size_t b = 0; b < k; ++b) {
      bits[b] = static_cast<int>((mask >> b) & 1);
      p *= bits[b] ? probs[b] : 1.0 - probs[b];
    }
    if (p > 0) out.emplace_back(next(bits), p);
  }
  return out;
}

struct BatteryCase {
  std::string name;
  ExactChainSpec spec;
  int source;
  int target;
  std::vector<int> cond;
  double closed_form;  // NaN when no closed form is used
};

// Binary chains of at most three processes and order at most two.
inline std::vector<BatteryCase> chain_battery() {
  const double nan = std::nan("");
  std::vector<BatteryCase> cases;

  // Y[t] = X[t-1] xor Bern(0.1), X iid fair.
  cases.push_back({"binary channel",
                   build_chain({0, 0},
                               [](const ChainState& s) {
                                 return product_step({0.5, 0.1}, [&](const std::vector<int>& b) {
                                   return ChainState{b[0], s[0] ^ b[1]};
                                 });
                               },
                               [](const ChainState& s) { return s; }, {2, 2}, 1),
                   0, 1, {}, 1.0 - h2(0.1)});

  // Two independent sticky chains.
  cases.push_back({"independent Markov pair",
                   build_chain({0, 0},
                               [](const ChainState& s) {
                                 return product_step({0.3, 0.2}, [&](const std::vector<int>& b) {
                                   return ChainState{s[0] ^ b[0], s[1] ^ b[1]};
                                 });
                               },
                               [](const ChainState& s) { return s; }, {2, 2}, 1),
                   0, 1, {}, 0.0});

  // X -> Y -> W; conditioning on Y removes X's influence on W.
  const ExactChainSpec relay = build_chain(
      {0, 0, 0},
      [](const ChainState& s) {
        return product_step({0.5, 0.1, 0.2}, [&](const std::vector<int>& b) {
          return ChainState{b[0], s[0] ^ b[1], s[1] ^ b[2]};
        });
      },
      [](const ChainState& s) { return s; }, {2, 2, 2}, 2);
  cases.push_back({"relay X->Y->W, I(X->W||Y)", relay, 0, 2, {1}, 0.0});
  // With X known two steps back, W[t] = X[t-2] xor flip(0.1) xor flip(0.2).
  cases.push_back({"relay X->Y->W, I(Y->W||X)", relay, 1, 2, {0}, h2(0.1 * 0.8 + 0.9 * 0.2) - h2(0.2)});

  // Y[t] = X[t-2] xor Bern(0.15).
  cases.push_back({"lag-two channel",
                   build_chain({0, 0, 0},
                               [](const ChainState& s) {
                                 return product_step({0.5, 0.15}, [&](const std::vector<int>& b) {
                                   return ChainState{b[0], s[0], s[1] ^ b[1]};
                                 });
                               },
                               [](const ChainState& s) { return ChainState{s[0], s[2]}; }, {2, 2}, 2),
                   0, 1, {}, 1.0 - h2(0.15)});

  // Feedback loop X = Y[-1] xor Bern(0.2), Y = X[-1] and Bern(0.7).
  const ExactChainSpec loop = build_chain(
      {0, 0},
      [](const ChainState& s) {
        return product_step({0.2, 0.7}, [&](const std::vector<int>& b) {
          return ChainState{s[1] ^ b[0], s[0] & b[1]};
        });
      },
      [](const ChainState& s) { return s; }, {2, 2}, 2);
  cases.push_back({"feedback loop, I(X->Y)", loop, 0, 1, {}, nan});
  cases.push_back({"feedback loop, I(Y->X)", loop, 1, 0, {}, nan});

  // Packet-dropped copy of a noisy channel output: X -> Y -> U with
  // U[t] = Y[t] w.p. 0.5 else U[t-1].
  cases.push_back({"packet drop after channel",
                   build_chain({0, 0, 0},
                               [](const ChainState& s) {
                                 return product_step({0.5, 0.1, 0.5}, [&](const std::vector<int>& b) {
                                   const int y = s[0] ^ b[1];
                                   return ChainState{b[0], y, b[2] ? y : s[2]};
                                 });
                               },
                               [](const ChainState& s) { return ChainState{s[0], s[2]}; }, {2, 2}, 1),
                   0, 1, {}, nan});

  // Packet-dropped fair coin, (y, u): the strict past of y adds nothing.
  cases.push_back({"packet-dropped iid source",
                   build_chain({0, 0},
                               [](const ChainState& s) {
                                 return product_step({0.5, 0.5}, [&](const std::vector<int>& b) {
                                   return ChainState{b[0], b[1] ? b[0] : s[1]};
                                 });
                               },
                               [](const ChainState& s) { return s; }, {2, 2}, 1),
                   0, 1, {}, 0.0});

  // Y[t] = X[t-1] xor Z[t-1] xor Bern(0.1): only the conditional rate is positive.
  cases.push_back({"xor of two sources, I(X->Y||Z)",
                   build_chain({0, 0, 0},
                               [](const ChainState& s) {
                                 return product_step({0.5, 0.5, 0.1}, [&](const std::vector<int>& b) {
                                   return ChainState{b[0], b[1], s[0] ^ s[1] ^ b[2]};
                                 });
                               },
                               [](const ChainState& s) { return s; }, {2, 2, 2}, 1),
                   0, 2, {1}, 1.0 - h2(0.1)});
  return cases;
}

// Three-node collider y2 = OR(y1[-1], y3[-1], e2) with y1 ~ Bern(0.7),
// y3 ~ Bern(0.6), e2 ~ Bern(0.4), observed as (y1, y2, u3) where u3 is y3
// delayed by two steps with probability 1/2. State: (y1, y2, y3, y3[-1],
// y3[-2], delay coin).
inline ExactChainSpec delayed_collider_chain(int order) {
  return build_chain({0, 0, 0, 0, 0, 0},
                     [](const ChainState& s) {
                       return product_step({0.7, 0.6, 0.4, 0.5}, [&](const std::vector<int>& b) {
                         return ChainState{b[0], s[0] | s[2] | b[2], b[1], s[2], s[3], b[3]};
                       });
                     },
                     [](const ChainState& s) { return std::vector<int>{s[0], s[1], s[5] ? s[4] : s[2]}; }, {2, 2, 2},
                     order);
}

// ---------------------------------------------------------------------------
// Exhaustive simple-trail oracles.

// Active-trail test written directly from the definition: a collider must be
// in `z` or have a descendant in `z`; a non-collider must not be in `z`.
inline bool trail_active_by_definition(const UnrolledNetwork& g, const std::vector<int>& trail, const std::set<int>& z) {
  auto has_descendant_in_z = [&](int v) {
    std::vector<int> stack{v};
    std::set<int> seen{v};
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      if (z.contains(u)) return true;
      for (int c : g.children(u))
        if (seen.insert(c).second) stack.push_back(c);
    }
    return false;
  };
  for (std::size_t m = 1; m + 1 < trail.size(); ++m) {
    const int v = trail[m];
    const bool collider = g.has_arc(trail[m - 1], v) && g.has_arc(trail[m + 1], v);
    if (collider ? !has_descendant_in_z(v) : z.contains(v)) return false;
  }
  return true;
}

// True iff no simple trail from a source to a target is active.
inline bool separated_by_enumeration(const UnrolledNetwork& g, const std::set<int>& xs, const std::set<int>& ys,
                                     const std::set<int>& z) {
  std::vector<int> trail;
  std::vector<char> on(static_cast<std::size_t>(g.size()), 0);
  std::function<bool(int)> dfs = [&](int v) {
    if (ys.contains(v) && trail.size() > 1) return trail_active_by_definition(g, trail, z);
    // Any extension of a trail ending in a target contains it as a prefix.
    if (ys.contains(v)) return false;
    std::set<int> nbrs(g.parents(v).begin(), g.parents(v).end());
    nbrs.insert(g.children(v).begin(), g.children(v).end());
    for (int w : nbrs) {
      if (on[static_cast<std::size_t>(w)]) continue;
      trail.push_back(w);
      on[static_cast<std::size_t>(w)] = 1;
      const bool found = dfs(w);
      on[static_cast<std::size_t>(w)] = 0;
      trail.pop_back();
      if (found) return true;
    }
    return false;
  };
  for (int x : xs) {
    trail = {x};
    on.assign(on.size(), 0);
    on[static_cast<std::size_t>(x)] = 1;
    if (dfs(x)) return false;
  }
  return true;
}

// Perturbed-graph edges by enumerating simple trails and checking the three
// conditions on each.
inline std::set<Edge> perturbed_edges_by_trails(const DirectedGraph& g, const NodeSet& z) {
  std::set<Edge> out;
  const int n = g.node_count();
  std::vector<int> trail;
  std::vector<char> on(static_cast<std::size_t>(n), 0);
  auto ok = [&](const std::vector<int>& t) {
    const int k = static_cast<int>(t.size());
    const int j = t.back();
    if (!z.contains(j) && !g.has_edge(t[static_cast<std::size_t>(k - 2)], j)) return false;  // P1
    for (int m = 1; m + 1 < k; ++m) {
      const int prev = t[static_cast<std::size_t>(m - 1)], v = t[static_cast<std::size_t>(m)],
                next = t[static_cast<std::size_t>(m + 1)];
      const bool collider = g.has_edge(prev, v) && g.has_edge(next, v);
      if (collider) {
        if (!z.contains(v) && !z.contains(next)) return false;  // P2
      } else if (!z.contains(v)) {
        return false;  // P3
      }
    }
    return true;
  };
  std::function<void(int, int)> dfs = [&](int source, int v) {
    std::set<int> nbrs(g.parents(v).begin(), g.parents(v).end());
    nbrs.insert(g.children(v).begin(), g.children(v).end());
    for (int w : nbrs) {
      if (on[static_cast<std::size_t>(w)]) continue;
      trail.push_back(w);
      on[static_cast<std::size_t>(w)] = 1;
      if (ok(trail)) out.insert({source, w});
      dfs(source, w);
      on[static_cast<std::size_t>(w)] = 0;
      trail.pop_back();
    }
  };
  for (int s = 0; s < n; ++s) {
    trail = {s};
    on.assign(on.size(), 0);
    on[static_cast<std::size_t>(s)] = 1;
    dfs(s, s);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Random instances.

inline DirectedGraph random_graph(int n, double p, Rng& rng) {
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && rng.bernoulli(p)) edges.emplace_back(i, j);
  return DirectedGraph(n, edges);
}

inline NodeSet random_subset(int n, double p, Rng& rng) {
  NodeSet z;
  for (int i = 0; i < n; ++i)
    if (rng.bernoulli(p)) z.insert(i);
  return z;
}

// Binary network realising `g`: each agent ORs or XORs lagged parents (lags in
// 1..max_lag) with its noise; `self_lag` adds y_i[t-1] to some rules.
inline GenerativeNetwork random_network(const DirectedGraph& g, int max_lag, double self_lag, Rng& rng) {
  std::vector<AgentRule> rules;
  for (int i = 0; i < g.node_count(); ++i) {
    std::vector<Expr> args;
    for (int j : g.parents(i)) args.push_back(Expr::var(j, 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_lag)))));
    if (rng.bernoulli(self_lag)) args.push_back(Expr::var(i, 1));
    args.push_back(Expr::noise());
    const Expr::Kind op = rng.bernoulli(0.5) ? Expr::Kind::Or : Expr::Kind::Xor;
    Expr e = args.size() == 1 ? args.front() : Expr::op(op, args);
    rules.push_back({e, NoiseLaw::bernoulli(0.2 + 0.6 * rng.uniform())});
  }
  return GenerativeNetwork(std::vector<int>(static_cast<std::size_t>(g.node_count()), 2), rules);
}

inline Corruption random_corruption(Rng& rng) {
  switch (rng.below(4)) {
    case 0: return RandomDelay{-1 - static_cast<int>(rng.below(2)), 0, 0.5};
    case 1: return RandomDelay{-1, -2, 0.3};
    case 2: return PacketDrop{0.5};
    default: {
      NoisyFilter f;
      f.taps = {0.5, 0.5};
      f.quantizer.kind = Quantizer::Kind::Threshold;
      f.quantizer.thresholds = {0.5};
      return f;
    }
  }
}

struct RandomUnrolled {
  GenerativeNetwork net;
  CorruptionSpec corr;
  UnrolledNetwork dbn;
};

// Random perturbed DBN with at most `max_nodes` timed nodes.
inline RandomUnrolled random_unrolled(Rng& rng, int max_nodes) {
  for (;;) {
    const int n = 2 + static_cast<int>(rng.below(3));
    const int horizon = 1 + static_cast<int>(rng.below(3));
    const NodeSet z = random_subset(n, 0.35, rng);
    if ((n + static_cast<int>(z.size())) * (horizon + 1) > max_nodes) continue;
    GenerativeNetwork net = random_network(random_graph(n, 0.45, rng), 2, 0.5, rng);
    CorruptionSpec corr(n);
    for (int k : z) corr.set(k, random_corruption(rng));
    UnrolledNetwork dbn = unroll_perturbed_dbn(net, corr, horizon);
    return {std::move(net), std::move(corr), std::move(dbn)};
  }
}

// Random subset of node indices drawn without replacement from `pool`.
inline std::set<int> draw_nodes(std::vector<int>& pool, int count, Rng& rng) {
  std::set<int> out;
  for (int k = 0; k < count && !pool.empty(); ++k) {
    const auto pick = static_cast<std::size_t>(rng.below(pool.size()));
    out.insert(pool[pick]);
    pool.erase(pool.begin() + static_cast<long>(pick));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Exact joint distributions of binary Bayesian networks.

// cpt[v][parent configuration] = P(x_v = 1 | parents), parents in the order
// the network lists them.
using Cpts = std::vector<std::vector<double>>;

inline Cpts random_positive_cpts(const UnrolledNetwork& g, Rng& rng) {
  Cpts cpts(static_cast<std::size_t>(g.size()));
  for (int v = 0; v < g.size(); ++v) {
    cpts[static_cast<std::size_t>(v)].resize(std::size_t{1} << g.parents(v).size());
    for (auto& p : cpts[static_cast<std::size_t>(v)]) p = 0.05 + 0.9 * rng.uniform();
  }
  return cpts;
}

inline std::vector<double> joint_distribution(const UnrolledNetwork& g, const Cpts& cpts) {
  const int n = g.size();
  std::vector<double> joint(std::size_t{1} << n);
  for (std::size_t x = 0; x < joint.size(); ++x) {
    double p = 1.0;
    for (int v = 0; v < n; ++v) {
      std::size_t config = 0;
      const auto& pa = g.parents(v);
      for (std::size_t k = 0; k < pa.size(); ++k) config |= ((x >> pa[k]) & 1) << k;
      const double one = cpts[static_cast<std::size_t>(v)][config];
      p *= ((x >> v) & 1) ? one : 1.0 - one;
    }
    joint[x] = p;
  }
  return joint;
}

// max over assignments of |P(x,y,z) P(z) - P(x,z) P(y,z)|.
inline double independence_residual(const std::vector<double>& joint, const std::set<int>& xs, const std::set<int>& ys,
                                     const std::set<int>& zs) {
  auto mask_of = [](const std::set<int>& s) {
    std::size_t m = 0;
    for (int v : s) m |= std::size_t{1} << v;
    return m;
  };
  const std::size_t mx = mask_of(xs), my = mask_of(ys), mz = mask_of(zs);
  std::map<std::size_t, double> pxyz, pxz, pyz, pz;
  for (std::size_t a = 0; a < joint.size(); ++a) {
    pxyz[a & (mx | my | mz)] += joint[a];
    pxz[a & (mx | mz)] += joint[a];
    pyz[a & (my | mz)] += joint[a];
    pz[a & mz] += joint[a];
  }
  double worst = 0.0;
  for (const auto& [key, p] : pxyz) {
    (void)p;
    const double lhs = pxyz[key] * pz[key & mz];
    const double rhs = pxz[key & (mx | mz)] * pyz[key & (my | mz)];
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

}  // namespace testing_support

#endif  // DIRNET_TESTS_SUPPORT_HPP
