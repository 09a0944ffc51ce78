#include "dirnet/exact_chain.hpp"

#include <cmath>
#include <deque>
#include <map>
#include <numeric>
#include <string>

#include "dirnet/rng.hpp"

namespace dirnet {

namespace {

constexpr int kMaxStates = 4096;

std::vector<int> bfs_levels(const ExactChainSpec& spec, bool reverse) {
  std::vector<int> level(static_cast<std::size_t>(spec.state_count), -1);
  std::deque<int> queue{0};
  level[0] = 0;
  while (!queue.empty()) {
    const int s = queue.front();
    queue.pop_front();
    for (int v = 0; v < spec.state_count; ++v) {
      const double w = reverse ? spec.p(v, s) : spec.p(s, v);
      if (w > 0.0 && level[static_cast<std::size_t>(v)] < 0) {
        level[static_cast<std::size_t>(v)] = level[static_cast<std::size_t>(s)] + 1;
        queue.push_back(v);
      }
    }
  }
  return level;
}

}  // namespace

void validate(const ExactChainSpec& spec) {
  const int n = spec.state_count;
  if (n < 1 || n > kMaxStates) throw ChainError("state count must lie in [1, 4096]");
  if (spec.transition.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n))
    throw ChainError("transition matrix must be state_count x state_count");
  for (int s = 0; s < n; ++s) {
    double row = 0.0;
    for (int v = 0; v < n; ++v) {
      if (spec.p(s, v) < 0.0) throw ChainError("negative transition probability in row " + std::to_string(s));
      row += spec.p(s, v);
    }
    if (std::abs(row - 1.0) > 1e-9) throw ChainError("row " + std::to_string(s) + " does not sum to 1");
  }
  if (spec.initial.size() != static_cast<std::size_t>(n)) throw ChainError("initial law has the wrong size");
  if (spec.alphabets.size() != spec.emissions.size()) throw ChainError("one alphabet per process required");
  for (std::size_t k = 0; k < spec.emissions.size(); ++k) {
    if (spec.emissions[k].size() != static_cast<std::size_t>(n))
      throw ChainError("emission table " + std::to_string(k) + " has the wrong size");
    for (int v : spec.emissions[k])
      if (v < 0 || v >= spec.alphabets[k]) throw ChainError("emission outside alphabet for process " + std::to_string(k));
  }
  if (spec.sufficient_order < 0) throw ChainError("sufficient order must be non-negative");

  const std::vector<int> forward = bfs_levels(spec, false);
  const std::vector<int> backward = bfs_levels(spec, true);
  for (int s = 0; s < n; ++s)
    if (forward[static_cast<std::size_t>(s)] < 0 || backward[static_cast<std::size_t>(s)] < 0)
      throw ChainError("chain is reducible");
  // The period of an irreducible chain is the gcd of level differences
  // across its positive transitions.
  int period = 0;
  for (int s = 0; s < n; ++s)
    for (int v = 0; v < n; ++v)
      if (spec.p(s, v) > 0.0)
        period = std::gcd(period, std::abs(forward[static_cast<std::size_t>(s)] + 1 - forward[static_cast<std::size_t>(v)]));
  if (period != 1) throw ChainError("chain is periodic with period " + std::to_string(period));
}

std::vector<double> stationary_distribution(const ExactChainSpec& spec) {
  validate(spec);
  const auto n = static_cast<std::size_t>(spec.state_count);
  std::vector<double> pi(n, 1.0 / static_cast<double>(n));
  std::vector<double> next(n);
  for (int iter = 0; iter < 10'000'000; ++iter) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t s = 0; s < n; ++s) {
      if (pi[s] == 0.0) continue;
      for (std::size_t v = 0; v < n; ++v) next[v] += pi[s] * spec.transition[s * n + v];
    }
    double change = 0.0, total = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      change += std::abs(next[s] - pi[s]);
      total += next[s];
    }
    for (auto& v : next) v /= total;
    pi.swap(next);
    if (change < 1e-12) return pi;
  }
  throw ChainError("power iteration did not converge");
}

double conditional_entropy(const ExactChainSpec& spec, int target, const std::vector<int>& given, int order) {
  if (target < 0 || target >= spec.process_count()) throw ChainError("target process out of range");
  for (int g : given)
    if (g < 0 || g >= spec.process_count()) throw ChainError("conditioning process out of range");
  if (order < 0) throw ChainError("order must be non-negative");
  const std::vector<double> pi = stationary_distribution(spec);
  const int n = spec.state_count;
  const auto& emit_y = spec.emissions[static_cast<std::size_t>(target)];
  const int m = spec.alphabets[static_cast<std::size_t>(target)];

  auto code = [&](int state) {
    int c = 0;
    for (int g : given) c = c * spec.alphabets[static_cast<std::size_t>(g)] + spec.emissions[static_cast<std::size_t>(g)][static_cast<std::size_t>(state)];
    return c;
  };

  double h = 0.0;
  auto add_window = [&](const std::vector<double>& joint) {
    double total = 0.0;
    for (double v : joint) total += v;
    for (double v : joint)
      if (v > 0.0) h += v * std::log2(total / v);
  };

  if (order == 0) {
    std::vector<double> py(static_cast<std::size_t>(m), 0.0);
    for (int s = 0; s < n; ++s) py[static_cast<std::size_t>(emit_y[static_cast<std::size_t>(s)])] += pi[static_cast<std::size_t>(s)];
    add_window(py);
    return h;
  }

  // alpha[window][s] = P(observed window over the last steps, state now = s).
  using Alpha = std::map<std::vector<int>, std::vector<double>>;
  Alpha alpha;
  for (int s = 0; s < n; ++s) {
    if (pi[static_cast<std::size_t>(s)] == 0.0) continue;
    auto& row = alpha[{code(s)}];
    row.resize(static_cast<std::size_t>(n), 0.0);
    row[static_cast<std::size_t>(s)] += pi[static_cast<std::size_t>(s)];
  }
  for (int step = 1; step < order; ++step) {
    Alpha next;
    for (const auto& [window, row] : alpha)
      for (int s = 0; s < n; ++s) {
        if (row[static_cast<std::size_t>(s)] == 0.0) continue;
        for (int v = 0; v < n; ++v) {
          const double w = spec.p(s, v);
          if (w == 0.0) continue;
          std::vector<int> key = window;
          key.push_back(code(v));
          auto& out = next[key];
          out.resize(static_cast<std::size_t>(n), 0.0);
          out[static_cast<std::size_t>(v)] += row[static_cast<std::size_t>(s)] * w;
        }
      }
    alpha.swap(next);
  }
  for (const auto& [window, row] : alpha) {
    std::vector<double> joint(static_cast<std::size_t>(m), 0.0);
    for (int s = 0; s < n; ++s) {
      if (row[static_cast<std::size_t>(s)] == 0.0) continue;
      for (int v = 0; v < n; ++v)
        joint[static_cast<std::size_t>(emit_y[static_cast<std::size_t>(v)])] += row[static_cast<std::size_t>(s)] * spec.p(s, v);
    }
    add_window(joint);
  }
  return h;
}

double brute_force_dir(const ExactChainSpec& spec, int source, int target, const std::vector<int>& cond, int order) {
  std::vector<int> reduced{target};
  for (int c : cond)
    if (c != target) reduced.push_back(c);
  std::vector<int> full = reduced;
  full.push_back(source);
  return conditional_entropy(spec, target, reduced, order) - conditional_entropy(spec, target, full, order);
}

double brute_force_dir(const ExactChainSpec& spec, int source, int target, const std::vector<int>& cond) {
  return brute_force_dir(spec, source, target, cond, spec.sufficient_order);
}

std::vector<std::vector<int>> sample_chain(const ExactChainSpec& spec, std::size_t length, std::uint64_t seed) {
  validate(spec);
  Rng rng(seed);
  const int n = spec.state_count;
  auto draw = [&](auto&& weight) {
    const double u = rng.uniform();
    double acc = 0.0;
    for (int v = 0; v < n; ++v) {
      acc += weight(v);
      if (u < acc) return v;
    }
    // Rounding left a sliver at the top; take the last state with mass.
    for (int v = n - 1; v >= 0; --v)
      if (weight(v) > 0.0) return v;
    return n - 1;
  };
  std::vector<std::vector<int>> out(spec.emissions.size(), std::vector<int>(length));
  int state = draw([&](int v) { return spec.initial[static_cast<std::size_t>(v)]; });
  for (std::size_t t = 0; t < length; ++t) {
    if (t > 0) state = draw([&](int v) { return spec.p(state, v); });
    for (std::size_t k = 0; k < out.size(); ++k) out[k][t] = spec.emissions[k][static_cast<std::size_t>(state)];
  }
  return out;
}

}  // namespace dirnet
