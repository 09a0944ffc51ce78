#ifndef DIRNET_MODEL_HPP
#define DIRNET_MODEL_HPP

#include <set>
#include <string>
#include <variant>
#include <vector>

#include "dirnet/expression.hpp"

namespace dirnet {

class DirectedGraph;
class Rng;

/// Categorical law over {0, ..., size()-1}.
class NoiseLaw {
 public:
  NoiseLaw() : probabilities_{1.0} {}
  explicit NoiseLaw(std::vector<double> probabilities);

  static NoiseLaw bernoulli(double p);
  static NoiseLaw point_mass(int symbol, int alphabet);
  static NoiseLaw uniform(int alphabet);

  int size() const { return static_cast<int>(probabilities_.size()); }
  double probability(int symbol) const { return probabilities_.at(static_cast<std::size_t>(symbol)); }
  const std::vector<double>& probabilities() const { return probabilities_; }

  int sample(Rng& rng) const;
  /// Inverse-CDF draw from a uniform variate in [0, 1).
  int from_uniform(double u) const;

 private:
  std::vector<double> probabilities_;
};

struct AgentRule {
  Expr expression;
  NoiseLaw noise;
};

/// Network of strictly causal finite-alphabet agents,
///   y_i[t] = f_i(lagged y's, e_i[t]).
/// References to times before 0 evaluate to symbol 0 and contribute no arc.
class GenerativeNetwork {
 public:
  GenerativeNetwork(std::vector<int> alphabets, std::vector<AgentRule> rules);

  int size() const { return static_cast<int>(rules_.size()); }
  int alphabet(int agent) const { return alphabets_.at(static_cast<std::size_t>(agent)); }
  const std::vector<int>& alphabets() const { return alphabets_; }
  const AgentRule& rule(int agent) const { return rules_.at(static_cast<std::size_t>(agent)); }

  /// Lags k >= 1 with y_source[t-k] an argument of f_target.
  const std::set<int>& lags(int target, int source) const {
    return lags_[static_cast<std::size_t>(target)][static_cast<std::size_t>(source)];
  }
  int max_lag() const { return max_lag_; }

  /// Agent-level graph; self-dependence is not drawn.
  DirectedGraph generative_graph() const;

 private:
  std::vector<int> alphabets_;
  std::vector<AgentRule> rules_;
  std::vector<std::vector<std::set<int>>> lags_;
  int max_lag_ = 0;
};

/// u[t] = y[t + zeta[t]], zeta = d1 w.p. p else d2; reads before 0 clamp to y[0].
struct RandomDelay {
  int d1 = -1;
  int d2 = 0;
  double p = 0.5;
};

/// u[t] = y[t] w.p. p, else u[t-1]; u[0] = y[0].
struct PacketDrop {
  double p = 1.0;
};

/// Maps a real filter output onto {0, ..., M-1}.
struct Quantizer {
  enum class Kind { Round, Threshold };
  Kind kind = Kind::Round;
  std::vector<double> thresholds;  // ascending; level = number of thresholds <= value

  int apply(double value, int alphabet) const;
};

/// u[t] = Q(sum_k taps[k] * y[t-k] + additive noise), optionally followed by
/// symbol flips. Samples before time 0 are taken as 0.
struct NoisyFilter {
  enum class NoiseKind { None, Flip, Additive };
  std::vector<double> taps{1.0};
  NoiseKind noise_kind = NoiseKind::None;
  double flip_probability = 0.0;
  NoiseLaw additive;  // law of the integer offset added before quantization
  Quantizer quantizer;
};

/// u[t] = g(y[t-k], k >= 0; u[t-k], k >= 1; zeta[t]).
struct CustomTable {
  Expr expression;
  NoiseLaw zeta;
};

struct NoCorruption {};

using Corruption = std::variant<NoCorruption, RandomDelay, PacketDrop, NoisyFilter, CustomTable>;

/// Parent time indices of u_k[t] in the perturbed DBN.
struct MeasurementParents {
  std::set<int> y_times;
  std::set<int> u_times;
};

class CorruptionSpec {
 public:
  CorruptionSpec() = default;
  explicit CorruptionSpec(int agent_count);

  void set(int agent, Corruption c);
  int agent_count() const { return static_cast<int>(entries_.size()); }
  const Corruption& at(int agent) const { return entries_.at(static_cast<std::size_t>(agent)); }
  bool corrupted(int agent) const;
  std::set<int> corrupted_set() const;

  /// Index sets SY_k[t] and SU_k[t] read off the corruption rule of agent k.
  MeasurementParents measurement_parents(int agent, int t) const;

  /// Lags of y_k that g_k always takes as arguments (used for the C2 / B2
  /// checks). Lag 0 included when y_k[t] itself is read.
  std::set<int> y_lags(int agent) const;
  /// Largest lag of y_k or u_k read by any corruption rule.
  int max_lag() const;

  /// Checks rule-level invariants against the network's alphabets.
  void validate(const GenerativeNetwork& net) const;

 private:
  std::vector<Corruption> entries_;
};

std::string describe(const Corruption& c);

}  // namespace dirnet

#endif  // DIRNET_MODEL_HPP
