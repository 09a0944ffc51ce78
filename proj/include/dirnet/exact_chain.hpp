#ifndef DIRNET_EXACT_CHAIN_HPP
#define DIRNET_EXACT_CHAIN_HPP

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace dirnet {

/// Finite Markov chain on states 0..state_count-1 whose observable processes
/// are deterministic functions of the current state.
struct ExactChainSpec {
  int state_count = 0;
  std::vector<double> transition;  // row-major, transition[s * state_count + s']
  std::vector<double> initial;
  std::vector<std::vector<int>> emissions;  // emissions[process][state]
  std::vector<int> alphabets;               // one per process
  /// Number of past steps of the observed processes that the conditional
  /// entropies are computed from.
  int sufficient_order = 1;

  int process_count() const { return static_cast<int>(emissions.size()); }
  double p(int from, int to) const {
    return transition[static_cast<std::size_t>(from) * static_cast<std::size_t>(state_count) +
                      static_cast<std::size_t>(to)];
  }
};

class ChainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Structural checks: stochastic rows, valid emissions, state space
/// <= 4096, irreducible and aperiodic.
void validate(const ExactChainSpec& spec);

/// Power iteration to 1e-12 in L1.
std::vector<double> stationary_distribution(const ExactChainSpec& spec);

/// H(target[t] | past `order` values of each process in `given`), in bits,
/// under the stationary law.
double conditional_entropy(const ExactChainSpec& spec, int target, const std::vector<int>& given, int order);

/// H(Y || Z) - H(Y || X, Z) at the spec's sufficient order, in bits/step.
double brute_force_dir(const ExactChainSpec& spec, int source, int target, const std::vector<int>& cond);

/// Same quantity evaluated at an explicit order.
double brute_force_dir(const ExactChainSpec& spec, int source, int target, const std::vector<int>& cond, int order);

/// Samples `length` steps starting from the initial law; returns one symbol
/// sequence per process.
std::vector<std::vector<int>> sample_chain(const ExactChainSpec& spec, std::size_t length, std::uint64_t seed);

}  // namespace dirnet

#endif  // DIRNET_EXACT_CHAIN_HPP
