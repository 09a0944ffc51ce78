#ifndef DIRNET_ESTIMATOR_HPP
#define DIRNET_ESTIMATOR_HPP

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "dirnet/rng.hpp"

namespace dirnet {

/// A symbol stream together with the size of its alphabet.
struct StreamView {
  std::span<const int> symbols;
  int alphabet = 2;
};

struct DirEstimate {
  int source = -1;
  int target = -1;
  std::vector<int> conditioning;
  /// step_terms[i-1] is the contribution of y[i], i = 1..n.
  std::vector<double> step_terms;
  /// rate_trajectory[k] is the running average over the first k+1 terms.
  std::vector<double> rate_trajectory;
  double final_rate = 0.0;
  std::size_t sample_count = 0;

  /// Running average after `n` terms (1 <= n <= sample_count).
  double rate_at(std::size_t n) const { return rate_trajectory.at(n - 1); }
};

class EstimationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Universal estimate of the directed information rate I(X -> Y), in bits
/// per step, from two streams of equal length n + 1.
DirEstimate estimate_dir(StreamView x, StreamView y, int depth);

/// I(X -> Y || Z) for Z = `cond`. Two context trees are run side by side:
/// one on the joint (x, y, z) past and one on the (y, z) past. The term for
/// y[i] is the divergence between their predictions, so with an empty `cond`
/// this is exactly estimate_dir.
DirEstimate estimate_conditional_dir(StreamView x, StreamView y, const std::vector<StreamView>& cond, int depth);

/// Edge iff final_rate > tau. Throws for tau <= 0.
bool threshold_decision(const DirEstimate& est, double tau);

/// Empirical `quantile` of the final rate over `surrogates` re-estimates in
/// which the source stream is randomly permuted in time.
double surrogate_threshold(StreamView x, StreamView y, const std::vector<StreamView>& cond, int depth,
                           int surrogates, double quantile, Rng& rng);

}  // namespace dirnet

#endif  // DIRNET_ESTIMATOR_HPP
