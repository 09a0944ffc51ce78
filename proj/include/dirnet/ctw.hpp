#ifndef DIRNET_CTW_HPP
#define DIRNET_CTW_HPP

#include <cstdint>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace dirnet {

/// KT (add-1/2) probability of `symbol` given per-symbol tallies.
double kt_probability(std::span<const std::uint32_t> counts, int symbol);

/// Returns the KT probability of `symbol`, then increments its tally.
double kt_update(std::vector<std::uint32_t>& counts, int symbol);

/// log2 of the KT block probability of a sequence with the given tallies
/// (order independent).
double kt_log2_block_probability(std::span<const std::uint32_t> counts);

/// Depth-bounded context-tree weighting over a target alphabet, with
/// contexts drawn from a (possibly different) context alphabet.
///
/// A context is `depth` symbols, most recent first. Positions before the
/// start of the data use the pad symbol `context_alphabet()`, which gets its
/// own branch so early predictions never mix with stationary statistics.
///
/// Each node keeps KT tallies and log(beta), beta = Pe / prod(children Pw);
/// conditional probabilities are computed as the mixture
///   r_s(a) = beta/(1+beta) * KT_s(a) + 1/(1+beta) * r_child(a)
/// along the context path, which stays well conditioned for long sequences.
class ContextTree {
 public:
  ContextTree(int depth, int context_alphabet, int target_alphabet);

  int depth() const { return depth_; }
  int context_alphabet() const { return context_alphabet_; }
  int target_alphabet() const { return target_alphabet_; }
  int pad_symbol() const { return context_alphabet_; }
  std::size_t node_count() const { return nodes_.size(); }

  /// Sequential conditional pmf of the next target symbol.
  std::vector<double> predict(std::span<const int> context) const;

  /// Predict-then-update: returns log2 Q(symbol | context) as assigned
  /// before the tallies move.
  double update(std::span<const int> context, int symbol);

  /// Sum of the log2 conditionals returned by `update`.
  double log2_probability() const { return log2_probability_; }

  /// log2 of the weighted root probability recomputed from stored tallies.
  double log2_block_probability() const;

 private:
  struct Node {
    std::uint32_t counts_offset;
    double log_beta = 0.0;
  };

  void check_context(std::span<const int> context) const;
  int child(int node, int symbol) const;
  int child_or_create(int node, int symbol);
  std::span<const std::uint32_t> counts(int node) const;
  double log_block(int node, int level) const;

  int depth_;
  int context_alphabet_;
  int target_alphabet_;
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> counts_;
  std::unordered_map<std::uint64_t, int> children_;
  std::vector<std::vector<int>> child_lists_;  // for block recomputation
  double log2_probability_ = 0.0;
};

class AlphabetOverflow : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Mixed-radix packing of a tuple of stream symbols into one symbol.
/// The first stream is the least significant digit.
class JointAlphabet {
 public:
  explicit JointAlphabet(std::vector<int> alphabets, std::uint64_t cap = kDefaultCap);

  static constexpr std::uint64_t kDefaultCap = 1u << 20;

  int size() const { return size_; }
  const std::vector<int>& alphabets() const { return alphabets_; }
  int pack(std::span<const int> symbols) const;
  std::vector<int> unpack(int symbol) const;

 private:
  std::vector<int> alphabets_;
  int size_ = 1;
};

/// Per-time packed symbols of several equal-length streams; `context(t)`
/// gives the last `depth` packed symbols strictly before t, padded.
class JointContext {
 public:
  JointContext(const std::vector<std::span<const int>>& streams, std::vector<int> alphabets,
               std::uint64_t cap = JointAlphabet::kDefaultCap);

  int alphabet_size() const { return alphabet_.size(); }
  int pad_symbol() const { return alphabet_.size(); }
  const std::vector<int>& packed() const { return packed_; }
  std::size_t length() const { return packed_.size(); }

  void context(std::size_t t, int depth, std::vector<int>& out) const;
  std::vector<int> context(std::size_t t, int depth) const;

 private:
  JointAlphabet alphabet_;
  std::vector<int> packed_;
};

}  // namespace dirnet

#endif  // DIRNET_CTW_HPP
