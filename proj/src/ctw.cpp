#include "dirnet/ctw.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace dirnet {

namespace {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double log_add(double a, double b) {
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

}  // namespace

double kt_probability(std::span<const std::uint32_t> counts, int symbol) {
  if (symbol < 0 || static_cast<std::size_t>(symbol) >= counts.size())
    throw std::out_of_range("symbol outside the KT alphabet");
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  return (counts[static_cast<std::size_t>(symbol)] + 0.5) / (static_cast<double>(total) + 0.5 * counts.size());
}

double kt_update(std::vector<std::uint32_t>& counts, int symbol) {
  const double p = kt_probability(counts, symbol);
  ++counts[static_cast<std::size_t>(symbol)];
  return p;
}

double kt_log2_block_probability(std::span<const std::uint32_t> counts) {
  const double m = static_cast<double>(counts.size());
  std::uint64_t total = 0;
  double log_p = 0.0;
  for (auto c : counts) {
    total += c;
    log_p += std::lgamma(c + 0.5) - std::lgamma(0.5);
  }
  log_p -= std::lgamma(static_cast<double>(total) + m / 2) - std::lgamma(m / 2);
  return log_p / std::numbers::ln2;
}

ContextTree::ContextTree(int depth, int context_alphabet, int target_alphabet)
    : depth_(depth), context_alphabet_(context_alphabet), target_alphabet_(target_alphabet) {
  if (depth < 0) throw std::invalid_argument("tree depth must be non-negative");
  if (context_alphabet < 1) throw std::invalid_argument("context alphabet must be positive");
  if (target_alphabet < 2) throw std::invalid_argument("target alphabet needs at least 2 symbols");
  nodes_.push_back(Node{0, 0.0});
  counts_.assign(static_cast<std::size_t>(target_alphabet), 0);
  child_lists_.emplace_back();
}

void ContextTree::check_context(std::span<const int> context) const {
  if (static_cast<int>(context.size()) != depth_)
    throw std::invalid_argument("context length " + std::to_string(context.size()) + " != depth " +
                                std::to_string(depth_));
  for (int s : context)
    if (s < 0 || s > context_alphabet_) throw std::out_of_range("context symbol outside the context alphabet");
}

std::span<const std::uint32_t> ContextTree::counts(int node) const {
  return {counts_.data() + nodes_[static_cast<std::size_t>(node)].counts_offset,
          static_cast<std::size_t>(target_alphabet_)};
}

int ContextTree::child(int node, int symbol) const {
  const std::uint64_t key = static_cast<std::uint64_t>(node) * static_cast<std::uint64_t>(context_alphabet_ + 1) +
                            static_cast<std::uint64_t>(symbol);
  auto it = children_.find(key);
  return it == children_.end() ? -1 : it->second;
}

int ContextTree::child_or_create(int node, int symbol) {
  const std::uint64_t key = static_cast<std::uint64_t>(node) * static_cast<std::uint64_t>(context_alphabet_ + 1) +
                            static_cast<std::uint64_t>(symbol);
  auto [it, inserted] = children_.try_emplace(key, static_cast<int>(nodes_.size()));
  if (inserted) {
    nodes_.push_back(Node{static_cast<std::uint32_t>(counts_.size()), 0.0});
    counts_.resize(counts_.size() + static_cast<std::size_t>(target_alphabet_), 0);
    child_lists_[static_cast<std::size_t>(node)].push_back(it->second);
    child_lists_.emplace_back();
  }
  return it->second;
}

std::vector<double> ContextTree::predict(std::span<const int> context) const {
  check_context(context);
  std::vector<int> path(static_cast<std::size_t>(depth_) + 1, -1);
  path[0] = 0;
  for (int l = 0; l < depth_ && path[static_cast<std::size_t>(l)] >= 0; ++l)
    path[static_cast<std::size_t>(l) + 1] = child(path[static_cast<std::size_t>(l)], context[static_cast<std::size_t>(l)]);

  const std::size_t m = static_cast<std::size_t>(target_alphabet_);
  std::vector<double> r(m, 1.0 / static_cast<double>(m));
  for (int l = depth_; l >= 0; --l) {
    const int node = path[static_cast<std::size_t>(l)];
    if (node < 0) continue;  // unseen subtree predicts uniformly
    const auto c = counts(node);
    std::uint64_t total = 0;
    for (auto v : c) total += v;
    const double denom = static_cast<double>(total) + 0.5 * static_cast<double>(m);
    const double w = l == depth_ ? 1.0 : sigmoid(nodes_[static_cast<std::size_t>(node)].log_beta);
    for (std::size_t a = 0; a < m; ++a) r[a] = w * ((c[a] + 0.5) / denom) + (1.0 - w) * r[a];
  }
  return r;
}

double ContextTree::update(std::span<const int> context, int symbol) {
  check_context(context);
  if (symbol < 0 || symbol >= target_alphabet_) throw std::out_of_range("symbol outside the target alphabet");
  std::vector<int> path(static_cast<std::size_t>(depth_) + 1);
  path[0] = 0;
  for (int l = 0; l < depth_; ++l)
    path[static_cast<std::size_t>(l) + 1] =
        child_or_create(path[static_cast<std::size_t>(l)], context[static_cast<std::size_t>(l)]);

  // Bottom-up probabilities of `symbol` at each level.
  std::vector<double> kt(path.size());
  std::vector<double> r(path.size());
  for (int l = depth_; l >= 0; --l) {
    const int node = path[static_cast<std::size_t>(l)];
    kt[static_cast<std::size_t>(l)] = kt_probability(counts(node), symbol);
    if (l == depth_) {
      r[static_cast<std::size_t>(l)] = kt[static_cast<std::size_t>(l)];
    } else {
      const double w = sigmoid(nodes_[static_cast<std::size_t>(node)].log_beta);
      r[static_cast<std::size_t>(l)] =
          w * kt[static_cast<std::size_t>(l)] + (1.0 - w) * r[static_cast<std::size_t>(l) + 1];
    }
  }
  for (int l = 0; l <= depth_; ++l) {
    Node& node = nodes_[static_cast<std::size_t>(path[static_cast<std::size_t>(l)])];
    if (l < depth_)
      node.log_beta += std::log(kt[static_cast<std::size_t>(l)]) - std::log(r[static_cast<std::size_t>(l) + 1]);
    ++counts_[node.counts_offset + static_cast<std::uint32_t>(symbol)];
  }
  const double logq = std::log2(r[0]);
  log2_probability_ += logq;
  return logq;
}

double ContextTree::log_block(int node, int level) const {
  const double log_pe = kt_log2_block_probability(counts(node)) * std::numbers::ln2;
  if (level == depth_) return log_pe;
  double log_children = 0.0;
  for (int c : child_lists_[static_cast<std::size_t>(node)]) log_children += log_block(c, level + 1);
  return log_add(std::log(0.5) + log_pe, std::log(0.5) + log_children);
}

double ContextTree::log2_block_probability() const { return log_block(0, 0) / std::numbers::ln2; }

JointAlphabet::JointAlphabet(std::vector<int> alphabets, std::uint64_t cap) : alphabets_(std::move(alphabets)) {
  std::uint64_t size = 1;
  for (int a : alphabets_) {
    if (a < 1) throw std::invalid_argument("stream alphabet must be positive");
    size *= static_cast<std::uint64_t>(a);
    if (size > cap) throw AlphabetOverflow("joint alphabet exceeds the cap of " + std::to_string(cap) + " symbols");
  }
  size_ = static_cast<int>(size);
}

int JointAlphabet::pack(std::span<const int> symbols) const {
  if (symbols.size() != alphabets_.size()) throw std::invalid_argument("tuple arity mismatch");
  int value = 0;
  int radix = 1;
  for (std::size_t k = 0; k < symbols.size(); ++k) {
    if (symbols[k] < 0 || symbols[k] >= alphabets_[k]) throw std::out_of_range("symbol outside its stream alphabet");
    value += symbols[k] * radix;
    radix *= alphabets_[k];
  }
  return value;
}

std::vector<int> JointAlphabet::unpack(int symbol) const {
  if (symbol < 0 || symbol >= size_) throw std::out_of_range("packed symbol outside the joint alphabet");
  std::vector<int> out(alphabets_.size());
  for (std::size_t k = 0; k < alphabets_.size(); ++k) {
    out[k] = symbol % alphabets_[k];
    symbol /= alphabets_[k];
  }
  return out;
}

JointContext::JointContext(const std::vector<std::span<const int>>& streams, std::vector<int> alphabets,
                           std::uint64_t cap)
    : alphabet_(std::move(alphabets), cap) {
  if (streams.size() != alphabet_.alphabets().size()) throw std::invalid_argument("one alphabet per stream required");
  if (streams.empty()) return;
  const std::size_t n = streams.front().size();
  for (const auto& s : streams)
    if (s.size() != n) throw std::invalid_argument("streams differ in length");
  packed_.resize(n);
  std::vector<int> tuple(streams.size());
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t k = 0; k < streams.size(); ++k) tuple[k] = streams[k][t];
    packed_[t] = alphabet_.pack(tuple);
  }
}

void JointContext::context(std::size_t t, int depth, std::vector<int>& out) const {
  out.resize(static_cast<std::size_t>(depth));
  for (int k = 0; k < depth; ++k) {
    const long s = static_cast<long>(t) - 1 - k;
    out[static_cast<std::size_t>(k)] = s >= 0 ? packed_[static_cast<std::size_t>(s)] : pad_symbol();
  }
}

std::vector<int> JointContext::context(std::size_t t, int depth) const {
  std::vector<int> out;
  context(t, depth, out);
  return out;
}

}  // namespace dirnet
