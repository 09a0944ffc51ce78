#include "dirnet/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "dirnet/graph.hpp"
#include "dirnet/rng.hpp"
#include "overloaded.hpp"

namespace dirnet {

NoiseLaw::NoiseLaw(std::vector<double> probabilities) : probabilities_(std::move(probabilities)) {
  if (probabilities_.empty()) throw ModelError("noise law needs at least one symbol");
  double total = 0.0;
  for (double p : probabilities_) {
    if (!(p >= 0.0) || p > 1.0) throw ModelError("noise probability outside [0, 1]");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ModelError("noise probabilities do not sum to 1");
}

NoiseLaw NoiseLaw::bernoulli(double p) { return NoiseLaw({1.0 - p, p}); }

NoiseLaw NoiseLaw::point_mass(int symbol, int alphabet) {
  if (symbol < 0 || symbol >= alphabet) throw ModelError("point mass outside alphabet");
  std::vector<double> probs(static_cast<std::size_t>(alphabet), 0.0);
  probs[static_cast<std::size_t>(symbol)] = 1.0;
  return NoiseLaw(std::move(probs));
}

NoiseLaw NoiseLaw::uniform(int alphabet) {
  return NoiseLaw(std::vector<double>(static_cast<std::size_t>(alphabet), 1.0 / alphabet));
}

int NoiseLaw::from_uniform(double u) const {
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < probabilities_.size(); ++k) {
    acc += probabilities_[k];
    if (u < acc) return static_cast<int>(k);
  }
  // Skip trailing zero-probability symbols.
  for (std::size_t k = probabilities_.size(); k-- > 0;)
    if (probabilities_[k] > 0.0) return static_cast<int>(k);
  return 0;
}

int NoiseLaw::sample(Rng& rng) const {
  if (probabilities_.size() == 1) return 0;
  return from_uniform(rng.uniform());
}

GenerativeNetwork::GenerativeNetwork(std::vector<int> alphabets, std::vector<AgentRule> rules)
    : alphabets_(std::move(alphabets)), rules_(std::move(rules)) {
  const int n = static_cast<int>(rules_.size());
  if (n == 0) throw ModelError("network has no agents");
  if (static_cast<int>(alphabets_.size()) != n) throw ModelError("one alphabet per agent required");
  for (int a : alphabets_)
    if (a < 2) throw ModelError("alphabet size must be at least 2");

  lags_.assign(static_cast<std::size_t>(n), std::vector<std::set<int>>(static_cast<std::size_t>(n)));
  for (int i = 0; i < n; ++i) {
    const AgentRule& rule = rules_[static_cast<std::size_t>(i)];
    const ExprTerms terms = collect_terms(rule.expression);
    if (!terms.own_lags.empty() || terms.uses_zeta)
      throw ModelError("agent y" + std::to_string(i + 1) + ": corruption terms in a generative rule");
    for (const auto& [agent, lag] : terms.vars) {
      if (agent < 0 || agent >= n) throw ModelError("agent y" + std::to_string(i + 1) + ": unknown agent");
      if (lag < 1) throw ModelError("agent y" + std::to_string(i + 1) + ": rule is not strictly causal");
      lags_[static_cast<std::size_t>(i)][static_cast<std::size_t>(agent)].insert(lag);
      max_lag_ = std::max(max_lag_, lag);
    }
    if (rule.noise.size() != alphabet(i))
      throw ModelError("agent y" + std::to_string(i + 1) + ": noise law does not match the alphabet");
    const int bound = value_bound(
        rule.expression, [this](int j) { return alphabet(j); }, alphabet(i), 1);
    if (bound > alphabet(i) - 1)
      throw ModelError("agent y" + std::to_string(i + 1) + ": rule can leave the alphabet (bound " +
                       std::to_string(bound) + ")");
  }
}

DirectedGraph GenerativeNetwork::generative_graph() const {
  std::vector<Edge> edges;
  for (int i = 0; i < size(); ++i)
    for (int j = 0; j < size(); ++j)
      if (i != j && !lags(i, j).empty()) edges.emplace_back(j, i);
  return DirectedGraph(size(), edges);
}

int Quantizer::apply(double value, int alphabet) const {
  int level = 0;
  if (kind == Kind::Round) {
    level = static_cast<int>(std::floor(value + 0.5));
  } else {
    for (double t : thresholds)
      if (value >= t) ++level;
  }
  return std::clamp(level, 0, alphabet - 1);
}

CorruptionSpec::CorruptionSpec(int agent_count) : entries_(static_cast<std::size_t>(agent_count), NoCorruption{}) {}

void CorruptionSpec::set(int agent, Corruption c) { entries_.at(static_cast<std::size_t>(agent)) = std::move(c); }

bool CorruptionSpec::corrupted(int agent) const {
  if (agent < 0 || agent >= agent_count()) return false;
  return !std::holds_alternative<NoCorruption>(entries_[static_cast<std::size_t>(agent)]);
}

std::set<int> CorruptionSpec::corrupted_set() const {
  std::set<int> z;
  for (int k = 0; k < agent_count(); ++k)
    if (corrupted(k)) z.insert(k);
  return z;
}

using detail::Overloaded;

MeasurementParents CorruptionSpec::measurement_parents(int agent, int t) const {
  MeasurementParents out;
  std::visit(Overloaded{
                 [](const NoCorruption&) {},
                 [&](const RandomDelay& d) {
                   if (d.p > 0.0) out.y_times.insert(std::max(0, t + d.d1));
                   if (d.p < 1.0) out.y_times.insert(std::max(0, t + d.d2));
                 },
                 [&](const PacketDrop&) {
                   out.y_times.insert(t);
                   if (t >= 1) out.u_times.insert(t - 1);
                 },
                 [&](const NoisyFilter& f) {
                   for (std::size_t k = 0; k < f.taps.size(); ++k)
                     if (f.taps[k] != 0.0 && t - static_cast<int>(k) >= 0) out.y_times.insert(t - static_cast<int>(k));
                 },
                 [&](const CustomTable& c) {
                   const ExprTerms terms = collect_terms(c.expression);
                   for (const auto& [a, lag] : terms.vars)
                     if (t - lag >= 0) out.y_times.insert(t - lag);
                   for (int lag : terms.own_lags)
                     if (t - lag >= 0) out.u_times.insert(t - lag);
                 },
             },
             at(agent));
  return out;
}

std::set<int> CorruptionSpec::y_lags(int agent) const {
  std::set<int> lags;
  std::visit(Overloaded{
                 [](const NoCorruption&) {},
                 [&](const RandomDelay& d) {
                   // Both branches are arguments of g; p in {0, 1} removes one.
                   if (d.p > 0.0) lags.insert(-d.d1);
                   if (d.p < 1.0) lags.insert(-d.d2);
                 },
                 [&](const PacketDrop&) { lags.insert(0); },
                 [&](const NoisyFilter& f) {
                   for (std::size_t k = 0; k < f.taps.size(); ++k)
                     if (f.taps[k] != 0.0) lags.insert(static_cast<int>(k));
                 },
                 [&](const CustomTable& c) {
                   for (const auto& [a, lag] : collect_terms(c.expression).vars) lags.insert(lag);
                 },
             },
             at(agent));
  return lags;
}

int CorruptionSpec::max_lag() const {
  int m = 0;
  for (int k = 0; k < agent_count(); ++k) {
    for (int lag : y_lags(k)) m = std::max(m, lag);
    if (const auto* c = std::get_if<CustomTable>(&at(k)))
      for (int lag : collect_terms(c->expression).own_lags) m = std::max(m, lag);
    if (std::holds_alternative<PacketDrop>(at(k))) m = std::max(m, 1);
  }
  return m;
}

void CorruptionSpec::validate(const GenerativeNetwork& net) const {
  if (agent_count() != net.size()) throw ModelError("corruption spec and network disagree on agent count");
  for (int k = 0; k < agent_count(); ++k) {
    const std::string who = "u" + std::to_string(k + 1) + ": ";
    std::visit(Overloaded{
                   [](const NoCorruption&) {},
                   [&](const RandomDelay& d) {
                     if (d.d1 > 0 || d.d2 > 0) throw ModelError(who + "delays must be non-positive");
                     if (d.d1 == 0 && d.d2 == 0) throw ModelError(who + "at least one delay must be nonzero");
                     if (!(d.p >= 0.0 && d.p <= 1.0)) throw ModelError(who + "delay probability outside [0, 1]");
                   },
                   [&](const PacketDrop& d) {
                     if (!(d.p > 0.0 && d.p <= 1.0))
                       throw ModelError(who + "packet delivery probability must lie in (0, 1]");
                   },
                   [&](const NoisyFilter& f) {
                     if (f.taps.empty()) throw ModelError(who + "filter needs at least one tap");
                     if (f.noise_kind == NoisyFilter::NoiseKind::Flip &&
                         !(f.flip_probability >= 0.0 && f.flip_probability <= 1.0))
                       throw ModelError(who + "flip probability outside [0, 1]");
                     if (f.quantizer.kind == Quantizer::Kind::Threshold &&
                         !std::is_sorted(f.quantizer.thresholds.begin(), f.quantizer.thresholds.end()))
                       throw ModelError(who + "thresholds must be ascending");
                   },
                   [&](const CustomTable& c) {
                     const ExprTerms terms = collect_terms(c.expression);
                     if (terms.uses_noise) throw ModelError(who + "agent noise cannot enter a corruption rule");
                     for (const auto& [a, lag] : terms.vars)
                       if (a != k || lag < 0) throw ModelError(who + "corruption may only read its own y at lags >= 0");
                     for (int lag : terms.own_lags)
                       if (lag < 1) throw ModelError(who + "u may only be read at lags >= 1");
                     const int bound = value_bound(
                         c.expression, [&](int j) { return net.alphabet(j); }, net.alphabet(k), c.zeta.size());
                     if (bound > net.alphabet(k) - 1) throw ModelError(who + "rule can leave the alphabet");
                   },
               },
               at(k));
  }
}

std::string describe(const Corruption& c) {
  std::ostringstream os;
  std::visit(Overloaded{
                 [&](const NoCorruption&) { os << "none"; },
                 [&](const RandomDelay& d) { os << "delay " << d.d1 << ' ' << d.d2 << ' ' << d.p; },
                 [&](const PacketDrop& d) { os << "drop " << d.p; },
                 [&](const NoisyFilter& f) {
                   os << "filter taps";
                   for (double w : f.taps) os << ' ' << w;
                 },
                 [&](const CustomTable& t) { os << "custom " << to_string(t.expression); },
             },
             c);
  return os.str();
}

}  // namespace dirnet
