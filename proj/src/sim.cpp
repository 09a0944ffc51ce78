#include "dirnet/sim.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "overloaded.hpp"

namespace dirnet {

const Sequence& TrajectorySet::measured(int agent) const {
  const auto& u_k = u.at(static_cast<std::size_t>(agent));
  return u_k ? *u_k : y.at(static_cast<std::size_t>(agent));
}

std::vector<Sequence> TrajectorySet::measured_streams() const {
  std::vector<Sequence> w;
  w.reserve(y.size());
  for (int k = 0; k < agent_count(); ++k) w.push_back(measured(k));
  return w;
}

std::vector<Sequence> simulate_ideal(const GenerativeNetwork& net, const std::vector<Sequence>& noise) {
  const int n = net.size();
  if (static_cast<int>(noise.size()) != n) throw std::invalid_argument("one noise sequence per agent required");
  const std::size_t length = noise.front().size();
  for (const auto& e : noise)
    if (e.size() != length) throw std::invalid_argument("noise sequences differ in length");

  std::vector<Sequence> y(static_cast<std::size_t>(n), Sequence(length, 0));
  for (int i = 0; i < n; ++i) y[static_cast<std::size_t>(i)][0] = noise[static_cast<std::size_t>(i)][0];

  for (std::size_t t = 1; t < length; ++t) {
    for (int i = 0; i < n; ++i) {
      EvalInputs in;
      in.var = [&](int agent, int lag) {
        const long s = static_cast<long>(t) - lag;
        return s < 0 ? 0 : y[static_cast<std::size_t>(agent)][static_cast<std::size_t>(s)];
      };
      in.noise = noise[static_cast<std::size_t>(i)][t];
      in.modulus = net.alphabet(i);
      y[static_cast<std::size_t>(i)][t] = evaluate(net.rule(i).expression, in);
    }
  }
  return y;
}

TrajectorySet sample(const GenerativeNetwork& net, const CorruptionSpec& corr, int horizon, std::uint64_t seed) {
  if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  const int n = net.size();
  if (corr.agent_count() != n) throw std::invalid_argument("corruption spec does not match the network");

  std::vector<Sequence> noise(static_cast<std::size_t>(n), Sequence(static_cast<std::size_t>(horizon) + 1));
  for (int i = 0; i < n; ++i) {
    Rng rng = Rng::stream(seed, noise_stream_id(i));
    for (auto& e : noise[static_cast<std::size_t>(i)]) e = net.rule(i).noise.sample(rng);
  }

  TrajectorySet out;
  out.horizon = horizon;
  out.seed = seed;
  out.alphabets = net.alphabets();
  out.y = simulate_ideal(net, noise);
  out.u.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    if (!corr.corrupted(k)) continue;
    Rng rng = Rng::stream(seed, corruption_stream_id(k));
    out.u[static_cast<std::size_t>(k)] = apply_corruption(out.y[static_cast<std::size_t>(k)], corr.at(k), net.alphabet(k), rng);
  }
  return out;
}

Sequence apply_delay(std::span<const int> y, int d1, int d2, double p, Rng& rng) {
  if (d1 > 0 || d2 > 0) throw std::invalid_argument("delays must be non-positive");
  Sequence u(y.size());
  for (std::size_t t = 0; t < y.size(); ++t) {
    const int shift = rng.bernoulli(p) ? d1 : d2;
    const long s = std::max(0L, static_cast<long>(t) + shift);
    u[t] = y[static_cast<std::size_t>(s)];
  }
  return u;
}

Sequence apply_packet_drop(std::span<const int> y, double p, Rng& rng) {
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("packet delivery probability must lie in (0, 1]");
  Sequence u(y.size());
  if (y.empty()) return u;
  u[0] = y[0];
  for (std::size_t t = 1; t < y.size(); ++t) u[t] = rng.bernoulli(p) ? y[t] : u[t - 1];
  return u;
}

Sequence apply_noisy_filter(std::span<const int> y, const NoisyFilter& filter, int alphabet, Rng& rng) {
  if (filter.taps.empty()) throw std::invalid_argument("filter needs at least one tap");
  Sequence u(y.size());
  for (std::size_t t = 0; t < y.size(); ++t) {
    double v = 0.0;
    for (std::size_t k = 0; k < filter.taps.size() && k <= t; ++k) v += filter.taps[k] * y[t - k];
    if (filter.noise_kind == NoisyFilter::NoiseKind::Additive) v += filter.additive.sample(rng);
    int q = filter.quantizer.apply(v, alphabet);
    if (filter.noise_kind == NoisyFilter::NoiseKind::Flip && rng.bernoulli(filter.flip_probability)) {
      // Replace by one of the other symbols, uniformly.
      const int offset = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(alphabet - 1)));
      q = (q + offset) % alphabet;
    }
    u[t] = q;
  }
  return u;
}

Sequence apply_custom(std::span<const int> y, const CustomTable& rule, int alphabet, Rng& rng) {
  Sequence u(y.size());
  for (std::size_t t = 0; t < y.size(); ++t) {
    EvalInputs in;
    in.var = [&](int, int lag) {
      const long s = static_cast<long>(t) - lag;
      return s < 0 ? 0 : y[static_cast<std::size_t>(s)];
    };
    in.own = [&](int lag) {
      const long s = static_cast<long>(t) - lag;
      return s < 0 ? 0 : u[static_cast<std::size_t>(s)];
    };
    in.zeta = rule.zeta.sample(rng);
    in.modulus = alphabet;
    u[t] = evaluate(rule.expression, in);
  }
  return u;
}

using detail::Overloaded;

Sequence apply_corruption(std::span<const int> y, const Corruption& c, int alphabet, Rng& rng) {
  return std::visit(Overloaded{
                        [&](const NoCorruption&) { return Sequence(y.begin(), y.end()); },
                        [&](const RandomDelay& d) { return apply_delay(y, d.d1, d.d2, d.p, rng); },
                        [&](const PacketDrop& d) { return apply_packet_drop(y, d.p, rng); },
                        [&](const NoisyFilter& f) { return apply_noisy_filter(y, f, alphabet, rng); },
                        [&](const CustomTable& r) { return apply_custom(y, r, alphabet, rng); },
                    },
                    c);
}

void write_trajectories_csv(std::ostream& os, const TrajectorySet& traj) {
  std::vector<const Sequence*> columns;
  bool first = true;
  auto header = [&](const std::string& name, const Sequence& s) {
    os << (first ? "" : ",") << name;
    first = false;
    columns.push_back(&s);
  };
  for (int k = 0; k < traj.agent_count(); ++k) header("y" + std::to_string(k + 1), traj.y[static_cast<std::size_t>(k)]);
  for (int k = 0; k < traj.agent_count(); ++k)
    if (traj.u[static_cast<std::size_t>(k)]) header("u" + std::to_string(k + 1), *traj.u[static_cast<std::size_t>(k)]);
  os << '\n';
  const std::size_t length = traj.y.empty() ? 0 : traj.y.front().size();
  for (std::size_t t = 0; t < length; ++t) {
    for (std::size_t c = 0; c < columns.size(); ++c) os << (c ? "," : "") << (*columns[c])[t];
    os << '\n';
  }
}

TrajectorySet read_trajectories_csv(std::istream& is, const std::vector<int>& alphabets) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("trajectory CSV is empty");
  std::vector<std::pair<char, int>> columns;
  int agents = 0;
  {
    std::stringstream ss(line);
    std::string name;
    while (std::getline(ss, name, ',')) {
      while (!name.empty() && (name.back() == '\r' || name.back() == ' ')) name.pop_back();
      if (name.size() < 2 || (name[0] != 'y' && name[0] != 'u'))
        throw std::runtime_error("unexpected CSV column '" + name + "'");
      const int k = std::stoi(name.substr(1)) - 1;
      if (k < 0) throw std::runtime_error("bad CSV column '" + name + "'");
      columns.emplace_back(name[0], k);
      if (name[0] == 'y') agents = std::max(agents, k + 1);
    }
  }
  TrajectorySet traj;
  traj.y.resize(static_cast<std::size_t>(agents));
  traj.u.resize(static_cast<std::size_t>(agents));
  std::vector<Sequence*> target;
  for (const auto& [kind, k] : columns) {
    if (k >= agents) throw std::runtime_error("u column without matching y column");
    if (kind == 'y') {
      target.push_back(&traj.y[static_cast<std::size_t>(k)]);
    } else {
      traj.u[static_cast<std::size_t>(k)].emplace();
      target.push_back(&*traj.u[static_cast<std::size_t>(k)]);
    }
  }
  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t c = 0;
    while (std::getline(ss, cell, ',')) {
      if (c >= target.size()) throw std::runtime_error("too many cells on CSV row " + std::to_string(row));
      const int v = std::stoi(cell);
      if (v < 0) throw std::runtime_error("negative symbol on CSV row " + std::to_string(row));
      target[c++]->push_back(v);
    }
    if (c != target.size()) throw std::runtime_error("too few cells on CSV row " + std::to_string(row));
  }
  if (traj.y.empty() || traj.y.front().size() < 2) throw std::runtime_error("trajectory CSV has fewer than 2 rows");
  traj.horizon = static_cast<int>(traj.y.front().size()) - 1;
  traj.alphabets.assign(static_cast<std::size_t>(agents), 2);
  for (int k = 0; k < agents; ++k) {
    int m = 0;
    for (int v : traj.y[static_cast<std::size_t>(k)]) m = std::max(m, v);
    if (traj.u[static_cast<std::size_t>(k)])
      for (int v : *traj.u[static_cast<std::size_t>(k)]) m = std::max(m, v);
    traj.alphabets[static_cast<std::size_t>(k)] = std::max(2, m + 1);
  }
  if (!alphabets.empty()) {
    if (static_cast<int>(alphabets.size()) != agents) throw std::runtime_error("alphabet list does not match CSV");
    for (int k = 0; k < agents; ++k)
      if (traj.alphabets[static_cast<std::size_t>(k)] > alphabets[static_cast<std::size_t>(k)])
        throw std::runtime_error("CSV symbols exceed the alphabet of agent " + std::to_string(k + 1));
    traj.alphabets = alphabets;
  }
  return traj;
}

}  // namespace dirnet
