#ifndef DIRNET_SIM_HPP
#define DIRNET_SIM_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dirnet/model.hpp"
#include "dirnet/rng.hpp"

namespace dirnet {

using Sequence = std::vector<int>;

/// Sampled y streams for every agent and u streams for corrupted agents,
/// each of length horizon + 1.
struct TrajectorySet {
  int horizon = 0;
  std::vector<Sequence> y;
  std::vector<std::optional<Sequence>> u;
  std::vector<int> alphabets;
  std::uint64_t seed = 0;

  int agent_count() const { return static_cast<int>(y.size()); }
  /// w_i: u_i when agent i is corrupted, y_i otherwise.
  const Sequence& measured(int agent) const;
  std::vector<Sequence> measured_streams() const;
};

/// Evaluates the generative model for given noise draws noise[i][t],
/// t = 0..horizon. y_i[0] = noise[i][0]; later steps apply f_i.
std::vector<Sequence> simulate_ideal(const GenerativeNetwork& net, const std::vector<Sequence>& noise);

/// Full sampler: independent noise stream per agent and per corruption.
/// Identical arguments give identical output.
TrajectorySet sample(const GenerativeNetwork& net, const CorruptionSpec& corr, int horizon, std::uint64_t seed);

/// RNG stream ids used by `sample`.
inline std::uint64_t noise_stream_id(int agent) { return 2 * static_cast<std::uint64_t>(agent); }
inline std::uint64_t corruption_stream_id(int agent) { return 2 * static_cast<std::uint64_t>(agent) + 1; }

Sequence apply_delay(std::span<const int> y, int d1, int d2, double p, Rng& rng);
Sequence apply_packet_drop(std::span<const int> y, double p, Rng& rng);
Sequence apply_noisy_filter(std::span<const int> y, const NoisyFilter& filter, int alphabet, Rng& rng);
Sequence apply_custom(std::span<const int> y, const CustomTable& rule, int alphabet, Rng& rng);
/// Dispatches on the corruption kind; NoCorruption returns y unchanged.
Sequence apply_corruption(std::span<const int> y, const Corruption& c, int alphabet, Rng& rng);

/// CSV with a header row `y1,...,yN,u_k...` and one row per time step.
void write_trajectories_csv(std::ostream& os, const TrajectorySet& traj);
/// Reads the format written above. Alphabets are taken as max symbol + 1
/// (at least 2) unless `alphabets` is given.
TrajectorySet read_trajectories_csv(std::istream& is, const std::vector<int>& alphabets = {});

}  // namespace dirnet

#endif  // DIRNET_SIM_HPP
