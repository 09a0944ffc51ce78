#ifndef DIRNET_CONFIG_HPP
#define DIRNET_CONFIG_HPP

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dirnet/model.hpp"

namespace dirnet {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string file, int line, std::string field, const std::string& message);

  const std::string& file() const { return file_; }
  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::string file_;
  int line_;
  std::string field_;
};

enum class Aggregation { Mean, Vote };

struct ExperimentConfig {
  std::string source;        // path of the config file, for messages
  std::string network_path;  // included network file, if any
  std::shared_ptr<const GenerativeNetwork> network;
  CorruptionSpec corruption;

  int horizon = 10000;
  int trials = 1;
  std::uint64_t seed = 1;
  int depth = 2;
  double threshold = 0.01;
  /// Sample counts at which running rates are reported. Empty means
  /// 10^2, 10^3, ... below the horizon, then the horizon itself.
  std::vector<std::size_t> checkpoints;
  std::string output_dir = "out";
  Aggregation aggregation = Aggregation::Mean;
  std::optional<int> horizon_struct;
  bool calibrate = false;
  int surrogates = 20;
  std::vector<std::string> assumptions;

  const GenerativeNetwork& net() const { return *network; }
  /// Checkpoints after defaults and clamping to the horizon.
  std::vector<std::size_t> checkpoint_schedule() const;
  /// Non-fatal problems, e.g. a horizon short for the context alphabet.
  std::vector<std::string> warnings() const;
  /// Re-checks numeric fields; used after command-line overrides.
  void validate() const;
};

/// Line-oriented format; `#` starts a comment.
///
///   agents 3
///   alphabet 2            (all agents)   |  alphabet y2 4
///   noise e1 bernoulli 0.7 | categorical 0.2 0.3 0.5 | point 1
///   y2 := OR(y1[-1], y3[-1], e2)
///   corrupt u3 delay -2 0 0.5
///   corrupt u3 drop 0.5
///   corrupt u3 filter taps 1/2 1/2 quantize threshold 0.5 [flip 0.1 | additive 0.8 0.2]
///   corrupt u3 custom zeta bernoulli 0.5 := OR(AND(y3, z), u3[-1])
///   network other.net     (path relative to this file)
///   horizon 10000   trials 50   seed 7   depth 2   threshold 0.01
///   checkpoints 100 1000 10000   output out/fig4
///   aggregate mean|vote   horizon_struct 6   calibrate on|off   surrogates 20
///   assume free text recorded in the report
ExperimentConfig parse_config(std::istream& in, const std::string& source, const std::string& base_dir = ".");
ExperimentConfig load_config(const std::string& path);

}  // namespace dirnet

#endif  // DIRNET_CONFIG_HPP
