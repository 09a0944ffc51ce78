#include <doctest.h>

#include <cmath>

#include "dirnet/config.hpp"
#include "dirnet/estimator.hpp"
#include "dirnet/exact_chain.hpp"
#include "dirnet/sim.hpp"
#include "support.hpp"

using namespace dirnet;
using testing_support::h2;

namespace {

StreamView view(const std::vector<int>& s, int alphabet = 2) { return {s, alphabet}; }

struct Pair {
  std::vector<int> x, y;
};

Pair binary_channel(std::size_t n, double flip, std::uint64_t seed) {
  Rng rng(seed);
  Pair p{std::vector<int>(n), std::vector<int>(n)};
  for (std::size_t t = 0; t < n; ++t) {
    p.x[t] = rng.bernoulli(0.5);
    p.y[t] = (t ? p.x[t - 1] : 0) ^ rng.bernoulli(flip);
  }
  return p;
}

// Three-process chain X -> Y -> W with unit lags, X iid.
std::vector<std::vector<int>> relay(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<int>> s(3, std::vector<int>(n));
  for (std::size_t t = 0; t < n; ++t) {
    s[0][t] = rng.bernoulli(0.5);
    s[1][t] = (t ? s[0][t - 1] : 0) ^ rng.bernoulli(0.1);
    s[2][t] = (t ? s[1][t - 1] : 0) ^ rng.bernoulli(0.2);
  }
  return s;
}

ExactChainSpec two_state(double a, double b) {
  ExactChainSpec spec;
  spec.state_count = 2;
  spec.transition = {1 - a, a, b, 1 - b};
  spec.initial = {0.5, 0.5};
  spec.emissions = {{0, 1}};
  spec.alphabets = {2};
  return spec;
}

}  // namespace

TEST_CASE("independent fair coins carry no directed information") {
  Rng rng(1);
  std::vector<int> x(100000), y(100000);
  for (auto& v : x) v = rng.bernoulli(0.5);
  for (auto& v : y) v = rng.bernoulli(0.5);
  const DirEstimate est = estimate_dir(view(x), view(y), 2);
  CHECK(std::abs(est.final_rate) <= 0.01);
  CHECK(est.final_rate >= -1e-6);
  CHECK(est.sample_count == 99999);
}

TEST_CASE("binary channel rate") {
  const Pair p = binary_channel(100001, 0.1, 2);
  const DirEstimate est = estimate_dir(view(p.x), view(p.y), 2);
  CHECK(std::abs(est.final_rate - (1 - h2(0.1))) <= 0.02);
  CHECK(1 - h2(0.1) == doctest::Approx(0.5310).epsilon(1e-3));
  // The reverse direction is empty.
  CHECK(estimate_dir(view(p.y), view(p.x), 2).final_rate < 0.01);
}

TEST_CASE("a stream carries no extra information about itself") {
  Rng rng(3);
  std::vector<int> x(100000);
  for (auto& v : x) v = rng.bernoulli(0.5);
  CHECK(std::abs(estimate_dir(view(x), view(x), 2).final_rate) < 0.01);

  // Oracle on the duplicated-stream chain.
  ExactChainSpec dup;
  dup.state_count = 2;
  dup.transition = {0.5, 0.5, 0.5, 0.5};
  dup.initial = {0.5, 0.5};
  dup.emissions = {{0, 1}, {0, 1}};
  dup.alphabets = {2, 2};
  CHECK(std::abs(brute_force_dir(dup, 0, 1, {})) < 1e-12);
}

TEST_CASE("empty conditioning reproduces the pairwise estimate exactly") {
  const Pair p = binary_channel(5000, 0.2, 4);
  const DirEstimate a = estimate_dir(view(p.x), view(p.y), 2);
  const DirEstimate b = estimate_conditional_dir(view(p.x), view(p.y), {}, 2);
  CHECK(a.step_terms == b.step_terms);
  CHECK(a.rate_trajectory == b.rate_trajectory);
  CHECK(a.final_rate == b.final_rate);
}

TEST_CASE("ideal collider streams show the true edge") {
  const ExperimentConfig cfg = load_config(std::string(DIRNET_SOURCE_DIR) + "/configs/fig4_ideal.cfg");
  const TrajectorySet traj = sample(cfg.net(), cfg.corruption, 10000, 31);
  const DirEstimate est = estimate_conditional_dir(view(traj.y[0]), view(traj.y[1]), {view(traj.y[2])}, 2);
  CHECK(est.final_rate > 0.01);
  CHECK(threshold_decision(est, 0.01));
}

TEST_CASE("conditioning on the relay removes the indirect path") {
  const auto s = relay(100001, 5);
  CHECK(estimate_conditional_dir(view(s[0]), view(s[2]), {view(s[1])}, 2).final_rate <= 0.01);
  // Without the relay the lag-two dependence is visible.
  CHECK(estimate_dir(view(s[0]), view(s[2]), 2).final_rate > 0.1);
}

TEST_CASE("conditioning on the source itself drives the estimate to zero") {
  const Pair p = binary_channel(100001, 0.1, 6);
  CHECK(estimate_conditional_dir(view(p.x), view(p.y), {view(p.x)}, 2).final_rate <= 0.01);
}

TEST_CASE("running average bookkeeping") {
  const auto s = relay(3000, 7);
  const DirEstimate est = estimate_conditional_dir(view(s[1]), view(s[2]), {view(s[0])}, 2);
  REQUIRE(est.step_terms.size() == 2999);
  REQUIRE(est.rate_trajectory.size() == 2999);
  for (std::size_t n = 2; n <= est.rate_trajectory.size(); ++n) {
    const double term = est.rate_at(n) * static_cast<double>(n) - est.rate_at(n - 1) * static_cast<double>(n - 1);
    CHECK(term == doctest::Approx(est.step_terms[n - 1]).epsilon(1e-10).scale(1.0));
  }
  CHECK(est.final_rate == est.rate_trajectory.back());
  for (double v : est.step_terms) CHECK(v >= -1e-12);
}

TEST_CASE("threshold decisions") {
  DirEstimate est;
  est.final_rate = 0.0005;
  CHECK_FALSE(threshold_decision(est, 0.01));
  est.final_rate = 0.2;
  CHECK(threshold_decision(est, 0.01));
  CHECK_THROWS(threshold_decision(est, 0.0));
}

TEST_CASE("shuffled-source threshold sits near zero for an independent pair") {
  Rng rng(8);
  std::vector<int> x(5000), y(5000);
  for (auto& v : x) v = rng.bernoulli(0.5);
  for (auto& v : y) v = rng.bernoulli(0.3);
  Rng shuffle(9);
  const double tau = surrogate_threshold(view(x), view(y), {}, 2, 20, 0.95, shuffle);
  CHECK(tau > 0.0);
  CHECK(tau < 0.01);
}

TEST_CASE("malformed estimator input") {
  const std::vector<int> a{0, 1, 0}, b{0, 1}, c{0, 2, 1};
  CHECK_THROWS_AS(estimate_dir(view(a), view(b), 2), EstimationError);
  // Symbol 2 in a binary stream.
  CHECK_THROWS_AS(estimate_dir(view(a), view(c), 2), EstimationError);
  const std::vector<int> single{0};
  CHECK_THROWS_AS(estimate_dir(view(single), view(single), 1), EstimationError);
  CHECK_THROWS_AS(estimate_dir(view(a), view(a), -1), EstimationError);
}

TEST_CASE("exact chain validation") {
  CHECK_NOTHROW(validate(two_state(0.3, 0.4)));
  CHECK_THROWS_AS(validate(two_state(1.0, 1.0)), ChainError);  // periodic
  ExactChainSpec reducible = two_state(0.0, 0.4);
  CHECK_THROWS_AS(validate(reducible), ChainError);
  ExactChainSpec bad = two_state(0.3, 0.4);
  bad.transition[0] = 0.8;
  CHECK_THROWS_AS(validate(bad), ChainError);
  bad = two_state(0.3, 0.4);
  bad.emissions[0][1] = 2;
  CHECK_THROWS_AS(validate(bad), ChainError);

  const std::vector<double> pi = stationary_distribution(two_state(0.3, 0.1));
  CHECK(pi[0] == doctest::Approx(0.25).epsilon(1e-10));
  CHECK(pi[1] == doctest::Approx(0.75).epsilon(1e-10));
  // H(X[t] | X[t-1]) of the same chain.
  CHECK(conditional_entropy(two_state(0.3, 0.1), 0, {0}, 1) ==
        doctest::Approx(0.25 * h2(0.3) + 0.75 * h2(0.1)).epsilon(1e-10));
  CHECK(conditional_entropy(two_state(0.3, 0.1), 0, {}, 1) == doctest::Approx(h2(0.25)).epsilon(1e-10));
}

TEST_CASE("sampled chains follow the transition law") {
  const ExactChainSpec spec = two_state(0.3, 0.1);
  const auto s = sample_chain(spec, 100000, 10);
  REQUIRE(s.size() == 1);
  int ones = 0;
  for (int v : s[0]) ones += v;
  CHECK(std::abs(ones / 100000.0 - 0.75) < 0.02);
}

TEST_CASE("oracle battery: sufficient order and closed forms") {
  for (const auto& c : testing_support::chain_battery()) {
    INFO(c.name);
    REQUIRE_NOTHROW(validate(c.spec));
    const int k = c.spec.sufficient_order;
    const double at_k = brute_force_dir(c.spec, c.source, c.target, c.cond);
    const double at_next = brute_force_dir(c.spec, c.source, c.target, c.cond, k + 1);
    CHECK(at_k >= -1e-12);
    // Past the sufficient order further history changes nothing that matters
    // at the estimator's tolerance.
    CHECK(std::abs(at_k - at_next) < 1e-3);
    if (!std::isnan(c.closed_form)) CHECK(std::abs(at_k - c.closed_form) < 1e-9);
  }
}

TEST_CASE("estimator converges to the oracle on the packet-dropped source") {
  const auto battery = testing_support::chain_battery();
  const auto it = std::find_if(battery.begin(), battery.end(),
                               [](const auto& c) { return c.name == "packet-dropped iid source"; });
  REQUIRE(it != battery.end());
  const auto s = sample_chain(it->spec, 100001, 11);
  const double est = estimate_dir(view(s[0]), view(s[1]), 2).final_rate;
  CHECK(std::abs(est - brute_force_dir(it->spec, 0, 1, {})) <= 0.02);
}
