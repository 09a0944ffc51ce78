#include "dirnet/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dirnet/ctw.hpp"

namespace dirnet {

namespace {

void check_stream(const StreamView& s, std::size_t length, const char* what) {
  if (s.symbols.size() != length)
    throw EstimationError(std::string(what) + " stream length " + std::to_string(s.symbols.size()) +
                          " differs from " + std::to_string(length));
  if (s.alphabet < 1) throw EstimationError(std::string(what) + " alphabet must be positive");
  for (int v : s.symbols)
    if (v < 0 || v >= s.alphabet)
      throw EstimationError(std::string(what) + " stream has symbol " + std::to_string(v) + " outside alphabet " +
                            std::to_string(s.alphabet));
}

JointContext make_context(const std::vector<StreamView>& streams) {
  std::vector<std::span<const int>> spans;
  std::vector<int> alphabets;
  for (const auto& s : streams) {
    spans.push_back(s.symbols);
    alphabets.push_back(s.alphabet);
  }
  return JointContext(spans, alphabets);
}

}  // namespace

DirEstimate estimate_conditional_dir(StreamView x, StreamView y, const std::vector<StreamView>& cond, int depth) {
  if (depth < 0) throw EstimationError("depth must be non-negative");
  const std::size_t length = y.symbols.size();
  if (length < 2) throw EstimationError("need at least two samples");
  check_stream(y, length, "target");
  check_stream(x, length, "source");
  for (const auto& z : cond) check_stream(z, length, "conditioning");
  if (y.alphabet < 2) throw EstimationError("target alphabet needs at least 2 symbols");

  std::vector<StreamView> reduced_streams{y};
  reduced_streams.insert(reduced_streams.end(), cond.begin(), cond.end());
  std::vector<StreamView> full_streams{x};
  full_streams.insert(full_streams.end(), reduced_streams.begin(), reduced_streams.end());

  const JointContext full_ctx = make_context(full_streams);
  const JointContext reduced_ctx = make_context(reduced_streams);
  ContextTree full(depth, full_ctx.alphabet_size(), y.alphabet);
  ContextTree reduced(depth, reduced_ctx.alphabet_size(), y.alphabet);

  DirEstimate est;
  est.sample_count = length - 1;
  est.step_terms.reserve(est.sample_count);
  est.rate_trajectory.reserve(est.sample_count);

  std::vector<int> cf, cr;
  double sum = 0.0;
  for (std::size_t t = 0; t < length; ++t) {
    full_ctx.context(t, depth, cf);
    reduced_ctx.context(t, depth, cr);
    if (t > 0) {
      const std::vector<double> qf = full.predict(cf);
      const std::vector<double> qr = reduced.predict(cr);
      double term = 0.0;
      for (std::size_t a = 0; a < qf.size(); ++a) term += qf[a] * std::log2(qf[a] / qr[a]);
      if (!std::isfinite(term)) throw EstimationError("non-finite estimate at step " + std::to_string(t));
      sum += term;
      est.step_terms.push_back(term);
      est.rate_trajectory.push_back(sum / static_cast<double>(t));
    }
    const int symbol = y.symbols[t];
    full.update(cf, symbol);
    reduced.update(cr, symbol);
  }
  est.final_rate = est.rate_trajectory.back();
  return est;
}

DirEstimate estimate_dir(StreamView x, StreamView y, int depth) { return estimate_conditional_dir(x, y, {}, depth); }

bool threshold_decision(const DirEstimate& est, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("threshold must be positive");
  return est.final_rate > tau;
}

double surrogate_threshold(StreamView x, StreamView y, const std::vector<StreamView>& cond, int depth,
                           int surrogates, double quantile, Rng& rng) {
  if (surrogates < 1) throw std::invalid_argument("need at least one surrogate");
  if (!(quantile >= 0.0 && quantile <= 1.0)) throw std::invalid_argument("quantile must lie in [0, 1]");
  std::vector<int> shuffled(x.symbols.begin(), x.symbols.end());
  std::vector<double> rates;
  for (int s = 0; s < surrogates; ++s) {
    // Fisher-Yates driven by our own generator so results are portable.
    for (std::size_t k = shuffled.size(); k > 1; --k)
      std::swap(shuffled[k - 1], shuffled[rng.below(k)]);
    rates.push_back(estimate_conditional_dir({shuffled, x.alphabet}, y, cond, depth).final_rate);
  }
  std::sort(rates.begin(), rates.end());
  const auto rank = static_cast<std::size_t>(std::ceil(quantile * static_cast<double>(rates.size())));
  return rates[std::min(rates.size() - 1, rank == 0 ? 0 : rank - 1)];
}

}  // namespace dirnet
