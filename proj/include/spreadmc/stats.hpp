#pragma once

#include <cmath>
#include <cstdint>

#include "spreadmc/types.hpp"

namespace spreadmc {

inline constexpr double kZ95 = 1.959963984540054;

/// Mergeable (sum, sum of squares, count) aggregate. Merging is performed in
/// a fixed batch order by the Monte Carlo runner so results do not depend on
/// the worker count.
struct MomentAccumulator {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::uint64_t count = 0;

  void add(double x) noexcept {
    sum += x;
    sum_sq += x * x;
    ++count;
  }

  void merge(const MomentAccumulator& o) noexcept {
    sum += o.sum;
    sum_sq += o.sum_sq;
    count += o.count;
  }

  double mean() const noexcept {
    return count > 0 ? sum / static_cast<double>(count) : 0.0;
  }

  /// Unbiased sample variance.
  double variance() const noexcept {
    if (count < 2) return 0.0;
    const double n = static_cast<double>(count);
    const double m = sum / n;
    double v = (sum_sq - n * m * m) / (n - 1.0);
    return v > 0.0 ? v : 0.0;
  }

  double std_error() const noexcept {
    return count > 1 ? std::sqrt(variance() / static_cast<double>(count)) : 0.0;
  }
};

inline GreekEstimate make_estimate(const MomentAccumulator& acc,
                                   EstimatorTag tag) {
  GreekEstimate e;
  e.value = acc.mean();
  e.std_err = acc.std_error();
  e.ci_low = e.value - kZ95 * e.std_err;
  e.ci_high = e.value + kZ95 * e.std_err;
  e.n_paths = acc.count;
  e.estimator_tag = tag;
  return e;
}

}  // namespace spreadmc
