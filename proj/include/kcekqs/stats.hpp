#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>

#include "kcekqs/errors.hpp"

namespace kcekqs::stats {

struct Estimate {
  double value = 0.0;
  double std_err = 0.0;
};

enum class StatKind { Bernoulli, Mean };

/// Accumulator for per-trial values in [0, 1].
///
/// Sums are kept in fixed point (2^-60 resolution) so that merging
/// partitions in any order gives bit-identical results.
class TrialStats {
 public:
  explicit TrialStats(StatKind kind = StatKind::Bernoulli) : kind_(kind) {}

  static TrialStats bernoulli(std::uint64_t successes, std::uint64_t n) {
    if (successes > n) throw InvalidArgument("successes exceed trials");
    TrialStats s(StatKind::Bernoulli);
    s.n_ = n;
    s.sum_ = static_cast<Wide>(successes) << kShift;
    s.sum_sq_ = s.sum_;
    return s;
  }

  void add(double x) {
    if (!(x >= -1e-12 && x <= 1.0 + 1e-12)) throw InvalidArgument("trial value outside [0, 1]: " + std::to_string(x));
    x = std::min(1.0, std::max(0.0, x));
    if (kind_ == StatKind::Bernoulli && x != 0.0 && x != 1.0) {
      throw InvalidArgument("Bernoulli statistic needs 0/1 values");
    }
    ++n_;
    sum_ += to_fixed(x);
    sum_sq_ += to_fixed(x * x);
  }

  void merge(const TrialStats& other) {
    if (other.kind_ != kind_) throw InvalidArgument("merging statistics of different kinds");
    n_ += other.n_;
    sum_ += other.sum_;
    sum_sq_ += other.sum_sq_;
  }

  StatKind kind() const { return kind_; }
  std::uint64_t n() const { return n_; }
  bool empty() const { return n_ == 0; }

  double estimate() const {
    require_nonempty();
    return from_fixed(sum_) / static_cast<double>(n_);
  }

  double std_err() const {
    require_nonempty();
    const double p = estimate();
    const double n = static_cast<double>(n_);
    if (kind_ == StatKind::Bernoulli) return std::sqrt(std::max(0.0, p * (1.0 - p)) / n);
    if (n_ < 2) return 0.0;
    const double var = (from_fixed(sum_sq_) / n - p * p) * n / (n - 1.0);
    return std::sqrt(std::max(0.0, var) / n);
  }

  std::pair<double, double> ci95() const {
    const double p = estimate();
    const double h = 1.959963984540054 * std_err();
    return {p - h, p + h};
  }

  Estimate as_estimate() const { return {estimate(), std_err()}; }

  bool operator==(const TrialStats&) const = default;

 private:
  using Wide = unsigned __int128;
  static constexpr int kShift = 60;

  static Wide to_fixed(double x) {
    return static_cast<Wide>(std::llround(std::ldexp(x, kShift)));
  }
  static double from_fixed(Wide v) {
    const auto hi = static_cast<std::uint64_t>(v >> 64);
    const auto lo = static_cast<std::uint64_t>(v);
    return std::ldexp(static_cast<double>(hi), 64 - kShift) + std::ldexp(static_cast<double>(lo), -kShift);
  }
  void require_nonempty() const {
    if (n_ == 0) throw StateError("statistics are empty");
  }

  StatKind kind_;
  std::uint64_t n_ = 0;
  Wide sum_ = 0;
  Wide sum_sq_ = 0;
};

}  // namespace kcekqs::stats
