#pragma once
// Numeric building blocks shared across the library:
//   - NeumaierSum: compensated summation for long partial-sum recursions.
//   - RunningStats: Welford mean/variance with exact pairwise merge, so a
//     sharded Monte Carlo run merged in block order reproduces the serial
//     statistics bit for bit.
//   - log_add_exp and tail probabilities used by tests and selection code.

#include <cmath>
#include <cstdint>
#include <limits>

namespace timerobust {

// Kahan-Babuska (Neumaier) compensated accumulator.
struct NeumaierSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }

  double value() const { return sum + comp; }

  void reset() {
    sum = 0.0;
    comp = 0.0;
  }
};

// Welford online mean/M2.  merge() uses the Chan parallel update; merging
// per-block accumulators in a fixed block order is deterministic regardless
// of how many threads produced them.
struct RunningStats {
  std::int64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void push(double x) {
    ++count;
    const double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
  }

  void merge(const RunningStats& other) {
    if (other.count == 0) return;
    if (count == 0) {
      *this = other;
      return;
    }
    const double na = static_cast<double>(count);
    const double nb = static_cast<double>(other.count);
    const double delta = other.mean - mean;
    const double n = na + nb;
    mean += delta * (nb / n);
    m2 += other.m2 + delta * delta * (na * nb / n);
    count += other.count;
  }

  double variance() const {
    return count > 1 ? m2 / static_cast<double>(count - 1)
                     : std::numeric_limits<double>::quiet_NaN();
  }

  // Standard error of the mean.
  double se() const {
    return count > 1 ? std::sqrt(variance() / static_cast<double>(count))
                     : std::numeric_limits<double>::quiet_NaN();
  }
};

inline double log_add_exp(double a, double b) {
  if (std::isinf(a) && a < 0) return b;
  if (std::isinf(b) && b < 0) return a;
  const double hi = a > b ? a : b;
  const double lo = a > b ? b : a;
  return hi + std::log1p(std::exp(lo - hi));
}

// P(N(0,1) > x).
inline double normal_tail(double x) {
  return 0.5 * std::erfc(x / 1.4142135623730950488016887242097);
}

// P(chi^2_1 > x) = 2 P(N(0,1) > sqrt(x)) = erfc(sqrt(x/2)).
inline double chisq1_tail(double x) {
  if (x <= 0.0) return 1.0;
  return std::erfc(std::sqrt(0.5 * x));
}

}  // namespace timerobust
