#pragma once
// Normalizing rate sequences.
//
// The benchmark rate is
//     f(n) = 1                 for n in {1, 2},
//     f(n) = ln(ln n) / n      for n >= 3   (natural logs),
// which is the fastest rate at which any estimator can shrink uniformly
// over data-dependent stopping.  f is not monotone on {2,...,6} (it dips at
// n = 3 and climbs back to a local peak at n = 6) and is non-increasing
// from n = 6 on.  Comparison rates: 1/n (the fixed-sample rate), ln(n)/n,
// and the constant rate 1.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace timerobust {

inline double rate_f_loglog(std::int64_t n) {
  if (n <= 0) throw std::invalid_argument("rate: n must be positive");
  if (n <= 2) return 1.0;
  return std::log(std::log(static_cast<double>(n))) / static_cast<double>(n);
}

inline double rate_1_over_n(std::int64_t n) {
  if (n <= 0) throw std::invalid_argument("rate: n must be positive");
  return 1.0 / static_cast<double>(n);
}

inline double rate_log_over_n(std::int64_t n) {
  if (n <= 0) throw std::invalid_argument("rate: n must be positive");
  if (n == 1) return 1.0;
  return std::log(static_cast<double>(n)) / static_cast<double>(n);
}

inline double rate_one(std::int64_t n) {
  if (n <= 0) throw std::invalid_argument("rate: n must be positive");
  return 1.0;
}

using RateFn = double (*)(std::int64_t);

// Resolves a rate id used in configs and CSV output.
inline RateFn rate_by_name(const std::string& name) {
  if (name == "f_loglog") return &rate_f_loglog;
  if (name == "g_1_over_n") return &rate_1_over_n;
  if (name == "g_log_over_n") return &rate_log_over_n;
  if (name == "one") return &rate_one;
  throw std::invalid_argument(
      "unknown rate id: " + name +
      " (valid: f_loglog g_1_over_n g_log_over_n one)");
}

}  // namespace timerobust
