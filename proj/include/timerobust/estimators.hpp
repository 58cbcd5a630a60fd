#pragma once
// Estimators of the mean parameter: the MLE (running average of sufficient
// statistics), the Gaussian posterior mean under a standard-normal prior
// (exactly (n/(n+1)) * MLE), and the dyadic wrapper that freezes its base
// estimate at the last power of two <= n.  Each estimator declares the
// prefix length p(n) it actually depends on; the dyadic construction has
// p(n) = 2^floor(log2 n), which is what makes it robust to adversarial
// stopping at the price of a constant factor.
//
// Two call styles are provided and agree bit for bit:
//   - streaming (reset / push one phi-row / current), used by the
//     simulation loops, O(1) per step;
//   - batch estimate_prefix on a stored Trajectory, used by tests and by
//     stopping-rule scan oracles (implemented as a stream replay).

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "timerobust/family.hpp"
#include "timerobust/rates.hpp"

namespace timerobust {

class EstimatorStream {
 public:
  virtual ~EstimatorStream() = default;
  // true_mu may be null; only oracle-style estimators read it.
  virtual void reset(const FamilySpec& fam, const double* true_mu) = 0;
  virtual void push(const double* phi) = 0;
  // Estimate after n >= 1 pushes; writes k doubles.
  virtual void current(double* out) const = 0;
};

struct EstimatorKind {
  std::string id;            // canonical identifier, e.g. "dyadic:mle"
  bool needs_true_mu = false;
  std::int64_t (*prefix_len)(std::int64_t n) = nullptr;  // p(n) <= n
  std::unique_ptr<EstimatorStream> (*make_stream)(const EstimatorKind&) =
      nullptr;
  // Parameters of parameterized kinds (const:<v>, offset_*:<c>).
  double param = 0.0;
  std::string base_id;  // for dyadic:<base>
};

// Resolves "mle", "posterior_mean", "dyadic:<base>", "const:<v>",
// "oracle_mu", "offset_mle:<c>", "offset_posterior:<c>", "post_aic",
// "post_bic".  Throws with the list of valid ids on failure.
EstimatorKind estimator_by_name(const std::string& id);
std::vector<std::string> estimator_id_menu();

// Batch entry point: estimate from phi(x_1..x_n), the first n rows of tr.
// Throws on n < 1 (empty prefix) or n > tr.n.
std::vector<double> estimate_prefix(const EstimatorKind& kind,
                                    const FamilySpec& fam,
                                    const Trajectory& tr, std::int64_t n,
                                    const double* true_mu = nullptr);

// Weights pi(j) proportional to (j+1)^{-1-alpha}, normalized over the
// horizon's dyadic blocks j = 0..floor(log2 N); they sum to one there.
std::vector<double> pi_weights(double alpha, std::int64_t horizon_n);
double pi_weight(std::int64_t j, double alpha, std::int64_t horizon_n);

// floor(log2 n) for n >= 1.
inline std::int64_t floor_log2(std::int64_t n) {
  std::int64_t j = 0;
  while ((std::int64_t{2} << j) <= n) ++j;
  return j;
}

}  // namespace timerobust
