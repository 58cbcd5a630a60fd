#pragma once
// Nested model selection for the Gaussian location family:
// M0 = {mu0} versus the full family M1.  The log-likelihood-ratio
// statistic is n * (mle_n - mu0)^2; AIC charges penalty 2, BIC charges
// ln n (n >= 2).  The post-selection estimator reports mu0 under M0 and
// the MLE under M1.  AIC keeps selecting M1 with probability
// P(chi^2_1 > 2) ~ 0.157 under mu = mu0 at every n, while BIC's selection
// probability decays like P(chi^2_1 > ln n); measuring both post-selection
// risks across n exhibits the trade-off between the two.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "timerobust/estimators.hpp"
#include "timerobust/family.hpp"
#include "timerobust/rates.hpp"

namespace timerobust {

enum class Selector { Aic, Bic };

Selector selector_by_name(const std::string& id);  // "aic" | "bic"
std::string selector_name(Selector s);

struct SelectionOutcome {
  bool chose_m1 = false;
  double statistic = 0.0;      // n * (mle - mu0)^2
  double penalty = 0.0;        // 2 for AIC, ln n for BIC
  double post_estimate = 0.0;  // mu0 if M0, mle if M1
};

// Core decisions from the MLE value; n >= 1 for AIC, n >= 2 for BIC.
SelectionOutcome aic_select(double mle_at_n, std::int64_t n, double mu0);
SelectionOutcome bic_select(double mle_at_n, std::int64_t n, double mu0);

// Prefix-based forms matching the estimator call style.
SelectionOutcome select_prefix(Selector s, const FamilySpec& fam,
                               const Trajectory& tr, std::int64_t n,
                               double mu0);

// Streaming post-selection estimator (ids "post_aic" / "post_bic").
// BIC's penalty is undefined at n = 1; the stream reports mu0 there.
std::unique_ptr<EstimatorStream> make_post_selection_stream(Selector s,
                                                            double mu0);

struct DilemmaRow {
  std::string selector;
  double mu = 0.0;
  std::int64_t n = 0;
  double p_select_m1 = 0.0;
  std::string functional;  // "standard" | "strong"
  double risk_mean = 0.0;
  double risk_se = 0.0;
  std::string rate_id;
  std::int64_t reps = 0;
  std::uint64_t seed = 0;  // effective per-cell seed
};

// For each (mu, n) cell: selection frequency at n, the standard risk at n,
// and the strongly adversarial risk over horizon n, all for the
// post-selection estimator under the given rate.  Two rows per cell
// (functional = standard, strong).  Cells use independent seed streams
// derived from (seed, cell index).
std::vector<DilemmaRow> post_selection_risk(Selector s,
                                            const std::vector<double>& mu_grid,
                                            const std::string& rate_id,
                                            const std::vector<std::int64_t>& n_grid,
                                            std::int64_t reps,
                                            std::uint64_t seed,
                                            int workers = 1, double mu0 = 0.0);

}  // namespace timerobust
