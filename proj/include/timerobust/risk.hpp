#pragma once
// Monte Carlo estimation of the risk functionals.
//
//   standard:  E[ ||mu - est_n||^2 / rate(n) ]            (fixed n)
//   weak:      E[ ||mu - est_tau||^2 / rate(tau) ]        (stopping rule)
//   strong:    E[ max_{n <= N} ||mu - est_n||^2 / g(n) ]  (retrospective sup)
//   bayes:     mu* ~ N(0, prior_sd^2) drawn per replication, then the weak
//              functional under mu* (tower rule over the prior).
//
// Replication r draws from the stream (master_seed, r), so results are
// independent of worker count and a longer horizon replays the same
// prefix.  Per-replication losses are folded into fixed 4096-replication
// blocks (Welford within a block, blocks merged in index order), which
// makes the reported statistics bit-identical for any --workers value.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "timerobust/adversaries.hpp"
#include "timerobust/estimators.hpp"
#include "timerobust/family.hpp"
#include "timerobust/numeric.hpp"
#include "timerobust/rates.hpp"

namespace timerobust {

struct RiskEstimate {
  double mean = 0.0;
  double se = 0.0;
  // Mean over replications whose rule actually triggered; equals mean for
  // functionals without a rule (every replication counts as triggered).
  double conditional_mean = 0.0;
  double mean_tau = 0.0;
  std::int64_t reps = 0;
  std::int64_t cap_hits = 0;
  std::int64_t triggered = 0;
  std::int64_t nonfinite = 0;  // replications with a non-finite loss
  std::uint64_t seed = 0;
  std::string config_digest;
};

// Per-replication record retained only when a dump sink is supplied.
struct RepOutcome {
  double loss = 0.0;
  std::int64_t tau = 0;
  bool triggered = false;
  bool cap = false;
};

RiskEstimate standard_risk(const FamilySpec& fam, const std::vector<double>& mu,
                           const EstimatorKind& estimator, RateFn rate,
                           std::int64_t n, std::int64_t reps,
                           std::uint64_t seed, int workers = 1,
                           std::vector<RepOutcome>* dump = nullptr);

RiskEstimate weak_risk(const FamilySpec& fam, const std::vector<double>& mu,
                       const EstimatorKind& estimator, const RuleSpec& rule,
                       RateFn rate, std::int64_t reps, std::uint64_t seed,
                       int workers = 1, std::vector<RepOutcome>* dump = nullptr);

RiskEstimate strong_risk(const FamilySpec& fam, const std::vector<double>& mu,
                         const EstimatorKind& estimator, RateFn g,
                         std::int64_t N, std::int64_t reps, std::uint64_t seed,
                         int workers = 1,
                         std::vector<RepOutcome>* dump = nullptr);

// One pass over the largest horizon with the running sup checkpointed at
// each N in ns (ascending); estimates are nested on shared seeds, so the
// means are non-decreasing by construction.
std::vector<RiskEstimate> strong_risk_multi(const FamilySpec& fam,
                                            const std::vector<double>& mu,
                                            const EstimatorKind& estimator,
                                            RateFn g,
                                            const std::vector<std::int64_t>& ns,
                                            std::int64_t reps,
                                            std::uint64_t seed,
                                            int workers = 1);

RiskEstimate bayes_risk(const FamilySpec& fam, double prior_sd,
                        const EstimatorKind& estimator, const RuleSpec& rule,
                        RateFn rate, std::int64_t reps, std::uint64_t seed,
                        int workers = 1,
                        std::vector<RepOutcome>* dump = nullptr);

struct SweepResult {
  std::vector<RiskEstimate> estimates;  // one per grid point
  std::size_t argmax = 0;               // index of the largest mean
};

// Runs the given functional at each grid value with an independent seed
// stream derived from (master_seed, point index).
SweepResult mu_sweep(const std::vector<double>& mu_grid,
                     std::uint64_t master_seed,
                     const std::function<RiskEstimate(double mu,
                                                      std::uint64_t seed)>& op);

// Generic block-parallel replication drivers (shared by the risk
// functionals, the selection module, and the CLI data emitters).
//
// Scalar driver: sim(rep_index, rng) -> RepOutcome.
RiskEstimate run_replications(
    std::int64_t reps, std::uint64_t seed, int workers,
    const std::function<RepOutcome(std::int64_t, Rng&)>& sim,
    std::vector<RepOutcome>* dump = nullptr);

// Vector driver: sim(rep_index, rng, out[ns]); returns per-statistic
// pooled stats plus the count of replications with any non-finite entry.
struct VectorStats {
  std::vector<RunningStats> stats;
  std::int64_t nonfinite = 0;
};
VectorStats run_replications_vector(
    std::int64_t reps, std::uint64_t seed, int workers, int ns,
    const std::function<void(std::int64_t, Rng&, double*)>& sim);

}  // namespace timerobust
