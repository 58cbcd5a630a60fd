#pragma once
// Experiment configuration shared by all CLI subcommands.  Every field is
// validated before any simulation starts; validation collects ALL errors
// rather than stopping at the first.  The canonicalized config hashes to a
// digest carried by every CSV row, so each row can be reproduced in
// isolation.

#include <cstdint>
#include <string>
#include <vector>

namespace timerobust {

struct ExperimentConfig {
  std::string subcommand;  // risk | supermartingale-check | adversary-demo |
                           // dilemma | selftest
  std::string family_id = "gaussian";
  std::string estimator_id = "mle";
  std::string rule_id;  // empty = no rule
  std::string rate_id = "f_loglog";
  // standard | weak | strong | bayes; empty = inferred (rule -> weak,
  // horizon -> strong, n -> standard).
  std::string functional;
  std::vector<double> mu_grid = {0.0};
  std::vector<std::int64_t> n_list;        // standard-risk sample sizes
  std::vector<std::int64_t> horizon_list;  // strong-risk horizons
  std::vector<std::int64_t> checkpoints = {1, 10, 100, 1000,
                                           10000};  // supermartingale-check
  std::vector<std::int64_t> n_grid = {100, 1000, 10000};  // dilemma
  std::string selector_id = "bic";
  double mu0 = 0.0;
  double prior_sd = 1.0;
  double c0 = 0.0;  // 0 = family default for supermartingale-check
  std::int64_t reps = 10000;
  std::uint64_t seed = 1;
  int workers = 1;
  std::string out_path;
  std::string plot_path;
  std::string dump_path;
};

// Returns the full list of validation errors (empty = valid).
std::vector<std::string> validate_config(const ExperimentConfig& cfg);

// Resolved functional after inference; call on a validated config.
std::string effective_functional(const ExperimentConfig& cfg);

// Stable canonical form and its FNV-1a hash (16 hex chars).
std::string canonical_config(const ExperimentConfig& cfg);
std::string config_digest(const ExperimentConfig& cfg);

// Deterministic shortest-unambiguous double formatting used everywhere a
// number is printed (CSV cells, manifests): %.17g.
std::string fmt_double(double v);

}  // namespace timerobust
