#pragma once
// Exponential families in mean-value parametrization.
//
// A family is described by its sufficient statistic phi, the mean parameter
// mu = E[phi(X)], and two envelope constants (sigma, delta) such that
//
//     E[ exp(eta . (phi(X) - mu)) ] <= exp(sigma * |eta|^2 / 2)
//
// for all ||eta||^2 <= delta and mu in the working parameter box M.  The
// Gaussian location family satisfies this with sigma = 1 and any delta;
// for Bernoulli the constant is the Fisher-information sup over a slightly
// enlarged canonical parameter set (sigma_of below).  The MLE of the mean
// parameter is the average of sufficient statistics and always lies in the
// closure of the mean-parameter space.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "timerobust/rng.hpp"

namespace timerobust {

// A simulated path stored as sufficient-statistic values, row-major:
// phi(x_t) occupies entries [t*k, (t+1)*k).
struct Trajectory {
  int k = 1;
  std::int64_t n = 0;
  std::vector<double> phi;

  const double* row(std::int64_t t) const { return phi.data() + t * k; }
};

struct FamilySpec {
  std::string name;
  int k = 1;
  double sigma = 1.0;
  double delta = 1.0;
  // Working mean-parameter box M, one [lo, hi] per coordinate.  Estimates
  // live in the closure of the full mean space and are not projected to M.
  std::vector<std::array<double, 2>> box;

  // Draws one raw observation (written as k doubles).
  void (*sample)(const FamilySpec&, const double* mu, Rng&, double* out) =
      nullptr;
  // Sufficient statistic phi; in == out is allowed.  Identity for all
  // built-in families.
  void (*suff_stat)(const FamilySpec&, const double* obs, double* out) =
      nullptr;
  // Canonical-scale Fisher information (scalar families).
  double (*fisher_canonical)(double theta) = nullptr;
  // Mean link mu(theta) and its inverse theta(mu) (scalar families).
  double (*mean_link)(double theta) = nullptr;
  double (*canonical_of_mean)(double mu) = nullptr;
  // log E[exp(eta.(phi-mu))] in closed form, when available.
  bool has_closed_mgf = false;
  double (*log_mgf_centered)(const FamilySpec&, const double* mu,
                             const double* eta) = nullptr;

  bool mu_in_box(const double* mu) const;
};

FamilySpec make_gaussian();
FamilySpec make_bernoulli();
// Independent N(mu_j, 1) coordinates; exercises the k > 1 mixture.
FamilySpec make_gaussian_prod(int k);

// Resolves "gaussian", "bernoulli", "gaussian_prod:<k>".
FamilySpec family_by_name(const std::string& id);

// Draws phi(x_1..x_n) under mu using the stream (master_seed, stream_index).
Trajectory sample_path(const FamilySpec& fam, const std::vector<double>& mu,
                       std::int64_t n, std::uint64_t master_seed,
                       std::uint64_t stream_index = 0);

// Convenience for simulation loops: draw one observation and write phi.
inline void sample_phi(const FamilySpec& fam, const double* mu, Rng& rng,
                       double* out) {
  fam.sample(fam, mu, rng, out);
  fam.suff_stat(fam, out, out);
}

struct EnvelopeResult {
  double estimate = 0.0;  // E[exp(eta.(phi-mu))], closed form or MC
  double bound = 0.0;     // exp(sigma |eta|^2 / 2)
  double rel_se = 0.0;    // MC relative standard error (0 for closed form)
  bool pass = false;
};

// Checks the envelope at one (mu, eta).  Throws if ||eta||^2 > delta or
// mu is outside M.  reps = 0 evaluates the closed-form mgf (throws if the
// family has none); reps >= 2 uses a seeded Monte Carlo average instead,
// which also works as an empirical cross-check of the closed form.
EnvelopeResult envelope_check(const FamilySpec& fam,
                              const std::vector<double>& mu,
                              const std::vector<double>& eta,
                              std::int64_t reps = 0, std::uint64_t seed = 1);

// Sup of the Fisher information over the canonical image of M enlarged by
// radius sqrt(delta) (the radius of the eta-ball {||eta||^2 <= delta}).
// Grid search with successive refinement until the relative change drops
// below 1%.  base is "gaussian" or "bernoulli".
double sigma_of(const std::string& base, std::array<double, 2> M,
                double delta);

}  // namespace timerobust
