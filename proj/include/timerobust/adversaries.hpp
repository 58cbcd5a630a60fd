#pragma once
// Stopping rules played by the weak adversary.  A rule watches the data
// prefix (and, for the rules that model an adversary who knows the truth,
// the true mean) and halts the experiment at a data-dependent time tau.
// All rules are measurable: the decision at n reads only the first n
// observations, so regenerating the suffix never changes tau.  "Almost
// surely finite" is realized by a hard cap; cap hits are counted and
// reported rather than hidden.
//
// Rule menu (string forms in parentheses):
//   fixed_stop(n)                  ("fixed:N") stop at n, always.
//   lil_stop(mu, c, n0, nmax)      ("lil:c,n0,nmax") first n > n0 with
//       (mu - post_mean_n)^2 >= c f(n), else nmax.  Triggers infinitely
//       often as the cap grows, by the law of the iterated logarithm.
//   gap_stop(est, c, n0, nmax)     ("gap:estimator,c,n0,nmax") first
//       n > n0 with (post_mean_n - est_n)^2 >= (c/2) f(n); knows no mu.
//   capped_stop(mu, est, c, n0, n1) ("capped:c,n0,n1") first n in the open
//       interval (n0, n1) where BOTH events above hold, else n1; the
//       estimator it watches is the estimator under test.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "timerobust/estimators.hpp"
#include "timerobust/family.hpp"
#include "timerobust/rates.hpp"

namespace timerobust {

struct RuleSpec {
  enum class Kind { Fixed, Lil, Gap, Capped };
  Kind kind = Kind::Fixed;
  std::string id;  // canonical string form
  double c = 0.1;
  std::int64_t n0 = 27;
  std::int64_t nmax = 100000;  // cap for lil/gap; n1 for capped
  std::int64_t fixed_n = 1;
  std::string gap_estimator_id;

  bool needs_true_mu() const {
    return kind == Kind::Lil || kind == Kind::Capped;
  }
  // The sample-size cap tau can never exceed.
  std::int64_t horizon_cap() const {
    return kind == Kind::Fixed ? fixed_n : nmax;
  }
};

// Parses "fixed:N", "lil:c,n0,nmax", "gap:estimator,c,n0,nmax",
// "capped:c,n0,n1".  lil accepts 1-3 parameters (defaults n0=27,
// nmax=100000).  Throws with the menu on failure.
RuleSpec parse_rule(const std::string& s);
std::vector<std::string> rule_id_menu();

// Per-replication evaluation state of a rule.  true_mu must be finite for
// rules with needs_true_mu(); pass NaN to model withholding it (throws).
class RuleStream {
 public:
  RuleStream(const RuleSpec& spec, const FamilySpec& fam, double true_mu);

  // Feed observation n (1-based call order).  est_under_test is the
  // current estimate of the estimator being evaluated (used by capped).
  // Returns true once stopped; tau() is then set.
  bool push(const double* phi, double est_under_test);

  bool stopped() const { return tau_ > 0; }
  std::int64_t tau() const { return tau_; }
  // The stopping event held at tau (as opposed to hitting the cap).
  bool triggered() const { return triggered_; }
  // tau equals the hard cap.
  bool cap_hit() const { return cap_; }
  // Posterior mean the rule currently sees (NaN for fixed rules); used by
  // demo reporting to re-check the deterministic stop postconditions.
  double post_mean() const;
  // Current value of the gap rule's own estimator (NaN for other kinds).
  double gap_value() const;

 private:
  RuleSpec spec_;
  double mu_ = 0.0;
  std::int64_t n_ = 0;
  std::int64_t tau_ = -1;
  bool triggered_ = false;
  bool cap_ = false;
  std::unique_ptr<EstimatorStream> post_;     // posterior mean
  std::unique_ptr<EstimatorStream> gap_est_;  // gap rule's own estimator
};

}  // namespace timerobust
