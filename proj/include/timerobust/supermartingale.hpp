#pragma once
// Finite-time law-of-the-iterated-logarithm mixture test supermartingale.
//
// For a family satisfying the (sigma, delta) envelope and the centered sum
// S_n = sum_i (phi(x_i) - mu), the discrete mixture
//
//   Z_n = sum_{i>=1} gamma_i exp(eta_i S_n - n sigma eta_i^2 / 2),
//   gamma_i = 1/(i(i+1)),   eta_i = c0 sqrt(ln(i(i+1)) / e^i),   Z_0 = 1,
//
// is a nonnegative supermartingale with E[Z_n] <= 1; its mirrored version
// Z'_n uses -eta_i.  For dimension k > 1 there is one mixture per sign
// vector rho in P = {rho in {-1,1}^k : rho_1 = 1} (|P| = 2^{k-1}), with
// exponent eta^i T_{n,rho} - n sigma k (eta^i)^2 / 2 where T_{n,rho} =
// rho . S_n; both signs of eta cover all orthants, and
// sum_j |S_j| = max_rho |T_{n,rho}| exactly.
//
// Numerics.  Each mixture value is computed fresh from S_n at every step:
// an exact head (log-sum-exp over i <= h) plus an analytic tail.  The head
// length h is adaptive: at least ceil(ln n) + 8 (so the pivotal index
// floor(ln n) is always summed exactly) and large enough that every tail
// exponent eps_i = eta_i T - n sigma k eta_i^2 / 2 satisfies |eps_i| <=
// 0.02.  The tail sum_{i>h} gamma_i e^{eps_i} is then evaluated by
// expanding e^{eps} to 5th order and contracting against precomputed
// suffix moments H_q(h) = sum_{i>h} gamma_i eta_i^q (q <= 10; H_0(h) =
// 1/(h+1) exactly, which also accounts for every index beyond the table).
// The Taylor remainder is bounded by e^{0.02} 0.02^6/6! < 1e-13 of the
// tail mass, and the tail mass never exceeds ~Z, so the total relative
// error stays below 1e-12.  Doubling the head length therefore moves logZ
// by far less than 1e-9, which the tests assert.

#include <cstdint>
#include <string>
#include <vector>

#include "timerobust/estimators.hpp"
#include "timerobust/family.hpp"
#include "timerobust/numeric.hpp"
#include "timerobust/rates.hpp"

namespace timerobust {

// (gamma_i, eta_i) of the discrete LIL prior; i >= 1.
struct LilPrior {
  double gamma;
  double eta;
};
LilPrior lil_prior(std::int64_t i, double c0);

// Largest admissible c0 for the given envelope: the mixture points must
// satisfy (eta^i)^2 <= delta/k for every i (the max of ln(i(i+1))/e^i is
// ln2/e at i = 1) and c0 < delta/k.
double c0_admissible_sup(int k, double delta);
double default_c0(int k, double delta);  // 0.99 * admissible sup

struct MixtureSpec {
  double c0 = 0.0;
  double sigma = 1.0;
  double delta = 1.0;
  int k = 1;
  int n_rho = 1;  // 2^{k-1}

  // Tables indexed by i = 1..table_size (index 0 unused).
  std::vector<double> eta;        // eta^i
  std::vector<double> log_gamma;  // ln gamma_i
  std::vector<double> a;          // sigma * k * (eta^i)^2 / 2
  // suffix[q][i] = sum_{j > i} gamma_j (eta^j)^q, q = 0..10.
  std::vector<std::vector<double>> suffix;
  int table_size = 0;

  // Exact-head floor: ceil(ln n) + 8.
  int head_floor(std::int64_t n) const;
};

// c0 = 0 selects default_c0(k, delta).  Throws on inadmissible c0.
MixtureSpec make_mixture(int k, double sigma, double delta, double c0 = 0.0);

// One-sided mixture value log Z for scalar projection T at step n, summing
// indices 1..head exactly and the analytic tail beyond.  The mirrored side
// is mixture_logZ(spec, -T, n, head).  Exposed for oracle comparisons.
double mixture_logZ(const MixtureSpec& spec, double T, std::int64_t n,
                    int head);

// Head length satisfying the floor and the |eps| <= 0.02 tail criterion
// for projections up to |T| <= t_abs.
int choose_head(const MixtureSpec& spec, double t_abs, std::int64_t n,
                int at_least);

struct SupermartingaleState {
  const MixtureSpec* spec = nullptr;
  std::int64_t n = 0;
  std::vector<NeumaierSum> s;  // k compensated running sums
  int head = 0;
  // Indexed [rho * 2 + side], side 0: +eta, side 1: -eta.
  std::vector<double> log_z;
  std::vector<double> log_z_sup;  // includes n = 0 (logZ = 0)

  double t_ell1() const;                     // sum_j |S_j| = max_rho |T_rho|
  double t_rho(int rho_index) const;         // rho . S
  double log_z_at(int rho_index, int side) const;
};

void smg_reset(SupermartingaleState& st, const MixtureSpec& spec);

// Advances by one observation: S += phi - mu, then recomputes every
// mixture side at the new n and refreshes the running suprema.
// Throws on non-finite phi.
void z_update(SupermartingaleState& st, const double* phi, const double* mu);

// Current log Z of the primary mixture (rho = (1,..,1), +eta side).
double log_z_plus(const SupermartingaleState& st);

// sup_{m <= n} sqrt(Z_m) / 2 over the primary mixture; >= 1/2 since the
// sup includes Z_0 = 1.  Its expectation under the true mean is <= 1.
double evalue(const SupermartingaleState& st);

// V = 1 / sup_{m <= n} Z_m in (0, 1]; P(V <= alpha) <= alpha under the
// true mean.  Always evalue = 1/(2 sqrt(V)).
double pvalue(const SupermartingaleState& st);

struct LilConstants {
  double c;
  double k1;         // 1.5 + (k+1) ln 2
  double k2;         // 18 sigma k
  double threshold;  // (1/(2c)) (2 K2 c^2 + 3)
};
LilConstants lil_constants(int k, double sigma, double delta);

// Closed-form ceiling for the strongly adversarial risk of the MLE under
// the benchmark rate: 2 c^{-2} e^{K1 + K2 c^2} + c^{-1} (2 K2 c^2 + 3)/2.
double strong_risk_ceiling(int k, double sigma, double delta);

// max_{1 <= n <= N} ||mu - estimate(x^1..x^n)||^2 / g(n), the integrand of
// the strongly adversarial risk.
double strong_sup_ratio(const FamilySpec& fam, const Trajectory& tr,
                        const std::vector<double>& mu,
                        const EstimatorKind& estimator, RateFn g,
                        std::int64_t N);

}  // namespace timerobust
