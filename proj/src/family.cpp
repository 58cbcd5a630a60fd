#include "timerobust/family.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "timerobust/numeric.hpp"

namespace timerobust {

bool FamilySpec::mu_in_box(const double* mu) const {
  for (int j = 0; j < k; ++j) {
    if (!std::isfinite(mu[j]) || mu[j] < box[j][0] || mu[j] > box[j][1])
      return false;
  }
  return true;
}

namespace {

void identity_stat(const FamilySpec& fam, const double* obs, double* out) {
  for (int j = 0; j < fam.k; ++j) out[j] = obs[j];
}

void gaussian_sample(const FamilySpec& fam, const double* mu, Rng& rng,
                     double* out) {
  for (int j = 0; j < fam.k; ++j) out[j] = mu[j] + rng.normal();
}

double gaussian_log_mgf(const FamilySpec& fam, const double*,
                        const double* eta) {
  double s2 = 0.0;
  for (int j = 0; j < fam.k; ++j) s2 += eta[j] * eta[j];
  return 0.5 * s2;
}

void bernoulli_sample(const FamilySpec&, const double* mu, Rng& rng,
                      double* out) {
  out[0] = rng.bernoulli(mu[0]) ? 1.0 : 0.0;
}

double bernoulli_log_mgf(const FamilySpec&, const double* mu,
                         const double* eta) {
  // log E e^{eta(X-mu)} = log((1-p) e^{-eta p} + p e^{eta(1-p)}).
  const double p = mu[0];
  const double e = eta[0];
  return log_add_exp(std::log1p(-p) - e * p, std::log(p) + e * (1.0 - p));
}

double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

}  // namespace

FamilySpec make_gaussian() {
  FamilySpec f;
  f.name = "gaussian";
  f.k = 1;
  f.sigma = 1.0;
  // delta is free for the Gaussian envelope; 9 admits the working eta range
  // [-3, 3] used by the envelope sweep.
  f.delta = 9.0;
  f.box = {{-1e6, 1e6}};
  f.sample = &gaussian_sample;
  f.suff_stat = &identity_stat;
  f.fisher_canonical = [](double) { return 1.0; };
  f.mean_link = [](double t) { return t; };
  f.canonical_of_mean = [](double m) { return m; };
  f.has_closed_mgf = true;
  f.log_mgf_centered = &gaussian_log_mgf;
  return f;
}

FamilySpec make_bernoulli() {
  FamilySpec f;
  f.name = "bernoulli";
  f.k = 1;
  f.delta = 1.0;
  f.box = {{0.01, 0.99}};
  // By Hoeffding's lemma the 1/4 sub-Gaussian constant holds for every eta;
  // it agrees with sigma_of on the default box, which contains p = 1/2.
  f.sigma = 0.25;
  f.sample = &bernoulli_sample;
  f.suff_stat = &identity_stat;
  f.fisher_canonical = [](double t) {
    const double p = sigmoid(t);
    return p * (1.0 - p);
  };
  f.mean_link = &sigmoid;
  f.canonical_of_mean = [](double m) { return std::log(m / (1.0 - m)); };
  f.has_closed_mgf = true;
  f.log_mgf_centered = &bernoulli_log_mgf;
  return f;
}

FamilySpec make_gaussian_prod(int k) {
  if (k < 1) throw std::invalid_argument("gaussian_prod: k must be >= 1");
  FamilySpec f = make_gaussian();
  f.name = "gaussian_prod:" + std::to_string(k);
  f.k = k;
  f.box.assign(static_cast<std::size_t>(k), {-1e6, 1e6});
  return f;
}

FamilySpec family_by_name(const std::string& id) {
  if (id == "gaussian") return make_gaussian();
  if (id == "bernoulli") return make_bernoulli();
  const std::string prod_prefix = "gaussian_prod:";
  if (id.rfind(prod_prefix, 0) == 0) {
    const int k = std::stoi(id.substr(prod_prefix.size()));
    return make_gaussian_prod(k);
  }
  throw std::invalid_argument(
      "unknown family id: " + id +
      " (valid: gaussian, bernoulli, gaussian_prod:<k>)");
}

Trajectory sample_path(const FamilySpec& fam, const std::vector<double>& mu,
                       std::int64_t n, std::uint64_t master_seed,
                       std::uint64_t stream_index) {
  if (static_cast<int>(mu.size()) != fam.k)
    throw std::invalid_argument("sample_path: mu dimension mismatch");
  if (n < 0) throw std::invalid_argument("sample_path: n must be >= 0");
  Trajectory tr;
  tr.k = fam.k;
  tr.n = n;
  tr.phi.resize(static_cast<std::size_t>(n) * fam.k);
  Rng rng(master_seed, stream_index);
  for (std::int64_t t = 0; t < n; ++t)
    sample_phi(fam, mu.data(), rng, tr.phi.data() + t * fam.k);
  return tr;
}

EnvelopeResult envelope_check(const FamilySpec& fam,
                              const std::vector<double>& mu,
                              const std::vector<double>& eta,
                              std::int64_t reps, std::uint64_t seed) {
  if (static_cast<int>(mu.size()) != fam.k ||
      static_cast<int>(eta.size()) != fam.k)
    throw std::invalid_argument("envelope_check: dimension mismatch");
  double eta2 = 0.0;
  for (double e : eta) eta2 += e * e;
  if (eta2 > fam.delta)
    throw std::invalid_argument("envelope_check: ||eta||^2 exceeds delta");
  if (!fam.mu_in_box(mu.data()))
    throw std::invalid_argument("envelope_check: mu outside M");

  EnvelopeResult r;
  r.bound = std::exp(0.5 * fam.sigma * eta2);
  // reps = 0 requests the closed form; reps > 0 forces a Monte Carlo
  // estimate even when a closed form exists (an empirical cross-check).
  if (reps == 0) {
    if (!fam.has_closed_mgf)
      throw std::invalid_argument(
          "envelope_check: family " + fam.name +
          " has no closed-form mgf; pass reps >= 2 for Monte Carlo");
    r.estimate = std::exp(fam.log_mgf_centered(fam, mu.data(), eta.data()));
    r.rel_se = 0.0;
    // The Gaussian case is exactly tight; allow for rounding of exp().
    r.pass = r.estimate <= r.bound * (1.0 + 1e-12);
    return r;
  }
  if (reps < 2)
    throw std::invalid_argument("envelope_check: reps >= 2 required for MC");
  Rng rng(seed, 0);
  std::vector<double> buf(static_cast<std::size_t>(fam.k));
  RunningStats st;
  for (std::int64_t i = 0; i < reps; ++i) {
    sample_phi(fam, mu.data(), rng, buf.data());
    double dot = 0.0;
    for (int j = 0; j < fam.k; ++j) dot += eta[j] * (buf[j] - mu[j]);
    st.push(std::exp(dot));
  }
  r.estimate = st.mean;
  r.rel_se = st.se() / st.mean;
  r.pass = r.estimate <= r.bound * (1.0 + 3.0 * r.rel_se);
  return r;
}

double sigma_of(const std::string& base, std::array<double, 2> M,
                double delta) {
  if (delta <= 0) throw std::invalid_argument("sigma_of: delta must be > 0");
  if (!(M[0] < M[1]))
    throw std::invalid_argument("sigma_of: M must be a nondegenerate box");
  FamilySpec fam;
  if (base == "gaussian") {
    fam = make_gaussian();
  } else if (base == "bernoulli") {
    fam = make_bernoulli();
    if (M[0] <= 0.0 || M[1] >= 1.0)
      throw std::invalid_argument(
          "sigma_of: Bernoulli M must lie strictly inside (0, 1)");
  } else {
    throw std::invalid_argument("sigma_of: unsupported base " + base);
  }
  // Canonical image of M, enlarged by the radius of the eta-ball.
  const double r = std::sqrt(delta);
  double lo = fam.canonical_of_mean(M[0]) - r;
  double hi = fam.canonical_of_mean(M[1]) + r;
  if (!std::isfinite(lo) || !std::isfinite(hi))
    throw std::invalid_argument(
        "sigma_of: enlarged set leaves the canonical domain");

  auto grid_max = [&](int cells) {
    double best = 0.0;
    for (int i = 0; i <= cells; ++i) {
      const double t =
          lo + (hi - lo) * (static_cast<double>(i) / static_cast<double>(cells));
      best = std::max(best, fam.fisher_canonical(t));
    }
    // The built-in scalar families have their only interior stationary
    // point at theta = 0; include it so coarse grids cannot straddle it.
    if (lo < 0.0 && 0.0 < hi) best = std::max(best, fam.fisher_canonical(0.0));
    return best;
  };

  int cells = 32;
  double prev = grid_max(cells);
  for (int iter = 0; iter < 20; ++iter) {
    cells *= 2;
    const double cur = grid_max(cells);
    if (std::abs(cur - prev) <= 0.01 * cur) return cur;
    prev = cur;
  }
  return prev;
}

}  // namespace timerobust
