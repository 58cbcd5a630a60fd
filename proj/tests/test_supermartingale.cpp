// LIL mixture supermartingale: prior, admissible scales, mixture values
// against independent references, truncation convergence, martingale
// property, e/p-values, and the closed-form constants.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "timerobust/family.hpp"
#include "timerobust/numeric.hpp"
#include "timerobust/risk.hpp"
#include "timerobust/rng.hpp"
#include "timerobust/supermartingale.hpp"

using namespace timerobust;

namespace {

// Independent long-double reference: direct summation of
// gamma_i exp(eta_i T - n a_i) over i <= depth plus the exact telescoped
// remainder sum_{i>depth} gamma_i = 1/(depth+1) (the neglected exponents
// are < 1e-28 for depth >= 150).
double direct_Z(double c0, double sigma, int k, double T, std::int64_t n,
                int depth) {
  long double s = 0.0L;
  for (int i = 1; i <= depth; ++i) {
    const long double ii = static_cast<long double>(i) * (i + 1);
    const long double gamma = 1.0L / ii;
    const long double eta =
        static_cast<long double>(c0) * sqrtl(logl(ii) / expl(i));
    const long double a = sigma * k * eta * eta / 2.0L;
    s += gamma * expl(eta * static_cast<long double>(T) -
                      static_cast<long double>(n) * a);
  }
  s += 1.0L / (depth + 1);
  return static_cast<double>(s);
}

double impl_Z(const MixtureSpec& spec, double T, std::int64_t n) {
  const int h = choose_head(spec, std::fabs(T), n, spec.head_floor(n));
  return std::exp(mixture_logZ(spec, T, n, h));
}

}  // namespace

TEST_SUITE("prior") {
  TEST_CASE("weights and scales") {
    CHECK(lil_prior(1, 1.0).gamma == 0.5);
    CHECK(lil_prior(2, 1.0).gamma == doctest::Approx(1.0 / 6).epsilon(1e-15));
    CHECK(lil_prior(1, 1.0).eta ==
          doctest::Approx(0.5049698975522734).epsilon(1e-14));
    CHECK(lil_prior(1, 2.0).eta ==
          doctest::Approx(2 * 0.5049698975522734).epsilon(1e-14));
    CHECK(lil_prior(60, 1.0).eta < 1e-11);
    CHECK_THROWS_AS(lil_prior(0, 1.0), std::invalid_argument);
  }

  TEST_CASE("weights telescope to 1 - 1/(m+1)") {
    NeumaierSum s;
    for (std::int64_t i = 1; i <= 2000; ++i) s.add(lil_prior(i, 1.0).gamma);
    CHECK(s.value() == doctest::Approx(1.0 - 1.0 / 2001).epsilon(1e-13));
  }
}

TEST_SUITE("admissible scale") {
  TEST_CASE("sup is the smaller of delta/k and the eta constraint") {
    // sqrt((delta/k) e / ln 2) with delta = 9, k = 1.
    CHECK(c0_admissible_sup(1, 9.0) ==
          doctest::Approx(5.940948192242383).epsilon(1e-12));
    // Small delta: the delta/k branch binds (delta/k <= e/ln2 ~ 3.92).
    CHECK(c0_admissible_sup(1, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(c0_admissible_sup(2, 9.0) ==
          doctest::Approx(4.200884753412549).epsilon(1e-12));
    CHECK(default_c0(1, 9.0) ==
          doctest::Approx(5.881538710319959).epsilon(1e-12));
    CHECK(default_c0(2, 9.0) ==
          doctest::Approx(4.158875905878424).epsilon(1e-12));
  }

  TEST_CASE("mixture construction validates its inputs") {
    CHECK(make_mixture(1, 1.0, 9.0).c0 ==
          doctest::Approx(5.881538710319959).epsilon(1e-12));
    CHECK_NOTHROW(make_mixture(1, 1.0, 9.0, c0_admissible_sup(1, 9.0)));
    CHECK_THROWS_AS(make_mixture(1, 1.0, 9.0, 1.001 * c0_admissible_sup(1, 9.0)),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_mixture(1, 1.0, 9.0, -0.5), std::invalid_argument);
    CHECK_THROWS_AS(make_mixture(0, 1.0, 9.0), std::invalid_argument);
    CHECK_THROWS_AS(make_mixture(17, 1.0, 9.0), std::invalid_argument);
    CHECK_THROWS_AS(make_mixture(1, 0.0, 9.0), std::invalid_argument);
    CHECK_THROWS_AS(make_mixture(1, 1.0, 0.0), std::invalid_argument);
  }

  TEST_CASE("tables carry the closed-form zeroth suffix moment") {
    const MixtureSpec spec = make_mixture(3, 0.5, 6.0);
    CHECK(spec.n_rho == 4);
    CHECK(spec.table_size == 192);
    for (int i = 1; i <= spec.table_size; i += 17)
      CHECK(spec.suffix[0][static_cast<std::size_t>(i)] ==
            doctest::Approx(1.0 / (i + 1)).epsilon(1e-15));
    for (int i = 1; i <= 5; ++i)
      CHECK(spec.a[static_cast<std::size_t>(i)] ==
            doctest::Approx(0.5 * 3 * spec.eta[static_cast<std::size_t>(i)] *
                            spec.eta[static_cast<std::size_t>(i)] / 2)
                .epsilon(1e-15));
  }
}

TEST_SUITE("mixture value") {
  TEST_CASE("matches the high-precision references at c0 = 0.5") {
    const MixtureSpec spec = make_mixture(1, 1.0, 9.0, 0.5);
    CHECK(impl_Z(spec, 0.0, 1) ==
          doctest::Approx(0.9775828376378936).epsilon(1e-12));
    CHECK(impl_Z(spec, 2.0, 1) ==
          doctest::Approx(1.4563539950817887).epsilon(1e-12));
    CHECK(impl_Z(spec, 5.0, 10) ==
          doctest::Approx(2.1877617442271415).epsilon(1e-12));
    CHECK(impl_Z(spec, -3.0, 4) ==
          doctest::Approx(0.5438235039370909).epsilon(1e-12));
  }

  TEST_CASE("matches the high-precision references at the default scale") {
    const MixtureSpec spec = make_mixture(1, 1.0, 9.0);
    CHECK(impl_Z(spec, 0.0, 1) ==
          doctest::Approx(0.22172299662767124).epsilon(1e-12));
    CHECK(impl_Z(spec, 3.0, 7) ==
          doctest::Approx(0.25333314484282016).epsilon(1e-12));
    CHECK(impl_Z(spec, 40.0, 1000) ==
          doctest::Approx(0.12343818880482696).epsilon(1e-12));
    CHECK(impl_Z(spec, -12.0, 100) ==
          doctest::Approx(0.084843458298974424).epsilon(1e-12));
    CHECK(impl_Z(spec, 130.0, 10000) ==
          doctest::Approx(0.099161613101820985).epsilon(1e-12));
  }

  TEST_CASE("k = 2 references") {
    const MixtureSpec spec = make_mixture(2, 1.0, 9.0);
    CHECK(spec.c0 == doctest::Approx(4.158875905878424).epsilon(1e-12));
    CHECK(impl_Z(spec, 1.3, 3) ==
          doctest::Approx(0.20895736475678597).epsilon(1e-12));
    CHECK(impl_Z(spec, -2.6, 3) ==
          doctest::Approx(0.12902906682967411).epsilon(1e-12));
  }

  TEST_CASE("agrees with a direct long-double summation at two depths") {
    const MixtureSpec spec = make_mixture(1, 1.0, 9.0);
    Rng rng(303, 0);
    double S = 0.0;
    for (std::int64_t t = 1; t <= 400; ++t) {
      S += rng.normal();
      if (t % 37 != 0) continue;
      const double z = impl_Z(spec, S, t);
      const double d1 = direct_Z(spec.c0, 1.0, 1, S, t, 150);
      const double d2 = direct_Z(spec.c0, 1.0, 1, S, t, 192);
      REQUIRE(std::fabs(d1 - d2) <= 1e-15 * std::fabs(d1));
      REQUIRE(z == doctest::Approx(d1).epsilon(5e-13));
    }
  }

  TEST_CASE("doubling the head length moves log Z by far less than 1e-9") {
    const MixtureSpec spec = make_mixture(1, 1.0, 9.0);
    Rng rng(404, 0);
    double S = 0.0;
    for (std::int64_t t = 1; t <= 2000; ++t) {
      S += rng.normal() + 0.05;  // mild drift grows |T|
      if (t % 101 != 0) continue;
      const int h = choose_head(spec, std::fabs(S), t, spec.head_floor(t));
      const int h2 = std::min(2 * h, spec.table_size);
      REQUIRE(std::fabs(mixture_logZ(spec, S, t, h) -
                        mixture_logZ(spec, S, t, h2)) < 1e-9);
    }
  }
}

TEST_SUITE("state updates") {
  TEST_CASE("reset state is Z = 1 everywhere") {
    const MixtureSpec spec = make_mixture(1, 1.0, 9.0);
    SupermartingaleState st;
    smg_reset(st, spec);
    CHECK(st.n == 0);
    CHECK(log_z_plus(st) == 0.0);
    CHECK(evalue(st) == 0.5);
    CHECK(pvalue(st) == 1.0);
  }

  TEST_CASE("observations equal to the mean freeze S at zero") {
    const MixtureSpec spec = make_mixture(1, 1.0, 9.0);
    SupermartingaleState st;
    smg_reset(st, spec);
    const double mu = 0.7, phi = 0.7;
    double prev = 0.0;
    for (int t = 1; t <= 50; ++t) {
      z_update(st, &phi, &mu);
      CHECK(st.t_ell1() == 0.0);
      const double lz = log_z_plus(st);
      CHECK(lz <= 0.0);      // Z_n = sum gamma_i e^{-n a_i} <= 1
      CHECK(lz <= prev);     // and decreases in n
      prev = lz;
    }
    CHECK(evalue(st) == 0.5);  // sup still attained at n = 0
  }

  TEST_CASE("update equals a fresh mixture evaluation of T") {
    const FamilySpec fam = make_gaussian();
    const MixtureSpec spec = make_mixture(1, fam.sigma, fam.delta);
    SupermartingaleState st;
    smg_reset(st, spec);
    const std::vector<double> mu = {0.5};
    Rng rng(88, 0);
    double obs;
    NeumaierSum S;
    for (int t = 1; t <= 200; ++t) {
      sample_phi(fam, mu.data(), rng, &obs);
      z_update(st, &obs, mu.data());
      S.add(obs - mu[0]);
      REQUIRE(st.t_ell1() == std::fabs(S.value()));
      if (t % 50 == 0) {
        const double plus = mixture_logZ(spec, S.value(), t, st.head);
        const double minus = mixture_logZ(spec, -S.value(), t, st.head);
        REQUIRE(st.log_z_at(0, 0) == doctest::Approx(plus).epsilon(1e-14));
        REQUIRE(st.log_z_at(0, 1) == doctest::Approx(minus).epsilon(1e-14));
      }
    }
  }

  TEST_CASE("rejects non-finite observations") {
    const MixtureSpec spec = make_mixture(1, 1.0, 9.0);
    SupermartingaleState st;
    smg_reset(st, spec);
    const double mu = 0.0;
    const double bad = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(z_update(st, &bad, &mu), std::invalid_argument);
  }

  TEST_CASE("k = 2: the sign mixtures cover the l1 norm exactly") {
    const FamilySpec fam = family_by_name("gaussian_prod:2");
    const MixtureSpec spec = make_mixture(2, fam.sigma, fam.delta);
    SupermartingaleState st;
    smg_reset(st, spec);
    const std::vector<double> mu = {0.2, -0.4};
    std::vector<double> obs(2);
    Rng rng(17, 0);
    for (int t = 1; t <= 60; ++t) {
      sample_phi(fam, mu.data(), rng, obs.data());
      z_update(st, obs.data(), mu.data());
      const double t0 = st.t_rho(0);  // S_0 + S_1
      const double t1 = st.t_rho(1);  // S_0 - S_1
      REQUIRE(std::max(std::fabs(t0), std::fabs(t1)) == st.t_ell1());
    }
  }
}

TEST_SUITE("supermartingale property") {
  TEST_CASE("gaussian one-step conditional mean is exactly preserved") {
    // For the sub-gaussian envelope holding with equality each mixture
    // term is a martingale, so E[Z_{n+1} | history] = Z_n; Monte Carlo
    // over fresh next observations must agree within 3.5 SE.
    const FamilySpec fam = make_gaussian();
    const MixtureSpec spec = make_mixture(1, fam.sigma, fam.delta, 1.5);
    const std::vector<double> mu = {0.0};
    for (std::uint64_t hist = 0; hist < 20; ++hist) {
      SupermartingaleState st;
      smg_reset(st, spec);
      Rng rng(500 + hist, 0);
      double obs;
      const int n = 3 + static_cast<int>(hist % 7);
      for (int t = 0; t < n; ++t) {
        sample_phi(fam, mu.data(), rng, &obs);
        z_update(st, &obs, mu.data());
      }
      const double z_now = std::exp(log_z_plus(st));
      RunningStats next;
      Rng rng2(900 + hist, 1);
      for (int r = 0; r < 4000; ++r) {
        SupermartingaleState st2 = st;
        sample_phi(fam, mu.data(), rng2, &obs);
        z_update(st2, &obs, mu.data());
        next.push(std::exp(log_z_plus(st2)));
      }
      REQUIRE(std::fabs(next.mean - z_now) <= 4.0 * next.se());
    }
  }

  TEST_CASE("bernoulli marginal mean stays below one") {
    const FamilySpec fam = make_bernoulli();
    const MixtureSpec spec = make_mixture(1, fam.sigma, fam.delta);
    const std::vector<double> mu = {0.3};
    const VectorStats vs = run_replications_vector(
        4000, 29, 1, 1, [&](std::int64_t, Rng& rng, double* out) {
          SupermartingaleState st;
          smg_reset(st, spec);
          double obs;
          for (int t = 0; t < 40; ++t) {
            sample_phi(fam, mu.data(), rng, &obs);
            z_update(st, &obs, mu.data());
          }
          out[0] = std::exp(log_z_plus(st));
        });
    CHECK(vs.stats[0].mean <= 1.0 + 3.0 * vs.stats[0].se());
  }

  TEST_CASE("k = 2 marginal mean stays below one") {
    const FamilySpec fam = family_by_name("gaussian_prod:2");
    const MixtureSpec spec = make_mixture(2, fam.sigma, fam.delta);
    const std::vector<double> mu = {1.0, -1.0};
    const VectorStats vs = run_replications_vector(
        1500, 31, 1, 1, [&](std::int64_t, Rng& rng, double* out) {
          SupermartingaleState st;
          smg_reset(st, spec);
          std::vector<double> obs(2);
          for (int t = 0; t < 30; ++t) {
            sample_phi(fam, mu.data(), rng, obs.data());
            z_update(st, obs.data(), mu.data());
          }
          out[0] = std::exp(log_z_plus(st));
        });
    CHECK(vs.stats[0].mean <= 1.0 + 3.0 * vs.stats[0].se());
  }
}

TEST_SUITE("evidence values") {
  TEST_CASE("evalue and pvalue satisfy their exact identity") {
    const FamilySpec fam = make_gaussian();
    const MixtureSpec spec = make_mixture(1, fam.sigma, fam.delta);
    SupermartingaleState st;
    smg_reset(st, spec);
    const std::vector<double> mu = {0.0};
    Rng rng(61, 0);
    double obs, prev_p = 1.0;
    for (int t = 1; t <= 300; ++t) {
      sample_phi(fam, mu.data(), rng, &obs);
      z_update(st, &obs, mu.data());
      const double e = evalue(st);
      const double p = pvalue(st);
      REQUIRE(e >= 0.5);
      REQUIRE(p <= 1.0);
      REQUIRE(p > 0.0);
      REQUIRE(p <= prev_p);  // running sup can only grow
      REQUIRE(e == doctest::Approx(1.0 / (2 * std::sqrt(p))).epsilon(4e-16));
      prev_p = p;
    }
  }

  TEST_CASE("p-values are conservative under the true mean") {
    const FamilySpec fam = make_gaussian();
    const MixtureSpec spec = make_mixture(1, fam.sigma, fam.delta);
    const std::vector<double> mu = {1.0};
    const std::int64_t reps = 4000;
    std::vector<double> pvals;
    pvals.reserve(static_cast<std::size_t>(reps));
    for (std::int64_t r = 0; r < reps; ++r) {
      Rng rng(71, static_cast<std::uint64_t>(r));
      SupermartingaleState st;
      smg_reset(st, spec);
      double obs;
      for (int t = 0; t < 100; ++t) {
        sample_phi(fam, mu.data(), rng, &obs);
        z_update(st, &obs, mu.data());
      }
      pvals.push_back(pvalue(st));
    }
    // Markov: P(V <= alpha) <= alpha, checked at three levels with a
    // 3-SE binomial allowance.
    for (double alpha : {0.05, 0.2, 0.5}) {
      std::int64_t hits = 0;
      for (double p : pvals)
        if (p <= alpha) ++hits;
      const double frac = static_cast<double>(hits) / reps;
      CHECK(frac <= alpha + 3 * std::sqrt(alpha * (1 - alpha) / reps));
    }
  }
}

TEST_SUITE("constants") {
  TEST_CASE("closed forms at k = 1 and k = 2") {
    const LilConstants a = lil_constants(1, 1.0, 9.0);
    CHECK(a.k1 == doctest::Approx(2.8862943611198906).epsilon(1e-14));
    CHECK(a.k2 == 18.0);
    CHECK(a.c == doctest::Approx(0.2357022603955158).epsilon(1e-14));
    CHECK(a.threshold == doctest::Approx(10.606601717798213).epsilon(1e-13));
    const LilConstants b = lil_constants(2, 1.0, 9.0);
    CHECK(b.k1 == doctest::Approx(3.5794415416798359).epsilon(1e-14));
    CHECK(b.k2 == 36.0);
    CHECK(b.c == doctest::Approx(1.0 / 6).epsilon(1e-14));
    CHECK(b.threshold == doctest::Approx(15.0).epsilon(1e-13));
  }

  TEST_CASE("small delta switches the c branch") {
    CHECK(lil_constants(1, 1.0, 0.05).c ==
          doctest::Approx(2 * std::sqrt(2.0) * 0.05).epsilon(1e-14));
  }

  TEST_CASE("strong-risk ceiling") {
    CHECK(strong_risk_ceiling(1, 1.0, 9.0) ==
          doctest::Approx(1764.8857320590984).epsilon(1e-12));
    CHECK(strong_risk_ceiling(2, 1.0, 9.0) ==
          doctest::Approx(7032.1165213652007).epsilon(1e-12));
  }
}

TEST_SUITE("retrospective sup") {
  TEST_CASE("oracle and matching constant estimators have zero sup") {
    const FamilySpec fam = make_gaussian();
    const Trajectory tr = sample_path(fam, {0.5}, 50, 5);
    CHECK(strong_sup_ratio(fam, tr, {0.5}, estimator_by_name("oracle_mu"),
                           rate_f_loglog, 50) == 0.0);
    CHECK(strong_sup_ratio(fam, tr, {0.5}, estimator_by_name("const:0.5"),
                           rate_f_loglog, 50) == 0.0);
  }

  TEST_CASE("matches a hand computation for the MLE") {
    const FamilySpec fam = make_gaussian();
    const Trajectory tr = sample_path(fam, {0.0}, 30, 12);
    const EstimatorKind mle = estimator_by_name("mle");
    double want = 0.0;
    NeumaierSum s;
    for (std::int64_t t = 1; t <= 30; ++t) {
      s.add(tr.phi[t - 1]);
      const double est = s.value() / t;
      want = std::max(want, est * est / rate_f_loglog(t));
    }
    CHECK(strong_sup_ratio(fam, tr, {0.0}, mle, rate_f_loglog, 30) ==
          doctest::Approx(want).epsilon(1e-15));
    // N = 1 reduces to the first-step ratio.
    CHECK(strong_sup_ratio(fam, tr, {0.0}, mle, rate_f_loglog, 1) ==
          doctest::Approx(tr.phi[0] * tr.phi[0]).epsilon(1e-15));
  }
}
