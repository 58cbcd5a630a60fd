// Family model layer: benchmark rates, envelope verification, worst-case
// sigma computation, and sampler determinism.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "timerobust/family.hpp"
#include "timerobust/rates.hpp"

using namespace timerobust;

TEST_SUITE("rates") {
  TEST_CASE("benchmark rate spot values") {
    CHECK(rate_f_loglog(1) == 1.0);
    CHECK(rate_f_loglog(2) == 1.0);
    // High-precision references for ln(ln n)/n.
    CHECK(rate_f_loglog(3) ==
          doctest::Approx(0.03134927587223300539).epsilon(1e-14));
    CHECK(rate_f_loglog(6) ==
          doctest::Approx(0.09719968013044321632).epsilon(1e-14));
    CHECK(rate_f_loglog(10) ==
          doctest::Approx(0.0834032445247955800).epsilon(1e-14));
  }

  TEST_CASE("benchmark rate is not monotone near the head") {
    // Drops from 1 to ~0.031 at n = 3, then climbs to a local peak at 6.
    CHECK(rate_f_loglog(3) < rate_f_loglog(2));
    CHECK(rate_f_loglog(4) > rate_f_loglog(3));
    CHECK(rate_f_loglog(5) > rate_f_loglog(4));
    CHECK(rate_f_loglog(6) > rate_f_loglog(5));
    CHECK(rate_f_loglog(7) < rate_f_loglog(6));
  }

  TEST_CASE("benchmark rate is non-increasing from 6 on") {
    double prev = rate_f_loglog(6);
    for (std::int64_t n = 7; n <= 100000; ++n) {
      const double cur = rate_f_loglog(n);
      REQUIRE(cur <= prev);
      prev = cur;
    }
    // Spot-check the far tail on a sparse geometric grid.
    for (std::int64_t n = 100000; n < 100000000; n *= 4)
      CHECK(rate_f_loglog(4 * n) < rate_f_loglog(n));
  }

  TEST_CASE("comparison rates") {
    CHECK(rate_1_over_n(4) == 0.25);
    CHECK(rate_log_over_n(1) == 1.0);  // defined as 1 at n = 1
    CHECK(rate_log_over_n(10) ==
          doctest::Approx(std::log(10.0) / 10.0).epsilon(1e-15));
    CHECK(rate_one(1) == 1.0);
    CHECK(rate_one(1000000) == 1.0);
  }

  TEST_CASE("rates reject non-positive n") {
    CHECK_THROWS_AS(rate_f_loglog(0), std::invalid_argument);
    CHECK_THROWS_AS(rate_1_over_n(-3), std::invalid_argument);
    CHECK_THROWS_AS(rate_log_over_n(0), std::invalid_argument);
    CHECK_THROWS_AS(rate_one(0), std::invalid_argument);
  }

  TEST_CASE("rate registry resolves ids and rejects unknowns") {
    CHECK(rate_by_name("f_loglog") == &rate_f_loglog);
    CHECK(rate_by_name("g_1_over_n") == &rate_1_over_n);
    CHECK(rate_by_name("g_log_over_n") == &rate_log_over_n);
    CHECK(rate_by_name("one") == &rate_one);
    CHECK_THROWS_WITH_AS(rate_by_name("bogus"),
                         doctest::Contains("f_loglog"),
                         std::invalid_argument);
  }
}

TEST_SUITE("families") {
  TEST_CASE("registry") {
    CHECK(make_gaussian().k == 1);
    CHECK(make_gaussian().sigma == 1.0);
    CHECK(make_bernoulli().sigma == 0.25);
    CHECK(family_by_name("gaussian_prod:3").k == 3);
    CHECK_THROWS_WITH_AS(family_by_name("poisson"),
                         doctest::Contains("gaussian"),
                         std::invalid_argument);
    CHECK_THROWS_AS(family_by_name("gaussian_prod:0"), std::invalid_argument);
  }

  TEST_CASE("parameter boxes") {
    const FamilySpec b = make_bernoulli();
    const double in = 0.01, out = 0.005;
    CHECK(b.mu_in_box(&in));
    CHECK_FALSE(b.mu_in_box(&out));
    const FamilySpec g = make_gaussian();
    const double big = 1e7;
    CHECK_FALSE(g.mu_in_box(&big));
  }

  TEST_CASE("gaussian envelope holds with equality in closed form") {
    const FamilySpec g = make_gaussian();
    for (double mu : {-2.0, 0.0, 1.5}) {
      for (double eta : {-3.0, -1.0, 0.5, 3.0}) {
        const EnvelopeResult r = envelope_check(g, {mu}, {eta});
        CHECK(r.pass);
        CHECK(r.rel_se == 0.0);
        CHECK(r.estimate ==
              doctest::Approx(std::exp(eta * eta / 2)).epsilon(1e-14));
        CHECK(r.estimate <= r.bound * (1 + 1e-12));
      }
    }
  }

  TEST_CASE("bernoulli envelope closed form matches the reference values") {
    const FamilySpec b = make_bernoulli();
    const EnvelopeResult r1 = envelope_check(b, {0.3}, {0.8});
    CHECK(r1.pass);
    CHECK(r1.estimate ==
          doctest::Approx(1.075841252835417711).epsilon(1e-13));
    CHECK(r1.bound == doctest::Approx(1.083287067674958554).epsilon(1e-13));
    const EnvelopeResult r2 = envelope_check(b, {0.99}, {-1.0});
    CHECK(r2.pass);
    CHECK(r2.estimate ==
          doctest::Approx(1.007061680135168996).epsilon(1e-13));
  }

  TEST_CASE("monte carlo envelope path agrees with the closed form") {
    const FamilySpec b = make_bernoulli();
    const EnvelopeResult mc = envelope_check(b, {0.3}, {0.8}, 40000, 5);
    CHECK(mc.rel_se > 0.0);
    CHECK(mc.estimate ==
          doctest::Approx(1.075841252835417711).epsilon(4 * mc.rel_se));
    CHECK(mc.pass);

    const FamilySpec g = make_gaussian();
    const EnvelopeResult gmc = envelope_check(g, {1.0}, {1.0}, 40000, 7);
    CHECK(gmc.estimate ==
          doctest::Approx(std::exp(0.5)).epsilon(4 * gmc.rel_se));
  }

  TEST_CASE("envelope grid over the working box") {
    const FamilySpec g = make_gaussian();
    for (double mu = -3.0; mu <= 3.0; mu += 1.0)
      for (double eta = -3.0; eta <= 3.0; eta += 0.75)
        CHECK(envelope_check(g, {mu}, {eta}).pass);
    const FamilySpec b = make_bernoulli();
    for (double mu = 0.05; mu <= 0.96; mu += 0.1)
      for (double eta = -1.0; eta <= 1.0; eta += 0.25)
        CHECK(envelope_check(b, {mu}, {eta}).pass);
  }

  TEST_CASE("envelope rejects out-of-scope inputs") {
    const FamilySpec g = make_gaussian();
    CHECK_NOTHROW(envelope_check(g, {0.0}, {3.0}));  // |eta|^2 = delta is ok
    CHECK_THROWS_AS(envelope_check(g, {0.0}, {3.001}), std::invalid_argument);
    const FamilySpec b = make_bernoulli();
    CHECK_THROWS_AS(envelope_check(b, {0.005}, {0.5}), std::invalid_argument);
    CHECK_THROWS_AS(envelope_check(b, {0.5}, {1.5}), std::invalid_argument);
  }

  TEST_CASE("product family envelope multiplies coordinates") {
    const FamilySpec g3 = family_by_name("gaussian_prod:3");
    const EnvelopeResult r = envelope_check(g3, {0.0, 1.0, -1.0},
                                            {1.0, 0.5, -0.25});
    CHECK(r.pass);
    const double n2 = 1.0 + 0.25 + 0.0625;
    CHECK(r.estimate == doctest::Approx(std::exp(n2 / 2)).epsilon(1e-13));
  }
}

TEST_SUITE("sigma_of") {
  TEST_CASE("gaussian information is flat") {
    CHECK(sigma_of("gaussian", {-5.0, 5.0}, 9.0) == doctest::Approx(1.0));
    CHECK(sigma_of("gaussian", {0.2, 0.3}, 0.01) == doctest::Approx(1.0));
  }

  TEST_CASE("bernoulli interval containing the information peak") {
    // Canonical image of [0.01, 0.99] padded by 1 contains 0, so the sup
    // is the global maximum 1/4.
    CHECK(sigma_of("bernoulli", {0.01, 0.99}, 1.0) ==
          doctest::Approx(0.25).epsilon(1e-12));
  }

  TEST_CASE("bernoulli intervals away from the peak hit an endpoint") {
    // References from an independent high-precision evaluation of
    // p(1-p) at the padded canonical endpoints.
    CHECK(sigma_of("bernoulli", {0.6, 0.9}, 0.04) ==
          doctest::Approx(0.2473799595730626).epsilon(1e-10));
    CHECK(sigma_of("bernoulli", {0.02, 0.05}, 0.01) ==
          doctest::Approx(0.05194784190846735).epsilon(1e-10));
  }

  TEST_CASE("rejects degenerate or boundary-touching intervals") {
    CHECK_THROWS_AS(sigma_of("bernoulli", {0.5, 0.5}, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(sigma_of("bernoulli", {0.0, 0.5}, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(sigma_of("bernoulli", {0.5, 1.0}, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(sigma_of("poisson", {0.1, 0.9}, 1.0),
                    std::invalid_argument);
  }
}

TEST_SUITE("sampling") {
  TEST_CASE("same seed and stream reproduce the path bit for bit") {
    const FamilySpec g = make_gaussian();
    const Trajectory a = sample_path(g, {0.7}, 200, 42, 3);
    const Trajectory b = sample_path(g, {0.7}, 200, 42, 3);
    REQUIRE(a.phi.size() == b.phi.size());
    for (std::size_t i = 0; i < a.phi.size(); ++i) REQUIRE(a.phi[i] == b.phi[i]);
  }

  TEST_CASE("a longer draw extends the shorter one unchanged") {
    const FamilySpec g = make_gaussian();
    const Trajectory shrt = sample_path(g, {0.7}, 60, 42, 3);
    const Trajectory lng = sample_path(g, {0.7}, 200, 42, 3);
    for (std::size_t i = 0; i < shrt.phi.size(); ++i)
      REQUIRE(lng.phi[i] == shrt.phi[i]);
  }

  TEST_CASE("different streams decorrelate") {
    const FamilySpec g = make_gaussian();
    const Trajectory a = sample_path(g, {0.0}, 50, 42, 0);
    const Trajectory b = sample_path(g, {0.0}, 50, 42, 1);
    int same = 0;
    for (std::int64_t i = 0; i < 50; ++i)
      if (a.phi[i] == b.phi[i]) ++same;
    CHECK(same == 0);
  }

  TEST_CASE("gaussian sample moments") {
    const FamilySpec g = make_gaussian();
    const std::int64_t n = 200000;
    const Trajectory tr = sample_path(g, {1.25}, n, 9);
    double s = 0.0, s2 = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
      s += tr.phi[i];
      s2 += tr.phi[i] * tr.phi[i];
    }
    const double mean = s / n;
    const double var = s2 / n - mean * mean;
    CHECK(mean == doctest::Approx(1.25).epsilon(4.0 / std::sqrt((double)n)));
    CHECK(var == doctest::Approx(1.0).epsilon(0.02));
  }

  TEST_CASE("bernoulli sample moments stay in {0,1}") {
    const FamilySpec b = make_bernoulli();
    const std::int64_t n = 200000;
    const Trajectory tr = sample_path(b, {0.3}, n, 17);
    double s = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
      REQUIRE((tr.phi[i] == 0.0 || tr.phi[i] == 1.0));
      s += tr.phi[i];
    }
    CHECK(s / n == doctest::Approx(0.3).epsilon(0.02));
  }

  TEST_CASE("product family rows are independent coordinates") {
    const FamilySpec g3 = family_by_name("gaussian_prod:3");
    const std::int64_t n = 50000;
    const Trajectory tr = sample_path(g3, {0.0, 2.0, -1.0}, n, 23);
    REQUIRE(tr.k == 3);
    double m[3] = {0, 0, 0};
    for (std::int64_t t = 0; t < n; ++t)
      for (int j = 0; j < 3; ++j) m[j] += tr.row(t)[j];
    CHECK(m[0] / n == doctest::Approx(0.0).epsilon(0.05));
    CHECK(m[1] / n == doctest::Approx(2.0).epsilon(0.02));
    CHECK(m[2] / n == doctest::Approx(-1.0).epsilon(0.03));
  }
}
