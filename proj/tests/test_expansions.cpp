#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "vlsf/expansions.hpp"
#include "vlsf/normal.hpp"

using namespace vlsf;
using Catch::Approx;

// Reference values below come from 50-digit mpmath runs, frozen.

TEST_CASE("scaled complementary error function") {
  struct Spot {
    double x, v;
  };
  // exp(x^2) erfc(x); spots straddle the asymptotic handover at x = 25
  const Spot spots[] = {
      {0.5, 0.61569034419292587487}, {1.0, 0.42758357615580700441},
      {5.0, 0.11070463773306862637}, {24.9, 0.022639987776049504996},
      {25.1, 0.022459875817581389506}, {100.0, 0.0056416137829894329036},
  };
  for (const auto& s : spots) REQUIRE(erfcx(s.x) == Approx(s.v).epsilon(1e-13));
}

TEST_CASE("gaussian tail q and log q") {
  struct Spot {
    double x, q, lq;
  };
  const Spot spots[] = {
      {-5.0, 0.99999971334842812081, -2.8665161296376359338e-7},
      {-3.0, 0.99865010196836990547, -0.0013508099647481937988},
      {-1.0, 0.84134474606854294859, -0.17275377902344988953},
      {0.0, 0.5, -0.69314718055994530942},
      {1.0, 0.15865525393145705141, -1.8410216450092635058},
      {3.0, 0.0013498980316300945267, -6.6077262215103495433},
      {5.0, 2.8665157187919391167e-7, -15.064998393988725736},
      {10.0, 7.619853024160526066e-24, -53.231285150512470578},
      {20.0, 2.7536241186062336951e-89, -203.91715537109726394},
      {40.0, 0.0, -804.60844201375378817},  // true value ~3.7e-350 underflows double
  };
  for (const auto& s : spots) {
    if (s.q > 1e-300) REQUIRE(q(s.x) == Approx(s.q).epsilon(1e-13));
    REQUIRE(log_q(s.x) == Approx(s.lq).epsilon(1e-11));
  }
  // q underflows near x = 40 but the log form keeps going
  REQUIRE(log_q(200.0) == Approx(-20006.217280898190402).epsilon(1e-14));
  REQUIRE(std::exp(log_phi(2.0)) == Approx(phi(2.0)).epsilon(1e-14));
}

TEST_CASE("hermite closed form against the recurrence") {
  // He_{j+1} = x He_j - j He_{j-1}, evaluated in-line as the oracle
  const double grid[] = {-4.5, -1.0, 0.0, 0.7, 3.0};
  for (double x : grid) {
    double a = 1.0, b = x;
    REQUIRE(hermite(0, x) == 1.0);
    REQUIRE(hermite(1, x) == Approx(b).margin(1e-15));
    for (int j = 1; j < 17; ++j) {
      const double c = x * b - j * a;
      const double got = hermite(j + 1, x);
      REQUIRE(got == Approx(c).epsilon(1e-9));
      a = b;
      b = c;
    }
  }
  REQUIRE(hermite(17, 3.0) == Approx(-22950864.0).epsilon(1e-10));
  REQUIRE(hermite(17, -4.5) == Approx(1168902931.3483200073).epsilon(1e-10));
  REQUIRE(hermite(12, 1.25) == Approx(-4786.570492684841156).epsilon(1e-10));
  REQUIRE(hermite(2, 0.5) == Approx(-0.75).margin(1e-14));
  REQUIRE(hermite(3, 2.0) == Approx(2.0).margin(1e-13));
}

TEST_CASE("integer partition enumeration") {
  const int counts[] = {1, 2, 3, 5, 7, 11, 15};
  for (int j = 1; j <= 7; ++j) {
    const auto& ps = partitions(j);
    REQUIRE(static_cast<int>(ps.size()) == counts[j - 1]);
    for (const auto& p : ps) {
      int total = 0, parts = 0;
      for (int m = 1; m <= j; ++m) {
        total += m * p.count[m - 1];
        parts += p.count[m - 1];
      }
      REQUIRE(total == j);
      REQUIRE(parts == p.r);
    }
  }
  // j = 3 as an explicit set: 1+1+1, 1+2, 3
  std::set<std::vector<int>> got;
  for (const auto& p : partitions(3)) got.insert(p.count);
  REQUIRE(got == std::set<std::vector<int>>{{3, 0, 0}, {1, 1, 0}, {0, 0, 1}});
}

TEST_CASE("cumulants from raw moments") {
  SECTION("central-moment identities") {
    std::mt19937 rng(20240817);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int rep = 0; rep < 25; ++rep) {
      // mu1 = 0 so the classical central relations apply
      double m2 = 0.5 + std::abs(u(rng)), m3 = u(rng), m4 = 3.0 * m2 * m2 + u(rng);
      double m5 = u(rng) * 4.0, m6 = 15.0 * m2 * m2 * m2 + u(rng) * 5.0, m7 = u(rng) * 8.0;
      auto kap = cumulants_from_moments({0.0, m2, m3, m4, m5, m6, m7});
      REQUIRE(kap[0] == Approx(0.0).margin(1e-12));
      REQUIRE(kap[1] == Approx(m2).epsilon(1e-12));
      REQUIRE(kap[2] == Approx(m3).epsilon(1e-12).margin(1e-12));
      REQUIRE(kap[3] == Approx(m4 - 3 * m2 * m2).epsilon(1e-11).margin(1e-11));
      REQUIRE(kap[4] == Approx(m5 - 10 * m3 * m2).epsilon(1e-11).margin(1e-11));
      REQUIRE(kap[5] ==
              Approx(m6 - 15 * m4 * m2 - 10 * m3 * m3 + 30 * m2 * m2 * m2)
                  .epsilon(1e-10).margin(1e-10));
      REQUIRE(kap[6] ==
              Approx(m7 - 21 * m5 * m2 - 35 * m4 * m3 + 210 * m3 * m2 * m2)
                  .epsilon(1e-10).margin(1e-10));
    }
  }
  SECTION("standard normal moments give vanishing higher cumulants") {
    auto kap = cumulants_from_moments({0.0, 1.0, 0.0, 3.0, 0.0, 15.0, 0.0});
    REQUIRE(kap[1] == Approx(1.0).epsilon(1e-14));
    for (int i = 2; i < 7; ++i) REQUIRE(kap[i] == Approx(0.0).margin(1e-12));
  }
}

TEST_CASE("edgeworth correction polynomials") {
  std::vector<double> kappa{-3.07, 12.39, -57.78, 250.0, -1000.0};  // kappa_3..7
  EdgeworthExpansion e(5, kappa);
  SECTION("p1 is -(kappa3/6) He2") {
    for (double x : {-2.0, -0.3, 0.0, 1.1, 4.0})
      REQUIRE(e.p(1, x) == Approx(-(kappa[0] / 6.0) * hermite(2, x)).epsilon(1e-12));
  }
  SECTION("p2 with kappa3 = 0, kappa4 = 1 is -He3/24") {
    EdgeworthExpansion e2(2, {0.0, 1.0});
    for (double x : {-1.5, 0.2, 2.0})
      REQUIRE(e2.p(2, x) == Approx(-hermite(3, x) / 24.0).epsilon(1e-12).margin(1e-15));
  }
  SECTION("all-zero cumulants kill every correction") {
    EdgeworthExpansion z(5, {0.0, 0.0, 0.0, 0.0, 0.0});
    for (int j = 1; j <= 5; ++j)
      for (double x : {-2.0, 0.5, 3.0}) REQUIRE(z.p(j, x) == 0.0);
    for (double x : {-2.0, 0.5, 3.0})
      REQUIRE(edgeworth_cdf(30.0, x, z) == Approx(q(-x)).epsilon(1e-14));
  }
  SECTION("free-function p agrees with the precomputed tables") {
    for (int j = 1; j <= 5; ++j)
      for (double x : {-1.7, 0.4, 2.6})
        REQUIRE(edgeworth_p(j, x, kappa) == Approx(e.p(j, x)).epsilon(1e-11).margin(1e-13));
  }
}

TEST_CASE("petrov factor") {
  CramerSeries2 cs{-0.512, -0.665, -0.939};
  SECTION("x = 0 gives exactly one half") {
    bool clamped = false;
    REQUIRE(petrov_tail(25.0, 0.0, cs, &clamped) == 0.5);
    REQUIRE_FALSE(clamped);
  }
  SECTION("zero series reduces to the gaussian tail") {
    CramerSeries2 zero{0.0, 0.0, 0.0};
    for (double x : {0.3, 1.0, 2.7})
      REQUIRE(petrov_tail(40.0, x, zero) == Approx(q(x)).epsilon(1e-13));
  }
  SECTION("positive exponent saturates at one and reports the clamp") {
    CramerSeries2 big{50.0, 0.0, 0.0};
    bool clamped = false;
    REQUIRE(petrov_tail(4.0, 2.0, big, &clamped) == 1.0);
    REQUIRE(clamped);
  }
}

TEST_CASE("cramer series from cumulants") {
  SECTION("frozen coefficients for the 0.2 dB channel law") {
    auto cs = CramerSeries2::from_cumulants(1.0, -3.0743710956280962976,
                                            12.391398150861739533,
                                            -57.781578866101558392);
    REQUIRE(cs.a0 == Approx(-0.51239518260468271627).epsilon(1e-13));
    REQUIRE(cs.a1 == Approx(-0.6651614479182818399).epsilon(1e-13));
    REQUIRE(cs.a2 == Approx(-0.93914310706407984578).epsilon(1e-13));
  }
  SECTION("gaussian cumulants give the zero series") {
    auto cs = CramerSeries2::from_cumulants(1.0, 0.0, 0.0, 0.0);
    REQUIRE(cs.a0 == 0.0);
    REQUIRE(cs.a1 == 0.0);
    REQUIRE(cs.a2 == 0.0);
    REQUIRE(cs.eval(0.7) == 0.0);
  }
  SECTION("eval and deriv are consistent") {
    CramerSeries2 cs{0.2, -0.4, 0.05};
    const double t = 0.3, h = 1e-6;
    REQUIRE(cs.deriv(t) == Approx((cs.eval(t + h) - cs.eval(t - h)) / (2 * h)).epsilon(1e-7));
  }
}
