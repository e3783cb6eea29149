#include <gtest/gtest.h>

#include <random>

#include "qcec/heights.hpp"
#include "qcec/sigma.hpp"
#include "support.hpp"

using namespace qcec;
using qcec::testing::agreement;
using qcec::testing::load_fixture;

namespace {

constexpr long N = 25;

struct Local {
  Weierstrass<Padic> E;
  PrimeSplitting s;
};

Local local(const CurveManifest& m, prime_t p, int i, long prec = N + 12) {
  PrimeSplitting s = split_prime(m.field(), p, prec + 40);
  return {embed_curve(m.curve(), s, i, prec + 16), s};
}

bool same_coeffs(const Series& a, const Series& b, long from, long to) {
  for (long k = from; k < to; ++k)
    if (a.coeff(k) != b.coeff(k)) return false;
  return true;
}

}  // namespace

TEST(Formal, ExpansionsAtInfinity) {
  const CurveManifest m = load_fixture("u1.manifest");
  const Local L = local(m, 7, 0);
  const long M = 20;
  const FormalExpansions fe = formal_expansions(L.E, M);
  const Padic one = Padic::one(7, N);
  EXPECT_EQ(fe.x.low(), -2);
  EXPECT_EQ(fe.x.coeff(-2), one);
  EXPECT_EQ(fe.x.coeff(-1), -L.E.a1());
  EXPECT_EQ(fe.x.coeff(0), -L.E.a2());
  EXPECT_EQ(fe.x.coeff(1), -L.E.a3());
  EXPECT_EQ(fe.y.coeff(-3), -one);
  // t = -x / y
  const Series t = -(fe.x / fe.y);
  EXPECT_EQ(t.coeff(1), one);
  for (long k = 2; k < M - 4; ++k) EXPECT_TRUE(t.coeff(k).is_zero()) << k;
  // the Weierstrass equation holds
  const Series eq = fe.y * fe.y + L.E.a1() * fe.x * fe.y + L.E.a3() * fe.y -
                    (fe.x * fe.x * fe.x + L.E.a2() * fe.x * fe.x + L.E.a4() * fe.x).plus_constant(L.E.a6());
  for (long k = eq.low(); k < M - 8; ++k) EXPECT_TRUE(eq.coeff(k).is_zero()) << k;
  // omega(0) = 1, L' = omega, L(0) = 0, L = t + (a1 / 2) t^2 + ...
  EXPECT_EQ(fe.omega.coeff(0), one);
  EXPECT_TRUE(same_coeffs(fe.log.derivative(), fe.omega, 0, M - 2));
  EXPECT_TRUE(fe.log.coeff(0).is_zero());
  EXPECT_EQ(fe.log.coeff(2), L.E.a1() / Padic::from_integer(7, 2, N));
}

TEST(Formal, ShortWeierstrassPattern) {
  const CurveManifest m = load_fixture("mordell.manifest");
  const Local L = local(m, 7, 0);
  const FormalExpansions fe = formal_expansions(L.E, 24);
  for (long k = 1; k < 20; k += 2) EXPECT_TRUE(fe.omega.coeff(k).is_zero()) << k;
  EXPECT_EQ(fe.omega.coeff(4), Padic::from_integer(7, 2, N) * L.E.a4());
  EXPECT_EQ(fe.omega.coeff(6), Padic::from_integer(7, 3, N) * L.E.a6());
}

TEST(Sigma, SeriesShapeAndOddness) {
  for (const char* name : {"u1.manifest", "mordell.manifest"}) {
    const CurveManifest m = load_fixture(name);
    for (int i = 0; i < 2; ++i) {
      const Local L = local(m, 7, i);
      const SigmaFunction S = sigma_compute(L.E, 29, N + 12);
      EXPECT_EQ(S.sigma.low(), 1);
      EXPECT_EQ(S.sigma.coeff(1), Padic::one(7, N));
      for (long k = 1; k < S.sigma.high(); ++k) EXPECT_GE(S.sigma.coeff(k).valuation(), 0) << name << " " << k;
      // odd under the formal inverse t -> iota(t)
      const Series odd = S.sigma.compose(S.fe.iota) + S.sigma;
      for (long k = 1; k < S.sigma.high(); ++k) EXPECT_TRUE(odd.coeff(k).is_zero()) << name << " " << k;
    }
  }
  // For a short model iota(t) = -t, so the even coefficients vanish.
  const Local L = local(load_fixture("mordell.manifest"), 7, 0);
  const SigmaFunction S = sigma_compute(L.E, 29, N + 12);
  for (long k = 2; k < 29; k += 2) EXPECT_TRUE(S.sigma.coeff(k).is_zero()) << k;
}

TEST(Sigma, OdeResidual) {
  for (const char* name : {"u1.manifest", "u3.manifest", "mordell.manifest"}) {
    const CurveManifest m = load_fixture(name);
    const prime_t p = m.p;
    for (int i = 0; i < 2; ++i) {
      const Local L = local(m, p, i);
      const long M = 2 * static_cast<long>(p) + 15;
      const SigmaFunction S = sigma_compute(L.E, M, N + 12);
      EXPECT_GE(qcec::testing::ode_residual_digits(S, M - 4), N) << name << " " << i;
    }
  }
}

TEST(Sigma, TruncationUniqueness) {
  const CurveManifest m = load_fixture("u1.manifest");
  for (int i = 0; i < 2; ++i) {
    const Local L = local(m, 7, i);
    const SigmaFunction A = sigma_compute(L.E, 29, N + 12), B = sigma_compute(L.E, 35, N + 12);
    EXPECT_EQ(A.c, B.c);
    EXPECT_GE(agreement(A.c, B.c), N);
    EXPECT_TRUE(same_coeffs(A.sigma, B.sigma, 1, 29));
  }
}

TEST(Sigma, EvaluationValuation) {
  const CurveManifest m = load_fixture("u1.manifest");
  const Local L = local(m, 7, 0);
  const SigmaFunction S = sigma_compute(L.E, 29, N + 12);
  const SigmaFunction S2 = sigma_compute(L.E, 58, N + 12);
  std::mt19937_64 g(9);
  for (int k = 0; k < 50; ++k) {
    const long v = 1 + static_cast<long>(g() % 4);
    const Padic t0 = qcec::testing::random_padic(g, 7, N, true).shifted(v);
    const Padic s = sigma_eval(S, t0);
    EXPECT_EQ(s.valuation(), v);
    // the reported precision is honest
    EXPECT_GE(agreement(s, sigma_eval(S2, t0)), std::min(s.precision_absolute(), N));
  }
  EXPECT_TRUE(sigma_eval(S, Padic::zero(7, N)).is_zero());
  EXPECT_THROW(sigma_eval(S, Padic::one(7, N)), domain_error);
}

TEST(Sigma, QuadraticityOracle) {
  // Q0 = 13 P reduces to the identity at both primes above 7.
  struct Case {
    const char* name;
    prime_t p;
    long mult;
  };
  for (const Case& c : {Case{"u1.manifest", 7, 13}, Case{"u1.manifest", 13, 133}, Case{"mordell.manifest", 7, 0}}) {
    const CurveManifest m = load_fixture(c.name);
    const KCurve E = m.curve();
    for (int i = 0; i < 2; ++i) {
      const Local L = local(m, c.p, i);
      long mult = c.mult;
      if (mult == 0) {
        const PrimeSplitting s = split_prime(m.field(), c.p, 8);
        mult = std::lcm(count_points(reduce_curve(E, s, 0)), count_points(reduce_curve(E, s, 1)));
      }
      const Point<Padic> Q0 = embed_point(E.mul(m.P, mult), L.s, i, N + 12);
      ASSERT_GE(qcec::testing::formal_parameter(Q0).valuation(), 1);
      const SigmaFunction S = sigma_compute(L.E, 2 * static_cast<long>(c.p) + 15, N + 12);
      for (long k : {2, 3, 5}) EXPECT_GE(qcec::testing::sigma_relation_digits(L.E, S, Q0, k), N - 4) << c.name << " " << k;
    }
  }
}
