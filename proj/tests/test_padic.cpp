#include <gtest/gtest.h>

#include <random>
#include <set>

#include "qcec/bivariate.hpp"
#include "qcec/padic.hpp"
#include "qcec/series.hpp"
#include "support.hpp"

using namespace qcec;
using qcec::testing::random_padic;

namespace {

constexpr prime_t P7 = 7;
constexpr long N = 25;

Padic num(long v, long prec = N) { return Padic::from_integer(P7, v, prec); }

Poly<Padic> poly(std::vector<long> c) {
  std::vector<Padic> v;
  for (long a : c) v.push_back(num(a));
  return Poly<Padic>(num(0), v);
}

}  // namespace

TEST(Padic, CanonicalRepresentation) {
  Padic a = Padic::from_integer(P7, 49 * 3, N);
  EXPECT_EQ(a.valuation(), 2);
  EXPECT_EQ(a.unit(), 3);
  EXPECT_EQ(a.precision_absolute(), N);
  EXPECT_TRUE(Padic::from_integer(P7, 0, N).is_zero());
  EXPECT_EQ(Padic::from_rational(P7, 1, 7, N).valuation(), -1);
  EXPECT_EQ(num(5) * Padic::from_rational(P7, 1, 5, N), num(1));
  EXPECT_EQ(Padic::parse(num(-1).to_string()), num(-1));
}

TEST(Padic, RingAxiomsOnRandomTriples) {
  std::mt19937_64 g(1);
  for (int k = 0; k < 200; ++k) {
    Padic a = random_padic(g, P7, N), b = random_padic(g, P7, N), c = random_padic(g, P7, N);
    EXPECT_EQ((a * b) * c, a * (b * c));
    EXPECT_EQ((a + b) + c, a + (b + c));
    EXPECT_EQ(a * (b + c), a * b + a * c);
    EXPECT_EQ(a * b, b * a);
    EXPECT_TRUE((a - a).is_zero());
  }
}

TEST(Padic, PrecisionNeverIncreases) {
  std::mt19937_64 g(2);
  for (int k = 0; k < 200; ++k) {
    Padic a = random_padic(g, P7, 10 + static_cast<long>(g() % 15), true);
    Padic b = random_padic(g, P7, 10 + static_cast<long>(g() % 15), true).shifted(static_cast<long>(g() % 3));
    const long abs = std::min(a.precision_absolute(), b.precision_absolute());
    const long rel = std::min(a.precision_relative(), b.precision_relative());
    EXPECT_LE((a + b).precision_absolute(), abs);
    EXPECT_LE((a - b).precision_absolute(), abs);
    EXPECT_LE((a * b).precision_relative(), rel);
    EXPECT_LE((a / b).precision_relative(), rel);
  }
  // Cancellation loses the digits that cancel.
  Padic x = num(1 + 7 * 7 * 7), y = num(1);
  EXPECT_EQ((x - y).valuation(), 3);
  EXPECT_EQ((x - y).precision_relative(), N - 3);
}

TEST(Padic, LogarithmExamples) {
  EXPECT_TRUE(num(1).log().is_zero());
  EXPECT_TRUE(num(7).log().is_zero());
  EXPECT_THROW(Padic::zero(P7, N).log(), domain_error);
  // log(1 + 7) as the alternating series with exact rational terms.
  Padic s = Padic::zero(P7, N);
  mpz_class pk = 1;
  for (long k = 1; k < 40; ++k) {
    pk *= 7;
    Padic term = Padic::from_rational(P7, pk, k, N + 4);
    s = k % 2 ? s + term : s - term;
  }
  EXPECT_EQ(num(8).log(), s.with_precision(N));
}

TEST(Padic, LogarithmIsAdditive) {
  std::mt19937_64 g(3);
  for (int k = 0; k < 500; ++k) {
    Padic a = random_padic(g, P7, N, true), b = random_padic(g, P7, N, true);
    EXPECT_GE(qcec::testing::agreement((a * b).log(), a.log() + b.log()), N - 1);
  }
}

TEST(Padic, TeichmullerHasLogZero) {
  for (long r = 1; r < 7; ++r) {
    Padic t = num(r).teichmuller();
    EXPECT_EQ(t.residue(), static_cast<unsigned long>(r));
    EXPECT_EQ(t.pow(6), num(1));
    EXPECT_TRUE(t.log().is_zero());
  }
}

TEST(Padic, SquareRoots) {
  Padic r = num(2).sqrt();
  EXPECT_EQ(r * r, num(2));
  EXPECT_EQ(num(49 * 2).sqrt() * num(49 * 2).sqrt(), num(98));
  EXPECT_THROW(num(3).sqrt(), domain_error);
  EXPECT_THROW(num(14).sqrt(), domain_error);
}

TEST(Hensel, UnivariateExamples) {
  const mpz_class m5 = 16807;
  // x^2 - 2 from the residue 3
  Padic r = hensel_univariate(poly({-2, 0, 1}), num(3));
  EXPECT_EQ(r.residue(), 3u);
  EXPECT_TRUE((r * r - num(2)).is_zero());
  std::set<long> sq;
  for (long x = 0; x < 16807; ++x)
    if ((x * x - 2) % 16807 == 0 && x % 7 == 3) sq.insert(x);
  ASSERT_EQ(sq.size(), 1u);
  EXPECT_EQ(mpz_class(r.lift() % m5), *sq.begin());
  // linear
  EXPECT_EQ(hensel_univariate(poly({-5, 1}), num(12)), num(5));
  // x^2 + x + 1 from the residue 2
  Padic z = hensel_univariate(poly({1, 1, 1}), num(2));
  std::set<long> roots;
  for (long x = 0; x < 16807; ++x)
    if ((x * x + x + 1) % 16807 == 0 && x % 7 == 2) roots.insert(x);
  ASSERT_EQ(roots.size(), 1u);
  EXPECT_EQ(mpz_class(z.lift() % m5), *roots.begin());
  EXPECT_TRUE((z * z + z + num(1)).is_zero());
}

TEST(Hensel, UnivariatePreconditionViolated) {
  EXPECT_THROW(hensel_univariate(poly({-2, 0, 1}), num(0)), domain_error);
  // v(f(x0)) = 1 but v(f'(x0)) = 1: 2 * 1 >= 1 fails the Newton condition.
  EXPECT_THROW(hensel_univariate(poly({-7, 0, 1}), num(7)), domain_error);
}

namespace {

// Coefficients k in [from, to) agree.
bool same_coeffs(const Series& a, const Series& b, long from, long to) {
  for (long k = from; k < to; ++k)
    if (a.coeff(k) != b.coeff(k)) return false;
  return true;
}

}  // namespace

TEST(Series, ComposeRevertIntegrate) {
  const long M = 14;
  Series t = Series::variable(P7, M, N);
  Series s = (t + t * t).truncated(M);
  EXPECT_TRUE(same_coeffs(s.compose(t), s, 0, M));
  Series r = s.revert();
  EXPECT_TRUE(same_coeffs(r.compose(s), t, 0, M));
  EXPECT_TRUE(same_coeffs(s.compose(r), t, 0, M));
  // The inverse of t + t^2 has signed Catalan coefficients.
  const long catalan[] = {1, 1, 2, 5, 14, 42};
  for (long k = 1; k <= 6; ++k) EXPECT_EQ(r.coeff(k), num(k % 2 ? catalan[k - 1] : -catalan[k - 1]));

  Series lin = Series::from_coeffs(P7, 0, {num(1), num(2)}, N);
  Series I = lin.integral();
  EXPECT_TRUE(I.coeff(0).is_zero());
  EXPECT_EQ(I.coeff(1), num(1));
  EXPECT_EQ(I.coeff(2), num(1));
  // Dividing the t^6 coefficient by 7 costs one digit.
  Series six = Series::from_coeffs(P7, 0, std::vector<Padic>(7, num(1)), N);
  EXPECT_EQ(six.integral().coeff(7).valuation(), -1);
  EXPECT_EQ(six.integral().coeff(7).precision_absolute(), N - 1);
  EXPECT_THROW(s.compose(lin), domain_error);
  EXPECT_THROW(lin.revert(), domain_error);
}

TEST(Series, ExpLogRoundTrip) {
  const long M = 12;
  Series t = Series::variable(P7, M, N);
  Series h = (num(7) * t + num(3) * t * t).truncated(M);
  EXPECT_TRUE(same_coeffs(h.exp().log(), h, 0, M));
  Series u = Series::from_coeffs(P7, -2, {num(1), num(3), num(5)}, N);
  EXPECT_TRUE(same_coeffs(u * u.inverse(), Series::constant(num(1), 1, N), 0, 1));
}

TEST(Hensel, BivariateLinear) {
  // (t1 - a, t2 - b)
  const Padic a = num(21), b = num(-35);
  std::array<Series2, 2> F{Series2(P7, 3, N), Series2(P7, 3, N)};
  F[0].at(0, 0) = -a;
  F[0].at(1, 0) = num(1);
  F[1].at(0, 0) = -b;
  F[1].at(0, 1) = num(1);
  HenselResult h = hensel_bivariate(F, {num(0), num(0)});
  ASSERT_EQ(h.status, HenselResult::Status::converged);
  EXPECT_EQ(h.root[0], a);
  EXPECT_EQ(h.root[1], b);
  PlaneRoots R = find_plane_roots(F);
  ASSERT_EQ(R.roots.size(), 1u);
  EXPECT_EQ(R.roots[0].u[0], a);
  EXPECT_TRUE(R.unresolved.empty());
}

TEST(Hensel, BivariateSubdivision) {
  // (t1^2 - 49 u, t2 - t1) with u = 1 + 7 * 3: roots t1 = t2 = +-7 sqrt(u).
  const Padic u = num(22);
  std::array<Series2, 2> F{Series2(P7, 3, N), Series2(P7, 3, N)};
  F[0].at(0, 0) = -(num(49) * u);
  F[0].at(2, 0) = num(1);
  F[1].at(0, 1) = num(1);
  F[1].at(1, 0) = num(-1);
  EXPECT_EQ(hensel_bivariate(F, {num(0), num(0)}).status, HenselResult::Status::subdivide);
  PlaneRoots R = find_plane_roots(F);
  EXPECT_TRUE(R.unresolved.empty());
  ASSERT_EQ(R.roots.size(), 2u);
  const Padic s = u.sqrt();
  std::set<unsigned long> residues;
  for (const auto& r : R.roots) {
    EXPECT_EQ(r.depth, 1);
    EXPECT_TRUE(F[0].eval(r.u[0], r.u[1]).is_zero());
    EXPECT_TRUE(F[1].eval(r.u[0], r.u[1]).is_zero());
    EXPECT_TRUE(r.u[0] == num(7) * s || r.u[0] == -(num(7) * s));
    residues.insert(mpz_fdiv_ui(mpz_class(r.u[0].lift() / 7).get_mpz_t(), 7));
  }
  // Brute force: zeros of F modulo 7^4 in the class (0, 0).
  std::set<long> zeros;
  for (long x = 0; x < 2401; x += 7)
    if ((x * x - 49 * 22) % 2401 == 0) zeros.insert(x);
  std::set<long> found;
  for (const auto& r : R.roots) found.insert(mpz_class(r.u[0].lift() % 2401).get_si());
  EXPECT_TRUE(std::includes(zeros.begin(), zeros.end(), found.begin(), found.end()));
  EXPECT_EQ(residues.size(), 2u);
}
