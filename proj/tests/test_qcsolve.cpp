#include <gtest/gtest.h>

#include <random>

#include "qcec/pipeline.hpp"
#include "qcec/qcsolve.hpp"
#include "support.hpp"

using namespace qcec;
using qcec::testing::agreement;
using qcec::testing::load_fixture;

namespace {

constexpr long N = 25;
constexpr Character kChars[] = {Character::cyclotomic, Character::anticyclotomic};

HeightContext context(const CurveManifest& m, prime_t p) { return height_context(m, p, N, disk_truncation(p, N)); }

std::array<Point<Padic>, 2> embedded(const HeightContext& H, const KPoint& R) {
  const long prec = H.working_precision() + 8;
  return {embed_point(R, H.splitting(), 0, prec), embed_point(R, H.splitting(), 1, prec)};
}

long digits(const Padic& x) { return x.is_zero() ? x.precision_absolute() : x.valuation(); }

}  // namespace

TEST(QCSolve, EllipticLogarithm) {
  const CurveManifest m = load_fixture("u1.manifest");
  const KCurve E = m.curve();
  const HeightContext H = context(m, 7);
  const auto fP = H.elliptic_log(m.P), fQ = H.elliptic_log(m.Q);
  const auto fS = H.elliptic_log(E.add(m.P, m.Q));
  const auto f3 = H.elliptic_log(E.mul(m.P, 3));
  for (size_t i = 0; i < 2; ++i) {
    EXPECT_GE(agreement(fS[i], fP[i] + fQ[i]), N - 2);
    EXPECT_GE(agreement(f3[i], Padic::from_integer(7, 3, N) * fP[i]), N - 2);
  }
  // The local logarithm does not depend on the multiplier used.
  const auto R = embedded(H, m.P);
  for (int i = 0; i < 2; ++i) {
    const Padic a = elliptic_log_at(H, i, R[static_cast<size_t>(i)]);
    EXPECT_GE(agreement(a, elliptic_log_at(H, i, R[static_cast<size_t>(i)], 26)), N - 2);
    EXPECT_GE(agreement(a, fP[static_cast<size_t>(i)]), N - 2);
  }
  EXPECT_THROW(elliptic_log_at(H, 0, R[0], 5), domain_error);
}

TEST(QCSolve, BilinearForms) {
  std::mt19937_64 g(4);
  auto r = [&] { return qcec::testing::random_padic(g, 7, N); };
  for (int k = 0; k < 50; ++k) {
    const std::array<Padic, 2> a{r(), r()}, b{r(), r()};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        EXPECT_EQ(g_form(i, j, a, b), g_form(i, j, b, a));
        EXPECT_EQ(g_form(i, j, a, b), g_form(j, i, a, b));
      }
    EXPECT_EQ(g_form(0, 0, a, a), a[0] * a[0]);
    EXPECT_EQ(g_form(0, 1, a, a), a[0] * a[1]);
  }
}

TEST(QCSolve, AlphaReproducesHeights) {
  for (const char* name : {"u1.manifest", "u3.manifest"}) {
    const CurveManifest m = load_fixture(name);
    const KCurve E = m.curve();
    const HeightContext H = context(m, m.p);
    for (Character chi : kChars) {
      const AlphaCoefficients a = solve_alpha(H, m.P, m.Q, chi);
      for (const KPoint& R : {E.add(E.mul(m.P, 2), m.Q), E.add(m.P, E.mul(m.Q, -3))})
        EXPECT_GE(agreement(a.eval(H.elliptic_log(R)), H.height(R, chi)), N - 8) << name << " " << to_string(chi);
    }
  }
}

TEST(QCSolve, BaseChangeAlphaIsAntisymmetric) {
  // f_2 = f_1 o conj and h^anti(conj R) = -h^anti(R) force a11 = -a22 and
  // a12 = 0.
  const CurveManifest m = load_fixture("mordell.manifest");
  const HeightContext H = context(m, 7);
  const AlphaCoefficients a = solve_alpha(H, m.P, m.Q, Character::anticyclotomic);
  EXPECT_GE(digits(a.a11 + a.a22), N - 8);
  EXPECT_GE(digits(a.a12), N - 8);
}

TEST(QCSolve, KnownPointsHitTheTSet) {
  // rho(R) = h(R) - sum over p of lambda is the away part, which is in T.
  for (const char* name : {"u1.manifest", "u3.manifest"}) {
    const CurveManifest m = load_fixture(name);
    const HeightContext H = context(m, m.p);
    const AlphaCoefficients ac = solve_alpha(H, m.P, m.Q, Character::cyclotomic);
    const AlphaCoefficients aa = solve_alpha(H, m.P, m.Q, Character::anticyclotomic);
    const TSet Tc = H.tset(Character::cyclotomic), Ta = H.tset(Character::anticyclotomic);
    for (const KPoint& R : m.known) {
      const auto Rp = embedded(H, R);
      const Padic rc = rho_at(H, ac, Rp), ra = rho_at(H, aa, Rp);
      long best = -1000;
      for (size_t k = 0; k < Tc.values.size(); ++k)
        best = std::max(best, std::min(agreement(rc, Tc.values[k]), agreement(ra, Ta.values[k])));
      EXPECT_GE(best, N - 8) << name << " " << point_text(R);
    }
  }
}

TEST(QCSolve, DiskExpansionMatchesPointwise) {
  const CurveManifest m = load_fixture("u1.manifest");
  const HeightContext H = context(m, 7);
  const long K = disk_truncation(7, N);
  const AlphaCoefficients a = solve_alpha(H, m.P, m.Q, Character::cyclotomic);
  DiskFactory F1(H, 0, K), F2(H, 1, K);
  const auto pts1 = enumerate_points(H.reduction(0)), pts2 = enumerate_points(H.reduction(1));
  std::mt19937_64 g(6);
  int checked = 0;
  for (size_t k = 0; k < pts1.size() && checked < 3; ++k) {
    if (pts1[k].inf || pts2[k].inf) continue;
    const Disk D1 = F1.make(pts1[k], 0), D2 = F2.make(pts2[k], 0);
    EXPECT_TRUE(H.local_curve(0).on_curve(D1.center));
    const Series2 r = rho_expand(H, a, D1, D2);
    for (int t = 0; t < 3; ++t) {
      const Padic u1 = qcec::testing::random_padic(g, 7, N), u2 = qcec::testing::random_padic(g, 7, N);
      const Padic pointwise = rho_at(H, a, {D1.point(u1), D2.point(u2)});
      EXPECT_GE(agreement(r.eval(u1, u2), pointwise), N - 8);
      EXPECT_GE(agreement(D1.F.eval(u1), elliptic_log_at(H, 0, D1.point(u1))), N - 4);
    }
    ++checked;
  }
  EXPECT_EQ(checked, 3);
}

TEST(QCSolve, RationalReconstruction) {
  const mpz_class bound = recognition_bound(7, N);
  EXPECT_EQ(bound, mpz_class(282475249));  // 7^10
  mpq_class q;
  ASSERT_TRUE(rational_reconstruct(Padic::from_rational(7, 3, 5, N), N, bound, q));
  EXPECT_EQ(q, mpq_class(3, 5));
  ASSERT_TRUE(rational_reconstruct(Padic::from_rational(7, -1234, 9871, N), N, bound, q));
  EXPECT_EQ(q, mpq_class(-1234, 9871));
  EXPECT_FALSE(rational_reconstruct(Padic::from_rational(7, 1, 7, N), N, bound, q));
  std::mt19937_64 g(8);
  int spurious = 0;
  for (int k = 0; k < 200; ++k)
    spurious += rational_reconstruct(qcec::testing::random_padic(g, 7, N), N, mpz_class(1000), q) ? 1 : 0;
  EXPECT_EQ(spurious, 0);
}

TEST(QCSolve, RecognizesPlantedElements) {
  const QuadField F = QuadField::imaginary(-3);
  const PrimeSplitting s = split_prime(F, 7, 80);
  const mpz_class bound = recognition_bound(7, N);
  std::mt19937_64 g(10);
  std::uniform_int_distribution<long> c(-1000000, 1000000);
  for (int k = 0; k < 300; ++k) {
    const QuadRat x(QuadInt(F, c(g), c(g)));
    const auto r = recognize_element(s, s.embed(x, 0, N), s.embed(x, 1, N), N, bound);
    ASSERT_TRUE(r.has_value()) << x.to_string();
    EXPECT_EQ(*r, x);
  }
  // small denominators as well
  const QuadRat y(QuadInt(F, 5, -3), 4);
  EXPECT_EQ(recognize_element(s, s.embed(y, 0, N), s.embed(y, 1, N), N, bound), y);
  int spurious = 0;
  for (int k = 0; k < 200; ++k) {
    const Padic z1 = qcec::testing::random_padic(g, 7, N), z2 = qcec::testing::random_padic(g, 7, N);
    spurious += recognize_element(s, z1, z2, N, bound).has_value() ? 1 : 0;
  }
  EXPECT_EQ(spurious, 0);
}

TEST(QCSolve, RecognizesPlantedPoints) {
  const CurveManifest m = load_fixture("u1.manifest");
  const HeightContext H = context(m, 7);
  for (const KPoint& R : m.known) {
    const auto got = recognize_point(H, embedded(H, R), N);
    ASSERT_TRUE(got.has_value()) << point_text(R);
    EXPECT_EQ(*got, R);
  }
  // A Z_p-point of the disk that is not algebraic stays a mock point.
  const Disk D1 = DiskFactory(H, 0, disk_truncation(7, N)).make(reduce_point(m.P, H.splitting(), 0), 0);
  const Disk D2 = DiskFactory(H, 1, disk_truncation(7, N)).make(reduce_point(m.P, H.splitting(), 1), 0);
  std::mt19937_64 g(12);
  const Padic u1 = qcec::testing::random_padic(g, 7, N), u2 = qcec::testing::random_padic(g, 7, N);
  EXPECT_FALSE(recognize_point(H, {D1.point(u1), D2.point(u2)}, N).has_value());
}

TEST(QCSolve, U1AtSeven) {
  const CurveManifest m = load_fixture("u1.manifest");
  const HeightContext H = context(m, 7);
  QCOptions opt;
  opt.precision = N;
  const QCResult r = solve_disks(H, m.P, m.Q, opt);
  EXPECT_EQ(r.group_orders, (std::array<long, 2>{13, 13}));
  EXPECT_TRUE(r.unresolved.empty());
  EXPECT_EQ(r.recognized_count(), 12);
  EXPECT_EQ(r.mock_count(), 204);
  for (const KPoint& R : m.known) {
    const bool found = std::any_of(r.B.begin(), r.B.end(), [&](const Solution& s) { return s.point && *s.point == R; });
    EXPECT_TRUE(found) << point_text(R);
  }
  for (const Solution& s : r.B) {
    EXPECT_GE(digits(s.residual[0]), N - 8);
    EXPECT_GE(digits(s.residual[1]), N - 8);
    EXPECT_TRUE(H.local_curve(0).on_curve(s.R[0]));
    EXPECT_TRUE(H.local_curve(1).on_curve(s.R[1]));
  }
  // no root is reported twice
  for (size_t a = 0; a < r.B.size(); ++a)
    for (size_t b = a + 1; b < r.B.size(); ++b) {
      const Solution &x = r.B[a], &y = r.B[b];
      if (x.disk1 != y.disk1 || x.disk2 != y.disk2 || x.target != y.target) continue;
      EXPECT_FALSE(agreement(x.u[0], y.u[0]) >= N - 2 && agreement(x.u[1], y.u[1]) >= N - 2);
    }
}
