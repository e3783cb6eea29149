#pragma once

// Weierstrass curves over any field-like type (K, Q_p, F_p, series rings),
// the group law, division polynomials, reduction modulo split primes and
// point counting.

#include <gmpxx.h>

#include <array>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "qcec/poly.hpp"
#include "qcec/quadfield.hpp"
#include "qcec/series.hpp"

namespace qcec {

// Integers modulo a small odd prime.
class Zmod {
 public:
  Zmod() = default;
  Zmod(long v, long p) : p_(p), v_(((v % p) + p) % p) {}
  long value() const { return v_; }
  long modulus() const { return p_; }
  bool is_zero() const { return v_ == 0; }
  friend Zmod operator+(Zmod a, Zmod b) { return Zmod(a.v_ + b.v_, a.p_); }
  friend Zmod operator-(Zmod a, Zmod b) { return Zmod(a.v_ - b.v_, a.p_); }
  Zmod operator-() const { return Zmod(-v_, p_); }
  friend Zmod operator*(Zmod a, Zmod b) { return Zmod(static_cast<long>((static_cast<__int128>(a.v_) * b.v_) % a.p_), a.p_); }
  Zmod inverse() const {
    if (v_ == 0) throw domain_error("inverse of zero modulo p");
    long r0 = p_, r1 = v_, s0 = 0, s1 = 1;
    while (r1 != 0) {
      long q = r0 / r1;
      long t = r0 - q * r1;
      r0 = r1;
      r1 = t;
      t = s0 - q * s1;
      s0 = s1;
      s1 = t;
    }
    return Zmod(s0, p_);
  }
  friend Zmod operator/(Zmod a, Zmod b) { return a * b.inverse(); }
  friend bool operator==(Zmod a, Zmod b) { return a.v_ == b.v_; }
  friend bool operator!=(Zmod a, Zmod b) { return a.v_ != b.v_; }
  friend bool operator<(Zmod a, Zmod b) { return a.v_ < b.v_; }

 private:
  long p_ = 1;
  long v_ = 0;
};

// Integer constants in the ring of a sample element.
inline QuadRat constant_like(const QuadRat& x, long k) { return QuadRat(x.field(), k); }
inline Padic constant_like(const Padic& x, long k) {
  return Padic::from_integer(x.prime(), k, std::max(x.precision_absolute(), x.precision_relative()) + 64);
}
inline Zmod constant_like(const Zmod& x, long k) { return Zmod(k, x.modulus()); }
inline Series constant_like(const Series& x, long k) {
  return Series::constant(Padic::from_integer(x.prime(), k, x.cap() + 64), std::max(x.high(), 1L), x.cap());
}

template <class F>
struct Point {
  F x{}, y{};
  bool inf = true;

  static Point infinity() { return Point{}; }
  static Point affine(F x, F y) { return Point{std::move(x), std::move(y), false}; }
  friend bool operator==(const Point& P, const Point& Q) {
    if (P.inf || Q.inf) return P.inf && Q.inf;
    return P.x == Q.x && P.y == Q.y;
  }
  friend bool operator!=(const Point& P, const Point& Q) { return !(P == Q); }
};

template <class F>
class Weierstrass {
 public:
  // a1, a2, a3, a4, a6
  std::array<F, 5> a;

  Weierstrass() = default;
  explicit Weierstrass(std::array<F, 5> coeffs) : a(std::move(coeffs)) {}

  const F& a1() const { return a[0]; }
  const F& a2() const { return a[1]; }
  const F& a3() const { return a[2]; }
  const F& a4() const { return a[3]; }
  const F& a6() const { return a[4]; }

  F k(long v) const { return constant_like(a[0], v); }

  F b2() const { return a1() * a1() + k(4) * a2(); }
  F b4() const { return k(2) * a4() + a1() * a3(); }
  F b6() const { return a3() * a3() + k(4) * a6(); }
  F b8() const {
    return a1() * a1() * a6() + k(4) * a2() * a6() - a1() * a3() * a4() + a2() * a3() * a3() - a4() * a4();
  }
  F c4() const { return b2() * b2() - k(24) * b4(); }
  F c6() const { return -(b2() * b2() * b2()) + k(36) * b2() * b4() - k(216) * b6(); }
  F discriminant() const {
    return -(b2() * b2() * b8()) - k(8) * b4() * b4() * b4() - k(27) * b6() * b6() + k(9) * b2() * b4() * b6();
  }

  // y^2 + a1 x y + a3 y - (x^3 + a2 x^2 + a4 x + a6)
  F equation(const F& x, const F& y) const {
    return y * y + a1() * x * y + a3() * y - (x * x * x + a2() * x * x + a4() * x + a6());
  }
  bool on_curve(const Point<F>& P) const { return P.inf || equation(P.x, P.y).is_zero(); }

  Point<F> neg(const Point<F>& P) const {
    if (P.inf) return P;
    return Point<F>::affine(P.x, -P.y - a1() * P.x - a3());
  }

  Point<F> add(const Point<F>& P, const Point<F>& Q) const {
    if (P.inf) return Q;
    if (Q.inf) return P;
    F lambda, nu;
    if ((P.x - Q.x).is_zero()) {
      F s = P.y + Q.y + a1() * Q.x + a3();
      if (s.is_zero()) return Point<F>::infinity();
      F den = k(2) * P.y + a1() * P.x + a3();
      lambda = (k(3) * P.x * P.x + k(2) * a2() * P.x + a4() - a1() * P.y) / den;
      nu = (-(P.x * P.x * P.x) + a4() * P.x + k(2) * a6() - a3() * P.y) / den;
    } else {
      F dx = Q.x - P.x;
      lambda = (Q.y - P.y) / dx;
      nu = (P.y * Q.x - Q.y * P.x) / dx;
    }
    F x3 = lambda * lambda + a1() * lambda - a2() - P.x - Q.x;
    F y3 = -(lambda + a1()) * x3 - nu - a3();
    return Point<F>::affine(std::move(x3), std::move(y3));
  }

  Point<F> sub(const Point<F>& P, const Point<F>& Q) const { return add(P, neg(Q)); }

  Point<F> mul(const Point<F>& P, long n) const {
    if (n < 0) return mul(neg(P), -n);
    Point<F> R = Point<F>::infinity(), B = P;
    while (n > 0) {
      if (n & 1) R = add(R, B);
      n >>= 1;
      if (n) B = add(B, B);
    }
    return R;
  }

  template <class G, class Map>
  Weierstrass<G> map(Map&& f) const {
    return Weierstrass<G>({f(a[0]), f(a[1]), f(a[2]), f(a[3]), f(a[4])});
  }
};

// g_0 .. g_m with psi_m = g_m (m odd) and psi_m = psi_2 g_m (m even), built
// from ring operations on the value x only.
template <class T>
std::vector<T> division_g_table(const Weierstrass<T>& E, const T& x, long m) {
  auto k = [&](long v) { return E.k(v); };
  const T b2 = E.b2(), b4 = E.b4(), b6 = E.b6(), b8 = E.b8();
  const T x2 = x * x, x3 = x2 * x;
  const T Fx = k(4) * x3 + b2 * x2 + k(2) * b4 * x + b6;  // psi_2^2
  const T F2 = Fx * Fx;
  const long n = std::max(m, 4L) + 1;
  std::vector<T> g(static_cast<size_t>(n));
  g[0] = k(0);
  g[1] = k(1);
  g[2] = k(1);
  const T x4 = x2 * x2;
  g[3] = k(3) * x4 + b2 * x3 + k(3) * b4 * x2 + k(3) * b6 * x + b8;
  g[4] = k(2) * x4 * x2 + b2 * x4 * x + k(5) * b4 * x4 + k(10) * b6 * x3 + k(10) * b8 * x2 +
         (b2 * b8 - b4 * b6) * x + (b4 * b8 - b6 * b6);
  for (long j = 5; j < n; ++j) {
    long h = j / 2;
    auto G = [&](long i) -> const T& { return g[static_cast<size_t>(i)]; };
    if (j % 2 == 0) {
      g[static_cast<size_t>(j)] = G(h) * (G(h + 2) * G(h - 1) * G(h - 1) - G(h - 2) * G(h + 1) * G(h + 1));
    } else if (h % 2 == 0) {
      g[static_cast<size_t>(j)] = F2 * G(h + 2) * G(h) * G(h) * G(h) - G(h - 1) * G(h + 1) * G(h + 1) * G(h + 1);
    } else {
      g[static_cast<size_t>(j)] = G(h + 2) * G(h) * G(h) * G(h) - F2 * G(h - 1) * G(h + 1) * G(h + 1) * G(h + 1);
    }
  }
  g.resize(static_cast<size_t>(m + 1));
  return g;
}

// psi_m(x, y)
template <class T>
T division_psi(const Weierstrass<T>& E, const T& x, const T& y, long m) {
  if (m < 0) return -division_psi(E, x, y, -m);
  if (m == 0) return E.k(0);
  T g = division_g_table(E, x, m).back();
  if (m % 2 == 0) g = (E.k(2) * y + E.a1() * x + E.a3()) * g;
  return g;
}

// The polynomial in x whose roots are the x-coordinates of points of exact
// order dividing m other than those of order <= 2 (for even m).  For m = 2
// it is 4x^3 + b2 x^2 + 2 b4 x + b6.
inline Poly<Padic> division_poly_x(const Weierstrass<Padic>& E, long m) {
  const Padic z = Padic::zero(E.a1().prime(), E.a1().precision_absolute() + 64);
  using P = Poly<Padic>;
  auto mk = [&](long v) { return P::constant(z, constant_like(E.a1(), v)); };
  Weierstrass<P> Ep({P::constant(z, E.a[0]), P::constant(z, E.a[1]), P::constant(z, E.a[2]),
                     P::constant(z, E.a[3]), P::constant(z, E.a[4])});
  P x = P::monomial(z, constant_like(E.a1(), 1), 1);
  if (m == 2) return mk(4) * x * x * x + P::constant(z, E.b2()) * x * x + mk(2) * P::constant(z, E.b4()) * x +
                     P::constant(z, E.b6());
  return division_g_table(Ep, x, m).back();
}

inline Poly<Padic> constant_like(const Poly<Padic>& x, long k) {
  return Poly<Padic>::constant(x.zero(), constant_like(x.zero(), k));
}

// ---------------------------------------------------------------------------
// Curves over F_p

inline long legendre(long a, long p) {
  a = ((a % p) + p) % p;
  if (a == 0) return 0;
  mpz_class r;
  mpz_powm_ui(r.get_mpz_t(), mpz_class(a).get_mpz_t(), static_cast<unsigned long>((p - 1) / 2), mpz_class(p).get_mpz_t());
  return r == 1 ? 1 : -1;
}

inline long count_points(const Weierstrass<Zmod>& E) {
  const long p = E.a1().modulus();
  long count = 1;
  for (long xv = 0; xv < p; ++xv) {
    Zmod x(xv, p);
    Zmod b = E.a1() * x + E.a3();
    Zmod c = x * x * x + E.a2() * x * x + E.a4() * x + E.a6();
    Zmod D = b * b + Zmod(4, p) * c;
    count += 1 + legendre(D.value(), p);
  }
  return count;
}

inline std::vector<Point<Zmod>> enumerate_points(const Weierstrass<Zmod>& E) {
  const long p = E.a1().modulus();
  std::vector<long> root(static_cast<size_t>(p), -1);
  for (long y = 0; y < p; ++y) root[static_cast<size_t>((y * y) % p)] = y;
  std::vector<Point<Zmod>> pts{Point<Zmod>::infinity()};
  const Zmod inv2 = Zmod(2, p).inverse();
  for (long xv = 0; xv < p; ++xv) {
    Zmod x(xv, p);
    Zmod b = E.a1() * x + E.a3();
    Zmod c = x * x * x + E.a2() * x * x + E.a4() * x + E.a6();
    Zmod D = b * b + Zmod(4, p) * c;
    long r = root[static_cast<size_t>(D.value())];
    if (r < 0) continue;
    Zmod y1 = (Zmod(r, p) - b) * inv2;
    pts.push_back(Point<Zmod>::affine(x, y1));
    if (r != 0) pts.push_back(Point<Zmod>::affine(x, (-Zmod(r, p) - b) * inv2));
  }
  return pts;
}

inline std::vector<long> prime_factors(long n) {
  std::vector<long> f;
  for (long q = 2; q * q <= n; ++q)
    if (n % q == 0) {
      f.push_back(q);
      while (n % q == 0) n /= q;
    }
  if (n > 1) f.push_back(n);
  return f;
}

// Order of P in a group of order N.
inline long point_order(const Weierstrass<Zmod>& E, const Point<Zmod>& P, long N) {
  long ord = N;
  for (long q : prime_factors(N))
    while (ord % q == 0 && E.mul(P, ord / q).inf) ord /= q;
  return ord;
}

struct PointKey {
  bool inf;
  long x, y;
  friend bool operator<(const PointKey& a, const PointKey& b) {
    return std::tie(a.inf, a.x, a.y) < std::tie(b.inf, b.x, b.y);
  }
  friend bool operator==(const PointKey& a, const PointKey& b) { return a.inf == b.inf && a.x == b.x && a.y == b.y; }
};
inline PointKey key_of(const Point<Zmod>& P) {
  return P.inf ? PointKey{true, 0, 0} : PointKey{false, P.x.value(), P.y.value()};
}

// ---------------------------------------------------------------------------
// Curves over K

using KPoint = Point<QuadRat>;
using KCurve = Weierstrass<QuadRat>;

inline KCurve make_curve(const std::array<QuadInt, 5>& a) {
  return KCurve({QuadRat(a[0]), QuadRat(a[1]), QuadRat(a[2]), QuadRat(a[3]), QuadRat(a[4])});
}

inline QuadInt integral_discriminant(const KCurve& E) {
  QuadRat D = E.discriminant();
  if (!D.is_integral()) throw domain_error("discriminant is not integral");
  return D.num();
}

inline Weierstrass<Zmod> reduce_curve(const KCurve& E, const PrimeSplitting& s, int i) {
  return E.map<Zmod>([&](const QuadRat& c) {
    Padic v = s.embed(c, i, 4);
    if (v.valuation() < 0) throw domain_error("coefficient is not integral at the prime");
    return Zmod(static_cast<long>(v.residue()), static_cast<long>(s.p));
  });
}

inline Point<Zmod> reduce_point(const KPoint& P, const PrimeSplitting& s, int i) {
  if (P.inf) return Point<Zmod>::infinity();
  Padic x = s.embed(P.x, i, 4), y = s.embed(P.y, i, 4);
  if (x.valuation() < 0 || y.valuation() < 0) return Point<Zmod>::infinity();
  const long p = static_cast<long>(s.p);
  return Point<Zmod>::affine(Zmod(static_cast<long>(x.residue()), p), Zmod(static_cast<long>(y.residue()), p));
}

inline Weierstrass<Padic> embed_curve(const KCurve& E, const PrimeSplitting& s, int i, long prec) {
  return E.map<Padic>([&](const QuadRat& c) { return s.embed(c, i, prec); });
}

inline Point<Padic> embed_point(const KPoint& P, const PrimeSplitting& s, int i, long prec) {
  if (P.inf) return Point<Padic>::infinity();
  return Point<Padic>::affine(s.embed(P.x, i, prec), s.embed(P.y, i, prec));
}

// Nonsingular reduction at the prime element pi (identity component of the
// Neron model for a minimal model).
inline bool nonsingular_at(const KCurve& E, const QuadInt& pi, const KPoint& P) {
  if (P.inf) return true;
  if (P.x.is_zero() == false && valuation(P.x, pi) < 0) return true;
  if (!P.y.is_zero() && valuation(P.y, pi) < 0) return true;
  QuadRat fx = E.a1() * P.y - (E.k(3) * P.x * P.x + E.k(2) * E.a2() * P.x + E.a4());
  QuadRat fy = E.k(2) * P.y + E.a1() * P.x + E.a3();
  auto unit_at = [&](const QuadRat& v) { return !v.is_zero() && valuation(v, pi) == 0; };
  return unit_at(fx) || unit_at(fy);
}

inline long lcm_long(long a, long b) { return a / std::gcd(a, b) * b; }

}  // namespace qcec
