#pragma once

// Imaginary quadratic fields of class number one with Euclidean rings of
// integers: Q(sqrt d) for d in {-3, -4, -7, -8, -11}.  Integers are written
// a + b w in the basis 1, w where w^2 + t w + n = 0.

#include <gmpxx.h>

#include <array>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "qcec/bivariate.hpp"
#include "qcec/padic.hpp"
#include "qcec/poly.hpp"

namespace qcec {

struct QuadField {
  int d = -3;
  long t = 1;  // w^2 + t w + n = 0
  long n = 1;

  static QuadField imaginary(int d) {
    switch (d) {
      case -3: return {-3, 1, 1};
      case -4: return {-4, 0, 1};
      case -7: return {-7, -1, 2};
      case -8: return {-8, 0, 2};
      case -11: return {-11, -1, 3};
      default: throw unsupported_error("field Q(sqrt " + std::to_string(d) + ") is not norm-Euclidean imaginary");
    }
  }

  long discriminant() const { return t * t - 4 * n; }
  friend bool operator==(const QuadField& a, const QuadField& b) { return a.d == b.d; }
};

class QuadInt {
 public:
  QuadInt() = default;
  QuadInt(const QuadField& F, mpz_class a, mpz_class b = 0) : F_(F), a_(std::move(a)), b_(std::move(b)) {}
  QuadInt(const QuadField& F, long a, long b = 0) : F_(F), a_(a), b_(b) {}

  static QuadInt w(const QuadField& F) { return QuadInt(F, 0L, 1L); }

  const QuadField& field() const { return F_; }
  const mpz_class& a() const { return a_; }
  const mpz_class& b() const { return b_; }
  bool is_zero() const { return a_ == 0 && b_ == 0; }

  mpz_class norm() const { return a_ * a_ - F_.t * a_ * b_ + F_.n * b_ * b_; }
  mpz_class trace() const { return 2 * a_ - F_.t * b_; }
  QuadInt conj() const { return QuadInt(F_, a_ - F_.t * b_, -b_); }
  bool is_unit() const { return norm() == 1; }

  friend QuadInt operator+(const QuadInt& x, const QuadInt& y) { return QuadInt(x.F_, x.a_ + y.a_, x.b_ + y.b_); }
  friend QuadInt operator-(const QuadInt& x, const QuadInt& y) { return QuadInt(x.F_, x.a_ - y.a_, x.b_ - y.b_); }
  QuadInt operator-() const { return QuadInt(F_, -a_, -b_); }
  friend QuadInt operator*(const QuadInt& x, const QuadInt& y) {
    mpz_class bd = x.b_ * y.b_;
    return QuadInt(x.F_, x.a_ * y.a_ - x.F_.n * bd, x.a_ * y.b_ + x.b_ * y.a_ - x.F_.t * bd);
  }
  friend QuadInt operator*(const mpz_class& s, const QuadInt& x) { return QuadInt(x.F_, s * x.a_, s * x.b_); }
  friend bool operator==(const QuadInt& x, const QuadInt& y) { return x.a_ == y.a_ && x.b_ == y.b_; }
  friend bool operator!=(const QuadInt& x, const QuadInt& y) { return !(x == y); }

  // Exact quotient; throws when y does not divide x.
  QuadInt divexact(const QuadInt& y) const {
    QuadInt q;
    if (!try_divide(y, q)) throw domain_error("inexact division in O_K");
    return q;
  }
  bool divisible_by(const QuadInt& y) const {
    QuadInt q;
    return try_divide(y, q);
  }
  bool try_divide(const QuadInt& y, QuadInt& q) const {
    if (y.is_zero()) throw domain_error("division by zero in O_K");
    mpz_class N = y.norm();
    QuadInt m = *this * y.conj();
    if (!mpz_divisible_p(m.a_.get_mpz_t(), N.get_mpz_t()) || !mpz_divisible_p(m.b_.get_mpz_t(), N.get_mpz_t()))
      return false;
    mpz_class qa, qb;
    mpz_divexact(qa.get_mpz_t(), m.a_.get_mpz_t(), N.get_mpz_t());
    mpz_divexact(qb.get_mpz_t(), m.b_.get_mpz_t(), N.get_mpz_t());
    q = QuadInt(F_, qa, qb);
    return true;
  }

  // x = q y + r with Nm(r) < Nm(y), q the lattice point nearest x/y.
  std::pair<QuadInt, QuadInt> divmod(const QuadInt& y) const {
    if (y.is_zero()) throw domain_error("division by zero in O_K");
    mpz_class N = y.norm();
    QuadInt m = *this * y.conj();
    mpz_class qa0, qb0;
    mpz_fdiv_q(qa0.get_mpz_t(), m.a_.get_mpz_t(), N.get_mpz_t());
    mpz_fdiv_q(qb0.get_mpz_t(), m.b_.get_mpz_t(), N.get_mpz_t());
    QuadInt best_q, best_r;
    bool have = false;
    for (int da = -1; da <= 2; ++da)
      for (int db = -1; db <= 2; ++db) {
        QuadInt q(F_, qa0 + da, qb0 + db);
        QuadInt r = *this - q * y;
        if (!have || r.norm() < best_r.norm()) {
          best_q = q;
          best_r = r;
          have = true;
        }
      }
    if (best_r.norm() >= N) throw domain_error("division remainder is not smaller; field is not norm-Euclidean");
    return {best_q, best_r};
  }

  std::string to_string() const {
    if (b_ == 0) return a_.get_str();
    std::string s;
    if (b_ == 1)
      s = "w";
    else if (b_ == -1)
      s = "-w";
    else
      s = b_.get_str() + "*w";
    if (a_ > 0) s += "+" + a_.get_str();
    if (a_ < 0) s += a_.get_str();
    return s;
  }

  // Accepts integer combinations of 1 and w such as "-8*w-4", "w+1", "3".
  static QuadInt parse(const QuadField& F, const std::string& text) {
    std::string s;
    for (char c : text)
      if (c != ' ' && c != '\t') s += c;
    if (s.empty()) throw validation_error("empty field element");
    mpz_class a = 0, b = 0;
    size_t pos = 0;
    while (pos < s.size()) {
      size_t end = pos + 1;
      while (end < s.size() && s[end] != '+' && s[end] != '-') ++end;
      std::string term = s.substr(pos, end - pos);
      pos = end;
      int sign = 1;
      if (term[0] == '+' || term[0] == '-') {
        if (term[0] == '-') sign = -1;
        term = term.substr(1);
      }
      if (term.empty()) throw validation_error("malformed field element: " + text);
      bool has_w = term.back() == 'w';
      if (has_w) {
        term.pop_back();
        if (!term.empty() && term.back() == '*') term.pop_back();
        if (term.empty()) term = "1";
      }
      for (char c : term)
        if (c < '0' || c > '9') throw validation_error("malformed field element: " + text);
      mpz_class v(term);
      (has_w ? b : a) += sign * v;
    }
    return QuadInt(F, a, b);
  }

 private:
  QuadField F_{};
  mpz_class a_ = 0, b_ = 0;
};

inline std::vector<QuadInt> units(const QuadField& F) {
  std::vector<QuadInt> u{QuadInt(F, 1L), QuadInt(F, -1L)};
  if (F.d == -4) {
    u.push_back(QuadInt::w(F));
    u.push_back(-QuadInt::w(F));
  }
  if (F.d == -3) {
    QuadInt w = QuadInt::w(F);
    u.push_back(w);
    u.push_back(-w);
    u.push_back(w * w);
    u.push_back(-(w * w));
  }
  return u;
}

// Deterministic representative of the associate class: the associate with
// lexicographically smallest (|b|, |a|, b < 0, a < 0), so units normalize to
// 1 and rational integers to positive ones.
inline QuadInt normalize_associate(const QuadInt& x) {
  if (x.is_zero()) return x;
  QuadInt best;
  bool have = false;
  auto key = [](const QuadInt& y) { return std::make_tuple(abs(y.b()), abs(y.a()), y.b() < 0, y.a() < 0); };
  for (const auto& u : units(x.field())) {
    QuadInt y = u * x;
    if (!have || key(y) < key(best)) {
      best = y;
      have = true;
    }
  }
  return best;
}

// Generator of the ideal spanned by `gens`, found as a shortest vector of the
// ideal lattice under the norm form.  Works for operands of any size.
inline QuadInt ideal_generator(const std::vector<QuadInt>& gens) {
  if (gens.empty()) throw domain_error("ideal with no generators");
  const QuadField F = gens.front().field();
  std::vector<std::array<mpz_class, 2>> rows;
  for (const auto& g : gens) {
    if (g.is_zero()) continue;
    QuadInt gw = g * QuadInt::w(F);
    rows.push_back({g.a(), g.b()});
    rows.push_back({gw.a(), gw.b()});
  }
  if (rows.empty()) return QuadInt(F, 0L);
  // Hermite form {(A, 0), (B, C)}: fold the b-coordinates with extended gcds.
  std::array<mpz_class, 2> piv = rows[0];
  std::vector<std::array<mpz_class, 2>> zeros;
  for (size_t k = 1; k < rows.size(); ++k) {
    auto& r = rows[k];
    if (r[1] == 0) {
      zeros.push_back(r);
      continue;
    }
    if (piv[1] == 0) {
      zeros.push_back(piv);
      piv = r;
      continue;
    }
    mpz_class g, s, t;
    mpz_gcdext(g.get_mpz_t(), s.get_mpz_t(), t.get_mpz_t(), piv[1].get_mpz_t(), r[1].get_mpz_t());
    mpz_class u = piv[1] / g, v = r[1] / g;
    std::array<mpz_class, 2> np{s * piv[0] + t * r[0], g};
    std::array<mpz_class, 2> nz{v * piv[0] - u * r[0], 0};
    piv = np;
    zeros.push_back(nz);
  }
  mpz_class A = 0;
  for (const auto& z : zeros) mpz_gcd(A.get_mpz_t(), A.get_mpz_t(), z[0].get_mpz_t());
  mpz_class C = abs(piv[1]), B = piv[1] < 0 ? mpz_class(-piv[0]) : piv[0];
  if (A == 0 || C == 0) throw domain_error("degenerate ideal lattice");
  mpz_fdiv_r(B.get_mpz_t(), B.get_mpz_t(), A.get_mpz_t());
  // Lagrange-Gauss reduction under Q(a, b) = a^2 - t a b + n b^2.
  auto Q = [&](const std::array<mpz_class, 2>& v) {
    return mpz_class(v[0] * v[0] - F.t * v[0] * v[1] + F.n * v[1] * v[1]);
  };
  auto B2 = [&](const std::array<mpz_class, 2>& x, const std::array<mpz_class, 2>& y) {
    return mpz_class(2 * x[0] * y[0] - F.t * (x[0] * y[1] + x[1] * y[0]) + 2 * F.n * x[1] * y[1]);
  };
  std::array<mpz_class, 2> b1{A, 0}, b2{B, C};
  if (Q(b1) > Q(b2)) std::swap(b1, b2);
  for (;;) {
    mpz_class num = B2(b1, b2), den = 2 * Q(b1), mu;
    // nearest integer to num/den
    mpz_class nn = 2 * num + den, dd = 2 * den;
    mpz_fdiv_q(mu.get_mpz_t(), nn.get_mpz_t(), dd.get_mpz_t());
    b2 = {b2[0] - mu * b1[0], b2[1] - mu * b1[1]};
    if (Q(b2) >= Q(b1)) break;
    std::swap(b1, b2);
  }
  QuadInt g(F, b1[0], b1[1]);
  if (g.norm() != A * C) throw domain_error("ideal is not principal");
  return normalize_associate(g);
}

// Norm-Euclidean gcd, normalized to the deterministic associate.  Large
// operands go through the lattice route, which gives the same ideal.
inline QuadInt gcd(QuadInt x, QuadInt y) {
  if (mpz_sizeinbase(x.a().get_mpz_t(), 2) + mpz_sizeinbase(y.a().get_mpz_t(), 2) > 4000)
    return ideal_generator({x, y});
  while (!y.is_zero()) {
    QuadInt r = x.divmod(y).second;
    x = std::move(y);
    y = std::move(r);
  }
  return normalize_associate(x);
}

// Exact square root up to sign, if it exists in O_K.
inline bool sqrt_exact(const QuadInt& alpha, QuadInt& beta) {
  const QuadField F = alpha.field();
  if (alpha.is_zero()) {
    beta = alpha;
    return true;
  }
  mpz_class N = alpha.norm();
  if (!mpz_perfect_square_p(N.get_mpz_t())) return false;
  mpz_class nb = sqrt(N);
  mpz_class tr2 = alpha.trace() + 2 * nb;
  if (tr2 < 0 || !mpz_perfect_square_p(tr2.get_mpz_t())) return false;
  mpz_class tb = sqrt(tr2);
  if (tb == 0) {
    // beta = k (2w + t) with beta^2 = k^2 D
    mpz_class D = F.discriminant();
    if (alpha.b() != 0 || !mpz_divisible_p(alpha.a().get_mpz_t(), D.get_mpz_t())) return false;
    mpz_class k2 = alpha.a() / D;
    if (k2 < 0 || !mpz_perfect_square_p(k2.get_mpz_t())) return false;
    QuadInt s(F, mpz_class(F.t), mpz_class(2));
    QuadInt cand = sqrt(k2) * s;
    if (cand * cand != alpha) return false;
    beta = cand;
    return true;
  }
  // beta^2 - Tr(beta) beta + Nm(beta) = 0 gives beta = (alpha + Nm) / Tr.
  QuadInt num = alpha + QuadInt(F, nb);
  if (!mpz_divisible_p(num.a().get_mpz_t(), tb.get_mpz_t()) || !mpz_divisible_p(num.b().get_mpz_t(), tb.get_mpz_t()))
    return false;
  QuadInt cand(F, num.a() / tb, num.b() / tb);
  if (cand * cand != alpha) return false;
  beta = cand;
  return true;
}

// Elements of K as (a + b w) / c with c > 0 and gcd(a, b, c) = 1.
class QuadRat {
 public:
  QuadRat() = default;
  explicit QuadRat(const QuadInt& x) : num_(x), den_(1) {}
  QuadRat(const QuadInt& x, mpz_class den) : num_(x), den_(std::move(den)) { canonicalize(); }
  QuadRat(const QuadField& F, long a) : num_(F, a), den_(1) {}

  const QuadField& field() const { return num_.field(); }
  const QuadInt& num() const { return num_; }
  const mpz_class& den() const { return den_; }
  bool is_zero() const { return num_.is_zero(); }
  bool is_integral() const { return den_ == 1; }

  QuadRat conj() const { return QuadRat(num_.conj(), den_); }

  friend QuadRat operator+(const QuadRat& x, const QuadRat& y) {
    if (x.den_ == y.den_) return QuadRat(x.num_ + y.num_, x.den_);
    return QuadRat(y.den_ * x.num_ + x.den_ * y.num_, x.den_ * y.den_);
  }
  friend QuadRat operator-(const QuadRat& x, const QuadRat& y) {
    if (x.den_ == y.den_) return QuadRat(x.num_ - y.num_, x.den_);
    return QuadRat(y.den_ * x.num_ - x.den_ * y.num_, x.den_ * y.den_);
  }
  QuadRat operator-() const {
    QuadRat r = *this;
    r.num_ = -r.num_;
    return r;
  }
  friend QuadRat operator*(const QuadRat& x, const QuadRat& y) { return QuadRat(x.num_ * y.num_, x.den_ * y.den_); }
  friend QuadRat operator/(const QuadRat& x, const QuadRat& y) {
    if (y.is_zero()) throw domain_error("division by zero in K");
    // x / y = x conj(y) den_y / (den_x Nm(num_y))
    return QuadRat(y.den_ * (x.num_ * y.num_.conj()), x.den_ * y.num_.norm());
  }
  friend bool operator==(const QuadRat& x, const QuadRat& y) { return x.den_ == y.den_ && x.num_ == y.num_; }
  friend bool operator!=(const QuadRat& x, const QuadRat& y) { return !(x == y); }

  std::string to_string() const {
    if (den_ == 1) return num_.to_string();
    return "(" + num_.to_string() + ")/" + den_.get_str();
  }

 private:
  QuadInt num_;
  mpz_class den_ = 1;

  void canonicalize() {
    if (den_ == 0) throw domain_error("zero denominator in K");
    if (den_ < 0) {
      den_ = -den_;
      num_ = -num_;
    }
    if (num_.is_zero()) {
      den_ = 1;
      return;
    }
    if (den_ == 1) return;
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), num_.a().get_mpz_t(), num_.b().get_mpz_t());
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), den_.get_mpz_t());
    if (g != 1) {
      mpz_class a, b;
      mpz_divexact(a.get_mpz_t(), num_.a().get_mpz_t(), g.get_mpz_t());
      mpz_divexact(b.get_mpz_t(), num_.b().get_mpz_t(), g.get_mpz_t());
      mpz_divexact(den_.get_mpz_t(), den_.get_mpz_t(), g.get_mpz_t());
      num_ = QuadInt(num_.field(), a, b);
    }
  }
};

// Valuation of x at the prime element pi, by repeated squaring of pi so that
// large valuations of large elements stay cheap.
inline long valuation(const QuadInt& x, const QuadInt& pi) {
  if (x.is_zero()) throw domain_error("valuation of zero");
  if (pi.is_unit()) throw domain_error("valuation at a unit");
  std::vector<QuadInt> pw{pi};
  QuadInt y = x, q;
  while (y.try_divide(pw.back(), q)) {
    y = q;
    pw.push_back(pw.back() * pw.back());
  }
  // y = x / pi^(2^k - 1) with k = pw.size() - 1
  long v = (1L << (pw.size() - 1)) - 1;
  for (size_t j = pw.size() - 1; j-- > 0;) {
    if (y.try_divide(pw[j], q)) {
      y = q;
      v += 1L << j;
    }
  }
  return v;
}
inline long valuation(const QuadRat& x, const QuadInt& pi) {
  return valuation(x.num(), pi) - valuation(QuadInt(x.field(), x.den()), pi);
}

// The prime p = pi1 pi2 split in O_K, with w = r_i in the completion at pi_i
// and r1 < r2 as residues modulo p.
struct PrimeSplitting {
  QuadField field;
  prime_t p = 0;
  long precision = 0;
  std::array<Padic, 2> roots;
  std::array<QuadInt, 2> pi;

  Padic embed(const QuadInt& x, int i, long prec) const {
    if (prec > precision) throw precision_error("embedding beyond the stored root precision");
    Padic a = Padic::from_integer(p, x.a(), prec), b = Padic::from_integer(p, x.b(), prec);
    return a + b * roots[static_cast<size_t>(i)].with_precision(prec);
  }

  // psi_i(x) to absolute precision `prec`, valuation included.
  Padic embed(const QuadRat& x, int i, long prec) const {
    long vd = detail::valuation_of(x.den(), p);
    long work = prec + vd;
    for (;;) {
      Padic num = embed(x.num(), i, std::min(work, precision));
      if (!num.is_zero() || work >= precision) {
        Padic den = Padic::from_integer(p, x.den(), work + 8);
        return (num / den).with_precision(prec);
      }
      work = std::min(precision, 2 * work + 8);
    }
  }
};

// Splitting data for p.  Inert and ramified primes raise domain_error.
inline PrimeSplitting split_prime(const QuadField& F, prime_t p, long precision) {
  if (p < 3) throw unsupported_error("residue characteristic 2 is not supported");
  long D = F.discriminant();
  long Dm = ((D % static_cast<long>(p)) + static_cast<long>(p)) % static_cast<long>(p);
  if (Dm == 0) throw domain_error("prime " + std::to_string(p) + " ramifies");
  int leg = mpz_legendre(mpz_class(Dm).get_mpz_t(), mpz_class(p).get_mpz_t());
  if (leg != 1) throw domain_error("prime " + std::to_string(p) + " is inert");
  std::vector<long> res;
  for (long r = 0; r < static_cast<long>(p) && res.size() < 2; ++r)
    if (((r * r + F.t * r + F.n) % static_cast<long>(p) + static_cast<long>(p)) % static_cast<long>(p) == 0)
      res.push_back(r);
  PrimeSplitting s;
  s.field = F;
  s.p = p;
  s.precision = precision;
  Poly<Padic> f(Padic::zero(p, precision), {Padic::from_integer(p, F.n, precision),
                                             Padic::from_integer(p, F.t, precision), Padic::one(p, precision)});
  for (int i = 0; i < 2; ++i) {
    s.roots[static_cast<size_t>(i)] = hensel_univariate(f, Padic::from_integer(p, res[static_cast<size_t>(i)], precision));
    QuadInt g = ideal_generator({QuadInt(F, static_cast<long>(p)), QuadInt(F, -res[static_cast<size_t>(i)], 1L)});
    s.pi[static_cast<size_t>(i)] = g;
  }
  for (int i = 0; i < 2; ++i)
    if (s.embed(s.pi[static_cast<size_t>(i)], i, 8).valuation() != 1)
      throw domain_error("prime element does not match its embedding");
  return s;
}

struct Decomposition {
  QuadInt a, b, d;
};

// x = a / d^2, y = b / d^3 with a, b, d in O_K and d coprime to a and b.
inline Decomposition denominator_decomposition(const QuadRat& x, const QuadRat& y) {
  const QuadField F = x.field();
  QuadInt den(F, x.den());
  QuadInt g = x.den() == 1 ? QuadInt(F, 1L) : ideal_generator({x.num(), den});
  QuadInt delta = den.divexact(g);
  QuadInt d;
  bool found = false;
  for (const auto& u : units(F)) {
    if (sqrt_exact(u * delta, d)) {
      found = true;
      break;
    }
  }
  if (!found) throw domain_error("denominator of x is not a square ideal");
  d = normalize_associate(d);
  QuadRat d2(d * d), d3(d * d * d);
  QuadRat A = x * d2, B = y * d3;
  if (!A.is_integral() || !B.is_integral()) throw domain_error("point does not have the Weierstrass denominator pattern");
  return {A.num(), B.num(), d};
}

}  // namespace qcec
