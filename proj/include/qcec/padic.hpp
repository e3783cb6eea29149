#pragma once

// Capped-precision p-adic numbers.
//
// A nonzero value is p^v * u with u a unit known modulo p^r; r is the
// relative precision and v + r the absolute precision.  A value that is zero
// to its precision stores only the absolute precision.  Every operation
// returns the precision that is actually justified by its inputs.

#include <gmpxx.h>

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>

#include "qcec/errors.hpp"

namespace qcec {

using prime_t = unsigned long;

namespace detail {

// p^k, cached per thread.  A deque keeps references stable while it grows.
inline const mpz_class& prime_power(prime_t p, long k) {
  thread_local std::unordered_map<prime_t, std::deque<mpz_class>> cache;
  if (k < 0) throw domain_error("negative exponent in prime_power");
  auto& v = cache[p];
  if (v.empty()) v.emplace_back(1);
  while (static_cast<long>(v.size()) <= k) v.emplace_back(v.back() * p);
  return v[static_cast<size_t>(k)];
}

inline long remove_factor(mpz_class& n, prime_t p) {
  if (n == 0) return std::numeric_limits<long>::max();
  long k = 0;
  while (mpz_divisible_ui_p(n.get_mpz_t(), p)) {
    mpz_divexact_ui(n.get_mpz_t(), n.get_mpz_t(), p);
    ++k;
  }
  return k;
}

inline long valuation_of(const mpz_class& n, prime_t p) {
  mpz_class m = n;
  return remove_factor(m, p);
}

inline void reduce_mod(mpz_class& n, const mpz_class& m) {
  mpz_fdiv_r(n.get_mpz_t(), n.get_mpz_t(), m.get_mpz_t());
}

}  // namespace detail

class Padic {
 public:
  Padic() = default;

  static Padic zero(prime_t p, long abs_prec) {
    Padic r;
    r.p_ = p;
    r.val_ = abs_prec;
    r.rel_ = 0;
    return r;
  }

  static Padic from_integer(prime_t p, const mpz_class& n, long abs_prec) {
    if (n == 0) return zero(p, abs_prec);
    mpz_class u = n;
    long v = detail::remove_factor(u, p);
    if (v >= abs_prec) return zero(p, abs_prec);
    Padic r;
    r.p_ = p;
    r.val_ = v;
    r.rel_ = abs_prec - v;
    detail::reduce_mod(u, detail::prime_power(p, r.rel_));
    r.unit_ = std::move(u);
    return r;
  }

  static Padic from_integer(prime_t p, long n, long abs_prec) {
    return from_integer(p, mpz_class(n), abs_prec);
  }

  // num/den with den != 0.  The absolute precision is abs_prec.
  static Padic from_rational(prime_t p, const mpz_class& num,
                             const mpz_class& den, long abs_prec) {
    if (den == 0) throw domain_error("rational with zero denominator");
    if (num == 0) return zero(p, abs_prec);
    mpz_class d = den;
    long vd = detail::remove_factor(d, p);
    mpz_class n = num;
    long vn = detail::remove_factor(n, p);
    long v = vn - vd;
    if (v >= abs_prec) return zero(p, abs_prec);
    Padic r;
    r.p_ = p;
    r.val_ = v;
    r.rel_ = abs_prec - v;
    const mpz_class& mod = detail::prime_power(p, r.rel_);
    mpz_class inv;
    detail::reduce_mod(d, mod);
    mpz_invert(inv.get_mpz_t(), d.get_mpz_t(), mod.get_mpz_t());
    mpz_class u = n * inv;
    detail::reduce_mod(u, mod);
    r.unit_ = std::move(u);
    return r;
  }

  // p^v * unit with `rel` digits of the unit.
  static Padic from_parts(prime_t p, long v, const mpz_class& unit, long rel) {
    if (rel <= 0) return zero(p, v + std::max(rel, 0L));
    mpz_class u = unit;
    detail::reduce_mod(u, detail::prime_power(p, rel));
    if (u == 0 || mpz_divisible_ui_p(u.get_mpz_t(), p))
      return from_integer(p, u, rel).shifted(v);
    Padic r;
    r.p_ = p;
    r.val_ = v;
    r.rel_ = rel;
    r.unit_ = std::move(u);
    return r;
  }

  prime_t prime() const { return p_; }
  bool is_zero() const { return rel_ == 0; }
  // Valuation; for a value that is zero to its precision, the absolute
  // precision.
  long valuation() const { return val_; }
  long precision_absolute() const { return val_ + rel_; }
  long precision_relative() const { return rel_; }
  const mpz_class& unit() const { return unit_; }

  // Representative in [0, p^abs) when the value is integral.
  mpz_class lift() const {
    if (is_zero()) return 0;
    if (val_ < 0) throw domain_error("lift of a non-integral p-adic number");
    return unit_ * detail::prime_power(p_, val_);
  }

  // Representative in (-p^abs/2, p^abs/2].
  mpz_class lift_centered() const {
    mpz_class r = lift();
    if (is_zero()) return r;
    const mpz_class& m = detail::prime_power(p_, precision_absolute());
    if (2 * r > m) r -= m;
    return r;
  }

  // Residue modulo p of an integral value.
  unsigned long residue() const {
    if (is_zero() || val_ > 0) return 0;
    if (val_ < 0) throw domain_error("residue of a non-integral p-adic number");
    return mpz_fdiv_ui(unit_.get_mpz_t(), p_);
  }

  Padic with_precision(long abs_prec) const {
    if (abs_prec >= precision_absolute()) return *this;
    if (abs_prec <= val_ || is_zero()) return zero(p_, abs_prec);
    Padic r = *this;
    r.rel_ = abs_prec - val_;
    detail::reduce_mod(r.unit_, detail::prime_power(p_, r.rel_));
    return r;
  }

  // Multiplication by p^k.
  Padic shifted(long k) const {
    Padic r = *this;
    r.val_ += k;
    return r;
  }

  Padic operator-() const {
    if (is_zero()) return *this;
    Padic r = *this;
    r.unit_ = detail::prime_power(p_, rel_) - unit_;
    return r;
  }

  friend Padic operator+(const Padic& a, const Padic& b) { return a.add(b, false); }
  friend Padic operator-(const Padic& a, const Padic& b) { return a.add(b, true); }

  friend Padic operator*(const Padic& a, const Padic& b) {
    a.check_prime(b);
    if (a.is_zero() || b.is_zero()) {
      long abs = std::min(a.val_ + b.precision_absolute(),
                          b.val_ + a.precision_absolute());
      return zero(a.p_, abs);
    }
    Padic r;
    r.p_ = a.p_;
    r.val_ = a.val_ + b.val_;
    r.rel_ = std::min(a.rel_, b.rel_);
    r.unit_ = a.unit_ * b.unit_;
    detail::reduce_mod(r.unit_, detail::prime_power(r.p_, r.rel_));
    return r;
  }

  friend Padic operator/(const Padic& a, const Padic& b) {
    a.check_prime(b);
    if (b.is_zero()) throw domain_error("p-adic division by zero");
    if (a.is_zero()) return zero(a.p_, a.precision_absolute() - b.val_);
    Padic r;
    r.p_ = a.p_;
    r.val_ = a.val_ - b.val_;
    r.rel_ = std::min(a.rel_, b.rel_);
    const mpz_class& mod = detail::prime_power(r.p_, r.rel_);
    mpz_class inv, bu = b.unit_;
    detail::reduce_mod(bu, mod);
    mpz_invert(inv.get_mpz_t(), bu.get_mpz_t(), mod.get_mpz_t());
    r.unit_ = a.unit_ * inv;
    detail::reduce_mod(r.unit_, mod);
    return r;
  }

  Padic& operator+=(const Padic& b) { return *this = *this + b; }
  Padic& operator-=(const Padic& b) { return *this = *this - b; }
  Padic& operator*=(const Padic& b) { return *this = *this * b; }
  Padic& operator/=(const Padic& b) { return *this = *this / b; }

  static Padic one(prime_t p, long abs_prec) { return from_integer(p, 1, abs_prec); }

  Padic inverse() const { return one(p_, rel_ + 1) / *this; }

  Padic pow(long e) const {
    if (e < 0) return pow(-e).inverse();
    Padic r = one(p_, std::max(precision_absolute(), rel_) + 1);
    Padic base = *this;
    bool have = false;
    while (e > 0) {
      if (e & 1) {
        r = have ? r * base : base;
        have = true;
      }
      e >>= 1;
      if (e) base = base * base;
    }
    return r;
  }

  // Equality to the common precision.
  friend bool operator==(const Padic& a, const Padic& b) { return (a - b).is_zero(); }
  friend bool operator!=(const Padic& a, const Padic& b) { return !(a == b); }

  // Iwasawa logarithm: log(p) = 0, so log(p^v u) = log(u).  On principal
  // units the logarithm is an isometry, so the result is known to the
  // relative precision of the argument.
  Padic log() const {
    if (is_zero()) throw domain_error("logarithm of zero");
    if (p_ == 2) throw unsupported_error("logarithm at p = 2");
    const long prec = rel_;
    const long work = prec + guard_digits(prec) + 2;
    const mpz_class& mod = detail::prime_power(p_, work);
    // u^(p-1) is a principal unit; log u = log(u^(p-1)) / (p-1).
    mpz_class u1;
    mpz_powm_ui(u1.get_mpz_t(), unit_.get_mpz_t(), p_ - 1, mod.get_mpz_t());
    Padic z = from_integer(p_, u1 - 1, work);
    Padic s = log1p_series(z, work) / from_integer(p_, static_cast<long>(p_ - 1), work);
    return s.with_precision(prec);
  }

  // Square root by Hensel lifting; throws when none exists.
  Padic sqrt() const {
    if (p_ == 2) throw unsupported_error("square roots at p = 2");
    if (is_zero()) return zero(p_, precision_absolute() / 2);
    if (val_ % 2 != 0) throw domain_error("odd valuation has no square root");
    unsigned long a = mpz_fdiv_ui(unit_.get_mpz_t(), p_);
    if (mpz_legendre(mpz_class(a).get_mpz_t(), mpz_class(p_).get_mpz_t()) != 1)
      throw domain_error("unit is not a square modulo p");
    unsigned long r0 = 0;
    for (unsigned long r = 1; r < p_; ++r)
      if ((r * r) % p_ == a) {
        r0 = r;
        break;
      }
    Padic u = from_parts(p_, 0, unit_, rel_);
    Padic x = from_integer(p_, r0, rel_);
    Padic two = from_integer(p_, 2, rel_ + 2);
    for (long digits = 1; digits < rel_; digits *= 2) x = x - (x * x - u) / (two * x);
    x = x - (x * x - u) / (two * x);
    return x.with_precision(rel_).shifted(val_ / 2);
  }

  Padic teichmuller() const {
    if (val_ != 0 || is_zero()) throw domain_error("Teichmuller lift of a non-unit");
    Padic x = from_integer(p_, residue(), rel_);
    for (long i = 0; i <= rel_; ++i) x = x.pow(static_cast<long>(p_));
    return x;
  }

  std::string to_string() const {
    std::ostringstream os;
    if (is_zero()) {
      os << "O(" << p_ << "^" << val_ << ")";
    } else {
      os << unit_.get_str() << "*" << p_ << "^" << val_ << "+O(" << p_ << "^"
         << precision_absolute() << ")";
    }
    return os.str();
  }

  // Inverse of to_string().
  static Padic parse(const std::string& s) {
    auto bad = [&]() { return validation_error("malformed p-adic literal: " + s); };
    auto o = s.find("O(");
    if (o == std::string::npos || s.back() != ')') throw bad();
    std::string tail = s.substr(o + 2, s.size() - o - 3);
    auto caret = tail.find('^');
    if (caret == std::string::npos) throw bad();
    prime_t p = std::stoul(tail.substr(0, caret));
    long abs = std::stol(tail.substr(caret + 1));
    if (o == 0) return zero(p, abs);
    std::string head = s.substr(0, o);
    if (head.size() < 2 || head.back() != '+') throw bad();
    head.pop_back();
    auto star = head.find('*');
    auto c2 = head.find('^', star);
    if (star == std::string::npos || c2 == std::string::npos) throw bad();
    mpz_class u(head.substr(0, star));
    long v = std::stol(head.substr(c2 + 1));
    return from_parts(p, v, u, abs - v);
  }

  friend std::ostream& operator<<(std::ostream& os, const Padic& x) { return os << x.to_string(); }

 private:
  prime_t p_ = 0;
  long val_ = 0;
  long rel_ = 0;
  mpz_class unit_;

  void check_prime(const Padic& b) const {
    if (p_ != b.p_) throw domain_error("p-adic numbers with different primes");
  }

  long guard_digits(long prec) const {
    long g = 0;
    for (mpz_class q = p_; q <= prec + 2; q *= p_) ++g;
    return g;
  }

  // sum (-1)^(k+1) z^k / k for v(z) >= 1.
  static Padic log1p_series(const Padic& z, long work) {
    const prime_t p = z.p_;
    if (z.is_zero()) return zero(p, work);
    long vz = z.valuation();
    Padic sum = zero(p, work);
    Padic zk = z;
    for (long k = 1;; ++k) {
      long vk = detail::valuation_of(mpz_class(k), p);
      if (k * vz - vk >= work && k > 1) break;
      Padic term = zk / from_integer(p, k, work + vk + 1);
      if (k % 2 == 0) term = -term;
      sum = sum + term;
      zk = zk * z;
    }
    return sum;
  }

  Padic add(const Padic& b, bool negate) const {
    check_prime(b);
    const long abs = std::min(precision_absolute(), b.precision_absolute());
    if (b.is_zero()) return with_precision(abs);
    if (is_zero()) return (negate ? -b : b).with_precision(abs);
    const long v = std::min(val_, b.val_);
    if (v >= abs) return zero(p_, abs);
    mpz_class t = unit_;
    if (val_ > v) t *= detail::prime_power(p_, val_ - v);
    if (negate) {
      if (b.val_ > v)
        mpz_submul(t.get_mpz_t(), b.unit_.get_mpz_t(), detail::prime_power(p_, b.val_ - v).get_mpz_t());
      else
        t -= b.unit_;
    } else {
      if (b.val_ > v)
        mpz_addmul(t.get_mpz_t(), b.unit_.get_mpz_t(), detail::prime_power(p_, b.val_ - v).get_mpz_t());
      else
        t += b.unit_;
    }
    detail::reduce_mod(t, detail::prime_power(p_, abs - v));
    if (t == 0) return zero(p_, abs);
    long k = 0;
    if (mpz_divisible_ui_p(t.get_mpz_t(), p_)) k = detail::remove_factor(t, p_);
    Padic r;
    r.p_ = p_;
    r.val_ = v + k;
    r.rel_ = abs - r.val_;
    r.unit_ = std::move(t);
    return r;
  }
};

}  // namespace qcec
