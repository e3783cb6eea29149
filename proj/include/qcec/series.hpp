#pragma once

// Truncated Laurent series with p-adic coefficients.
//
// A series stores the coefficients of t^lo .. t^(hi-1); everything from t^hi
// on is unknown.  Products, inverses and compositions shrink hi exactly as the
// unknown tails require.  Coefficients below lo are exact zeros.

#include <algorithm>
#include <utility>
#include <vector>

#include "qcec/padic.hpp"

namespace qcec {

class Series {
 public:
  Series() = default;

  // All-zero series on [lo, hi); `cap` is the absolute precision of the
  // zeros.
  Series(prime_t p, long lo, long hi, long cap) : p_(p), lo_(lo), hi_(std::max(hi, lo)), cap_(cap) {
    c_.assign(static_cast<size_t>(hi_ - lo_), Padic::zero(p, cap));
  }

  static Series from_coeffs(prime_t p, long lo, std::vector<Padic> c, long cap) {
    Series s;
    s.p_ = p;
    s.lo_ = lo;
    s.hi_ = lo + static_cast<long>(c.size());
    s.cap_ = cap;
    s.c_ = std::move(c);
    return s;
  }

  static Series variable(prime_t p, long hi, long cap) {
    Series s(p, 1, hi, cap);
    if (hi > 1) s.at(1) = Padic::one(p, cap);
    return s;
  }

  static Series constant(const Padic& a, long hi, long cap) {
    Series s(a.prime(), 0, hi, cap);
    if (hi > 0) s.at(0) = a;
    return s;
  }

  prime_t prime() const { return p_; }
  long low() const { return lo_; }
  long high() const { return hi_; }
  long cap() const { return cap_; }
  long size() const { return hi_ - lo_; }
  const std::vector<Padic>& coefficients() const { return c_; }

  Padic coeff(long k) const {
    if (k < lo_) return Padic::zero(p_, cap_);
    if (k >= hi_) throw precision_error("coefficient beyond the truncation order");
    return c_[static_cast<size_t>(k - lo_)];
  }
  Padic& at(long k) {
    if (k < lo_ || k >= hi_) throw domain_error("series index out of range");
    return c_[static_cast<size_t>(k - lo_)];
  }

  Series truncated(long hi) const {
    if (hi >= hi_) return *this;
    Series s = *this;
    s.hi_ = std::max(hi, lo_);
    s.c_.resize(static_cast<size_t>(s.hi_ - lo_));
    return s;
  }

  // Drops leading coefficients that vanish to their precision, treating
  // them as exact zeros.
  Series stripped() const {
    long k = 0;
    while (k < size() && c_[static_cast<size_t>(k)].is_zero()) ++k;
    Series s;
    s.p_ = p_;
    s.lo_ = lo_ + k;
    s.hi_ = hi_;
    s.cap_ = cap_;
    s.c_.assign(c_.begin() + k, c_.end());
    return s;
  }

  // Raises lo to `lo_new`, asserting the dropped coefficients are zero.
  Series with_low(long lo_new) const {
    if (lo_new <= lo_) return *this;
    for (long k = lo_; k < std::min(lo_new, hi_); ++k)
      if (!coeff(k).is_zero()) throw domain_error("dropping a nonzero coefficient");
    Series s = *this;
    s.lo_ = std::min(lo_new, hi_);
    s.c_.assign(c_.begin() + (s.lo_ - lo_), c_.end());
    return s;
  }

  // t^k * f
  Series times_power(long k) const {
    Series s = *this;
    s.lo_ += k;
    s.hi_ += k;
    return s;
  }

  long min_valuation() const {
    long m = cap_;
    for (const auto& a : c_) m = std::min(m, a.valuation());
    return m;
  }

  long min_precision() const {
    long m = cap_;
    for (const auto& a : c_) m = std::min(m, a.precision_absolute());
    return m;
  }

  // Caps every coefficient at absolute precision `prec`.
  Series with_precision(long prec) const {
    Series s = *this;
    for (auto& a : s.c_) a = a.with_precision(prec);
    s.cap_ = std::min(cap_, prec);
    return s;
  }

  Series operator-() const {
    Series s = *this;
    for (auto& a : s.c_) a = -a;
    return s;
  }

  friend Series operator+(const Series& a, const Series& b) { return combine(a, b, false); }
  friend Series operator-(const Series& a, const Series& b) { return combine(a, b, true); }

  friend Series operator*(const Series& a, const Series& b) {
    check(a, b);
    const long lo = a.lo_ + b.lo_;
    const long hi = std::min(a.hi_ + b.lo_, b.hi_ + a.lo_);
    const long n = hi - lo;
    Series r(a.p_, lo, hi, std::min(a.cap_, b.cap_));
    for (long k = 0; k < n; ++k) {
      Padic acc = a.c_[0] * b.c_[static_cast<size_t>(k)];
      for (long i = 1; i <= k; ++i)
        acc += a.c_[static_cast<size_t>(i)] * b.c_[static_cast<size_t>(k - i)];
      r.c_[static_cast<size_t>(k)] = std::move(acc);
    }
    return r;
  }

  friend Series operator*(const Padic& s, const Series& a) {
    Series r = a;
    for (auto& c : r.c_) c = s * c;
    return r;
  }
  friend Series operator*(const Series& a, const Padic& s) { return s * a; }

  friend Series operator/(const Series& a, const Series& b) { return a * b.inverse(); }
  friend Series operator/(const Series& a, const Padic& s) {
    Series r = a;
    for (auto& c : r.c_) c = c / s;
    return r;
  }

  Series& operator+=(const Series& b) { return *this = *this + b; }
  Series& operator-=(const Series& b) { return *this = *this - b; }
  Series& operator*=(const Series& b) { return *this = *this * b; }

  // Requires the coefficient at t^lo to be invertible.
  Series inverse() const {
    if (size() == 0) throw precision_error("inverse of an empty series");
    if (c_[0].is_zero()) throw domain_error("inverse of a series with vanishing leading term");
    const long n = size();
    Series r(p_, -lo_, -lo_ + n, cap_);
    Padic b0 = c_[0].inverse();
    r.c_[0] = b0;
    for (long k = 1; k < n; ++k) {
      Padic acc = c_[1] * r.c_[static_cast<size_t>(k - 1)];
      for (long i = 2; i <= k; ++i) acc += c_[static_cast<size_t>(i)] * r.c_[static_cast<size_t>(k - i)];
      r.c_[static_cast<size_t>(k)] = -(b0 * acc);
    }
    return r;
  }

  Series derivative() const {
    Series r;
    r.p_ = p_;
    r.cap_ = cap_;
    if (lo_ == 0) {
      r.lo_ = 0;
      r.hi_ = std::max(hi_ - 1, 0L);
      for (long k = 1; k < hi_; ++k) r.c_.push_back(scale(coeff(k), k));
      return r;
    }
    r.lo_ = lo_ - 1;
    r.hi_ = hi_ - 1;
    for (long k = lo_; k < hi_; ++k) r.c_.push_back(scale(coeff(k), k));
    return r;
  }

  // Antiderivative with zero constant term; the t^-1 coefficient must vanish.
  Series integral() const {
    Series r;
    r.p_ = p_;
    r.cap_ = cap_;
    r.lo_ = lo_ + 1;
    r.hi_ = hi_ + 1;
    for (long k = lo_; k < hi_; ++k) {
      if (k == -1) {
        if (!coeff(k).is_zero()) throw domain_error("integral of a series with a residue");
        r.c_.push_back(Padic::zero(p_, cap_));
      } else {
        r.c_.push_back(coeff(k) / Padic::from_integer(p_, k + 1, cap_ + 64));
      }
    }
    return r;
  }

  // f(g) for g with positive low order; Laurent f needs g's leading term
  // invertible.
  Series compose(const Series& g) const {
    check(*this, g);
    if (g.lo_ < 1) throw domain_error("composition needs an inner series without constant term");
    if (size() == 0) return Series(p_, 0, 0, cap_);
    long k0 = lo_ != 0 ? lo_ : 1;
    long hi = std::min(hi_ * g.lo_, (k0 - 1) * g.lo_ + g.hi_);
    const long acc_hi = hi - lo_ * g.lo_;
    Series acc = constant(c_.back(), acc_hi, cap_);
    for (long j = size() - 2; j >= 0; --j) {
      acc = (acc * g).truncated(acc_hi);
      acc = acc.plus_constant(c_[static_cast<size_t>(j)]);
    }
    Series r = acc;
    if (lo_ > 0) {
      Series gp = g;
      for (long i = 1; i < lo_; ++i) gp = (gp * g).truncated(hi);
      r = acc * gp;
    } else if (lo_ < 0) {
      Series gi = g.inverse();
      Series gp = gi;
      for (long i = 1; i < -lo_; ++i) gp = gp * gi;
      r = acc * gp;
    }
    return r.truncated(hi);
  }

  // Compositional inverse of f = c1 t + ..., c1 invertible.
  Series revert() const {
    if (lo_ != 1 || size() == 0 || c_[0].is_zero())
      throw domain_error("reversion needs a series c1 t + ... with c1 invertible");
    const long n = hi_;
    const Series z = variable(p_, n, cap_);
    const Series fd = derivative();
    Series g = (z / c_[0]).truncated(std::min(2L, n));
    for (long len = std::min(2L, n);; len = std::min(2 * len, n)) {
      Series gl = g.extended(len);
      Series fg = truncated(len).compose(gl);
      Series fdg = fd.truncated(len).compose(gl);
      g = (gl - (fg - z.truncated(len)) / fdg).truncated(len);
      if (len == n) break;
    }
    // A last full-length step settles the top coefficients.
    g = (g - (compose(g) - z) / fd.compose(g)).truncated(n);
    return g;
  }

  // exp(h) for h without constant term.
  Series exp() const {
    Series h = with_low(std::max(lo_, 1L));
    if (h.lo_ < 1) throw domain_error("exp needs a series without constant term");
    const long n = hi_;
    Series e(p_, 0, n, cap_);
    if (n == 0) return e;
    e.c_[0] = Padic::one(p_, cap_);
    for (long m = 1; m < n; ++m) {
      Padic acc = Padic::zero(p_, cap_ + 64);
      for (long k = h.lo_; k <= m; ++k) acc += scale(h.coeff(k), k) * e.c_[static_cast<size_t>(m - k)];
      e.c_[static_cast<size_t>(m)] = acc / Padic::from_integer(p_, m, cap_ + 64);
    }
    return e;
  }

  // log(f) for a power series with invertible constant term, using the
  // Iwasawa branch for the constant.
  Series log() const {
    if (lo_ > 0) throw domain_error("log of a series vanishing at 0");
    if (lo_ < 0) return with_low(0).log();
    if (c_.empty() || c_[0].is_zero()) throw domain_error("log needs an invertible constant term");
    Series q = (derivative() / *this).truncated(hi_ - 1);
    Series r = q.integral();
    r = r.plus_constant(c_[0].log());
    return r.truncated(hi_);
  }

  // Horner evaluation; the caller accounts for the truncated tail.
  Padic eval(const Padic& x) const {
    if (size() == 0) throw precision_error("evaluation of an empty series");
    if (lo_ < 0 && x.is_zero()) throw domain_error("evaluation of a Laurent tail at 0");
    Padic acc = c_.back();
    for (long j = size() - 2; j >= 0; --j) acc = acc * x + c_[static_cast<size_t>(j)];
    if (lo_ != 0) acc = acc * x.pow(lo_);
    return acc;
  }

  // f(s t)
  Series scaled(const Padic& s) const {
    Series r = *this;
    Padic sk = s.pow(lo_);
    for (auto& c : r.c_) {
      c = c * sk;
      sk = sk * s;
    }
    return r;
  }

  // Unknown coefficients from hi on are replaced by zeros up to `hi_new`.
  // Used only to seed iterations whose later steps overwrite them.
  Series extended(long hi_new) const {
    if (hi_new <= hi_) return truncated(hi_new);
    Series r = *this;
    r.c_.resize(static_cast<size_t>(hi_new - lo_), Padic::zero(p_, cap_));
    r.hi_ = hi_new;
    return r;
  }

  Series plus_constant(const Padic& a) const {
    if (hi_ <= 0) return *this;
    Series r = lowered(0);
    r.at(0) = r.coeff(0) + a;
    return r;
  }

  // Same series with explicit zeros stored down to t^lo_new.
  Series lowered(long lo_new) const {
    if (lo_new >= lo_) return *this;
    Series r = *this;
    std::vector<Padic> c(static_cast<size_t>(lo_ - lo_new), Padic::zero(p_, cap_));
    c.insert(c.end(), c_.begin(), c_.end());
    r.c_ = std::move(c);
    r.lo_ = lo_new;
    return r;
  }

 private:
  prime_t p_ = 0;
  long lo_ = 0;
  long hi_ = 0;
  long cap_ = 0;
  std::vector<Padic> c_;

  static Padic scale(const Padic& a, long k) {
    return a * Padic::from_integer(a.prime(), k, a.precision_absolute() + 64);
  }

  static void check(const Series& a, const Series& b) {
    if (a.p_ != b.p_) throw domain_error("series over different primes");
  }

  static Series combine(const Series& a, const Series& b, bool negate) {
    check(a, b);
    const long lo = std::min(a.lo_, b.lo_);
    const long hi = std::min(a.hi_, b.hi_);
    Series r(a.p_, lo, std::max(hi, lo), std::min(a.cap_, b.cap_));
    for (long k = lo; k < hi; ++k) {
      bool ina = k >= a.lo_, inb = k >= b.lo_;
      if (ina && inb)
        r.at(k) = negate ? a.coeff(k) - b.coeff(k) : a.coeff(k) + b.coeff(k);
      else if (ina)
        r.at(k) = a.coeff(k);
      else
        r.at(k) = negate ? -b.coeff(k) : b.coeff(k);
    }
    return r;
  }
};

}  // namespace qcec
