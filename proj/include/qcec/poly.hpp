#pragma once

// Dense univariate polynomials over a commutative ring R.  R needs +, -, *
// and a way to produce zero and one; the prototype element passed at
// construction supplies them (p-adic numbers need their prime and precision).

#include <algorithm>
#include <utility>
#include <vector>

namespace qcec {

template <class R>
class Poly {
 public:
  Poly() = default;
  explicit Poly(R zero) : zero_(std::move(zero)) {}
  Poly(R zero, std::vector<R> c) : zero_(std::move(zero)), c_(std::move(c)) {}

  static Poly constant(const R& zero, const R& a) { return Poly(zero, {a}); }
  // x
  static Poly monomial(const R& zero, const R& one, long k) {
    std::vector<R> c(static_cast<size_t>(k + 1), zero);
    c[static_cast<size_t>(k)] = one;
    return Poly(zero, std::move(c));
  }

  long degree_bound() const { return static_cast<long>(c_.size()) - 1; }
  const std::vector<R>& coefficients() const { return c_; }
  const R& zero() const { return zero_; }
  R coeff(long k) const {
    if (k < 0 || k >= static_cast<long>(c_.size())) return zero_;
    return c_[static_cast<size_t>(k)];
  }
  void set(long k, const R& a) {
    if (k >= static_cast<long>(c_.size())) c_.resize(static_cast<size_t>(k + 1), zero_);
    c_[static_cast<size_t>(k)] = a;
  }

  R eval(const R& x) const {
    if (c_.empty()) return zero_;
    R acc = c_.back();
    for (long k = static_cast<long>(c_.size()) - 2; k >= 0; --k) acc = acc * x + c_[static_cast<size_t>(k)];
    return acc;
  }

  Poly derivative() const {
    Poly r(zero_);
    for (size_t k = 1; k < c_.size(); ++k) {
      R acc = zero_;
      for (size_t i = 0; i < k; ++i) acc = acc + c_[k];
      r.c_.push_back(acc);
    }
    return r;
  }

  friend Poly operator+(const Poly& a, const Poly& b) {
    Poly r(a.zero_);
    size_t n = std::max(a.c_.size(), b.c_.size());
    r.c_.reserve(n);
    for (size_t k = 0; k < n; ++k) r.c_.push_back(a.coeff(static_cast<long>(k)) + b.coeff(static_cast<long>(k)));
    return r;
  }
  friend Poly operator-(const Poly& a, const Poly& b) {
    Poly r(a.zero_);
    size_t n = std::max(a.c_.size(), b.c_.size());
    r.c_.reserve(n);
    for (size_t k = 0; k < n; ++k) r.c_.push_back(a.coeff(static_cast<long>(k)) - b.coeff(static_cast<long>(k)));
    return r;
  }
  friend Poly operator*(const Poly& a, const Poly& b) {
    Poly r(a.zero_);
    if (a.c_.empty() || b.c_.empty()) return r;
    r.c_.assign(a.c_.size() + b.c_.size() - 1, a.zero_);
    for (size_t i = 0; i < a.c_.size(); ++i)
      for (size_t j = 0; j < b.c_.size(); ++j) r.c_[i + j] = r.c_[i + j] + a.c_[i] * b.c_[j];
    return r;
  }
  friend Poly operator*(const R& s, const Poly& a) {
    Poly r = a;
    for (auto& c : r.c_) c = s * c;
    return r;
  }

  template <class F>
  auto map(F&& f) const {
    using T = decltype(f(zero_));
    std::vector<T> c;
    for (const auto& a : c_) c.push_back(f(a));
    return Poly<T>(f(zero_), std::move(c));
  }

 private:
  R zero_{};
  std::vector<R> c_;
};

}  // namespace qcec
