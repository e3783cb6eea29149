#pragma once

// Bivariate p-adic power series truncated by total degree, Hensel lifting,
// and a root finder for pairs of series on Z_p^2.

#include <array>
#include <functional>
#include <utility>
#include <vector>

#include "qcec/poly.hpp"
#include "qcec/series.hpp"

namespace qcec {

// sum c_ij u1^i u2^j over i + j < M.  `tail` bounds from below the
// valuation of every omitted term on the closed unit polydisk, so values on
// that polydisk are known modulo p^tail at best.
class Series2 {
 public:
  Series2() = default;
  Series2(prime_t p, long M, long cap) : p_(p), M_(M), cap_(cap), tail_(cap) {
    c_.assign(static_cast<size_t>(M * (M + 1) / 2), Padic::zero(p, cap));
  }

  prime_t prime() const { return p_; }
  long order() const { return M_; }
  long cap() const { return cap_; }
  long tail() const { return tail_; }
  void set_tail(long t) { tail_ = std::min(t, cap_); }

  const Padic& coeff(long i, long j) const { return c_[idx(i, j)]; }
  Padic& at(long i, long j) { return c_[idx(i, j)]; }

  // a(u1) * b(u2)
  static Series2 outer(const Series& a, const Series& b, long M) {
    Series2 r(a.prime(), M, std::min(a.cap(), b.cap()));
    for (long d = 0; d < M; ++d)
      for (long j = 0; j <= d; ++j) {
        long i = d - j;
        if (i < a.high() && j < b.high() && i >= a.low() && j >= b.low()) r.at(i, j) = a.coeff(i) * b.coeff(j);
      }
    return r;
  }
  static Series2 in_first(const Series& a, long M) {
    Series2 r(a.prime(), M, a.cap());
    for (long i = std::max(a.low(), 0L); i < std::min(a.high(), M); ++i) r.at(i, 0) = a.coeff(i);
    return r;
  }
  static Series2 in_second(const Series& b, long M) {
    Series2 r(b.prime(), M, b.cap());
    for (long j = std::max(b.low(), 0L); j < std::min(b.high(), M); ++j) r.at(0, j) = b.coeff(j);
    return r;
  }

  friend Series2 operator+(const Series2& a, const Series2& b) { return combine(a, b, 1); }
  friend Series2 operator-(const Series2& a, const Series2& b) { return combine(a, b, -1); }
  friend Series2 operator*(const Padic& s, const Series2& a) {
    Series2 r = a;
    for (auto& c : r.c_) c = s * c;
    r.tail_ = a.tail_ + s.valuation();
    return r;
  }
  Series2 plus_constant(const Padic& s) const {
    Series2 r = *this;
    r.at(0, 0) = r.coeff(0, 0) + s;
    return r;
  }

  Padic eval(const Padic& z1, const Padic& z2) const {
    std::vector<Padic> pw2{Padic::one(p_, cap_ + 8)};
    for (long j = 1; j < M_; ++j) pw2.push_back(pw2.back() * z2);
    Padic total = Padic::zero(p_, tail_);
    for (long i = M_ - 1; i >= 0; --i) {
      Padic inner = Padic::zero(p_, cap_ + 8);
      for (long j = 0; i + j < M_; ++j) inner += coeff(i, j) * pw2[static_cast<size_t>(j)];
      total = total * z1 + inner;
    }
    return total.with_precision(tail_);
  }

  Series2 d1() const { return derivative(0); }
  Series2 d2() const { return derivative(1); }

  // Content: smallest valuation among coefficients, capped by the tail.
  long content_valuation() const {
    long m = tail_;
    for (const auto& c : c_) m = std::min(m, c.valuation());
    return m;
  }

  // Division by p^k.
  Series2 shifted(long k) const {
    Series2 r = *this;
    for (auto& c : r.c_) c = c.shifted(-k);
    r.cap_ -= k;
    r.tail_ -= k;
    return r;
  }

  // G(r1 + s v1, r2 + s v2) for |r_i| <= 1 and v(s) >= 0.
  Series2 substitute(const Padic& r1, const Padic& r2, const Padic& s) const {
    Series2 a = shift_scale(r1, s, 0);
    return a.shift_scale(r2, s, 1);
  }

  // Nonzero residues modulo p of the unit-content part: (i, j, residue).
  struct Term {
    long i, j;
    unsigned long r;
  };
  std::vector<Term> residues() const {
    std::vector<Term> out;
    for (long d = 0; d < M_; ++d)
      for (long j = 0; j <= d; ++j) {
        const Padic& c = coeff(d - j, j);
        if (c.valuation() < 0) throw domain_error("residues of a non-integral series");
        if (!c.is_zero() && c.valuation() == 0) out.push_back({d - j, j, c.residue()});
      }
    return out;
  }

 private:
  prime_t p_ = 0;
  long M_ = 0;
  long cap_ = 0;
  long tail_ = 0;
  std::vector<Padic> c_;

  static size_t idx(long i, long j) {
    long d = i + j;
    return static_cast<size_t>(d * (d + 1) / 2 + j);
  }

  static Series2 combine(const Series2& a, const Series2& b, int sign) {
    if (a.p_ != b.p_ || a.M_ != b.M_) throw domain_error("incompatible bivariate series");
    Series2 r = a;
    for (size_t k = 0; k < r.c_.size(); ++k) r.c_[k] = sign > 0 ? a.c_[k] + b.c_[k] : a.c_[k] - b.c_[k];
    r.cap_ = std::min(a.cap_, b.cap_);
    r.tail_ = std::min(a.tail_, b.tail_);
    return r;
  }

  Series2 derivative(int var) const {
    Series2 r(p_, M_ - 1 > 0 ? M_ - 1 : 1, cap_);
    r.tail_ = tail_;
    for (long d = 0; d + 1 < M_; ++d)
      for (long j = 0; j <= d; ++j) {
        long i = d - j;
        if (var == 0)
          r.at(i, j) = coeff(i + 1, j) * Padic::from_integer(p_, i + 1, cap_ + 64);
        else
          r.at(i, j) = coeff(i, j + 1) * Padic::from_integer(p_, j + 1, cap_ + 64);
      }
    return r;
  }

  // Taylor shift by r and scaling by s in one variable.
  Series2 shift_scale(const Padic& r, const Padic& s, int var) const {
    Series2 out(p_, M_, cap_);
    out.tail_ = tail_;
    for (long other = 0; other < M_; ++other) {
      const long n = M_ - other;
      std::vector<Padic> a(static_cast<size_t>(n));
      for (long k = 0; k < n; ++k) a[static_cast<size_t>(k)] = var == 0 ? coeff(k, other) : coeff(other, k);
      // Repeated synthetic division yields the coefficients at r.
      for (long k = 0; k < n; ++k)
        for (long i = n - 2; i >= k; --i) a[static_cast<size_t>(i)] += r * a[static_cast<size_t>(i + 1)];
      Padic sk = Padic::one(p_, cap_ + 8);
      for (long k = 0; k < n; ++k) {
        Padic v = (a[static_cast<size_t>(k)] * sk).with_precision(tail_);
        if (var == 0)
          out.at(k, other) = v;
        else
          out.at(other, k) = v;
        sk = sk * s;
      }
    }
    return out;
  }
};

// Newton iteration for a simple root of f near z0; requires
// v(f(z0)) > 2 v(f'(z0)).
inline Padic hensel_univariate(const Poly<Padic>& f, const Padic& z0) {
  Poly<Padic> df = f.derivative();
  Padic fz = f.eval(z0), dz = df.eval(z0);
  if (dz.is_zero()) throw domain_error("Hensel lifting from a critical point");
  if (!fz.is_zero() && fz.valuation() <= 2 * dz.valuation())
    throw domain_error("Hensel condition v(f) > 2 v(f') fails");
  Padic z = z0;
  for (int it = 0; it < 200; ++it) {
    fz = f.eval(z);
    if (fz.is_zero()) return z;
    dz = df.eval(z);
    Padic step = fz / dz;
    z = z - step;
    if (step.is_zero()) return z;
  }
  throw convergence_error("univariate Newton iteration did not converge");
}

struct HenselResult {
  enum class Status { converged, subdivide, diverged } status = Status::diverged;
  std::array<Padic, 2> root;
  long jacobian_valuation = 0;
};

// Newton iteration for a pair of series from the seed z0 on Z_p^2.  A seed
// whose Jacobian determinant is not a unit reports `subdivide`.
inline HenselResult hensel_bivariate(const std::array<Series2, 2>& F, const std::array<Padic, 2>& z0) {
  HenselResult res;
  const Series2 j11 = F[0].d1(), j12 = F[0].d2(), j21 = F[1].d1(), j22 = F[1].d2();
  auto jac = [&](const std::array<Padic, 2>& z) {
    return std::array<Padic, 4>{j11.eval(z[0], z[1]), j12.eval(z[0], z[1]), j21.eval(z[0], z[1]),
                                j22.eval(z[0], z[1])};
  };
  std::array<Padic, 4> J = jac(z0);
  Padic det = J[0] * J[3] - J[1] * J[2];
  res.jacobian_valuation = det.valuation();
  if (det.is_zero() || det.valuation() > 0) {
    res.status = HenselResult::Status::subdivide;
    res.root = z0;
    return res;
  }
  std::array<Padic, 2> z = z0;
  for (int it = 0; it < 200; ++it) {
    Padic f1 = F[0].eval(z[0], z[1]), f2 = F[1].eval(z[0], z[1]);
    if (f1.is_zero() && f2.is_zero()) {
      res.status = HenselResult::Status::converged;
      res.root = z;
      return res;
    }
    J = jac(z);
    det = J[0] * J[3] - J[1] * J[2];
    if (det.is_zero() || det.valuation() > 0) break;
    Padic s1 = (J[3] * f1 - J[1] * f2) / det;
    Padic s2 = (J[0] * f2 - J[2] * f1) / det;
    // A step that leaves the residue class means the seed was not a root.
    if ((!s1.is_zero() && s1.valuation() < 1) || (!s2.is_zero() && s2.valuation() < 1)) break;
    z = {z[0] - s1, z[1] - s2};
    if (s1.is_zero() && s2.is_zero()) {
      res.status = HenselResult::Status::converged;
      res.root = z;
      return res;
    }
  }
  res.status = HenselResult::Status::diverged;
  res.root = z;
  return res;
}

struct PlaneRoot {
  std::array<Padic, 2> u;
  int depth = 0;
};

struct PlaneUnresolved {
  std::array<Padic, 2> center;  // residue class center
  int depth = 0;                // the class is center + p^(depth+1) Z_p^2
  std::string reason;
};

struct PlaneRoots {
  std::vector<PlaneRoot> roots;
  std::vector<PlaneUnresolved> unresolved;
};

namespace detail {

inline unsigned long eval_residues(const std::vector<Series2::Term>& t, unsigned long p,
                                   const std::vector<unsigned long>& pa, const std::vector<unsigned long>& pb) {
  unsigned long s = 0;
  for (const auto& x : t) s = (s + x.r * pa[static_cast<size_t>(x.i)] % p * pb[static_cast<size_t>(x.j)]) % p;
  return s;
}

// lambda with r2 = lambda r1 termwise modulo p, or 0 if there is none.
inline unsigned long proportional_residues(const std::vector<Series2::Term>& r1, const std::vector<Series2::Term>& r2,
                                           unsigned long p) {
  if (r1.empty() || r1.size() != r2.size()) return 0;
  auto inv = [p](unsigned long a) {
    unsigned long r = 1, b = a % p;
    for (unsigned long e = p - 2; e > 0; e >>= 1) {
      if (e & 1) r = r * b % p;
      b = b * b % p;
    }
    return r;
  };
  const unsigned long lam = r2[0].r * inv(r1[0].r) % p;
  for (size_t k = 0; k < r1.size(); ++k) {
    if (r1[k].i != r2[k].i || r1[k].j != r2[k].j) return 0;
    if (r2[k].r != lam * r1[k].r % p) return 0;
  }
  return lam;
}

inline void solve_plane(const std::array<Series2, 2>& G, const std::array<Padic, 2>& origin, long scale_exp,
                        int depth, int max_depth, long digits, PlaneRoots& out) {
  const prime_t p = G[0].prime();
  std::array<Series2, 2> N;
  for (int k = 0; k < 2; ++k) {
    long c = G[k].content_valuation();
    if (c >= G[k].tail()) {
      out.unresolved.push_back({origin, depth - 1, "equation vanishes to working precision"});
      return;
    }
    N[k] = G[k].shifted(c);
  }
  auto r1 = N[0].residues(), r2 = N[1].residues();
  // Equations proportional modulo p: replace the second by its difference
  // with a multiple of the first, which leaves the common zeros unchanged.
  for (;;) {
    unsigned long lam = proportional_residues(r1, r2, p);
    if (lam == 0) break;
    N[1] = N[1] - Padic::from_integer(p, static_cast<long>(lam), N[1].cap()) * N[0];
    long c = N[1].content_valuation();
    if (c >= N[1].tail()) {
      out.unresolved.push_back({origin, depth - 1, "equations dependent to working precision"});
      return;
    }
    N[1] = N[1].shifted(c);
    r2 = N[1].residues();
  }
  auto d11 = N[0].d1().residues(), d12 = N[0].d2().residues();
  auto d21 = N[1].d1().residues(), d22 = N[1].d2().residues();
  long maxdeg = N[0].order() + 1;
  const Padic pp = Padic::from_integer(p, p, digits + 8);
  const Padic ps = Padic::from_integer(p, 1, digits + 8).shifted(scale_exp);
  std::vector<unsigned long> pa(static_cast<size_t>(maxdeg)), pb(static_cast<size_t>(maxdeg));
  for (unsigned long a = 0; a < p; ++a) {
    pa[0] = 1;
    for (long k = 1; k < maxdeg; ++k) pa[static_cast<size_t>(k)] = pa[static_cast<size_t>(k - 1)] * a % p;
    for (unsigned long b = 0; b < p; ++b) {
      pb[0] = 1;
      for (long k = 1; k < maxdeg; ++k) pb[static_cast<size_t>(k)] = pb[static_cast<size_t>(k - 1)] * b % p;
      auto ev = [&](const std::vector<Series2::Term>& t) { return eval_residues(t, p, pa, pb); };
      if (ev(r1) != 0 || ev(r2) != 0) continue;
      unsigned long det = (ev(d11) * ev(d22) % p + p - ev(d12) * ev(d21) % p) % p;
      std::array<Padic, 2> seed{Padic::from_integer(p, static_cast<long>(a), digits + 8),
                                Padic::from_integer(p, static_cast<long>(b), digits + 8)};
      std::array<Padic, 2> center{origin[0] + ps * seed[0], origin[1] + ps * seed[1]};
      if (det != 0) {
        HenselResult h = hensel_bivariate(N, seed);
        if (h.status == HenselResult::Status::converged) {
          out.roots.push_back({{origin[0] + ps * h.root[0], origin[1] + ps * h.root[1]}, depth});
        } else {
          out.unresolved.push_back({center, depth, "Newton iteration diverged"});
        }
      } else if (depth < max_depth) {
        std::array<Series2, 2> sub{N[0].substitute(seed[0], seed[1], pp), N[1].substitute(seed[0], seed[1], pp)};
        solve_plane(sub, center, scale_exp + 1, depth + 1, max_depth, digits, out);
      } else {
        out.unresolved.push_back({center, depth, "singular residue class at maximal depth"});
      }
    }
  }
}

}  // namespace detail

// All simple roots of (G1, G2) on Z_p^2.  Residue classes with a singular
// reduction are subdivided up to `max_depth` times; what remains is reported
// as unresolved rather than dropped.
inline PlaneRoots find_plane_roots(const std::array<Series2, 2>& G, int max_depth = 3) {
  PlaneRoots out;
  const prime_t p = G[0].prime();
  long digits = std::max(G[0].cap(), G[1].cap());
  std::array<Padic, 2> origin{Padic::zero(p, digits + 8), Padic::zero(p, digits + 8)};
  detail::solve_plane(G, origin, 0, 0, max_depth, digits, out);
  return out;
}

}  // namespace qcec
