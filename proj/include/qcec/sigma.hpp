#pragma once

// Formal expansions at the origin, the constant c of the canonical p-adic
// sigma function, and the sigma series itself.
//
// c is read off the unit-root subspace of Frobenius on H^1_dR: that subspace
// is spanned by (x + c) omega.  Frobenius is computed with Kedlaya's
// reduction on the short model Y^2 = X^3 - 27 c4 X - 54 c6.

#include <array>
#include <string>
#include <vector>

#include "qcec/curve.hpp"
#include "qcec/series.hpp"

namespace qcec {

struct FormalExpansions {
  Series w;      // w(t) = -1/y
  Series x;      // t^-2 - a1 t^-1 - a2 - ...
  Series y;      // -t^-3 + ...
  Series omega;  // dx / (2y + a1 x + a3), omega(0) = 1
  Series log;    // integral of omega
  Series iota;   // t-coordinate of -P
};

// Expansions good to t^M for x, omega and log.
inline FormalExpansions formal_expansions(const Weierstrass<Padic>& E, long M) {
  const prime_t p = E.a1().prime();
  long cap = E.a1().precision_absolute();
  for (const auto& c : E.a) cap = std::min(cap, c.precision_absolute());
  const long H = M + 6;
  const Series t = Series::variable(p, H, cap);
  const Series t2 = (t * t).truncated(H), t3 = (t2 * t).truncated(H);
  Series w = t3;
  for (long it = 0; it < H; ++it) {
    Series w2 = (w * w).truncated(H);
    Series nw = t3 + E.a1() * (t * w).truncated(H) + E.a2() * (t2 * w).truncated(H) + E.a3() * w2 +
                E.a4() * (t * w2).truncated(H) + E.a6() * (w2 * w).truncated(H);
    w = nw.truncated(H).with_low(3);
  }
  FormalExpansions fe;
  fe.w = w;
  Series winv = w.inverse();
  fe.x = (t * winv);
  fe.y = -winv;
  Series den = Padic::from_integer(p, 2, cap + 8) * fe.y + E.a1() * fe.x;
  den = den.plus_constant(E.a3());
  fe.omega = (fe.x.derivative() / den).with_low(0);
  fe.log = fe.omega.integral();
  Series yi = fe.y + E.a1() * fe.x;
  yi = yi.plus_constant(E.a3());
  fe.iota = (fe.x / yi).with_low(1);
  return fe;
}

// ---------------------------------------------------------------------------
// Frobenius on H^1_dR via Kedlaya's algorithm.

namespace detail {

using PV = std::vector<Padic>;

inline PV pv_mul(const PV& a, const PV& b, const Padic& zero) {
  if (a.empty() || b.empty()) return {};
  PV r(a.size() + b.size() - 1, zero);
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].is_zero() && a[i].precision_absolute() >= zero.precision_absolute()) continue;
    for (size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  }
  return r;
}

inline void pv_add_into(PV& acc, const PV& a, size_t shift, const Padic& zero) {
  if (acc.size() < a.size() + shift) acc.resize(a.size() + shift, zero);
  for (size_t i = 0; i < a.size(); ++i) acc[i + shift] += a[i];
}

}  // namespace detail

struct FrobeniusMatrix {
  // F(dx/y) = m[0][0] dx/y + m[1][0] x dx/y, F(x dx/y) = m[0][1] dx/y + m[1][1] x dx/y
  std::array<std::array<Padic, 2>, 2> m;
  Padic trace() const { return m[0][0] + m[1][1]; }
  Padic det() const { return m[0][0] * m[1][1] - m[0][1] * m[1][0]; }
};

// Frobenius on the basis dx/y, x dx/y of y^2 = x^3 + A x + B with good
// reduction at p.
inline FrobeniusMatrix frobenius_matrix(const Padic& A, const Padic& B, long N) {
  using detail::PV;
  const prime_t p = A.prime();
  if (p < 5) throw unsupported_error("Frobenius reduction needs p >= 5");
  // Tracked precision overstates the loss in the reduction steps (the
  // divisions by 2s - 1 largely cancel), so the inputs are lifted to exact
  // integers and the work is done with enough spare digits that the
  // pessimistic bound still covers N.  The result is then capped at what the
  // inputs justify.
  const long K = N + 4;
  long logp = 1;
  for (mpz_class q = p; q <= mpz_class(static_cast<long>(p) * (2 * K + 1)); q *= p) ++logp;
  const long smax_est = (static_cast<long>(p) * (2 * K + 1)) / 2;
  const long W = N + smax_est / static_cast<long>(p) + 2 * logp + 8;
  const long input_prec = std::min(A.precision_absolute(), B.precision_absolute());
  const Padic zero = Padic::zero(p, W);
  auto num = [&](long v) { return Padic::from_integer(p, v, W + 16); };
  const Padic a = Padic::from_integer(p, A.lift(), W), b = Padic::from_integer(p, B.lift(), W);
  const PV Q{b, a, zero, num(1)};
  const PV dQ{a, zero, num(3)};
  // u Q + v Q' = 1 with deg u <= 1, deg v <= 2: Sylvester system in
  // unknowns (u0, u1, v0, v1, v2).
  std::array<std::array<Padic, 6>, 5> S;
  for (auto& row : S) row.fill(zero);
  // coefficient of x^k in u Q + v Q'
  for (int k = 0; k < 5; ++k) {
    for (int i = 0; i < 2; ++i)
      if (k - i >= 0 && k - i < 4) S[static_cast<size_t>(k)][static_cast<size_t>(i)] = Q[static_cast<size_t>(k - i)];
    for (int i = 0; i < 3; ++i)
      if (k - i >= 0 && k - i < 3) S[static_cast<size_t>(k)][static_cast<size_t>(2 + i)] = dQ[static_cast<size_t>(k - i)];
    S[static_cast<size_t>(k)][5] = k == 0 ? num(1) : zero;
  }
  for (int c = 0; c < 5; ++c) {
    int piv = -1;
    long best = 1L << 40;
    for (int r = c; r < 5; ++r)
      if (!S[static_cast<size_t>(r)][static_cast<size_t>(c)].is_zero() &&
          S[static_cast<size_t>(r)][static_cast<size_t>(c)].valuation() < best) {
        best = S[static_cast<size_t>(r)][static_cast<size_t>(c)].valuation();
        piv = r;
      }
    if (piv < 0) throw domain_error("singular cubic in Frobenius computation");
    std::swap(S[static_cast<size_t>(c)], S[static_cast<size_t>(piv)]);
    for (int r = 0; r < 5; ++r) {
      if (r == c) continue;
      Padic f = S[static_cast<size_t>(r)][static_cast<size_t>(c)] / S[static_cast<size_t>(c)][static_cast<size_t>(c)];
      for (int k = c; k < 6; ++k)
        S[static_cast<size_t>(r)][static_cast<size_t>(k)] -= f * S[static_cast<size_t>(c)][static_cast<size_t>(k)];
    }
  }
  PV u(2), v(3);
  for (int i = 0; i < 2; ++i) u[static_cast<size_t>(i)] = S[static_cast<size_t>(i)][5] / S[static_cast<size_t>(i)][static_cast<size_t>(i)];
  for (int i = 0; i < 3; ++i)
    v[static_cast<size_t>(i)] = S[static_cast<size_t>(2 + i)][5] / S[static_cast<size_t>(2 + i)][static_cast<size_t>(2 + i)];

  // E = Q(x^p) - Q(x)^p
  PV Qp{num(1)};
  for (prime_t i = 0; i < p; ++i) Qp = detail::pv_mul(Qp, Q, zero);
  PV Ex(3 * p + 1, zero);
  Ex[0] = b;
  Ex[p] = a;
  Ex[3 * p] = num(1);
  for (size_t i = 0; i < Qp.size(); ++i) Ex[i] -= Qp[i];

  // binom(-1/2, k)
  std::vector<Padic> binom{num(1)};
  for (long k = 1; k <= K; ++k) binom.push_back(binom.back() * Padic::from_rational(p, -(2 * k - 1), 2 * k, W + 16));

  FrobeniusMatrix F;
  const long smax = (static_cast<long>(p) * (2 * K + 1) - 1) / 2;
  std::array<std::vector<PV>, 2> P;
  for (int i = 0; i < 2; ++i) P[static_cast<size_t>(i)].assign(static_cast<size_t>(smax + 1), PV{});
  PV Ek{num(1)};
  const Padic pp = num(static_cast<long>(p));
  for (long k = 0; k <= K; ++k) {
    const long s = (static_cast<long>(p) * (2 * k + 1) - 1) / 2;
    for (int i = 0; i < 2; ++i) {
      PV term = Ek;
      for (auto& c : term) c = pp * binom[static_cast<size_t>(k)] * c;
      detail::pv_add_into(P[static_cast<size_t>(i)][static_cast<size_t>(s)], term,
                          static_cast<size_t>(static_cast<long>(p) * (i + 1) - 1), zero);
    }
    if (k < K) Ek = detail::pv_mul(Ek, Ex, zero);
  }
  for (int i = 0; i < 2; ++i) {
    auto& Ps = P[static_cast<size_t>(i)];
    for (long s = smax; s >= 1; --s) {
      PV R = std::move(Ps[static_cast<size_t>(s)]);
      if (R.empty()) continue;
      // R = R0 + Q R1
      PV R1;
      if (R.size() > 3) {
        R1.assign(R.size() - 3, zero);
        for (long j = static_cast<long>(R.size()) - 1; j >= 3; --j) {
          Padic c = R[static_cast<size_t>(j)];
          R1[static_cast<size_t>(j - 3)] = c;
          R[static_cast<size_t>(j)] = zero;
          R[static_cast<size_t>(j - 2)] -= c * a;
          R[static_cast<size_t>(j - 3)] -= c * b;
        }
        R.resize(3);
      }
      // R0 dx/y^(2s+1) = (u R0 + 2/(2s-1) (v R0)') dx/y^(2s-1)
      PV uR = detail::pv_mul(u, R, zero);
      PV vR = detail::pv_mul(v, R, zero);
      PV d(vR.size() > 1 ? vR.size() - 1 : 1, zero);
      const Padic two_over = Padic::from_rational(p, 2, 2 * s - 1, W + 16);
      for (size_t j = 1; j < vR.size(); ++j) d[j - 1] = two_over * num(static_cast<long>(j)) * vR[j];
      auto& dst = Ps[static_cast<size_t>(s - 1)];
      detail::pv_add_into(dst, R1, 0, zero);
      detail::pv_add_into(dst, uR, 0, zero);
      detail::pv_add_into(dst, d, 0, zero);
    }
    PV R = Ps[0];
    // x^j dx/y = -((j - 3/2) A x^(j-2) + (j - 2) B x^(j-3)) / (j - 1/2) dx/y
    for (long j = static_cast<long>(R.size()) - 1; j >= 2; --j) {
      Padic c = R[static_cast<size_t>(j)];
      R[static_cast<size_t>(j)] = zero;
      Padic inv = Padic::from_rational(p, 2, 2 * j - 1, W + 16);
      R[static_cast<size_t>(j - 2)] -= c * inv * Padic::from_rational(p, 2 * j - 3, 2, W + 16) * a;
      if (j >= 3) R[static_cast<size_t>(j - 3)] -= c * inv * num(j - 2) * b;
    }
    R.resize(2, zero);
    F.m[0][static_cast<size_t>(i)] = R[0].with_precision(std::min(input_prec, K + 1) - logp);
    F.m[1][static_cast<size_t>(i)] = R[1].with_precision(std::min(input_prec, K + 1) - logp);
  }
  return F;
}

struct UnitRoot {
  Padic c;               // unit-root subspace is spanned by (x + c) omega
  FrobeniusMatrix frob;  // on the short model
  Padic ap;              // trace of Frobenius
};

// Requires good ordinary reduction.
inline UnitRoot unit_root_c(const Weierstrass<Padic>& E, long N) {
  const prime_t p = E.a1().prime();
  const Padic c4 = E.c4(), c6 = E.c6();
  const Padic A = Padic::from_integer(p, -27, N + 64) * c4, B = Padic::from_integer(p, -54, N + 64) * c6;
  FrobeniusMatrix F = frobenius_matrix(A, B, N + 2);
  Padic tr = F.trace();
  if (tr.is_zero() || tr.valuation() > 0) throw domain_error("supersingular reduction: Frobenius trace divisible by p");
  std::array<Padic, 2> v{Padic::zero(p, N + 8), Padic::one(p, N + 8)};
  for (long it = 0; it < N + 8; ++it) {
    std::array<Padic, 2> nv{F.m[0][0] * v[0] + F.m[0][1] * v[1], F.m[1][0] * v[0] + F.m[1][1] * v[1]};
    long k = std::min(nv[0].valuation(), nv[1].valuation());
    v = {nv[0].shifted(-k), nv[1].shifted(-k)};
  }
  if (v[1].is_zero() || v[1].valuation() > 0) throw domain_error("unit-root vector is not of the form (x + c) omega");
  Padic e = v[0] / v[1];
  Padic c = (Padic::from_integer(p, 3, N + 64) * E.b2() + e) / Padic::from_integer(p, 36, N + 64);
  return {c.with_precision(N), F, tr};
}

// ---------------------------------------------------------------------------

struct SigmaFunction {
  prime_t p = 0;
  long M = 0;          // t-adic truncation: coefficients of t^1 .. t^(M-1)
  long N = 0;          // p-adic working precision
  Padic c;             // x(z) + c = -d^2/dz^2 log sigma
  Series sigma;        // sigma(t)
  Series phi;          // Phi(z), sigma(z) = z exp(Phi(z))
  FormalExpansions fe;
  Series exp_z;        // compositional inverse of log
};

// sigma_c(t) = L(t) exp(Phi(L(t))), Phi(z) = - double integral of
// (x(E(z)) + c - 1/z^2).  Passing `c_override` skips the Frobenius step.
inline SigmaFunction sigma_compute(const Weierstrass<Padic>& E, long M, long N,
                                   const Padic* c_override = nullptr) {
  SigmaFunction S;
  S.p = E.a1().prime();
  S.M = M;
  S.N = N;
  S.c = c_override ? c_override->with_precision(N) : unit_root_c(E, N).c;
  S.fe = formal_expansions(E, M + 4);
  const Series L = S.fe.log.truncated(M + 4);
  S.exp_z = L.revert();
  // x(E(z)) as a Laurent series in z
  Series X = S.fe.x.compose(S.exp_z);
  Series g = X.plus_constant(S.c);
  g.at(-2) = g.coeff(-2) - Padic::one(S.p, N + 64);
  g = g.with_low(0);
  S.phi = -(g.integral().integral());
  Series ephi = S.phi.with_low(1).compose(L).exp();
  S.sigma = (L * ephi).truncated(M);
  return S;
}

// sigma(t0) for v(t0) >= 1.  The omitted tail is below t0^M.
inline Padic sigma_eval(const SigmaFunction& S, const Padic& t0) {
  if (t0.is_zero()) return t0;
  if (t0.valuation() < 1) throw domain_error("sigma is evaluated on the formal group only");
  Padic v = S.sigma.eval(t0);
  long bound = S.sigma.high() * t0.valuation() + std::min(0L, S.sigma.min_valuation());
  return v.with_precision(bound);
}

}  // namespace qcec
