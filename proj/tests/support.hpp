#pragma once

#include <random>
#include <string>

#include "qcec/heights.hpp"
#include "qcec/manifest.hpp"
#include "qcec/padic.hpp"
#include "qcec/sigma.hpp"

namespace qcec::testing {

inline std::string fixture(const std::string& name) { return std::string(QCEC_FIXTURES) + "/" + name; }

inline CurveManifest load_fixture(const std::string& name) { return load_manifest(fixture(name)); }

// Number of agreeing p-adic digits of a and b, in absolute terms.
inline long agreement(const Padic& a, const Padic& b) {
  const Padic d = a - b;
  return d.is_zero() ? d.precision_absolute() : d.valuation();
}

inline Padic random_padic(std::mt19937_64& g, prime_t p, long N, bool unit = false) {
  mpz_class m = detail::prime_power(p, N);
  gmp_randclass r(gmp_randinit_default);
  r.seed(static_cast<unsigned long>(g()));
  mpz_class v = r.get_z_range(m);
  if (unit && mpz_divisible_ui_p(v.get_mpz_t(), p)) v += 1;
  return Padic::from_integer(p, v, N);
}

inline Padic formal_parameter(const Point<Padic>& R) { return -(R.x / R.y); }

// Digits to which sigma(mQ) = sigma(Q)^(m^2) f_m(Q) holds, for Q in the
// formal group.  With t = -x/y the normalised f_m is (-1)^(m-1) psi_m.
inline long sigma_relation_digits(const Weierstrass<Padic>& E, const SigmaFunction& S, const Point<Padic>& Q, long m) {
  const Padic lhs = sigma_eval(S, formal_parameter(E.mul(Q, m)));
  Padic rhs = sigma_eval(S, formal_parameter(Q)).pow(m * m) * division_psi(E, Q.x, Q.y, m);
  if (m % 2 == 0) rhs = -rhs;
  return agreement(lhs, rhs) - lhs.valuation();
}

// Digits to which x(t) + c = -(1/w) d/dt (sigma' / (w sigma)) holds,
// minimised over the coefficients of t^-2 .. t^through.
inline long ode_residual_digits(const SigmaFunction& S, long through) {
  const Series& w = S.fe.omega;
  const Series inner = S.sigma.derivative() / (w * S.sigma);
  const Series rhs = -(inner.derivative() / w);
  const Series lhs = S.fe.x.plus_constant(S.c);
  long digits = std::numeric_limits<long>::max();
  for (long k = -2; k <= through; ++k) digits = std::min(digits, agreement(lhs.coeff(k), rhs.coeff(k)));
  return digits;
}

// The height of P computed through the multiple nP for a caller-chosen n.
inline Padic height_with_multiple(const HeightContext& H, const KPoint& P, Character chi, long n) {
  const KCurve& E = H.curve();
  const PrimeSplitting& s = H.splitting();
  const long prec = H.working_precision();
  const KPoint nP = E.mul(P, n);
  const Decomposition dec = multiple_decomposition(E, P, n, nP, H.bad_places());
  const auto eps = place_signs(chi);
  Padic sum = Padic::zero(s.p, prec + 64);
  for (int i = 0; i < 2; ++i) {
    const Padic a = s.embed(dec.a, i, prec + 8), b = s.embed(dec.b, i, prec + 8), d = s.embed(dec.d, i, prec + 8);
    const Padic term = sigma_eval(H.sigma(i), -(a * d / b)).log() - d.log();
    sum = eps[static_cast<size_t>(i)] > 0 ? sum + term : sum - term;
  }
  return sum / Padic::from_integer(s.p, n * n, prec + 64);
}

}  // namespace qcec::testing
