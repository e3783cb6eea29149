#pragma once

// Quadratic Chabauty at a split prime p: elliptic logarithms, the alpha
// coefficients of the global heights, residue-disk expansions of the local
// heights, the rho functions on disk pairs, and the root search with
// recognition of O_K-points.

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qcec/bivariate.hpp"
#include "qcec/heights.hpp"

namespace qcec {

// ---------------------------------------------------------------------------
// Pointwise logarithms and local heights at the places above p

namespace detail {

inline long local_order(const HeightContext& H, int i, const Point<Padic>& R) {
  const long p = static_cast<long>(H.prime());
  if (R.inf || R.x.valuation() < 0) return 1;
  Point<Zmod> Rb = Point<Zmod>::affine(Zmod(static_cast<long>(R.x.residue()), p), Zmod(static_cast<long>(R.y.residue()), p));
  return point_order(H.reduction(i), Rb, H.group_order(i));
}

inline Padic formal_t(const Point<Padic>& R) { return -(R.x / R.y); }

}  // namespace detail

// f_i(R) = m^-1 L(t(mR)) for a Z_p-point R of E at the i-th place above p.
inline Padic elliptic_log_at(const HeightContext& H, int i, const Point<Padic>& R, long multiplier = 0) {
  const Weierstrass<Padic>& E = H.local_curve(i);
  const prime_t p = H.prime();
  if (R.inf) return Padic::zero(p, H.working_precision());
  long m = multiplier > 0 ? multiplier : detail::local_order(H, i, R);
  Point<Padic> mR = E.mul(R, m);
  if (mR.inf) return Padic::zero(p, H.working_precision());
  Padic t = detail::formal_t(mR);
  if (t.valuation() < 1) throw domain_error("multiplier does not reach the formal group");
  return H.sigma(i).fe.log.eval(t) / Padic::from_integer(p, m, H.working_precision() + 64);
}

// lambda_i(R) = m^-2 log(sigma_i(t(mR)) / psi_m(R)) for an integral affine R.
inline Padic local_height_at(const HeightContext& H, int i, const Point<Padic>& R, long multiplier = 0) {
  const Weierstrass<Padic>& E = H.local_curve(i);
  const prime_t p = H.prime();
  if (R.inf || R.x.valuation() < 0) throw domain_error("local height at p is taken on integral affine points");
  long m = multiplier > 0 ? multiplier : detail::local_order(H, i, R);
  Point<Padic> mR = E.mul(R, m);
  if (mR.inf) throw domain_error("torsion point in the local height");
  Padic t = detail::formal_t(mR);
  if (t.valuation() < 1) throw domain_error("multiplier does not reach the formal group");
  Padic s = sigma_eval(H.sigma(i), t);
  Padic f = division_psi(E, R.x, R.y, m);
  return (s / f).log() / Padic::from_integer(p, m * m, H.working_precision() + 64);
}

// ---------------------------------------------------------------------------
// Bilinear forms and the alpha solve

// g_ij(R, S) = (f_i(R) f_j(S) + f_j(R) f_i(S)) / 2
inline Padic g_form(int i, int j, const std::array<Padic, 2>& fR, const std::array<Padic, 2>& fS) {
  const size_t a = static_cast<size_t>(i), b = static_cast<size_t>(j);
  Padic s = fR[a] * fS[b] + fR[b] * fS[a];
  return s / Padic::from_integer(s.prime(), 2, s.precision_absolute() + 8);
}

struct AlphaCoefficients {
  Character chi = Character::cyclotomic;
  Padic a11, a12, a22;
  long det_valuation = 0;

  Padic eval(const std::array<Padic, 2>& f) const { return a11 * f[0] * f[0] + a12 * f[0] * f[1] + a22 * f[1] * f[1]; }
};

inline Padic det3(const std::array<std::array<Padic, 3>, 3>& A) {
  return A[0][0] * (A[1][1] * A[2][2] - A[1][2] * A[2][1]) - A[0][1] * (A[1][0] * A[2][2] - A[1][2] * A[2][0]) +
         A[0][2] * (A[1][0] * A[2][1] - A[1][1] * A[2][0]);
}

// Fits h = a11 g11 + a12 g12 + a22 g22 on (P, P), (P, Q), (Q, Q).
inline AlphaCoefficients solve_alpha(const HeightContext& H, const KPoint& P, const KPoint& Q, Character chi) {
  const auto fP = H.elliptic_log(P), fQ = H.elliptic_log(Q);
  std::array<std::array<Padic, 2>, 3> lhs{fP, fP, fQ}, rhs{fP, fQ, fQ};
  std::array<Padic, 3> b{H.height(P, chi), H.pairing(P, Q, chi), H.height(Q, chi)};
  std::array<std::array<Padic, 3>, 3> A;
  for (size_t r = 0; r < 3; ++r) {
    A[r][0] = g_form(0, 0, lhs[r], rhs[r]);
    A[r][1] = g_form(0, 1, lhs[r], rhs[r]);
    A[r][2] = g_form(1, 1, lhs[r], rhs[r]);
  }
  Padic D = det3(A);
  if (D.is_zero()) throw domain_error("Condition lin-independence fails at p; choose a different prime");
  std::array<Padic, 3> x;
  for (size_t c = 0; c < 3; ++c) {
    auto Ac = A;
    for (size_t r = 0; r < 3; ++r) Ac[r][c] = b[r];
    x[c] = det3(Ac) / D;
  }
  AlphaCoefficients a;
  a.chi = chi;
  a.a11 = x[0];
  a.a12 = x[1];
  a.a22 = x[2];
  a.det_valuation = D.valuation();
  return a;
}

// ---------------------------------------------------------------------------
// Residue disks

struct Disk {
  int place = 0;
  long index = 0;
  Point<Zmod> residue;
  long order = 0;          // order of the residue point, also of the center
  Point<Padic> center;     // torsion lift
  bool x_parameter = true; // x = x_T + p u, else y = y_T + p u
  Series X, Y;             // R(u)
  Series F;                // f_i(R(u))
  Series Lambda;           // lambda_i(R(u))
  long tail = 0;           // valuation bound for the omitted terms of F and Lambda

  Point<Padic> point(const Padic& u) const { return Point<Padic>::affine(X.eval(u), Y.eval(u)); }
};

inline long floor_log(long k, long p) {
  long e = 0;
  for (long q = p; q <= k; q *= p) ++e;
  return e;
}

class DiskFactory {
 public:
  DiskFactory(const HeightContext& H, int place, long K) : H_(H), place_(place), K_(K) {}

  // The point of finite order prime to p reducing to D.
  Point<Padic> torsion_lift(const Point<Zmod>& D, long m) {
    const Weierstrass<Padic>& E = H_.local_curve(place_);
    const prime_t p = H_.prime();
    const long prec = E.a1().precision_absolute();
    const Padic xb = Padic::from_integer(p, D.x.value(), prec), yb = Padic::from_integer(p, D.y.value(), prec);
    auto it = polys_.find(m);
    if (it == polys_.end()) it = polys_.emplace(m, division_poly_x(E, m)).first;
    Padic x = hensel_univariate(it->second, xb);
    Padic lin = E.a1() * x + E.a3();
    Padic rhs = ((x + E.a2()) * x + E.a4()) * x + E.a6();
    Padic y;
    if (m == 2) {
      y = -lin / Padic::from_integer(p, 2, prec + 8);
    } else {
      const Padic z = Padic::zero(p, prec);
      Poly<Padic> g(z, {-rhs, lin, Padic::one(p, prec)});
      y = hensel_univariate(g, yb);
    }
    return Point<Padic>::affine(x, y);
  }

  Disk make(const Point<Zmod>& D, long index) {
    const Weierstrass<Padic>& E = H_.local_curve(place_);
    const SigmaFunction& S = H_.sigma(place_);
    const prime_t p = H_.prime();
    const long cap = E.a1().precision_absolute();
    const long K = K_;
    const long Kw = K + 6;
    Disk d;
    d.place = place_;
    d.index = index;
    d.residue = D;
    d.order = point_order(H_.reduction(place_), D, H_.group_order(place_));
    d.center = torsion_lift(D, d.order);
    const Padic& xT = d.center.x;
    const Padic& yT = d.center.y;
    d.x_parameter = d.order != 2;

    auto cst = [&](const Padic& a) { return Series::constant(a, Kw, cap); };
    const Series s = Series::variable(p, Kw, cap);
    Series X, Y;
    if (d.x_parameter) {
      X = cst(xT) + s;
      Y = cst(yT);
      for (long it = 0; it < 2 * floor_log(Kw, 2) + 4; ++it) {
        Series G = Y * Y + (cst(E.a1()) * X + cst(E.a3())) * Y - (((X + cst(E.a2())) * X + cst(E.a4())) * X + cst(E.a6()));
        Series dG = cst(Padic::from_integer(p, 2, cap)) * Y + cst(E.a1()) * X + cst(E.a3());
        Y = (Y - (G.truncated(Kw) / dG.truncated(Kw))).truncated(Kw);
      }
    } else {
      Y = cst(yT) + s;
      X = cst(xT);
      for (long it = 0; it < 2 * floor_log(Kw, 2) + 4; ++it) {
        Series G = ((X + cst(E.a2())) * X + cst(E.a4())) * X + cst(E.a6()) - Y * Y - (cst(E.a1()) * X + cst(E.a3())) * Y;
        Series dG = (cst(Padic::from_integer(p, 3, cap)) * X + cst(Padic::from_integer(p, 2, cap)) * cst(E.a2())) * X +
                    cst(E.a4()) - cst(E.a1()) * Y;
        X = (X - (G.truncated(Kw) / dG.truncated(Kw))).truncated(Kw);
      }
    }
    X = X.truncated(Kw);
    Y = Y.truncated(Kw);

    // S = R - T lies in the formal group; its parameter t_S(s) vanishes at 0.
    const Padic yNeg = -yT - E.a1() * xT - E.a3();
    Series lam = (Y - cst(yNeg)) / (X - cst(xT)).stripped();
    Series xS = lam * lam + cst(E.a1()) * lam - cst(E.a2()) - X - cst(xT);
    Series nu = Y - lam * X;
    Series yS = -((lam + cst(E.a1())) * xS) - nu - cst(E.a3());
    Series tS = (-(xS / yS.stripped())).stripped().truncated(K);
    if (tS.low() < 1) throw domain_error("disk parameter does not reach the formal group");

    Series F = S.fe.log.truncated(K + 1).compose(tS).truncated(K);
    const Padic mm = Padic::from_integer(p, d.order, cap + 64);
    Series tm = S.exp_z.truncated(K + 1).compose(mm * F).truncated(K);
    Series sig = S.sigma.truncated(K + 1).compose(tm).stripped();
    Weierstrass<Series> Es = E.map<Series>([&](const Padic& c) { return Series::constant(c, K, cap); });
    Series psi = division_psi(Es, X.truncated(K), Y.truncated(K), d.order).stripped();
    Series ratio = (sig / psi).truncated(K - 1).with_low(0);
    Series Lam = ratio.log() / Padic::from_integer(p, d.order * d.order, cap + 64);

    const Padic pp = Padic::from_integer(p, static_cast<long>(p), cap + 64);
    d.X = X.truncated(K).scaled(pp);
    d.Y = Y.truncated(K).scaled(pp);
    d.F = F.with_low(0).scaled(pp);
    d.Lambda = Lam.scaled(pp);
    const long Kt = std::min(d.F.high(), d.Lambda.high());
    d.tail = Kt - floor_log(Kt, static_cast<long>(p));
    return d;
  }

  std::vector<Disk> all() {
    std::vector<Disk> out;
    std::vector<Point<Zmod>> pts = enumerate_points(H_.reduction(place_));
    std::sort(pts.begin(), pts.end(), [](const Point<Zmod>& a, const Point<Zmod>& b) { return key_of(a) < key_of(b); });
    long k = 0;
    for (const auto& D : pts) {
      if (D.inf) continue;
      out.push_back(make(D, k++));
    }
    return out;
  }

 private:
  const HeightContext& H_;
  int place_;
  long K_;
  std::map<long, Poly<Padic>> polys_;
};

// Truncation order in the disk parameter giving a tail past the target
// precision N.
inline long disk_truncation(prime_t p, long N) {
  long K = N + 8;
  while (K - 2 * floor_log(K, static_cast<long>(p)) < N + 10) ++K;
  return K;
}

// ---------------------------------------------------------------------------
// rho on a disk pair

inline Series2 rho_expand(const HeightContext& H, const AlphaCoefficients& alpha, const Disk& D1, const Disk& D2) {
  const long M = std::min({D1.F.high(), D2.F.high(), D1.Lambda.high(), D2.Lambda.high()});
  const auto eps = place_signs(alpha.chi);
  const Series& F1 = D1.F;
  const Series& F2 = D2.F;
  Series2 r = alpha.a11 * Series2::in_first((F1 * F1).truncated(M), M) + alpha.a12 * Series2::outer(F1, F2, M) +
              alpha.a22 * Series2::in_second((F2 * F2).truncated(M), M);
  Series2 l1 = Series2::in_first(D1.Lambda.truncated(M), M);
  Series2 l2 = Series2::in_second(D2.Lambda.truncated(M), M);
  r = eps[0] > 0 ? r - l1 : r + l1;
  r = eps[1] > 0 ? r - l2 : r + l2;
  const prime_t p = H.prime();
  long va = std::min({alpha.a11.valuation(), alpha.a12.valuation(), alpha.a22.valuation(), 0L});
  long tail = std::min(std::min(D1.tail, D2.tail), M - 2 * floor_log(M, static_cast<long>(p)) + va);
  r.set_tail(std::min(tail, r.tail()));
  return r;
}

// Pointwise rho from the global-height side: the alpha-combination of the
// logarithms minus the local heights at p.
inline Padic rho_at(const HeightContext& H, const AlphaCoefficients& alpha, const std::array<Point<Padic>, 2>& R) {
  std::array<Padic, 2> f{elliptic_log_at(H, 0, R[0]), elliptic_log_at(H, 1, R[1])};
  const auto eps = place_signs(alpha.chi);
  Padic r = alpha.eval(f);
  for (int i = 0; i < 2; ++i) {
    Padic l = local_height_at(H, i, R[static_cast<size_t>(i)]);
    r = eps[static_cast<size_t>(i)] > 0 ? r - l : r + l;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Recognition

// Smallest nonzero vector (num, den) of the lattice spanned by (p^N, 0) and
// (z, 1): returns false unless both coordinates are below `bound`.
inline bool rational_reconstruct(const Padic& z, long N, const mpz_class& bound, mpq_class& out) {
  const prime_t p = z.prime();
  const mpz_class pN = detail::prime_power(p, N);
  if (z.valuation() < 0) return false;
  mpz_class r = z.lift() % pN;
  if (r < 0) r += pN;
  std::array<mpz_class, 2> u{pN, 0}, v{r, 1};
  auto dot = [](const std::array<mpz_class, 2>& a, const std::array<mpz_class, 2>& b) -> mpz_class { return a[0] * b[0] + a[1] * b[1]; };
  for (;;) {
    if (dot(u, u) < dot(v, v)) std::swap(u, v);
    mpz_class num = dot(u, v), den = dot(v, v);
    mpz_class q;
    mpz_fdiv_q(q.get_mpz_t(), mpz_class(2 * num + den).get_mpz_t(), mpz_class(2 * den).get_mpz_t());
    if (q == 0) break;
    u[0] -= q * v[0];
    u[1] -= q * v[1];
    if (dot(u, u) >= dot(v, v)) break;
  }
  if (dot(u, u) < dot(v, v)) std::swap(u, v);
  mpz_class a = v[0], b = v[1];
  if (b == 0) return false;
  if (abs(a) > bound || abs(b) > bound) return false;
  if (b < 0) {
    a = -a;
    b = -b;
  }
  out = mpq_class(a, b);
  out.canonicalize();
  return true;
}

// Integers are read off the centered lift first: a large integral norm is
// not always the shortest lattice vector.
inline bool reconstruct_value(const Padic& z, long N, const mpz_class& bound, mpq_class& out) {
  if (z.is_zero() || (z.valuation() >= 0 && z.precision_absolute() >= N)) {
    const mpz_class c = z.is_zero() ? mpz_class(0) : z.with_precision(N).lift_centered();
    if (abs(c) <= bound) {
      out = c;
      return true;
    }
  }
  return rational_reconstruct(z, N, bound, out);
}

// The element of K with embeddings (z1, z2), recovered from its trace and
// norm.
inline std::optional<QuadRat> recognize_element(const PrimeSplitting& s, const Padic& z1, const Padic& z2, long N,
                                                const mpz_class& bound) {
  mpq_class tr, nm;
  if (!reconstruct_value(z1 + z2, N, bound, tr)) return std::nullopt;
  if (!reconstruct_value(z1 * z2, N, bound * bound, nm)) return std::nullopt;
  const QuadField& F = s.field;
  // x = a + b w: Tr = 2a - t b, Nm = a^2 - t a b + n b^2, so
  // Tr^2 - 4 Nm = b^2 (t^2 - 4n).
  mpq_class disc = tr * tr - 4 * nm;
  mpq_class b2 = disc / F.discriminant();
  if (b2 < 0) return std::nullopt;
  mpz_class bn, bd, rem;
  mpz_class num = b2.get_num(), den = b2.get_den();
  if (!mpz_perfect_square_p(num.get_mpz_t()) || !mpz_perfect_square_p(den.get_mpz_t())) return std::nullopt;
  mpz_sqrt(bn.get_mpz_t(), num.get_mpz_t());
  mpz_sqrt(bd.get_mpz_t(), den.get_mpz_t());
  for (int sign : {1, -1}) {
    mpq_class b(sign * bn, bd);
    mpq_class a = (tr + F.t * b) / 2;
    mpz_class D = lcm(a.get_den(), b.get_den());
    mpq_class A = a * D, B = b * D;
    QuadRat x(QuadInt(F, A.get_num(), B.get_num()), D);
    Padic e1 = s.embed(x, 0, N), e2 = s.embed(x, 1, N);
    if ((e1 - z1).with_precision(N).is_zero() && (e2 - z2).with_precision(N).is_zero()) return x;
    if (bn == 0) break;
  }
  return std::nullopt;
}

inline mpz_class recognition_bound(prime_t p, long N) {
  mpz_class b = 1;
  for (long k = 0; k < N / 2 - 2; ++k) b *= static_cast<long>(p);
  return b;
}

inline std::optional<KPoint> recognize_point(const HeightContext& H, const std::array<Point<Padic>, 2>& R, long N) {
  const PrimeSplitting& s = H.splitting();
  const mpz_class bound = recognition_bound(H.prime(), N);
  auto x = recognize_element(s, R[0].x, R[1].x, N, bound);
  if (!x) return std::nullopt;
  auto y = recognize_element(s, R[0].y, R[1].y, N, bound);
  if (!y) return std::nullopt;
  KPoint P = KPoint::affine(*x, *y);
  if (!H.curve().on_curve(P)) return std::nullopt;
  return P;
}

// ---------------------------------------------------------------------------
// The quadratic Chabauty set

struct Solution {
  long disk1 = 0, disk2 = 0;
  int target = 0;                 // index into the selections of the T-sets
  std::array<Padic, 2> u;
  std::array<Point<Padic>, 2> R;
  std::array<Padic, 2> f;         // f_1(R_1), f_2(R_2)
  std::array<Padic, 2> residual;  // rho^cyc - t^cyc, rho^anti - t^anti at the root
  int depth = 0;
  long jacobian_valuation = 0;
  std::optional<KPoint> point;    // recognized O_K-point
};

struct UnresolvedClass {
  long disk1 = 0, disk2 = 0;
  int target = 0;
  PlaneUnresolved cls;
};

struct QCResult {
  prime_t p = 0;
  long precision = 0;
  long truncation = 0;
  std::array<long, 2> group_orders{};
  std::array<AlphaCoefficients, 2> alpha;  // cyc, anti
  TSet tcyc, tanti;
  std::array<std::array<Padic, 2>, 2> generator_logs;  // f_i(P), f_i(Q)
  std::vector<Solution> B;
  std::vector<UnresolvedClass> unresolved;

  long recognized_count() const {
    return static_cast<long>(std::count_if(B.begin(), B.end(), [](const Solution& s) { return s.point.has_value(); }));
  }
  long mock_count() const { return static_cast<long>(B.size()) - recognized_count(); }
};

struct QCOptions {
  long precision = 25;
  long truncation = 0;  // 0: chosen from p and the precision
  int max_depth = 3;
};

// Roots of (rho^cyc, rho^anti) = (t^cyc, t^anti) on every affine disk pair.
inline QCResult solve_disks(const HeightContext& H, const KPoint& P, const KPoint& Q, const QCOptions& opt) {
  QCResult res;
  const prime_t p = H.prime();
  const long N = opt.precision;
  res.p = p;
  res.precision = N;
  res.truncation = opt.truncation > 0 ? opt.truncation : disk_truncation(p, N);
  res.group_orders = {H.group_order(0), H.group_order(1)};
  res.alpha[0] = solve_alpha(H, P, Q, Character::cyclotomic);
  res.alpha[1] = solve_alpha(H, P, Q, Character::anticyclotomic);
  res.tcyc = H.tset(Character::cyclotomic);
  res.tanti = H.tset(Character::anticyclotomic);
  res.generator_logs = {H.elliptic_log(P), H.elliptic_log(Q)};

  std::array<std::vector<Disk>, 2> disks;
  for (int i = 0; i < 2; ++i) disks[static_cast<size_t>(i)] = DiskFactory(H, i, res.truncation).all();

  for (const Disk& D1 : disks[0])
    for (const Disk& D2 : disks[1]) {
      Series2 rc = rho_expand(H, res.alpha[0], D1, D2);
      Series2 ra = rho_expand(H, res.alpha[1], D1, D2);
      for (size_t k = 0; k < res.tcyc.values.size(); ++k) {
        std::array<Series2, 2> G{rc.plus_constant(-res.tcyc.values[k]), ra.plus_constant(-res.tanti.values[k])};
        PlaneRoots roots = find_plane_roots(G, opt.max_depth);
        std::vector<Solution> found;
        for (const auto& r : roots.roots) {
          Solution s;
          s.disk1 = D1.index;
          s.disk2 = D2.index;
          s.target = static_cast<int>(k);
          s.u = r.u;
          s.depth = r.depth;
          s.R = {D1.point(r.u[0]), D2.point(r.u[1])};
          s.f = {D1.F.eval(r.u[0]), D2.F.eval(r.u[1])};
          s.residual = {G[0].eval(r.u[0], r.u[1]), G[1].eval(r.u[0], r.u[1])};
          Padic j = G[0].d1().eval(r.u[0], r.u[1]) * G[1].d2().eval(r.u[0], r.u[1]) -
                    G[0].d2().eval(r.u[0], r.u[1]) * G[1].d1().eval(r.u[0], r.u[1]);
          s.jacobian_valuation = j.is_zero() ? j.precision_absolute() : j.valuation();
          bool dup = false;
          for (const auto& o : found)
            if ((o.u[0] - s.u[0]).with_precision(N - 2).is_zero() && (o.u[1] - s.u[1]).with_precision(N - 2).is_zero()) {
              dup = true;
              if (s.depth < o.depth) const_cast<Solution&>(o).depth = s.depth;
            }
          if (dup) continue;
          s.point = recognize_point(H, s.R, N);
          found.push_back(std::move(s));
        }
        for (auto& s : found) res.B.push_back(std::move(s));
        for (const auto& u : roots.unresolved) res.unresolved.push_back({D1.index, D2.index, static_cast<int>(k), u});
      }
    }
  return res;
}

}  // namespace qcec
