#pragma once

// Cyclotomic and anticyclotomic p-adic heights on E(K) for p = pi1 pi2 split
// in K, their local pieces at p, and the finite sets T of away-from-p values
// taken on integral points.

#include <gmpxx.h>

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qcec/curve.hpp"
#include "qcec/sigma.hpp"

namespace qcec {

enum class Character { cyclotomic, anticyclotomic };

inline const char* to_string(Character c) { return c == Character::cyclotomic ? "cyc" : "anti"; }

// Signs of the two places above p in the local decomposition.
inline std::array<int, 2> place_signs(Character c) {
  return c == Character::cyclotomic ? std::array<int, 2>{1, 1} : std::array<int, 2>{1, -1};
}

// Local height values on the component groups, in units of chi_v(pi_v) for
// the normalization x = a / d^2, h_v = chi_v(d): I_n gives -i(n-i)/(2n), I*_n
// gives -1/2 and -(1 + n/4)/2, III, IV, IV*, III* give -1/4, -1/3, -2/3, -3/4,
// and I0, II, II* only 0.
inline std::vector<mpq_class> kodaira_contributions(const std::string& symbol) {
  std::vector<mpq_class> out{0};
  const std::string& s = symbol;
  if (s == "I0" || s == "II" || s == "II*") return out;
  if (s == "III") return {0, mpq_class(-1, 4)};
  if (s == "III*") return {0, mpq_class(-3, 4)};
  if (s == "IV") return {0, mpq_class(-1, 3)};
  if (s == "IV*") return {0, mpq_class(-2, 3)};
  if (s == "I0*") return {0, mpq_class(-1, 2)};
  if (s.size() > 2 && s[0] == 'I' && s.back() == '*') {
    long n = std::stol(s.substr(1, s.size() - 2));
    mpq_class far(-(4 + n), 8);
    far.canonicalize();
    return {0, mpq_class(-1, 2), far};
  }
  if (s.size() > 1 && s[0] == 'I') {
    long n = std::stol(s.substr(1));
    for (long i = 1; i <= n / 2; ++i) {
      mpq_class c(-i * (n - i), 2 * n);
      c.canonicalize();
      out.push_back(c);
    }
    return out;
  }
  throw validation_error("unknown Kodaira symbol: " + symbol);
}

struct LocalData {
  QuadInt place;
  std::string kodaira;
  long tamagawa = 1;
  std::vector<mpq_class> contributions;  // empty: use the Kodaira table
  long discriminant_valuation = 0;

  std::vector<mpq_class> component_contributions() const {
    return contributions.empty() ? kodaira_contributions(kodaira) : contributions;
  }
};

// chi_v(pi_v) for v not above p: -log Nm(pi) for the cyclotomic character,
// -(log psi1(pi) - log psi2(pi)) for the anticyclotomic one.
inline Padic char_value(Character chi, const PrimeSplitting& s, const QuadInt& pi, long prec) {
  if (pi.divisible_by(s.pi[0]) || pi.divisible_by(s.pi[1]))
    throw domain_error("character value at a place above p");
  if (chi == Character::cyclotomic) return -Padic::from_integer(s.p, pi.norm(), prec).log();
  return -(s.embed(pi, 0, prec).log() - s.embed(pi, 1, prec).log());
}

struct TSet {
  std::vector<Padic> values;
  std::vector<std::vector<int>> selections;  // contribution index per bad place
};

inline TSet t_set(Character chi, const std::vector<LocalData>& bad, const PrimeSplitting& s, long prec) {
  TSet T;
  T.values.push_back(Padic::zero(s.p, prec));
  T.selections.push_back({});
  for (const auto& v : bad) {
    const Padic cv = char_value(chi, s, v.place, prec);
    const auto contrib = v.component_contributions();
    TSet next;
    for (size_t k = 0; k < T.values.size(); ++k)
      for (size_t j = 0; j < contrib.size(); ++j) {
        Padic term = Padic::from_rational(s.p, contrib[j].get_num(), contrib[j].get_den(), prec + 8) * cv;
        next.values.push_back(T.values[k] + term);
        auto sel = T.selections[k];
        sel.push_back(static_cast<int>(j));
        next.selections.push_back(sel);
      }
    T = std::move(next);
  }
  return T;
}

// Decomposition of nP through the division value: d(nP) = psi_n(P) d(P)^(n^2)
// up to units, except for powers of bad places where P is off the identity
// component, which are removed by valuation.  Falls back to the ideal
// lattice when the result fails the integrality checks.
inline Decomposition multiple_decomposition(const KCurve& E, const KPoint& P, long n, const KPoint& nP,
                                            const std::vector<LocalData>& bad) {
  const QuadField F = E.a1().field();
  Decomposition d0 = denominator_decomposition(P.x, P.y);
  QuadRat psi = division_psi(E, P.x, P.y, n);
  QuadInt dn = d0.d, D(F, 1L);
  for (long e = n * n; e > 0; e >>= 1) {
    if (e & 1) D = D * dn;
    dn = dn * dn;
  }
  QuadRat Dr = psi * QuadRat(D);
  bool ok = Dr.is_integral() && !Dr.is_zero();
  QuadInt d = ok ? Dr.num() : QuadInt(F, 1L);
  for (size_t k = 0; ok && k < bad.size(); ++k) {
    const QuadInt& pi = bad[k].place;
    long vx = valuation(nP.x, pi);
    long keep = vx < 0 ? -vx / 2 : 0;
    long drop = valuation(d, pi) - keep;
    if (drop < 0) {
      ok = false;
      break;
    }
    QuadInt pk(F, 1L), base = pi;
    for (long e = drop; e > 0; e >>= 1) {
      if (e & 1) pk = pk * base;
      base = base * base;
    }
    d = d.divexact(pk);
  }
  if (ok) {
    d = normalize_associate(d);
    QuadRat A = nP.x * QuadRat(d * d), B = nP.y * QuadRat(d * d * d);
    bool coprime = A.is_integral() && B.is_integral();
    for (size_t k = 0; coprime && k < bad.size(); ++k)
      if (d.divisible_by(bad[k].place) && A.num().divisible_by(bad[k].place)) coprime = false;
    if (coprime) return {A.num(), B.num(), d};
  }
  return denominator_decomposition(nP.x, nP.y);
}

// Everything about a global point that the heights and logarithms need.
struct GlobalPointData {
  KPoint P;
  long n = 0;                   // nP reduces to O at both places above p and to E0 at bad places
  Decomposition dec;            // of nP
  std::array<Padic, 2> t;       // psi_i(t(nP))
  std::array<Padic, 2> log_sigma;
  std::array<Padic, 2> log_d;   // log psi_i(d(nP))
  std::array<Padic, 2> elog;    // f_i(P)
  bool torsion = false;
};

class HeightContext {
 public:
  // `N` is the p-adic precision aimed at, `M` the t-adic truncation of sigma.
  HeightContext(KCurve E, std::vector<LocalData> bad, prime_t p, long N, long M)
      : E_(std::move(E)), bad_(std::move(bad)), N_(N), M_(M) {
    const QuadField F = E_.a1().field();
    work_ = N_ + 12;
    split_ = split_prime(F, p, 4 * work_ + 64);
    for (int i = 0; i < 2; ++i) {
      reduced_[static_cast<size_t>(i)] = reduce_curve(E_, split_, i);
      Weierstrass<Zmod>& Er = reduced_[static_cast<size_t>(i)];
      if (Er.discriminant().is_zero()) throw domain_error("bad reduction at a prime above p");
      order_[static_cast<size_t>(i)] = count_points(Er);
      if ((static_cast<long>(p) + 1 - order_[static_cast<size_t>(i)]) % static_cast<long>(p) == 0)
        throw domain_error("supersingular reduction at a prime above p");
      local_[static_cast<size_t>(i)] = embed_curve(E_, split_, i, work_ + 16);
    }
  }

  const KCurve& curve() const { return E_; }
  const std::vector<LocalData>& bad_places() const { return bad_; }
  const PrimeSplitting& splitting() const { return split_; }
  prime_t prime() const { return split_.p; }
  long precision() const { return N_; }
  long working_precision() const { return work_; }
  long truncation() const { return M_; }
  const Weierstrass<Zmod>& reduction(int i) const { return reduced_[static_cast<size_t>(i)]; }
  long group_order(int i) const { return order_[static_cast<size_t>(i)]; }
  const Weierstrass<Padic>& local_curve(int i) const { return local_[static_cast<size_t>(i)]; }

  const SigmaFunction& sigma(int i) const {
    auto& S = sigma_[static_cast<size_t>(i)];
    if (!S) S = sigma_compute(local_[static_cast<size_t>(i)], M_, work_);
    return *S;
  }
  void set_sigma(int i, SigmaFunction S) { sigma_[static_cast<size_t>(i)] = std::move(S); }

  long tamagawa_lcm() const {
    long m = 1;
    for (const auto& v : bad_) m = lcm_long(m, v.tamagawa);
    return m;
  }

  // Smallest multiple of lcm(ord at pi1, ord at pi2, Tamagawa numbers) that
  // is checked to land in the identity component at every bad place.
  long subgroup_multiple(const KPoint& P) const {
    long n = tamagawa_lcm();
    for (int i = 0; i < 2; ++i) {
      Point<Zmod> R = reduce_point(P, split_, i);
      n = lcm_long(n, point_order(reduced_[static_cast<size_t>(i)], R, order_[static_cast<size_t>(i)]));
    }
    KPoint nP = E_.mul(P, n);
    for (const auto& v : bad_)
      if (!nonsingular_at(E_, v.place, nP)) throw domain_error("multiple does not reach the identity component");
    return n;
  }

  const GlobalPointData& point_data(const KPoint& P) const {
    const std::string key = P.inf ? std::string("O") : P.x.to_string() + "," + P.y.to_string();
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    GlobalPointData D;
    D.P = P;
    const prime_t p = split_.p;
    D.n = subgroup_multiple(P);
    KPoint nP = E_.mul(P, D.n);
    if (nP.inf) {
      D.torsion = true;
      for (int i = 0; i < 2; ++i) {
        D.t[static_cast<size_t>(i)] = Padic::zero(p, work_);
        D.log_sigma[static_cast<size_t>(i)] = Padic::zero(p, work_);
        D.log_d[static_cast<size_t>(i)] = Padic::zero(p, work_);
        D.elog[static_cast<size_t>(i)] = Padic::zero(p, work_);
      }
      return cache_.emplace(key, D).first->second;
    }
    D.dec = multiple_decomposition(E_, P, D.n, nP, bad_);
    const Padic nn = Padic::from_integer(p, D.n, work_ + 64);
    for (int i = 0; i < 2; ++i) {
      const size_t k = static_cast<size_t>(i);
      Padic a = split_.embed(D.dec.a, i, work_ + 8), b = split_.embed(D.dec.b, i, work_ + 8);
      Padic d = split_.embed(D.dec.d, i, work_ + 8);
      D.t[k] = -(a * d / b);
      if (D.t[k].valuation() < 1) throw domain_error("multiple is not in the formal group at p");
      D.log_sigma[k] = sigma_eval(sigma(i), D.t[k]).log();
      D.log_d[k] = d.log();
      D.elog[k] = sigma(i).fe.log.eval(D.t[k]) / nn;
    }
    return cache_.emplace(key, D).first->second;
  }

  Padic height(const KPoint& P, Character chi) const {
    const GlobalPointData& D = point_data(P);
    const prime_t p = split_.p;
    if (D.torsion) return Padic::zero(p, work_);
    const auto eps = place_signs(chi);
    Padic s = Padic::zero(p, work_ + 64);
    for (int i = 0; i < 2; ++i) {
      const size_t k = static_cast<size_t>(i);
      Padic term = D.log_sigma[k] - D.log_d[k];
      s = eps[k] > 0 ? s + term : s - term;
    }
    return s / Padic::from_integer(p, D.n * D.n, work_ + 64);
  }

  // Contribution of the places above p and of the places away from p.
  std::map<std::string, Padic> height_breakdown(const KPoint& P, Character chi) const {
    const GlobalPointData& D = point_data(P);
    const prime_t p = split_.p;
    std::map<std::string, Padic> out;
    const auto eps = place_signs(chi);
    const Padic n2 = Padic::from_integer(p, D.n * D.n, work_ + 64);
    Padic away = Padic::zero(p, work_);
    for (int i = 0; i < 2; ++i) {
      const size_t k = static_cast<size_t>(i);
      out[i == 0 ? "p1" : "p2"] = (eps[k] > 0 ? D.log_sigma[k] : -D.log_sigma[k]) / n2;
      away = eps[k] > 0 ? away - D.log_d[k] : away + D.log_d[k];
    }
    out["away"] = away / n2;
    return out;
  }

  std::array<Padic, 2> elliptic_log(const KPoint& P) const { return point_data(P).elog; }

  // h(P, Q) = (h(P + Q) - h(P) - h(Q)) / 2
  Padic pairing(const KPoint& P, const KPoint& Q, Character chi) const {
    Padic s = height(E_.add(P, Q), chi) - height(P, chi) - height(Q, chi);
    return s / Padic::from_integer(split_.p, 2, work_ + 64);
  }

  TSet tset(Character chi) const { return t_set(chi, bad_, split_, work_); }

 private:
  KCurve E_;
  std::vector<LocalData> bad_;
  long N_ = 0, work_ = 0, M_ = 0;
  PrimeSplitting split_;
  std::array<Weierstrass<Zmod>, 2> reduced_;
  std::array<long, 2> order_{};
  std::array<Weierstrass<Padic>, 2> local_;
  mutable std::array<std::optional<SigmaFunction>, 2> sigma_;
  mutable std::map<std::string, GlobalPointData> cache_;
};

}  // namespace qcec
