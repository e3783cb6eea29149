#pragma once

// Curve manifests: a line-oriented `key = value` format, its validation and
// the search for integral points of small height.
//
//   name         = U1
//   field        = -3
//   convention   = zeta3            (or zeta6: elements written in a = w + 1)
//   coefficients = 0, -w-2, w+2, w+1, 0
//   generator    = 1, 0             (exactly two lines: P then Q)
//   known        = -3, -8*w-4       (repeatable)
//   bad_place    = -22*w-9 ; kodaira = II ; tamagawa = 1 [; contributions = 0, -1/3] [; disc_valuation = 2]
//   prime        = 7
//   aux_prime    = 13
//   precision    = 25
//   t_precision  = 0                (0: chosen from the prime and precision)
//   search_bound = 12
//
// Blank lines and text after '#' are ignored.

#include <gmpxx.h>

#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qcec/curve.hpp"
#include "qcec/heights.hpp"
#include "qcec/quadfield.hpp"

namespace qcec {

struct CurveManifest {
  std::string name;
  int d = -3;
  bool zeta6 = false;
  std::array<QuadInt, 5> a;
  KPoint P, Q;
  std::vector<KPoint> known;
  std::vector<LocalData> bad;
  prime_t p = 0, q = 0;
  long precision = 25;
  long t_precision = 0;
  long search_bound = 12;

  QuadField field() const { return QuadField::imaginary(d); }
  KCurve curve() const { return make_curve(a); }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  return out;
}

inline long parse_long(const std::string& s, const std::string& what) {
  try {
    size_t used = 0;
    long v = std::stol(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw validation_error("malformed integer for " + what + ": '" + s + "'");
  }
}

inline mpq_class parse_rational(const std::string& s) {
  mpq_class r;
  if (r.set_str(s, 10) != 0) throw validation_error("malformed rational: '" + s + "'");
  r.canonicalize();
  return r;
}

}  // namespace detail

// An element of O_K in the manifest's convention.
inline QuadInt parse_element(const QuadField& F, const std::string& text, bool zeta6) {
  if (!zeta6) return QuadInt::parse(F, text);
  std::string s = text;
  for (char& c : s)
    if (c == 'a') c = 'w';
  QuadInt z = QuadInt::parse(F, s);
  // a = w + 1 for the sixth root of unity
  return QuadInt(F, mpz_class(z.a() + z.b()), z.b());
}

inline QuadRat parse_quadrat(const QuadField& F, const std::string& text) {
  const std::string s = detail::trim(text);
  if (!s.empty() && s.front() == '(') {
    const auto close = s.find(')');
    if (close == std::string::npos || close + 2 > s.size() || s[close + 1] != '/')
      throw validation_error("malformed element of K: '" + text + "'");
    return QuadRat(QuadInt::parse(F, s.substr(1, close - 1)), mpz_class(s.substr(close + 2)));
  }
  return QuadRat(QuadInt::parse(F, s));
}

inline KPoint parse_point(const QuadField& F, const std::string& text, bool zeta6) {
  const auto parts = detail::split(text, ',');
  if (parts.size() != 2) throw validation_error("a point needs two coordinates: '" + text + "'");
  return KPoint::affine(QuadRat(parse_element(F, parts[0], zeta6)), QuadRat(parse_element(F, parts[1], zeta6)));
}

inline CurveManifest parse_manifest(const std::string& text) {
  CurveManifest m;
  std::istringstream is(text);
  std::string line;
  std::vector<std::pair<std::string, std::string>> entries;
  long lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw validation_error("line " + std::to_string(lineno) + ": expected key = value");
    entries.push_back({detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1))});
  }
  // The field and convention govern how every other value is read.
  for (const auto& [k, v] : entries) {
    if (k == "field") m.d = static_cast<int>(detail::parse_long(v, k));
    if (k == "convention") {
      if (v != "zeta3" && v != "zeta6") throw validation_error("unknown convention '" + v + "'");
      m.zeta6 = v == "zeta6";
    }
  }
  if (m.zeta6 && m.d != -3) throw validation_error("the zeta6 convention needs field = -3");
  const QuadField F = QuadField::imaginary(m.d);
  bool have_coeffs = false;
  std::vector<KPoint> gens;
  for (const auto& [k, v] : entries) {
    if (k == "field" || k == "convention") continue;
    if (k == "name") {
      m.name = v;
    } else if (k == "coefficients") {
      const auto parts = detail::split(v, ',');
      if (parts.size() != 5) throw validation_error("coefficients needs a1, a2, a3, a4, a6");
      for (size_t i = 0; i < 5; ++i) m.a[i] = parse_element(F, parts[i], m.zeta6);
      have_coeffs = true;
    } else if (k == "generator") {
      gens.push_back(parse_point(F, v, m.zeta6));
    } else if (k == "known") {
      m.known.push_back(parse_point(F, v, m.zeta6));
    } else if (k == "bad_place") {
      const auto parts = detail::split(v, ';');
      LocalData L;
      L.place = parse_element(F, parts[0], m.zeta6);
      for (size_t i = 1; i < parts.size(); ++i) {
        const auto eq = parts[i].find('=');
        if (eq == std::string::npos) throw validation_error("bad_place field without '=': '" + parts[i] + "'");
        const std::string key = detail::trim(parts[i].substr(0, eq)), val = detail::trim(parts[i].substr(eq + 1));
        if (key == "kodaira")
          L.kodaira = val;
        else if (key == "tamagawa")
          L.tamagawa = detail::parse_long(val, key);
        else if (key == "disc_valuation")
          L.discriminant_valuation = detail::parse_long(val, key);
        else if (key == "contributions")
          for (const auto& c : detail::split(val, ',')) L.contributions.push_back(detail::parse_rational(c));
        else
          throw validation_error("unknown bad_place field '" + key + "'");
      }
      if (L.kodaira.empty()) throw validation_error("bad_place without kodaira symbol");
      m.bad.push_back(L);
    } else if (k == "prime") {
      m.p = static_cast<prime_t>(detail::parse_long(v, k));
    } else if (k == "aux_prime") {
      m.q = static_cast<prime_t>(detail::parse_long(v, k));
    } else if (k == "precision") {
      m.precision = detail::parse_long(v, k);
    } else if (k == "t_precision") {
      m.t_precision = detail::parse_long(v, k);
    } else if (k == "search_bound") {
      m.search_bound = detail::parse_long(v, k);
    } else {
      throw validation_error("unknown manifest key '" + k + "'");
    }
  }
  if (!have_coeffs) throw validation_error("manifest has no coefficients");
  if (gens.size() != 2) throw validation_error("manifest needs exactly two generators");
  m.P = gens[0];
  m.Q = gens[1];
  return m;
}

inline CurveManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot read manifest " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str());
}

inline std::string point_text(const KPoint& R) { return R.inf ? "O" : R.x.to_string() + ", " + R.y.to_string(); }

// Normal form in the w convention; equal manifests give equal text.
inline std::string canonical_text(const CurveManifest& m) {
  std::ostringstream os;
  os << "name = " << m.name << "\nfield = " << m.d << "\ncoefficients = ";
  for (size_t i = 0; i < 5; ++i) os << (i ? ", " : "") << m.a[i].to_string();
  os << "\ngenerator = " << point_text(m.P) << "\ngenerator = " << point_text(m.Q) << "\n";
  for (const auto& R : m.known) os << "known = " << point_text(R) << "\n";
  for (const auto& L : m.bad) {
    os << "bad_place = " << L.place.to_string() << " ; kodaira = " << L.kodaira << " ; tamagawa = " << L.tamagawa;
    if (!L.contributions.empty()) {
      os << " ; contributions = ";
      for (size_t i = 0; i < L.contributions.size(); ++i) os << (i ? ", " : "") << L.contributions[i].get_str();
    }
    if (L.discriminant_valuation) os << " ; disc_valuation = " << L.discriminant_valuation;
    os << "\n";
  }
  os << "prime = " << m.p << "\naux_prime = " << m.q << "\nprecision = " << m.precision
     << "\nt_precision = " << m.t_precision << "\nsearch_bound = " << m.search_bound << "\n";
  return os.str();
}

// The Galois-conjugate manifest.
inline CurveManifest conjugate_manifest(const CurveManifest& m) {
  CurveManifest c = m;
  c.name = m.name + "-conjugate";
  for (auto& x : c.a) x = x.conj();
  auto cp = [](const KPoint& R) { return R.inf ? R : KPoint::affine(R.x.conj(), R.y.conj()); };
  c.P = cp(m.P);
  c.Q = cp(m.Q);
  for (auto& R : c.known) R = cp(R);
  for (auto& L : c.bad) L.place = L.place.conj();
  return c;
}

// ---------------------------------------------------------------------------
// Validation

struct PrimeInfo {
  prime_t p = 0;
  std::array<long, 2> orders{};
  bool split = false, good = false, ordinary = false, anomalous = false;
  bool usable() const { return split && good && ordinary && !anomalous; }
};

inline PrimeInfo prime_info(const KCurve& E, prime_t p) {
  PrimeInfo I;
  I.p = p;
  if (p == 2) return I;
  PrimeSplitting s;
  try {
    s = split_prime(E.a1().field(), p, 8);
  } catch (const domain_error&) {
    return I;
  }
  I.split = true;
  I.good = true;
  I.ordinary = true;
  for (int i = 0; i < 2; ++i) {
    const auto Er = reduce_curve(E, s, i);
    if (Er.discriminant().is_zero()) {
      I.good = false;
      continue;
    }
    const long n = count_points(Er);
    I.orders[static_cast<size_t>(i)] = n;
    if ((static_cast<long>(p) + 1 - n) % static_cast<long>(p) == 0) I.ordinary = false;
    if (n % static_cast<long>(p) == 0) I.anomalous = true;
  }
  return I;
}

// q divides one of the group orders above p, and p one above q.
inline bool reduction_condition(const PrimeInfo& P, const PrimeInfo& Q) {
  auto divides = [](long m, const std::array<long, 2>& o) { return o[0] % m == 0 || o[1] % m == 0; };
  return divides(static_cast<long>(Q.p), P.orders) && divides(static_cast<long>(P.p), Q.orders);
}

struct ValidationReport {
  std::vector<std::string> checks;  // human-readable record of what passed
  PrimeInfo at_p, at_q;
};

inline ValidationReport validate_manifest(const CurveManifest& m) {
  ValidationReport V;
  const KCurve E = m.curve();
  auto fail = [](const std::string& msg) { throw validation_error(msg); };

  const QuadInt D = integral_discriminant(E);
  if (D.is_zero()) fail("singular curve");
  QuadInt rest = D;
  for (const auto& L : m.bad) {
    const long v = valuation(D, L.place);
    if (v <= 0) fail("listed bad place " + L.place.to_string() + " does not divide the discriminant");
    if (L.discriminant_valuation && L.discriminant_valuation != v)
      fail("discriminant valuation at " + L.place.to_string() + " is " + std::to_string(v));
    if (v >= 12) fail("model may not be minimal at " + L.place.to_string());
    for (long k = 0; k < v; ++k) rest = rest.divmod(L.place).first;
    if (L.tamagawa < 1) fail("Tamagawa number must be positive");
    const auto c = L.component_contributions();
    if (std::find(c.begin(), c.end(), mpq_class(0)) == c.end()) fail("contributions must include 0");
    if (static_cast<long>(c.size()) > L.tamagawa)
      fail("more contributions than components at " + L.place.to_string());
    if ((L.kodaira == "II" || L.kodaira == "II*") && L.tamagawa != 1)
      fail("Kodaira type " + L.kodaira + " has Tamagawa number 1, not " + std::to_string(L.tamagawa));
  }
  if (!rest.is_unit()) fail("discriminant has prime factors missing from the bad places: " + rest.to_string());
  V.checks.push_back("discriminant " + D.to_string() + " factors over the listed bad places");

  for (const KPoint* G : {&m.P, &m.Q}) {
    if (!E.on_curve(*G)) fail("generator " + point_text(*G) + " is not on the curve");
    KPoint R = *G;
    for (int n = 1; n <= 30; ++n, R = E.add(R, *G))
      if (R.inf) fail("generator " + point_text(*G) + " has finite order");
  }
  V.checks.push_back("generators lie on the curve and have no multiple below 31 equal to O");

  // The torsion subgroup embeds in E(F_v) at good primes above odd p.
  long g = 0;
  for (prime_t p = 3; p < 200 && g != 1; p += 2) {
    const PrimeInfo I = prime_info(E, p);
    if (I.split && I.good) g = std::gcd(g, std::gcd(I.orders[0], I.orders[1]));
  }
  if (g != 1) fail("torsion could not be shown trivial (gcd of group orders " + std::to_string(g) + ")");
  V.checks.push_back("torsion is trivial");

  for (const auto& R : m.known) {
    if (R.inf || !R.x.is_integral() || !R.y.is_integral()) fail("known point " + point_text(R) + " is not integral");
    if (!E.on_curve(R)) fail("known point " + point_text(R) + " is not on the curve");
  }
  V.checks.push_back(std::to_string(m.known.size()) + " known points are integral and on the curve");

  if (m.p != 0 && m.p == m.q) fail("the prime and the auxiliary prime coincide");
  for (prime_t r : {m.p, m.q}) {
    if (r == 0) continue;
    const PrimeInfo I = prime_info(E, r);
    const std::string tag = "prime " + std::to_string(r);
    if (r == 2) throw unsupported_error("p = 2 is not supported");
    if (!I.split) fail(tag + " does not split");
    if (!I.good) fail(tag + " has bad reduction");
    if (!I.ordinary) fail(tag + " is supersingular at a prime above it");
    if (I.anomalous) fail(tag + " is anomalous");
    V.checks.push_back(tag + ": split, good ordinary, group orders " + std::to_string(I.orders[0]) + " and " +
                       std::to_string(I.orders[1]));
    (r == m.p ? V.at_p : V.at_q) = I;
  }
  if (m.p != 0 && m.q != 0) {
    if (!reduction_condition(V.at_p, V.at_q))
      fail("reduction condition fails for (" + std::to_string(m.p) + ", " + std::to_string(m.q) + ")");
    V.checks.push_back("reduction condition holds");
  }
  return V;
}

// Primes below `bound` usable for quadratic Chabauty and the pairs among
// them satisfying the reduction condition.
struct Survey {
  std::vector<PrimeInfo> primes;
  std::vector<std::pair<prime_t, prime_t>> pairs;
};

inline Survey survey_primes(const KCurve& E, prime_t bound = 100) {
  Survey S;
  for (prime_t p = 3; p < bound; p += 2) {
    bool prime = true;
    for (prime_t k = 3; k * k <= p; k += 2)
      if (p % k == 0) prime = false;
    if (!prime) continue;
    PrimeInfo I = prime_info(E, p);
    if (I.usable()) S.primes.push_back(I);
  }
  for (size_t i = 0; i < S.primes.size(); ++i)
    for (size_t j = i + 1; j < S.primes.size(); ++j)
      if (reduction_condition(S.primes[i], S.primes[j])) S.pairs.push_back({S.primes[i].p, S.primes[j].p});
  return S;
}

// ---------------------------------------------------------------------------
// Small points

struct SmallPoint {
  long m = 0, n = 0;
  KPoint R;
};

inline bool same_point(const KPoint& A, const KPoint& B) {
  return A.inf == B.inf && (A.inf || (A.x == B.x && A.y == B.y));
}

// The integral points mP + nQ with |m|, |n| <= C, ordered by (|m| + |n|, m, n).
inline std::vector<SmallPoint> search_small_points(const CurveManifest& man, long C) {
  const KCurve E = man.curve();
  std::vector<SmallPoint> out;
  KPoint row = E.mul(man.P, -C);
  const KPoint start = E.mul(man.Q, -C);
  for (long m = -C; m <= C; ++m, row = E.add(row, man.P)) {
    KPoint R = E.add(row, start);
    for (long n = -C; n <= C; ++n, R = E.add(R, man.Q))
      if (!R.inf && R.x.is_integral() && R.y.is_integral()) out.push_back({m, n, R});
  }
  std::sort(out.begin(), out.end(), [](const SmallPoint& a, const SmallPoint& b) {
    const long sa = std::labs(a.m) + std::labs(a.n), sb = std::labs(b.m) + std::labs(b.n);
    return std::tie(sa, a.m, a.n) < std::tie(sb, b.m, b.n);
  });
  return out;
}

}  // namespace qcec
