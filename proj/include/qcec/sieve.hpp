#pragma once

// Two-prime elimination of mock points: mod q reduction constraints, mod p
// logarithm constraints and their cross-prime intersection.

#include <algorithm>
#include <array>
#include <chrono>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qcec/curve.hpp"
#include "qcec/qcsolve.hpp"

namespace qcec {

using ResiduePair = std::pair<long, long>;  // (m, n) with R = mP + nQ

struct ReductionConstraint {
  long modulus = 0;
  std::vector<ResiduePair> pairs;  // sorted
  bool contains(const ResiduePair& a) const { return std::binary_search(pairs.begin(), pairs.end(), a); }
};

struct LogConstraint {
  enum class Kind { empty, all, set };
  long modulus = 0;
  Kind kind = Kind::empty;
  bool integral = true;
  std::vector<ResiduePair> pairs;  // the singleton when kind == set
  bool contains(const ResiduePair& a) const {
    return kind == Kind::all || (kind == Kind::set && std::find(pairs.begin(), pairs.end(), a) != pairs.end());
  }
};

// Whether some pair lies in both sets.
inline bool meets(const LogConstraint& L, const ReductionConstraint& R) {
  if (L.kind == LogConstraint::Kind::all) return !R.pairs.empty();
  for (const auto& a : L.pairs)
    if (R.contains(a)) return true;
  return false;
}

struct SieveCandidate {
  std::string id;
  std::array<Point<Zmod>, 2> reduction;  // modulo the two primes above p
  std::array<Padic, 2> f;
  std::vector<int> selection;  // component contribution index per bad place
  bool recognized = false;
};

// Everything the sieve needs from one prime.
struct SieveSide {
  prime_t p = 0;
  long q = 0;
  std::array<Weierstrass<Zmod>, 2> E;
  std::array<Point<Zmod>, 2> P, Q;
  std::array<Padic, 2> fP, fQ;
  std::vector<SieveCandidate> points;
};

inline Point<Zmod> reduce_padic_point(const Point<Padic>& R, long p) {
  if (R.inf || R.x.valuation() < 0 || R.y.valuation() < 0) return Point<Zmod>::infinity();
  return Point<Zmod>::affine(Zmod(static_cast<long>(R.x.residue()), p), Zmod(static_cast<long>(R.y.residue()), p));
}

inline std::string solution_id(const Solution& s, long index) {
  return std::to_string(s.disk1) + ":" + std::to_string(s.disk2) + ":" + std::to_string(s.target) + ":" +
         std::to_string(index);
}

// Mock points of a quadratic Chabauty run, optionally with the recognised
// points as well.
inline SieveSide sieve_side(const KCurve& E, const KPoint& P, const KPoint& Q, const QCResult& res, long q,
                            bool include_recognized = false) {
  SieveSide S;
  S.p = res.p;
  S.q = q;
  const PrimeSplitting sp = split_prime(E.a1().field(), res.p, 8);
  for (int i = 0; i < 2; ++i) {
    const size_t k = static_cast<size_t>(i);
    S.E[k] = reduce_curve(E, sp, i);
    S.P[k] = reduce_point(P, sp, i);
    S.Q[k] = reduce_point(Q, sp, i);
    S.fP[k] = res.generator_logs[0][k];
    S.fQ[k] = res.generator_logs[1][k];
  }
  for (size_t j = 0; j < res.B.size(); ++j) {
    const Solution& s = res.B[j];
    if (s.point && !include_recognized) continue;
    SieveCandidate c;
    c.id = solution_id(s, static_cast<long>(j));
    const long p = static_cast<long>(res.p);
    c.reduction = {reduce_padic_point(s.R[0], p), reduce_padic_point(s.R[1], p)};
    c.f = s.f;
    c.selection = res.tcyc.selections.at(static_cast<size_t>(s.target));
    c.recognized = s.point.has_value();
    S.points.push_back(std::move(c));
  }
  return S;
}

// Cosets of q E(F) in the group E(F) of each prime above p, and the coset of
// mP + nQ for every (m, n) modulo q.
class ReductionTable {
 public:
  explicit ReductionTable(const SieveSide& S) : q_(S.q) {
    if (q_ < 2) throw domain_error("auxiliary prime must be at least 2");
    bool informative = false;
    for (int i = 0; i < 2; ++i) {
      const size_t k = static_cast<size_t>(i);
      const auto& E = S.E[k];
      const auto pts = enumerate_points(E);
      if (static_cast<long>(pts.size()) % q_ == 0) informative = true;
      std::vector<Point<Zmod>> qG;
      std::map<PointKey, int> seen;
      for (const auto& X : pts) {
        Point<Zmod> Y = E.mul(X, q_);
        if (seen.emplace(key_of(Y), 0).second) qG.push_back(Y);
      }
      for (const auto& X : pts) {
        PointKey best = key_of(X);
        for (const auto& Y : qG) best = std::min(best, key_of(E.add(X, Y)));
        coset_[k][key_of(X)] = best;
      }
      combo_[k].resize(static_cast<size_t>(q_ * q_));
      const Point<Zmod> qP = S.P[k], qQ = S.Q[k];
      Point<Zmod> mP = Point<Zmod>::infinity();
      for (long m = 0; m < q_; ++m) {
        Point<Zmod> R = mP;
        for (long n = 0; n < q_; ++n) {
          combo_[k][static_cast<size_t>(m * q_ + n)] = coset_[k].at(key_of(R));
          R = E.add(R, qQ);
        }
        mP = E.add(mP, qP);
      }
    }
    if (!informative) throw validation_error("reduction condition fails: q divides neither group order above p");
  }

  long modulus() const { return q_; }

  ReductionConstraint constraint(const std::array<Point<Zmod>, 2>& R) const {
    ReductionConstraint C;
    C.modulus = q_;
    std::array<PointKey, 2> target;
    for (size_t k = 0; k < 2; ++k) {
      auto it = coset_[k].find(key_of(R[k]));
      if (it == coset_[k].end()) return C;  // not a point of the reduction
      target[k] = it->second;
    }
    for (long m = 0; m < q_; ++m)
      for (long n = 0; n < q_; ++n) {
        const size_t c = static_cast<size_t>(m * q_ + n);
        if (combo_[0][c] == target[0] && combo_[1][c] == target[1]) C.pairs.push_back({m, n});
      }
    return C;
  }

 private:
  long q_;
  std::array<std::map<PointKey, PointKey>, 2> coset_;
  std::array<std::vector<PointKey>, 2> combo_;
};

inline ReductionConstraint reduction_info(const SieveSide& S, const SieveCandidate& R) {
  return ReductionTable(S).constraint(R.reduction);
}

// (m, n) modulo p from f_i(R_i) = m f_i(P) + n f_i(Q).
inline LogConstraint log_info(const SieveSide& S, const std::array<Padic, 2>& fR) {
  LogConstraint L;
  const long p = static_cast<long>(S.p);
  L.modulus = p;
  const Padic det = S.fP[0] * S.fQ[1] - S.fQ[0] * S.fP[1];
  if (det.is_zero()) {
    // Rank at most one: consistent exactly when every minor of [M | f] vanishes.
    bool consistent = true;
    const std::array<Padic, 2> cols[2] = {{S.fP[0], S.fP[1]}, {S.fQ[0], S.fQ[1]}};
    for (const auto& c : cols)
      if (!(fR[0] * c[1] - fR[1] * c[0]).is_zero()) consistent = false;
    const bool zero_matrix = S.fP[0].is_zero() && S.fP[1].is_zero() && S.fQ[0].is_zero() && S.fQ[1].is_zero();
    if (zero_matrix && !(fR[0].is_zero() && fR[1].is_zero())) consistent = false;
    L.kind = consistent ? LogConstraint::Kind::all : LogConstraint::Kind::empty;
    return L;
  }
  const Padic m = (fR[0] * S.fQ[1] - S.fQ[0] * fR[1]) / det;
  const Padic n = (S.fP[0] * fR[1] - fR[0] * S.fP[1]) / det;
  if ((!m.is_zero() && m.valuation() < 0) || (!n.is_zero() && n.valuation() < 0)) {
    L.integral = false;
    return L;
  }
  if (m.precision_absolute() < 1 || n.precision_absolute() < 1)
    throw precision_error("logarithm coordinates lost all precision");
  L.kind = LogConstraint::Kind::set;
  L.pairs.push_back({static_cast<long>(m.residue()), static_cast<long>(n.residue())});
  return L;
}

enum class Elimination { survived, empty_reduction, nonintegral_log, empty_intersection, height_mismatch };

inline std::string to_string(Elimination e) {
  switch (e) {
    case Elimination::survived: return "survived";
    case Elimination::empty_reduction: return "empty-reduction";
    case Elimination::nonintegral_log: return "nonintegral-log";
    case Elimination::empty_intersection: return "empty-intersection";
    case Elimination::height_mismatch: return "height-mismatch";
  }
  return "?";
}

struct SieveRecord {
  prime_t prime = 0;
  std::string id;
  Elimination cause = Elimination::survived;
  ReductionConstraint red;
  LogConstraint log;
  std::vector<std::string> matches;  // ids at the other prime with meeting constraints
};

struct SieveReport {
  prime_t p = 0, q = 0;
  std::vector<SieveRecord> records_p, records_q;
  double seconds = 0;

  std::vector<std::string> survivors(bool at_p) const {
    std::vector<std::string> out;
    for (const auto& r : at_p ? records_p : records_q)
      if (r.cause == Elimination::survived) out.push_back(r.id);
    return out;
  }
  bool all_eliminated() const { return survivors(true).empty() && survivors(false).empty(); }
};

namespace detail {

struct SieveEntry {
  ReductionConstraint red;
  LogConstraint log;
};

inline std::vector<SieveEntry> sieve_entries(const SieveSide& S) {
  const ReductionTable T(S);
  std::vector<SieveEntry> out;
  out.reserve(S.points.size());
  for (const auto& c : S.points) out.push_back({T.constraint(c.reduction), log_info(S, c.f)});
  return out;
}

inline std::vector<SieveRecord> sieve_one_way(const SieveSide& A, const std::vector<SieveEntry>& ea, const SieveSide& B,
                                              const std::vector<SieveEntry>& eb) {
  std::vector<SieveRecord> out;
  for (size_t i = 0; i < A.points.size(); ++i) {
    SieveRecord r;
    r.prime = A.p;
    r.id = A.points[i].id;
    r.red = ea[i].red;
    r.log = ea[i].log;
    if (r.red.pairs.empty()) {
      r.cause = Elimination::empty_reduction;
    } else if (r.log.kind == LogConstraint::Kind::empty) {
      r.cause = Elimination::nonintegral_log;
    } else {
      bool consistent = false;
      for (size_t j = 0; j < B.points.size(); ++j) {
        // log_R against red_S modulo p, red_R against log_S modulo q.
        if (!meets(r.log, eb[j].red) || !meets(eb[j].log, r.red)) continue;
        r.matches.push_back(B.points[j].id);
        if (B.points[j].selection == A.points[i].selection) consistent = true;
      }
      if (r.matches.empty())
        r.cause = Elimination::empty_intersection;
      else if (!consistent)
        r.cause = Elimination::height_mismatch;
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace detail

inline SieveReport cross_sieve(const SieveSide& Ap, const SieveSide& Aq) {
  if (Ap.q != static_cast<long>(Aq.p) || Aq.q != static_cast<long>(Ap.p))
    throw domain_error("sieve sides do not refer to each other's primes");
  const auto t0 = std::chrono::steady_clock::now();
  const auto ep = detail::sieve_entries(Ap);
  const auto eq = detail::sieve_entries(Aq);
  SieveReport rep;
  rep.p = Ap.p;
  rep.q = Aq.p;
  rep.records_p = detail::sieve_one_way(Ap, ep, Aq, eq);
  rep.records_q = detail::sieve_one_way(Aq, eq, Ap, ep);
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace qcec
