#pragma once

// Text record streams for quadratic Chabauty results and sieve reports.  One
// record per line, `key=value` fields separated by spaces.  p-adic numbers
// are written as `unit*p^v+O(p^N)` or `O(p^N)` with decimal digits.

#include <gmpxx.h>

#include <sstream>
#include <string>
#include <vector>

#include "qcec/manifest.hpp"
#include "qcec/qcsolve.hpp"
#include "qcec/sieve.hpp"

namespace qcec {

inline Padic parse_padic(prime_t p, const std::string& text) {
  auto bad = [&]() { return validation_error("malformed p-adic number '" + text + "'"); };
  const std::string pre = std::to_string(p) + "^";
  auto read_exp = [&](const std::string& s, size_t pos, size_t& end) {
    if (s.compare(pos, pre.size(), pre) != 0) throw bad();
    pos += pre.size();
    end = pos;
    if (end < s.size() && s[end] == '-') ++end;
    while (end < s.size() && std::isdigit(static_cast<unsigned char>(s[end]))) ++end;
    if (end == pos) throw bad();
    return std::stol(s.substr(pos, end - pos));
  };
  if (text.rfind("O(", 0) == 0) {
    size_t end = 0;
    const long N = read_exp(text, 2, end);
    if (end + 1 != text.size() || text[end] != ')') throw bad();
    return Padic::zero(p, N);
  }
  const auto star = text.find('*');
  const auto plus = text.find("+O(");
  if (star == std::string::npos || plus == std::string::npos) throw bad();
  mpz_class unit;
  if (unit.set_str(text.substr(0, star), 10) != 0) throw bad();
  size_t end = 0;
  const long v = read_exp(text, star + 1, end);
  if (end != plus) throw bad();
  const long N = read_exp(text, plus + 3, end);
  if (end + 1 != text.size() || text[end] != ')') throw bad();
  return Padic::from_parts(p, v, unit, N - v);
}

namespace detail {

inline std::string join_padics(const std::array<Padic, 2>& z) { return z[0].to_string() + "," + z[1].to_string(); }

inline std::array<Padic, 2> split_padics(prime_t p, const std::string& s) {
  const auto c = s.find(',');
  if (c == std::string::npos) throw validation_error("expected two p-adic numbers: '" + s + "'");
  return {parse_padic(p, s.substr(0, c)), parse_padic(p, s.substr(c + 1))};
}

inline std::string join_ints(const std::vector<int>& v) {
  if (v.empty()) return "-";
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

inline std::vector<int> split_ints(const std::string& s) {
  std::vector<int> v;
  if (s == "-") return v;
  for (const auto& t : split(s, ',')) v.push_back(static_cast<int>(parse_long(t, "index")));
  return v;
}

// key=value fields of a record line; the value of `last_key` runs to the end.
inline std::map<std::string, std::string> fields(const std::string& line, const std::string& last_key = "") {
  std::map<std::string, std::string> out;
  size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && line[pos] == ' ') ++pos;
    if (pos >= line.size()) break;
    const auto eq = line.find('=', pos);
    if (eq == std::string::npos) throw validation_error("record field without '=': " + line);
    const std::string key = line.substr(pos, eq - pos);
    size_t end = key == last_key ? line.size() : line.find(' ', eq);
    if (end == std::string::npos) end = line.size();
    out[key] = line.substr(eq + 1, end - eq - 1);
    pos = end;
  }
  return out;
}

inline const std::string& field(const std::map<std::string, std::string>& f, const std::string& k) {
  auto it = f.find(k);
  if (it == f.end()) throw validation_error("record lacks field '" + k + "'");
  return it->second;
}

inline std::string compact(const QuadRat& x) {
  std::string s = x.to_string();
  s.erase(std::remove(s.begin(), s.end(), ' '), s.end());
  return s;
}

}  // namespace detail

inline Character parse_character(const std::string& s) {
  if (s == to_string(Character::cyclotomic)) return Character::cyclotomic;
  if (s == to_string(Character::anticyclotomic)) return Character::anticyclotomic;
  throw validation_error("unknown character '" + s + "'");
}

inline std::string write_qc(const QCResult& r) {
  std::ostringstream os;
  os << "qcresult prime=" << r.p << " precision=" << r.precision << " truncation=" << r.truncation
     << " orders=" << r.group_orders[0] << "," << r.group_orders[1] << "\n";
  for (const auto& a : r.alpha)
    os << "alpha chi=" << to_string(a.chi) << " a11=" << a.a11.to_string() << " a12=" << a.a12.to_string()
       << " a22=" << a.a22.to_string() << " detval=" << a.det_valuation << "\n";
  for (const TSet* T : {&r.tcyc, &r.tanti})
    for (size_t k = 0; k < T->values.size(); ++k)
      os << "tset chi=" << to_string(T == &r.tcyc ? Character::cyclotomic : Character::anticyclotomic) << " index=" << k
         << " value=" << T->values[k].to_string() << " selection=" << detail::join_ints(T->selections[k]) << "\n";
  os << "logs P=" << detail::join_padics(r.generator_logs[0]) << " Q=" << detail::join_padics(r.generator_logs[1])
     << "\n";
  for (const auto& s : r.B) {
    os << "point disks=" << s.disk1 << "," << s.disk2 << " target=" << s.target << " depth=" << s.depth
       << " jacval=" << s.jacobian_valuation << " u=" << detail::join_padics(s.u)
       << " x=" << detail::join_padics({s.R[0].x, s.R[1].x}) << " y=" << detail::join_padics({s.R[0].y, s.R[1].y})
       << " f=" << detail::join_padics(s.f) << " residual=" << detail::join_padics(s.residual);
    if (s.point)
      os << " status=recognized X=" << detail::compact(s.point->x) << " Y=" << detail::compact(s.point->y);
    else
      os << " status=mock";
    os << "\n";
  }
  for (const auto& u : r.unresolved)
    os << "unresolved disks=" << u.disk1 << "," << u.disk2 << " target=" << u.target << " depth=" << u.cls.depth
       << " center=" << detail::join_padics(u.cls.center) << " reason=" << u.cls.reason << "\n";
  os << "end\n";
  return os.str();
}

inline QCResult read_qc(const std::string& text, const QuadField& F) {
  QCResult r;
  std::istringstream is(text);
  std::string line;
  bool header = false, ended = false;
  int alpha_index = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto sp = line.find(' ');
    const std::string kind = line.substr(0, sp);
    const std::string rest = sp == std::string::npos ? "" : line.substr(sp + 1);
    if (kind == "end") {
      ended = true;
      break;
    }
    if (kind == "qcresult") {
      auto f = detail::fields(rest);
      r.p = static_cast<prime_t>(detail::parse_long(detail::field(f, "prime"), "prime"));
      r.precision = detail::parse_long(detail::field(f, "precision"), "precision");
      r.truncation = detail::parse_long(detail::field(f, "truncation"), "truncation");
      auto o = detail::split(detail::field(f, "orders"), ',');
      r.group_orders = {detail::parse_long(o.at(0), "order"), detail::parse_long(o.at(1), "order")};
      header = true;
      continue;
    }
    if (!header) throw validation_error("qc record stream lacks its header");
    const prime_t p = r.p;
    if (kind == "alpha") {
      auto f = detail::fields(rest);
      if (alpha_index > 1) throw validation_error("too many alpha records");
      AlphaCoefficients& a = r.alpha[static_cast<size_t>(alpha_index++)];
      a.chi = parse_character(detail::field(f, "chi"));
      a.a11 = parse_padic(p, detail::field(f, "a11"));
      a.a12 = parse_padic(p, detail::field(f, "a12"));
      a.a22 = parse_padic(p, detail::field(f, "a22"));
      a.det_valuation = detail::parse_long(detail::field(f, "detval"), "detval");
    } else if (kind == "tset") {
      auto f = detail::fields(rest);
      TSet& T = parse_character(detail::field(f, "chi")) == Character::cyclotomic ? r.tcyc : r.tanti;
      T.values.push_back(parse_padic(p, detail::field(f, "value")));
      T.selections.push_back(detail::split_ints(detail::field(f, "selection")));
    } else if (kind == "logs") {
      auto f = detail::fields(rest);
      r.generator_logs = {detail::split_padics(p, detail::field(f, "P")), detail::split_padics(p, detail::field(f, "Q"))};
    } else if (kind == "point") {
      auto f = detail::fields(rest);
      Solution s;
      auto d = detail::split(detail::field(f, "disks"), ',');
      s.disk1 = detail::parse_long(d.at(0), "disk");
      s.disk2 = detail::parse_long(d.at(1), "disk");
      s.target = static_cast<int>(detail::parse_long(detail::field(f, "target"), "target"));
      s.depth = static_cast<int>(detail::parse_long(detail::field(f, "depth"), "depth"));
      s.jacobian_valuation = detail::parse_long(detail::field(f, "jacval"), "jacval");
      s.u = detail::split_padics(p, detail::field(f, "u"));
      const auto x = detail::split_padics(p, detail::field(f, "x")), y = detail::split_padics(p, detail::field(f, "y"));
      s.R = {Point<Padic>::affine(x[0], y[0]), Point<Padic>::affine(x[1], y[1])};
      s.f = detail::split_padics(p, detail::field(f, "f"));
      s.residual = detail::split_padics(p, detail::field(f, "residual"));
      if (detail::field(f, "status") == "recognized")
        s.point = KPoint::affine(parse_quadrat(F, detail::field(f, "X")), parse_quadrat(F, detail::field(f, "Y")));
      r.B.push_back(std::move(s));
    } else if (kind == "unresolved") {
      auto f = detail::fields(rest, "reason");
      UnresolvedClass u;
      auto d = detail::split(detail::field(f, "disks"), ',');
      u.disk1 = detail::parse_long(d.at(0), "disk");
      u.disk2 = detail::parse_long(d.at(1), "disk");
      u.target = static_cast<int>(detail::parse_long(detail::field(f, "target"), "target"));
      u.cls.depth = static_cast<int>(detail::parse_long(detail::field(f, "depth"), "depth"));
      u.cls.center = detail::split_padics(p, detail::field(f, "center"));
      u.cls.reason = detail::field(f, "reason");
      r.unresolved.push_back(std::move(u));
    } else {
      throw validation_error("unknown qc record '" + kind + "'");
    }
  }
  if (!ended) throw validation_error("qc record stream is truncated");
  return r;
}

namespace detail {

inline std::string pairs_text(const std::vector<ResiduePair>& v) {
  if (v.empty()) return "{}";
  std::string s = "{";
  for (size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + std::to_string(v[i].first) + "," + std::to_string(v[i].second);
  return s + "}";
}

inline std::string log_text(const LogConstraint& L) {
  switch (L.kind) {
    case LogConstraint::Kind::all: return "all";
    case LogConstraint::Kind::empty: return L.integral ? "inconsistent" : "nonintegral";
    case LogConstraint::Kind::set: return pairs_text(L.pairs);
  }
  return "?";
}

}  // namespace detail

// One elimination record per line; no timings, so equal inputs give equal text.
inline std::string write_sieve(const SieveReport& r) {
  std::ostringstream os;
  os << "sieve p=" << r.p << " q=" << r.q << "\n";
  for (const auto* side : {&r.records_p, &r.records_q})
    for (const auto& e : *side) {
      os << "record prime=" << e.prime << " id=" << e.id << " cause=" << to_string(e.cause)
         << " red=" << detail::pairs_text(e.red.pairs) << " log=" << detail::log_text(e.log) << " matches=";
      if (e.matches.empty()) os << "-";
      for (size_t i = 0; i < e.matches.size(); ++i) os << (i ? "," : "") << e.matches[i];
      os << "\n";
    }
  os << "end\n";
  return os.str();
}

inline std::string sieve_summary(const SieveReport& r) {
  std::ostringstream os;
  for (const auto* side : {&r.records_p, &r.records_q}) {
    std::map<Elimination, long> c;
    for (const auto& e : *side) c[e.cause]++;
    os << "prime " << (side == &r.records_p ? r.p : r.q) << ": " << side->size() << " candidates";
    for (const auto& [k, v] : c) os << ", " << to_string(k) << " " << v;
    os << "\n";
  }
  return os.str();
}

}  // namespace qcec
