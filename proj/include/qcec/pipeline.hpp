#pragma once

// Staged execution for one manifest: validation, small points, heights at p,
// quadratic Chabauty at p and at q, and the sieve.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qcec/manifest.hpp"
#include "qcec/records.hpp"

namespace qcec {

enum class Stage { heights, qc_p, qc_q, sieve };

inline Stage parse_stage(const std::string& s) {
  if (s == "heights") return Stage::heights;
  if (s == "qc-p" || s == "qcset") return Stage::qc_p;
  if (s == "qc-q") return Stage::qc_q;
  if (s == "sieve") return Stage::sieve;
  throw validation_error("unknown stage '" + s + "' (heights, qc-p, qc-q, sieve)");
}

struct PipelineOptions {
  std::set<Stage> stages{Stage::heights, Stage::qc_p, Stage::qc_q, Stage::sieve};
  prime_t prime = 0, aux_prime = 0;  // 0: from the manifest
  long precision = 0;
  long t_precision = -1;             // -1: from the manifest, 0: automatic
  std::string cache_dir;
  bool include_recognized = false;   // sieve against recognised points too
  int max_depth = 3;
};

enum class Status { determined, superset, partial };

inline std::string to_string(Status s) {
  switch (s) {
    case Status::determined: return "determined";
    case Status::superset: return "superset";
    case Status::partial: return "partial";
  }
  return "?";
}

struct HeightSummary {
  prime_t p = 0;
  std::array<Padic, 2> hP, hQ, hPQ;  // cyc, anti
  std::array<AlphaCoefficients, 2> alpha;
  TSet tcyc, tanti;
};

struct PrimeRun {
  prime_t p = 0;
  QCResult result;
  bool cached = false;
  std::vector<KPoint> known_missing;  // known points absent from the recognised set
};

struct PipelineReport {
  std::string name;
  prime_t p = 0, q = 0;
  long precision = 0;
  ValidationReport validation;
  std::vector<SmallPoint> small;
  std::optional<HeightSummary> heights;
  std::optional<PrimeRun> at_p, at_q;
  std::optional<SieveReport> sieve;
  Status status = Status::partial;
  std::vector<KPoint> integral_points;  // recognised at p or q
  long superset_size = 0;               // recognised plus surviving mocks at p
  std::vector<std::pair<std::string, double>> timings;

  bool precision_exhausted() const {
    for (const auto* r : {&at_p, &at_q})
      if (*r && (!(*r)->result.unresolved.empty() || !(*r)->known_missing.empty())) return true;
    return false;
  }

  int exit_code() const {
    if (precision_exhausted()) return 4;
    return status == Status::superset ? 2 : 0;
  }

  std::string text(bool with_timings = true) const;
};

namespace detail {

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t h) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

inline bool sorted_before(const KPoint& a, const KPoint& b) {
  return std::make_pair(a.x.to_string(), a.y.to_string()) < std::make_pair(b.x.to_string(), b.y.to_string());
}

}  // namespace detail

// Cache file for a quadratic Chabauty run; the name hashes everything the
// result depends on.
inline std::string qc_cache_path(const std::string& dir, const CurveManifest& m, prime_t p, long N, long K, int depth) {
  std::ostringstream key;
  key << canonical_text(m) << "|qc|v1|p=" << p << "|N=" << N << "|K=" << K << "|depth=" << depth;
  return (std::filesystem::path(dir) / ("qc-" + detail::hex64(detail::fnv1a(key.str())) + ".txt")).string();
}

inline HeightContext height_context(const CurveManifest& m, prime_t p, long N, long K) {
  return HeightContext(m.curve(), m.bad, p, N, K + 6);
}

inline HeightSummary height_summary(const HeightContext& H, const KPoint& P, const KPoint& Q) {
  HeightSummary S;
  S.p = H.prime();
  const KPoint PQ = H.curve().add(P, Q);
  const Character chis[2] = {Character::cyclotomic, Character::anticyclotomic};
  for (size_t k = 0; k < 2; ++k) {
    S.hP[k] = H.height(P, chis[k]);
    S.hQ[k] = H.height(Q, chis[k]);
    S.hPQ[k] = H.height(PQ, chis[k]);
    S.alpha[k] = solve_alpha(H, P, Q, chis[k]);
  }
  S.tcyc = H.tset(Character::cyclotomic);
  S.tanti = H.tset(Character::anticyclotomic);
  return S;
}

inline PrimeRun qc_at(const CurveManifest& m, prime_t p, long N, long t_precision, int depth, const std::string& cache_dir,
                      const HeightContext* reuse = nullptr) {
  PrimeRun run;
  run.p = p;
  const long K = t_precision > 0 ? t_precision : disk_truncation(p, N);
  const std::string path = cache_dir.empty() ? "" : qc_cache_path(cache_dir, m, p, N, K, depth);
  if (!path.empty() && std::filesystem::exists(path)) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    run.result = read_qc(ss.str(), m.field());
    run.cached = true;
  } else {
    std::optional<HeightContext> own;
    if (!reuse) own.emplace(height_context(m, p, N, K));
    const HeightContext& H = reuse ? *reuse : *own;
    QCOptions opt;
    opt.precision = N;
    opt.truncation = K;
    opt.max_depth = depth;
    run.result = solve_disks(H, m.P, m.Q, opt);
    if (!path.empty()) {
      std::filesystem::create_directories(cache_dir);
      const std::string tmp = path + ".tmp";
      {
        std::ofstream out(tmp);
        out << write_qc(run.result);
      }
      std::filesystem::rename(tmp, path);
    }
  }
  for (const auto& R : m.known) {
    bool found = false;
    for (const auto& s : run.result.B)
      if (s.point && same_point(*s.point, R)) found = true;
    if (!found) run.known_missing.push_back(R);
  }
  return run;
}

inline PipelineReport run_pipeline(CurveManifest m, const PipelineOptions& opt) {
  using clock = std::chrono::steady_clock;
  auto since = [](clock::time_point t) { return std::chrono::duration<double>(clock::now() - t).count(); };
  if (opt.prime) m.p = opt.prime;
  if (opt.aux_prime) m.q = opt.aux_prime;
  if (opt.precision) m.precision = opt.precision;
  if (opt.t_precision >= 0) m.t_precision = opt.t_precision;
  const bool need_q = opt.stages.count(Stage::qc_q) || opt.stages.count(Stage::sieve);
  if (!m.p) throw validation_error("no prime given");
  if (need_q && !m.q) throw validation_error("no auxiliary prime given");
  if (!need_q) m.q = 0;

  PipelineReport rep;
  rep.name = m.name;
  rep.p = m.p;
  rep.q = m.q;
  rep.precision = m.precision;
  auto t0 = clock::now();
  rep.validation = validate_manifest(m);
  rep.small = search_small_points(m, m.search_bound);
  rep.timings.push_back({"validate", since(t0)});

  const long N = m.precision;
  const long Kp = m.t_precision > 0 ? m.t_precision : disk_truncation(m.p, N);
  std::optional<HeightContext> Hp;
  if (opt.stages.count(Stage::heights)) {
    t0 = clock::now();
    Hp.emplace(height_context(m, m.p, N, Kp));
    rep.heights = height_summary(*Hp, m.P, m.Q);
    rep.timings.push_back({"heights", since(t0)});
  }
  if (opt.stages.count(Stage::qc_p) || opt.stages.count(Stage::sieve)) {
    t0 = clock::now();
    rep.at_p = qc_at(m, m.p, N, m.t_precision, opt.max_depth, opt.cache_dir, Hp ? &*Hp : nullptr);
    rep.timings.push_back({rep.at_p->cached ? "qc-p (cached)" : "qc-p", since(t0)});
  }
  if (need_q) {
    t0 = clock::now();
    rep.at_q = qc_at(m, m.q, N, m.t_precision, opt.max_depth, opt.cache_dir);
    rep.timings.push_back({rep.at_q->cached ? "qc-q (cached)" : "qc-q", since(t0)});
  }
  for (const auto* r : {&rep.at_p, &rep.at_q})
    if (*r)
      for (const auto& s : (*r)->result.B)
        if (s.point &&
            std::none_of(rep.integral_points.begin(), rep.integral_points.end(),
                         [&](const KPoint& R) { return same_point(R, *s.point); }))
          rep.integral_points.push_back(*s.point);
  std::sort(rep.integral_points.begin(), rep.integral_points.end(), detail::sorted_before);

  if (opt.stages.count(Stage::sieve)) {
    t0 = clock::now();
    const KCurve E = m.curve();
    const SieveSide Sp = sieve_side(E, m.P, m.Q, rep.at_p->result, static_cast<long>(m.q), opt.include_recognized);
    const SieveSide Sq = sieve_side(E, m.P, m.Q, rep.at_q->result, static_cast<long>(m.p), opt.include_recognized);
    rep.sieve = cross_sieve(Sp, Sq);
    rep.timings.push_back({"sieve", since(t0)});
    auto mock_survivors = [](const std::vector<SieveRecord>& recs, const SieveSide& S) {
      long c = 0;
      for (size_t i = 0; i < recs.size(); ++i)
        if (recs[i].cause == Elimination::survived && !S.points[i].recognized) ++c;
      return c;
    };
    const long sp = mock_survivors(rep.sieve->records_p, Sp), sq = mock_survivors(rep.sieve->records_q, Sq);
    rep.superset_size = rep.at_p->result.recognized_count() + sp;
    rep.status = sp == 0 && sq == 0 && !rep.precision_exhausted() ? Status::determined : Status::superset;
  }
  return rep;
}

namespace detail {

inline void write_tset(std::ostream& os, const std::string& label, const TSet& T) {
  os << label << " = {";
  for (size_t k = 0; k < T.values.size(); ++k) os << (k ? ", " : "") << T.values[k].to_string();
  os << "}\n";
}

}  // namespace detail

inline std::string PipelineReport::text(bool with_timings) const {
  std::ostringstream os;
  os << "curve " << name << "\n";
  os << "primes p = " << p << ", q = " << q << ", precision " << precision << "\n";
  for (const auto& c : validation.checks) os << "check " << c << "\n";
  os << "small points " << small.size() << "\n";
  for (const auto& s : small) os << "  " << s.m << "P + " << s.n << "Q = (" << point_text(s.R) << ")\n";
  if (heights) {
    const char* names[2] = {"cyc", "anti"};
    for (size_t k = 0; k < 2; ++k) {
      os << "h^" << names[k] << "(P) = " << heights->hP[k].to_string() << "\n";
      os << "h^" << names[k] << "(Q) = " << heights->hQ[k].to_string() << "\n";
      os << "h^" << names[k] << "(P+Q) = " << heights->hPQ[k].to_string() << "\n";
      os << "alpha^" << names[k] << " = (" << heights->alpha[k].a11.to_string() << ", "
         << heights->alpha[k].a12.to_string() << ", " << heights->alpha[k].a22.to_string() << ")\n";
    }
    detail::write_tset(os, "T^cyc", heights->tcyc);
    detail::write_tset(os, "T^anti", heights->tanti);
  }
  for (const auto* r : {&at_p, &at_q}) {
    if (!*r) continue;
    const QCResult& Q = (*r)->result;
    os << "qc at " << (*r)->p << ": group orders " << Q.group_orders[0] << ", " << Q.group_orders[1] << "; #B = "
       << Q.B.size() << ", recognized " << Q.recognized_count() << ", #A = " << Q.mock_count() << ", unresolved "
       << Q.unresolved.size() << "\n";
    for (const auto& R : (*r)->known_missing) os << "  known point not recovered: (" << point_text(R) << ")\n";
  }
  if (sieve) os << sieve_summary(*sieve);
  os << "status " << to_string(status) << "\n";
  if (status == Status::determined) {
    os << "integral points " << integral_points.size() << "\n";
  } else if (status == Status::superset) {
    os << "known integral points " << integral_points.size() << "; superset at " << p << " of size " << superset_size
       << "\n";
  }
  for (const auto& R : integral_points) os << "  (" << point_text(R) << ")\n";
  if (with_timings)
    for (const auto& [k, v] : timings) os << "time " << k << " " << std::fixed << std::setprecision(2) << v << " s\n";
  return os.str();
}

}  // namespace qcec
