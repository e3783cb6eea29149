// qcec: integral points on rank-2 elliptic curves over imaginary quadratic
// fields by quadratic Chabauty and the two-prime sieve.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "qcec/pipeline.hpp"

namespace {

using namespace qcec;

struct Common {
  std::string manifest;
  long prime = 0, aux_prime = 0, precision = 0, t_precision = -1;
  std::vector<std::string> stages;
  std::string cache_dir;
  bool survey = false;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("manifest", c.manifest, "curve manifest")->required()->check(CLI::ExistingFile);
  app->add_option("--prime", c.prime, "prime p (overrides the manifest)");
  app->add_option("--aux-prime", c.aux_prime, "auxiliary prime q (overrides the manifest)");
  app->add_option("--precision", c.precision, "p-adic precision N");
  app->add_option("--t-precision", c.t_precision, "disk parameter truncation (0: automatic)");
  app->add_option("--stage", c.stages, "stages to run: heights, qc-p, qc-q, sieve");
  app->add_option("--cache-dir", c.cache_dir, "directory for cached quadratic Chabauty results");
  app->add_flag("--survey", c.survey, "list usable primes and prime pairs satisfying the reduction condition");
}

CurveManifest load(const Common& c) {
  CurveManifest m = load_manifest(c.manifest);
  if (c.prime) m.p = static_cast<prime_t>(c.prime);
  if (c.aux_prime) m.q = static_cast<prime_t>(c.aux_prime);
  if (c.precision) m.precision = c.precision;
  if (c.t_precision >= 0) m.t_precision = c.t_precision;
  return m;
}

void write_out(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw validation_error("cannot write " + path);
  out << text;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void print_survey(const CurveManifest& m) {
  const Survey S = survey_primes(m.curve());
  std::cout << "usable primes:";
  for (const auto& I : S.primes) std::cout << " " << I.p << " (" << I.orders[0] << "," << I.orders[1] << ")";
  std::cout << "\npairs satisfying the reduction condition:";
  if (S.pairs.empty()) std::cout << " none";
  for (const auto& [a, b] : S.pairs) std::cout << " (" << a << "," << b << ")";
  std::cout << "\n";
}

int cmd_validate(const Common& c) {
  CurveManifest m = load(c);
  const ValidationReport V = validate_manifest(m);
  for (const auto& s : V.checks) std::cout << "ok " << s << "\n";
  if (c.survey) print_survey(m);
  return 0;
}

int cmd_search(const Common& c, long bound) {
  CurveManifest m = load(c);
  const auto pts = search_small_points(m, bound >= 0 ? bound : m.search_bound);
  for (const auto& s : pts) std::cout << s.m << " " << s.n << " " << point_text(s.R) << "\n";
  std::cerr << pts.size() << " integral points\n";
  return 0;
}

int cmd_heights(const Common& c, const std::string& point) {
  CurveManifest m = load(c);
  m.q = 0;
  validate_manifest(m);
  const KPoint R = parse_point(m.field(), point, m.zeta6);
  if (!m.curve().on_curve(R)) throw validation_error("point is not on the curve");
  const long K = m.t_precision > 0 ? m.t_precision : disk_truncation(m.p, m.precision);
  const HeightContext H = height_context(m, m.p, m.precision, K);
  const auto f = H.elliptic_log(R);
  std::cout << "p = " << m.p << "\n";
  std::cout << "h^cyc = " << H.height(R, Character::cyclotomic).to_string() << "\n";
  std::cout << "h^anti = " << H.height(R, Character::anticyclotomic).to_string() << "\n";
  std::cout << "f1 = " << f[0].to_string() << "\nf2 = " << f[1].to_string() << "\n";
  return 0;
}

int cmd_qcset(const Common& c, const std::string& out) {
  CurveManifest m = load(c);
  m.q = 0;
  validate_manifest(m);
  const PrimeRun run = qc_at(m, m.p, m.precision, m.t_precision, 3, c.cache_dir);
  write_out(out, write_qc(run.result));
  const QCResult& r = run.result;
  std::cerr << "#B = " << r.B.size() << ", recognized " << r.recognized_count() << ", #A = " << r.mock_count()
            << ", unresolved " << r.unresolved.size() << "\n";
  for (const auto& R : run.known_missing) std::cerr << "known point not recovered: " << point_text(R) << "\n";
  return r.unresolved.empty() && run.known_missing.empty() ? 0 : 4;
}

int cmd_sieve(const Common& c, const std::string& fp, const std::string& fq, bool recognized, const std::string& out) {
  CurveManifest m = load(c);
  const QCResult rp = read_qc(read_file(fp), m.field());
  const QCResult rq = read_qc(read_file(fq), m.field());
  const KCurve E = m.curve();
  const SieveSide Sp = sieve_side(E, m.P, m.Q, rp, static_cast<long>(rq.p), recognized);
  const SieveSide Sq = sieve_side(E, m.P, m.Q, rq, static_cast<long>(rp.p), recognized);
  const SieveReport rep = cross_sieve(Sp, Sq);
  write_out(out, write_sieve(rep));
  std::cerr << sieve_summary(rep);
  long mocks = 0;
  for (size_t i = 0; i < rep.records_p.size(); ++i)
    if (rep.records_p[i].cause == Elimination::survived && !Sp.points[i].recognized) ++mocks;
  for (size_t i = 0; i < rep.records_q.size(); ++i)
    if (rep.records_q[i].cause == Elimination::survived && !Sq.points[i].recognized) ++mocks;
  return mocks == 0 ? 0 : 2;
}

int cmd_run(const Common& c, bool recognized, const std::string& out) {
  CurveManifest m = load(c);
  if (c.survey) print_survey(m);
  PipelineOptions opt;
  opt.cache_dir = c.cache_dir;
  opt.include_recognized = recognized;
  if (!c.stages.empty()) {
    opt.stages.clear();
    for (const auto& s : c.stages) opt.stages.insert(parse_stage(s));
  }
  const PipelineReport rep = run_pipeline(m, opt);
  write_out(out, rep.text());
  return rep.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quadratic Chabauty for integral points on rank-2 elliptic curves over imaginary quadratic fields"};
  app.require_subcommand(1);

  Common c;
  long bound = -1;
  std::string point, out, fp, fq;
  bool recognized = false;

  auto* validate = app.add_subcommand("validate", "check a manifest");
  add_common(validate, c);

  auto* search = app.add_subcommand("search", "integral points mP + nQ with |m|, |n| <= bound");
  add_common(search, c);
  search->add_option("--bound", bound, "search bound (default: manifest)");

  auto* heights = app.add_subcommand("heights", "p-adic heights of a point");
  add_common(heights, c);
  heights->add_option("point", point, "point as 'x, y'")->required();

  auto* qcset = app.add_subcommand("qcset", "quadratic Chabauty set at the prime");
  add_common(qcset, c);
  qcset->add_option("-o,--output", out, "record file (default: stdout)");

  auto* sieve = app.add_subcommand("sieve", "sieve two quadratic Chabauty record files");
  add_common(sieve, c);
  sieve->add_option("qc_p", fp, "record file at p")->required()->check(CLI::ExistingFile);
  sieve->add_option("qc_q", fq, "record file at q")->required()->check(CLI::ExistingFile);
  sieve->add_flag("--include-recognized", recognized, "also sieve against recognised points");
  sieve->add_option("-o,--output", out, "record file (default: stdout)");

  auto* run = app.add_subcommand("run", "full pipeline");
  add_common(run, c);
  run->add_flag("--include-recognized", recognized, "also sieve against recognised points");
  run->add_option("-o,--output", out, "report file (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) return cmd_validate(c);
    if (*search) return cmd_search(c, bound);
    if (*heights) return cmd_heights(c, point);
    if (*qcset) return cmd_qcset(c, out);
    if (*sieve) return cmd_sieve(c, fp, fq, recognized, out);
    if (*run) return cmd_run(c, recognized, out);
  } catch (const validation_error& e) {
    std::cerr << "validation failed: " << e.what() << "\n";
    return 3;
  } catch (const precision_error& e) {
    std::cerr << "precision exhausted: " << e.what() << "\n";
    return 4;
  } catch (const unsupported_error& e) {
    std::cerr << "unsupported: " << e.what() << "\n";
    return 3;
  } catch (const domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
