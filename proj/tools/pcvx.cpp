#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pcvx/catalog.hpp"
#include "pcvx/convexity.hpp"
#include "pcvx/domain_file.hpp"
#include "pcvx/psh.hpp"
#include "pcvx/random.hpp"
#include "pcvx/ray.hpp"
#include "pcvx/report.hpp"
#include "pcvx/reproduce.hpp"
#include "pcvx/slicing.hpp"

using nlohmann::json;
using namespace pcvx;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitUnexpected = 2;

bool certificate_domain_given = false;

struct Options {
  std::string domain = "ball";
  std::string target = "neglog-s";
  std::string out;
  std::string csv;
  std::string expect;
  std::string point;
  std::string report;
  long budget = 0;
  std::uint64_t seed = 1;
  int point_count = 10;
  int point_index = 0;
  int pool = 256;
  int grid = 32;
  double focus_radius = 0.5;
  std::string focus;

  // lemma5
  double delta = 0.01;
  double c = 0.5;
  double eps = 0.5;
  std::optional<double> s;
  int lemma_grid = 512;

  // hartogs-slice
  std::string w = "[0]";
  std::string window = "-1,1,-1,1";
  double step = 0.01;
  int axis = 1;
  int min_cells = 4;

  // sweep
  int planes = 200;

  // fcomp / ratio
  std::string f = "neg-log";
  std::string mode;
};

/// Point from JSON text ("[1, [0, 2]]") or a bare number.
Point parse_point(const std::string& text) {
  json v;
  try {
    v = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("cannot parse point '" + text + "': " + e.what(), static_cast<int>(e.byte));
  }
  if (v.is_number()) v = json::array({v});
  return point_from_json(v);
}

Window parse_window(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    v.push_back(std::stod(item, &used));
    if (used != item.size()) throw PreconditionError("window entries must be numbers: " + text);
  }
  if (v.size() != 4 || !(v[0] < v[1]) || !(v[2] < v[3])) {
    throw PreconditionError("window must be x0,x1,y0,y1 with x0 < x1 and y0 < y1");
  }
  return {v[0], v[1], v[2], v[3]};
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path);
  f << text;
}

void emit(const Options& o, const json& payload, double seconds) {
  const std::string text = wrap_report(payload, seconds).dump(2) + "\n";
  if (o.out.empty()) {
    std::cout << text;
  } else {
    write_text(o.out, text);
  }
}

/// Exit code for a verdict checked against --expect.
int verdict_status(const Options& o, bool falsified) {
  if (o.expect.empty()) return kExitOk;
  const bool want = o.expect == "falsified";
  return want == falsified ? kExitOk : kExitUnexpected;
}

json config_echo(const std::string& command, const Options& o, const DomainSpec* spec) {
  json out = {{"command", command}, {"seed", o.seed}};
  if (spec) {
    out["domain_source"] = o.domain;
    out["domain"] = domain_summary(*spec);
  }
  return out;
}

PshBudget psh_budget(const Options& o, const DomainSpec& spec) {
  PshBudget b;
  if (o.budget > 0) b.circles = o.budget;
  b.grid = o.grid;
  if (!o.focus.empty()) {
    b.focus = parse_point(o.focus);
    if (b.focus->size() != spec.dimension()) throw DimensionError("focus dimension does not match the domain");
    b.focus_radius = o.focus_radius;
  }
  return b;
}

/// Certificate margin at grid, 2x, 4x, 8x (uncomposed circle targets only).
json grid_table(const DomainSpec& spec, const Verdict& v) {
  json rows = json::array();
  if (!v.certificate || v.certificate->kind != ViolationCertificate::Kind::circle_mean) return rows;
  const ViolationCertificate& cert = *v.certificate;
  for (int factor : {1, 2, 4, 8}) {
    const int grid = cert.samples * factor;
    rows.push_back({{"grid", grid}, {"margin", recheck_circle(spec, cert, grid)}});
  }
  return rows;
}

int run_check_psc(const Options& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const DomainSpec spec = load_domain(o.domain);
  const PshBudget budget = psh_budget(o, spec);
  json payload = config_echo("check psc", o, &spec);
  payload["target"] = o.target;
  payload["circles"] = budget.circles;
  bool falsified = false;
  if (o.target == "neglog-s" || o.target == "hartogs") {
    const Verdict v = o.target == "neglog-s" ? psh_falsify(spec, PshTarget::neglog_s(), budget, o.seed)
                                             : hartogs_psc_check(spec, budget, o.seed);
    falsified = v.falsified();
    payload["result"] = to_json(v);
    payload["grid_convergence"] = grid_table(spec, v);
  } else if (o.target == "indicatrix") {
    std::vector<Point> zs;
    if (!o.point.empty()) {
      zs.push_back(parse_point(o.point));
    } else if (budget.focus) {
      // Interior points near the focus: the ray-exit points of the boundary
      // samples pulled inward.
      for (const BoundaryPointData& b : sample_boundary_near(spec, *budget.focus, budget.focus_radius, o.point_count,
                                                             o.seed)) {
        zs.push_back(b.point - 0.05 * b.normal);
      }
    } else {
      zs = sample_interior(spec, o.point_count, o.seed);
    }
    json rows = json::array();
    int count = 0;
    for (std::size_t k = 0; k < zs.size(); ++k) {
      if (!spec.contains(zs[k])) continue;
      const Verdict v = indicatrix_psc_check(spec, zs[k], budget, mix_seed(o.seed, k));
      falsified = falsified || v.falsified();
      count += v.falsified() ? 1 : 0;
      json row = to_json(v);
      row["z"] = to_json(zs[k]);
      row["grid_convergence"] = grid_table(spec, v);
      rows.push_back(row);
    }
    payload["points"] = rows;
    payload["falsified_points"] = count;
  } else {
    throw PreconditionError("unknown target '" + o.target + "' (neglog-s, indicatrix, hartogs)");
  }
  payload["falsified"] = falsified;
  emit(o, payload, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return verdict_status(o, falsified);
}

int run_check_convex(const Options& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const DomainSpec spec = load_domain(o.domain);
  ConvexBudget budget;
  if (o.budget > 0) budget.segments = o.budget;
  const Verdict v = segment_convexity_falsify(spec, budget, o.seed);
  json payload = config_echo("check convex", o, &spec);
  payload["segments"] = budget.segments;
  payload["result"] = to_json(v);
  payload["falsified"] = v.falsified();
  emit(o, payload, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return verdict_status(o, v.falsified());
}

int run_check_linconvex(const Options& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const DomainSpec spec = load_domain(o.domain);
  Point a;
  if (!o.point.empty()) {
    a = parse_point(o.point);
  } else {
    const std::vector<BoundaryPointData> pool = sample_boundary(spec, o.pool, o.seed);
    if (o.point_index < 0 || o.point_index >= static_cast<int>(pool.size())) {
      throw PreconditionError("point index out of range");
    }
    a = pool[static_cast<std::size_t>(o.point_index)].point;
  }
  HyperplaneBudget budget;
  if (o.budget > 0) budget.probes = static_cast<int>(o.budget);
  const HyperplaneResult r = hyperplane_search(spec, a, budget, o.seed);
  json payload = config_echo("check linconvex", o, &spec);
  payload["point"] = to_json(a);
  payload["result"] = to_json(r);
  // "falsified" here means no hyperplane was found at this budget.
  const bool missing = !r.conormal.has_value();
  payload["falsified"] = missing;
  emit(o, payload, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return verdict_status(o, missing);
}

/// Re-evaluates the circle certificate(s) stored in a check report.
int run_check_certificate(const Options& o) {
  std::ifstream f(o.report);
  if (!f) throw Error("cannot read " + o.report);
  json doc;
  try {
    doc = json::parse(f);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("report: ") + e.what(), static_cast<int>(e.byte));
  }
  const json& payload = doc.contains("payload") ? doc["payload"] : doc;
  // --domain wins; otherwise the source recorded in the report.
  const bool given = certificate_domain_given;
  const DomainSpec spec = load_domain(given || !payload.contains("domain_source")
                                          ? o.domain
                                          : payload["domain_source"].get<std::string>());
  std::vector<json> certs;
  if (payload.contains("result") && payload["result"].contains("certificate")) {
    certs.push_back(payload["result"]["certificate"]);
  }
  if (payload.contains("points")) {
    for (const json& row : payload["points"]) certs.push_back(row["certificate"]);
  }
  json rows = json::array();
  bool all_hold = true;
  for (const json& c : certs) {
    if (c.is_null() || c["kind"] != "circle-mean") continue;
    ViolationCertificate cert;
    cert.target = c["target"].get<std::string>();
    cert.center = point_from_json(c["center"]);
    cert.direction = point_from_json(c["direction"]);
    cert.radius = c["radius"].get<double>();
    for (const json& p : c["points"]) cert.points.push_back(point_from_json(p));
    const int grid = 4 * c["samples"].get<int>();
    const double margin = recheck_circle(spec, cert, grid);
    const bool holds = margin > 1e-5;
    all_hold = all_hold && holds;
    rows.push_back({{"target", cert.target}, {"grid", grid}, {"margin", margin}, {"holds", holds}});
  }
  if (rows.empty()) throw PreconditionError("report holds no circle certificate");
  json out = {{"command", "check certificate"}, {"certificates", rows}, {"all_hold", all_hold}};
  emit(o, out, 0.0);
  return all_hold ? kExitOk : kExitUnexpected;
}

int run_lemma5(const Options& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const double s = o.s ? *o.s : lemma5_s_min(o.delta, o.c);
  const Lemma5Result r = lemma5_integral(o.delta, o.c, s, o.eps, o.lemma_grid);
  const DomainSpec e = catalog_domain("lemma5-E", {{"c", o.c}, {"eps", o.eps}});
  Point z(2), x0(2);
  z << Complex(-o.delta, 0), Complex(0, 0);
  x0 << Complex(o.delta, 0), Complex(0, 0);
  json payload = config_echo("lemma5", o, &e);
  payload["delta"] = o.delta;
  payload["c"] = o.c;
  payload["eps"] = o.eps;
  payload["s"] = s;
  payload["grid"] = o.lemma_grid;
  payload["result"] = to_json(r, o.csv.empty());
  payload["below_one"] = r.value < 1.0;
  payload["exit_time_x0"] = ray_exit_time(e, z, x0, 0.0);
  if (!o.csv.empty()) {
    std::ostringstream csv;
    csv.precision(17);
    csv << "theta,exit_time\n";
    for (std::size_t k = 0; k < r.theta.size(); ++k) csv << r.theta[k] << ',' << r.exit_time[k] << '\n';
    write_text(o.csv, csv.str());
  }
  emit(o, payload, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return verdict_status(o, !(r.value < 1.0));
}

int run_hartogs_slice(const Options& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const DomainSpec spec = load_domain(o.domain);
  const int n = spec.dimension();
  const Point w = parse_point(o.w);
  if (w.size() != n) throw DimensionError("w must have the domain dimension");
  if (o.axis < 1 || o.axis > n) throw PreconditionError("axis must be a coordinate index 1..n");
  const Point base = o.point.empty() ? Point(Point::Zero(n)) : parse_point(o.point);
  if (base.size() != n) throw DimensionError("point must have the domain dimension");
  const Window window = parse_window(o.window);
  auto member = [&](double x, double y) {
    Point z = base;
    z(o.axis - 1) += Complex(x, y);
    return hartogs_contains(spec, z, w);
  };
  const ComponentReport r = connected_components(member, window, o.step, o.min_cells);
  json payload = config_echo("hartogs-slice", o, &spec);
  payload["w"] = to_json(w);
  payload["base"] = to_json(base);
  payload["axis"] = o.axis;
  payload["result"] = to_json(r);
  if (!o.csv.empty()) write_text(o.csv, components_csv(r));
  emit(o, payload, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return kExitOk;
}

int run_sweep(const Options& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const DomainSpec spec = load_domain(o.domain);
  if (o.point.empty()) throw PreconditionError("sweep needs --point");
  const Point a = parse_point(o.point);
  const PshBudget budget = psh_budget(o, spec);
  const ExceptionalSweepReport r = exceptional_sweep(spec, a, o.planes, budget, o.seed);
  json payload = config_echo("sweep", o, &spec);
  payload["circles"] = budget.circles;
  payload["result"] = to_json(r);
  emit(o, payload, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  // "falsified" = some plane through a carries a violation.
  return verdict_status(o, r.falsified > 0);
}

CompositionDescriptor composition(const std::string& f) {
  for (const char* name : {"neg-log", "reciprocal", "exp-neg", "exp", "identity"}) {
    if (f == name) return CompositionDescriptor::named(f);
  }
  return CompositionDescriptor::custom(f);
}

int run_fcomp(const Options& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const DomainSpec spec = load_domain(o.domain);
  const CompositionDescriptor f = composition(o.f);
  json payload = config_echo("fcomp", o, &spec);
  payload["f"] = {{"name", f.name()},
                  {"monotonicity", to_string(f.monotonicity())},
                  {"convexity", to_string(f.convexity())}};
  payload["mode"] = o.mode;
  Verdict v;
  if (o.mode == "convex") {
    ConvexBudget budget;
    if (o.budget > 0) budget.segments = o.budget;
    v = composed_convexity_check(spec, f, budget, o.seed);
  } else if (o.mode == "psh") {
    v = composed_psh_check(spec, f, psh_budget(o, spec), o.seed);
  } else {
    throw PreconditionError("fcomp mode must be convex or psh");
  }
  payload["result"] = to_json(v);
  payload["falsified"] = v.falsified();
  emit(o, payload, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return verdict_status(o, v.falsified());
}

int run_ratio(const Options& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const DomainSpec spec = load_domain(o.domain);
  const RatioMode mode = parse_ratio_mode(o.mode);
  const std::vector<BoundaryPointData> pool = sample_boundary(spec, o.pool, o.seed);
  if (o.point_index < 0 || o.point_index >= static_cast<int>(pool.size())) {
    throw PreconditionError("point index out of range");
  }
  const BoundaryPointData& a = pool[static_cast<std::size_t>(o.point_index)];
  const RatioEstimate r = boundary_ratio(spec, a, mode, {0.1, 0.03, 0.01, 0.003, 0.001}, 64, o.seed);
  json payload = config_echo("ratio", o, &spec);
  payload["mode"] = to_string(mode);
  payload["point_index"] = o.point_index;
  payload["point"] = to_json(a.point);
  payload["smooth"] = a.smooth();
  payload["result"] = to_json(r);
  emit(o, payload, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return kExitOk;
}

int run_reproduce(const Options& o, const std::string& target) {
  const auto t0 = std::chrono::steady_clock::now();
  const ReproduceResult r = reproduce(target, o.seed);
  emit(o, r.payload, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  if (!r.expected) {
    std::cerr << "reproduce " << target << ": unexpected outcome\n";
    for (const json& c : r.payload["checks"]) {
      if (!c["pass"].get<bool>()) std::cerr << "  failed: " << c["name"].get<std::string>() << '\n';
    }
  }
  return r.expected ? kExitOk : kExitUnexpected;
}

int run_catalog(bool show_formulas) {
  for (const CatalogEntry& e : catalog_entries()) {
    std::cout << e.name;
    if (show_formulas) {
      std::cout << "  " << e.summary;
      for (const auto& [k, v] : e.defaults) std::cout << ' ' << k << '=' << v;
    }
    std::cout << '\n';
  }
  return kExitOk;
}

void add_domain(CLI::App* cmd, Options& o) {
  cmd->add_option("--domain", o.domain, "domain file or catalog reference name:key=value,...");
}

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--seed", o.seed, "seed");
  cmd->add_option("--out", o.out, "JSON report path (default stdout)");
  cmd->add_option("--expect", o.expect, "expected outcome; exit 2 otherwise")
      ->check(CLI::IsMember({"passed", "falsified"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical falsification of pseudoconvexity and related convexity notions"};
  app.require_subcommand(1);
  Options o;

  CLI::App* catalog = app.add_subcommand("catalog", "catalog domains");
  catalog->require_subcommand(1);
  catalog->add_subcommand("list", "names of the catalog domains");
  catalog->add_subcommand("show", "names, summaries and default parameters");

  CLI::App* check = app.add_subcommand("check", "falsification checks");
  check->require_subcommand(1);
  CLI::App* psc = check->add_subcommand("psc", "pseudoconvexity");
  add_domain(psc, o);
  add_common(psc, o);
  psc->add_option("--target", o.target, "neglog-s, indicatrix or hartogs");
  psc->add_option("--budget", o.budget, "number of circles");
  psc->add_option("--grid", o.grid, "angles per circle");
  psc->add_option("--point", o.point, "indicatrix center z (JSON)");
  psc->add_option("--points", o.point_count, "sampled z for the indicatrix target");
  psc->add_option("--focus", o.focus, "restrict boundary samples to a ball around this point");
  psc->add_option("--focus-radius", o.focus_radius, "radius of the focus ball");
  CLI::App* convex = check->add_subcommand("convex", "midpoint convexity");
  add_domain(convex, o);
  add_common(convex, o);
  convex->add_option("--budget", o.budget, "number of segments");
  CLI::App* linconvex = check->add_subcommand("linconvex", "complex supporting hyperplane at a point");
  add_domain(linconvex, o);
  add_common(linconvex, o);
  linconvex->add_option("--point", o.point, "point a (JSON); default a boundary sample");
  linconvex->add_option("--point-index", o.point_index, "boundary sample index when --point is absent");
  linconvex->add_option("--pool", o.pool, "boundary sample count");
  linconvex->add_option("--budget", o.budget, "verification probes");
  CLI::App* certificate = check->add_subcommand("certificate", "re-verify the certificates of a psc report");
  add_domain(certificate, o);
  certificate->add_option("--report", o.report, "report written by check psc")->required();
  certificate->add_option("--out", o.out, "JSON output path");

  CLI::App* lemma5 = app.add_subcommand("lemma5", "mean of the indicatrix gauge on E over the circle of w");
  add_common(lemma5, o);
  lemma5->add_option("--delta", o.delta, "delta");
  lemma5->add_option("--c", o.c, "c < 1");
  lemma5->add_option("--eps", o.eps, "epsilon");
  lemma5->add_option("--s", o.s, "|w| (default 3 (1-c)^(-1/2) delta^(3/2))");
  lemma5->add_option("--grid", o.lemma_grid, "angles");
  lemma5->add_option("--csv", o.csv, "theta,exit_time table path");

  CLI::App* slice = app.add_subcommand("hartogs-slice", "components of {z : w in I_{D,z}} on a grid");
  add_domain(slice, o);
  add_common(slice, o);
  slice->add_option("--w", o.w, "vector w (JSON, e.g. [1.7320508] or [[0, 1], 2])");
  slice->add_option("--window", o.window, "x0,x1,y0,y1");
  slice->add_option("--step", o.step, "grid step");
  slice->add_option("--point", o.point, "base point for n > 1 (JSON)");
  slice->add_option("--axis", o.axis, "coordinate that varies over the window (1-based)");
  slice->add_option("--min-cells", o.min_cells, "smallest reported component");
  slice->add_option("--csv", o.csv, "labelled grid path (x,y,label)");

  CLI::App* sweep = app.add_subcommand("sweep", "pseudoconvexity of complex 2-plane slices through a point");
  add_domain(sweep, o);
  add_common(sweep, o);
  sweep->add_option("--point", o.point, "point a (JSON)")->required();
  sweep->add_option("--planes", o.planes, "number of random planes");
  sweep->add_option("--budget", o.budget, "circles per plane");
  sweep->add_option("--focus", o.focus, "restrict boundary samples to a ball around this point");
  sweep->add_option("--focus-radius", o.focus_radius, "radius of the focus ball");

  CLI::App* fcomp = app.add_subcommand("fcomp", "convexity or plurisubharmonicity of f composed with s_D");
  add_domain(fcomp, o);
  add_common(fcomp, o);
  fcomp->add_option("--f", o.f, "neg-log, reciprocal, exp-neg, exp, identity or a formula in t");
  fcomp->add_option("--mode", o.mode, "convex or psh")->required()->check(CLI::IsMember({"convex", "psh"}));
  fcomp->add_option("--budget", o.budget, "segments (convex) or circles (psh)");

  CLI::App* ratio = app.add_subcommand("ratio", "liminf of s_D / |x - a|^2 at a boundary sample");
  add_domain(ratio, o);
  add_common(ratio, o);
  ratio->add_option("--mode", o.mode, "real, complex or J")->required();
  ratio->add_option("--point-index", o.point_index, "boundary sample index");
  ratio->add_option("--pool", o.pool, "boundary sample count");

  std::string target;
  CLI::App* repro = app.add_subcommand("reproduce", "pinned reproduction recipe");
  add_common(repro, o);
  repro->add_option("target", target, "recipe name")->required()->check(CLI::IsMember(reproduce_targets()));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (catalog->parsed()) return run_catalog(catalog->got_subcommand("show"));
    if (psc->parsed()) return run_check_psc(o);
    if (convex->parsed()) return run_check_convex(o);
    if (linconvex->parsed()) return run_check_linconvex(o);
    if (certificate->parsed()) {
      certificate_domain_given = certificate->count("--domain") > 0;
      return run_check_certificate(o);
    }
    if (lemma5->parsed()) return run_lemma5(o);
    if (slice->parsed()) return run_hartogs_slice(o);
    if (sweep->parsed()) return run_sweep(o);
    if (fcomp->parsed()) return run_fcomp(o);
    if (ratio->parsed()) return run_ratio(o);
    if (repro->parsed()) return run_reproduce(o, target);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: bad number: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
