// Runs every acceptance criterion and prints one PASS/FAIL line per criterion.
// Exit status is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "pcvx/catalog.hpp"
#include "pcvx/parallel.hpp"
#include "pcvx/psh.hpp"
#include "pcvx/report.hpp"
#include "pcvx/reproduce.hpp"

using namespace pcvx;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Run {
  ReproduceResult result;
  double seconds = 0.0;
};

std::map<std::string, Run> runs;

const Run& run(const std::string& target) {
  auto it = runs.find(target);
  if (it != runs.end()) return it->second;
  const auto t0 = std::chrono::steady_clock::now();
  Run r{reproduce(target, 1), 0.0};
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return runs.emplace(target, std::move(r)).first->second;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

/// All checks of the listed targets, optionally only those whose name
/// contains one of `filters`, plus a runtime ceiling on the total.
Outcome from_targets(const std::vector<std::string>& targets, double max_seconds,
                     const std::vector<std::string>& filters = {}) {
  Outcome out;
  double seconds = 0.0;
  int checked = 0;
  for (const std::string& t : targets) {
    const Run& r = run(t);
    seconds += r.seconds;
    for (const json& c : r.result.payload["checks"]) {
      const std::string name = c["name"].get<std::string>();
      bool wanted = filters.empty();
      for (const std::string& f : filters) wanted = wanted || name.find(f) != std::string::npos;
      if (!wanted) continue;
      ++checked;
      if (!c["pass"].get<bool>()) {
        out.pass = false;
        out.detail += " [failed: " + t + ": " + name + " = " + c["detail"].dump() + "]";
      }
    }
  }
  if (checked == 0) {
    out.pass = false;
    out.detail += " [no checks matched]";
  }
  if (seconds > max_seconds) {
    out.pass = false;
    out.detail += " [runtime over " + fmt("%.0f", max_seconds) + " s]";
  }
  out.detail = std::to_string(checked) + " checks, " + fmt("%.1f", seconds) + " s" + out.detail;
  return out;
}

Outcome levi() {
  // Oracles: for Re z1 + (Im z1)^2 + c (Im z2)^2 - (Re z2)^2 the tangent
  // direction at 0 is e2 and the Levi form there is (c - 1)/2; for
  // |z|^2 - 1 it is the identity.
  const DomainSpec model = catalog_domain("model-hor", {{"c", 0.5}});
  const DomainSpec ball = catalog_domain("ball", {{"n", 2}});
  const double m = levi_min_eig(model.primitive_field(0), Point::Zero(2));
  Point a(2);
  a << Complex(0.6, 0.0), Complex(0.0, 0.8);
  const double s = levi_min_eig(ball.primitive_field(0), a);
  Outcome out;
  out.pass = std::abs(m + 0.25) <= 1e-4 && std::abs(s - 1.0) <= 1e-5;
  out.detail = "model-hor at 0: " + fmt("%.8f", m) + ", sphere: " + fmt("%.8f", s);
  return out;
}

Outcome determinism() {
  // Rerun every recipe with a different thread count and compare payloads.
  Outcome out;
  const int before = thread_count();
  set_thread_count(before == 3 ? 2 : 3);
  int same = 0;
  for (const std::string& t : reproduce_targets()) {
    const ReproduceResult again = reproduce(t, 1);
    if (dump_payload(again.payload) == dump_payload(run(t).result.payload)) {
      ++same;
    } else {
      out.pass = false;
      out.detail += " [differs: " + t + "]";
    }
  }
  out.detail = std::to_string(same) + "/" + std::to_string(reproduce_targets().size()) + " payloads identical at " +
               std::to_string(before) + " vs " + std::to_string(thread_count()) + " threads" + out.detail;
  set_thread_count(0);
  return out;
}

}  // namespace

int main() {
  set_thread_count(1);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"E-domain gauge integral below 1, grid-stable, exit time 1 at X0", [] { return from_targets({"lemma5"}, 30); }},
      {"Three-way coherence on 4 pseudoconvex and 3 non-pseudoconvex domains",
       [] { return from_targets({"theorem1-crosscheck"}, 300); }},
      {"Levi form on model-hor and the sphere", levi},
      {"lens slice: two components, stable, hartogs_contains(z, 0) = contains(z)",
       [] { return from_targets({"example10"}, 1e9, {"components", "hartogs_contains"}); }},
      {"cone: identity, origin fraction 0, z0 fraction > 0",
       [] { return from_targets({"example13"}, 600, {"identity", "origin", "z0: violation"}); }},
      {"punctured ball: sweeps and puncture certificate", [] { return from_targets({"example14"}, 1e9); }},
      {"three-piece union: disjointness, planes meet D, hyperplane search >= 95%",
       [] { return from_targets({"example15"}, 1e9, {"disjoint", "hyperplanes all meet", ">= 95%"}); }},
      {"Composition suite: exp(-t) passes, identity falsified (quadrant, Hartogs), ball neg-log passes",
       [] {
         return from_targets({"prop6-quadrant", "prop8-hartogsfigure"}, 1e9,
                             {"exp(-t)", "quadrant, f = identity", "Hartogs figure, f = identity", "ball, f = neg-log"});
       }},
      {"Boundary ratios: half-space 0, sphere -0.5, model-hor complex <= -0.1",
       [] { return from_targets({"ratio-tests"}, 1e9); }},
      {"Determinism across reruns and thread counts", determinism},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s criterion %zu: %s | %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failed;
}
