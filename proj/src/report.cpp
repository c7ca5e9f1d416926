#include "pcvx/report.hpp"

#include <sstream>

#include "pcvx/parallel.hpp"

namespace pcvx {

using nlohmann::json;

json to_json(const Point& z) {
  json out = json::array();
  for (Eigen::Index k = 0; k < z.size(); ++k) out.push_back({z(k).real(), z(k).imag()});
  return out;
}

Point point_from_json(const json& v) {
  if (!v.is_array()) throw PreconditionError("expected an array of complex numbers");
  Point z(static_cast<Eigen::Index>(v.size()));
  for (std::size_t k = 0; k < v.size(); ++k) {
    const json& c = v[k];
    if (c.is_number()) {
      z(static_cast<Eigen::Index>(k)) = c.get<double>();
    } else if (c.is_array() && c.size() == 2) {
      z(static_cast<Eigen::Index>(k)) = Complex(c[0].get<double>(), c[1].get<double>());
    } else {
      throw PreconditionError("expected a number or [re, im]");
    }
  }
  return z;
}

json to_json(const ViolationCertificate& cert) {
  json out;
  out["kind"] = to_string(cert.kind);
  out["target"] = cert.target;
  out["center"] = to_json(cert.center);
  out["direction"] = to_json(cert.direction);
  out["radius"] = cert.radius;
  out["margin"] = cert.margin;
  out["samples"] = cert.samples;
  out["recheck_samples"] = cert.recheck_samples;
  out["recheck_margin"] = cert.recheck_margin;
  out["candidate"] = cert.candidate;
  json points = json::array();
  for (const Point& p : cert.points) points.push_back(to_json(p));
  out["points"] = points;
  return out;
}

json to_json(const BudgetDescriptor& budget) {
  return {{"target", budget.target},
          {"candidates", budget.candidates},
          {"tested", budget.tested},
          {"grid", budget.grid},
          {"radius_fractions", budget.radius_fractions},
          {"band_low", budget.band_low},
          {"band_high", budget.band_high},
          {"seed", budget.seed}};
}

json to_json(const Verdict& verdict) {
  json out;
  out["verdict"] = verdict.falsified() ? "falsified" : "passed-at-resolution";
  out["budget"] = to_json(verdict.budget);
  out["certificate"] = verdict.certificate ? to_json(*verdict.certificate) : json(nullptr);
  return out;
}

json to_json(const RatioEstimate& ratio) {
  return {{"estimate", ratio.estimate}, {"radii", ratio.radii}, {"minima", ratio.minima}, {"monotone", ratio.monotone}};
}

json to_json(const HyperplaneResult& result) {
  json out;
  out["found"] = result.conormal.has_value();
  out["conormal"] = result.conormal ? to_json(*result.conormal) : json(nullptr);
  out["local_conormal"] = result.local_conormal ? to_json(*result.local_conormal) : json(nullptr);
  out["conormals_tried"] = result.conormals_tried;
  out["probes"] = result.probes;
  out["best_hits"] = result.best_hits;
  return out;
}

json to_json(const ComponentReport& report) {
  return {{"count", report.count},
          {"rows", report.rows},
          {"cols", report.cols},
          {"step", report.step},
          {"window", {report.window.x0, report.window.x1, report.window.y0, report.window.y1}},
          {"sizes", report.sizes},
          {"members", report.members}};
}

json to_json(const ExceptionalSweepReport& report) {
  json planes = json::array();
  for (const PlaneVerdict& p : report.results) {
    json frame = {{"base", to_json(p.frame.base)},
                  {"v1", to_json(Point(p.frame.vectors.col(0)))},
                  {"v2", to_json(Point(p.frame.vectors.col(1)))}};
    planes.push_back({{"frame", frame}, {"empty", p.empty}, {"puncture", p.puncture}, {"result", to_json(p.verdict)}});
  }
  return {{"point", to_json(report.point)},
          {"planes", report.planes},
          {"falsified", report.falsified},
          {"empty", report.empty},
          {"violation_fraction", report.violation_fraction},
          {"falsifying", report.falsifying},
          {"exceptional_at_resolution", report.exceptional_at_resolution()},
          {"per_plane", planes}};
}

json to_json(const Lemma5Result& result, bool with_table) {
  json out = {{"value", result.value}, {"s_in_lemma_range", result.s_in_lemma_range}};
  if (with_table) {
    out["theta"] = result.theta;
    out["exit_time"] = result.exit_time;
  }
  return out;
}

std::string components_csv(const ComponentReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "x,y,label\n";
  for (int r = 0; r < report.rows; ++r) {
    for (int c = 0; c < report.cols; ++c) {
      const int label = report.labels[static_cast<std::size_t>(r * report.cols + c)];
      if (label == 0) continue;
      out << report.window.x0 + (c + 0.5) * report.step << ',' << report.window.y0 + (r + 0.5) * report.step << ','
          << label << '\n';
    }
  }
  return out.str();
}

std::string dump_payload(const json& payload) { return payload.dump(2); }

json wrap_report(const json& payload, double wall_clock_seconds) {
  return {{"payload", payload},
          {"run", {{"version", kToolVersion}, {"wall_clock_seconds", wall_clock_seconds}, {"threads", thread_count()}}}};
}

}  // namespace pcvx
