#include "pcvx/convexity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <regex>

#include "pcvx/parallel.hpp"
#include "pcvx/random.hpp"

namespace pcvx {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kTagSamples = 1000;

using Monotonicity = CompositionDescriptor::Monotonicity;
using Convexity = CompositionDescriptor::Convexity;

BudgetDescriptor describe_budget(const std::string& target, const ConvexBudget& budget, double band_high,
                                 std::uint64_t seed) {
  BudgetDescriptor d;
  d.target = target;
  d.radius_fractions = budget.length_fractions;
  d.band_low = budget.band_low;
  d.band_high = band_high;
  d.seed = seed;
  return d;
}

bool in_window(const DomainSpec& spec, const Point& z) { return z.norm() < spec.bounding_radius(); }

}  // namespace

CompositionDescriptor::CompositionDescriptor(std::string name, std::function<double(double)> f, double range)
    : name_(std::move(name)), f_(std::move(f)) {
  if (!(range > 0.0)) throw PreconditionError("composition range must be positive");
  std::vector<double> v(kTagSamples);
  for (int k = 0; k < kTagSamples; ++k) {
    v[static_cast<std::size_t>(k)] = f_(range * (k + 1) / kTagSamples);
    if (!std::isfinite(v[static_cast<std::size_t>(k)])) throw PreconditionError(name_ + " is not finite on (0, R]");
  }
  double scale = 0.0;
  for (double x : v) scale = std::max(scale, std::abs(x));
  const double tol = 1e-12 * std::max(1.0, scale);
  bool up = true, down = true, flat = true, convex = true, concave = true;
  for (std::size_t k = 1; k < v.size(); ++k) {
    const double d = v[k] - v[k - 1];
    up = up && d > tol;
    down = down && d < -tol;
    flat = flat && std::abs(d) <= tol;
    if (k + 1 < v.size()) {
      const double dd = v[k + 1] - 2.0 * v[k] + v[k - 1];
      convex = convex && dd >= -tol;
      concave = concave && dd <= tol;
    }
  }
  monotonicity_ = flat ? Monotonicity::constant
                       : up ? Monotonicity::increasing : down ? Monotonicity::decreasing : Monotonicity::none;
  convexity_ = convex && concave ? Convexity::affine
                                 : convex ? Convexity::convex : concave ? Convexity::concave : Convexity::none;
}

CompositionDescriptor CompositionDescriptor::named(const std::string& name, double range, double a, double b) {
  auto expect = [](const CompositionDescriptor& f, Monotonicity m, Convexity c) {
    if (f.monotonicity() != m || f.convexity() != c) {
      throw PreconditionError("sampled shape of " + f.name() + " disagrees with its tags");
    }
    return f;
  };
  if (name == "neg-log") {
    return expect({name, [](double t) { return -std::log(t); }, range}, Monotonicity::decreasing, Convexity::convex);
  }
  if (name == "reciprocal") {
    return expect({name, [](double t) { return 1.0 / t; }, range}, Monotonicity::decreasing, Convexity::convex);
  }
  if (name == "exp-neg") {
    return expect({name, [](double t) { return std::exp(-t); }, range}, Monotonicity::decreasing, Convexity::convex);
  }
  if (name == "exp") {
    return expect({name, [](double t) { return std::exp(t); }, range}, Monotonicity::increasing, Convexity::convex);
  }
  if (name == "identity") {
    return expect({name, [](double t) { return t; }, range}, Monotonicity::increasing, Convexity::affine);
  }
  if (name == "affine") {
    const Monotonicity m = a > 0 ? Monotonicity::increasing : a < 0 ? Monotonicity::decreasing : Monotonicity::constant;
    return expect({name, [a, b](double t) { return a * t + b; }, range}, m, Convexity::affine);
  }
  throw PreconditionError("unknown composition '" + name + "'");
}

CompositionDescriptor CompositionDescriptor::custom(const std::string& formula, double range) {
  const std::string text = std::regex_replace(formula, std::regex(R"(\bt\b)"), "re(1)");
  auto field = std::make_shared<ScalarField>(parse_field(text, 1));
  return {formula, [field](double t) {
            Point z(1);
            z(0) = t;
            return (*field)(z);
          },
          range};
}

std::string to_string(CompositionDescriptor::Monotonicity m) {
  switch (m) {
    case Monotonicity::increasing:
      return "increasing";
    case Monotonicity::decreasing:
      return "decreasing";
    case Monotonicity::constant:
      return "constant";
    case Monotonicity::none:
      return "none";
  }
  return "";
}

std::string to_string(CompositionDescriptor::Convexity c) {
  switch (c) {
    case Convexity::convex:
      return "convex";
    case Convexity::concave:
      return "concave";
    case Convexity::affine:
      return "affine";
    case Convexity::none:
      return "none";
  }
  return "";
}

Verdict segment_convexity_falsify(const DomainSpec& spec, const ConvexBudget& budget, std::uint64_t seed) {
  if (budget.segments < 1 || budget.interior_pool < 2) throw PreconditionError("segment budget is empty");
  const std::vector<Point> pool = sample_interior(spec, budget.interior_pool, seed);
  if (pool.size() < 2) throw PreconditionError("fewer than two interior samples found");
  Verdict verdict;
  verdict.budget = describe_budget("segment-midpoint", budget, 0.0, seed);
  const auto found = first_hit<ViolationCertificate>(budget.segments, [&](long index) {
    Rng rng = make_rng(seed, 0x200000 + static_cast<std::uint64_t>(index));
    const Point& a = pool[static_cast<std::size_t>(rng() % pool.size())];
    const Point& b = pool[static_cast<std::size_t>(rng() % pool.size())];
    Probe<ViolationCertificate> probe;
    if ((a - b).norm() == 0.0) return probe;
    probe.tested = true;
    const Point m = 0.5 * (a + b);
    if (spec.contains(m)) return probe;
    const double margin = -signed_distance_value(spec, m);
    // Witness re-verified by three membership calls.
    if (!(margin > budget.tolerance) || !spec.contains(a) || !spec.contains(b) || spec.contains(m)) return probe;
    ViolationCertificate cert;
    cert.kind = ViolationCertificate::Kind::segment;
    cert.target = "segment-midpoint";
    cert.center = m;
    cert.direction = b - a;
    cert.radius = 0.5 * (b - a).norm();
    cert.margin = margin;
    cert.samples = 3;
    cert.recheck_samples = 3;
    cert.recheck_margin = margin;
    cert.candidate = index;
    cert.points = {a, b, m};
    probe.hit = std::move(cert);
    return probe;
  });
  verdict.budget.candidates = found.enumerated;
  verdict.budget.tested = found.tested;
  verdict.certificate = found.hit;
  return verdict;
}

namespace {

/// Probe offsets on a hyperplane: coefficient vectors in C^{n-1} with radii
/// log-uniform between 1e-4 and 2R, fixed per seed so scores are comparable.
std::vector<Point> probe_offsets(int count, Eigen::Index dims, double radius, std::uint64_t seed) {
  std::vector<Point> out;
  out.reserve(static_cast<std::size_t>(count));
  Rng rng = make_rng(seed, 0x4e0);
  for (int k = 0; k < count; ++k) {
    out.push_back(log_uniform(rng, 1e-4 * radius, 2.0 * radius) * random_unit(rng, dims));
  }
  return out;
}

int inside_hits(const DomainSpec& spec, const Point& a, const Point& w, const std::vector<Point>& offsets,
                double max_offset, int stop_after) {
  const ComplexMatrix t = hermitian_complement(w);
  int hits = 0;
  for (const Point& c : offsets) {
    if (c.norm() > max_offset) continue;
    const Point z = a + t * c;
    if (!in_window(spec, z)) continue;
    if (spec.contains(z) && ++hits >= stop_after) break;
  }
  return hits;
}

}  // namespace

HyperplaneResult hyperplane_search(const DomainSpec& spec, const Point& a, const HyperplaneBudget& budget,
                                   std::uint64_t seed) {
  const int n = spec.dimension();
  if (a.size() != n) throw DimensionError("point dimension does not match the domain");
  if (n < 2) throw PreconditionError("complex hyperplanes need dimension >= 2");
  if (spec.contains(a) && signed_distance_value(spec, a) > 1e-8 * std::max(1.0, a.norm())) {
    throw PreconditionError("point lies in the domain");
  }
  const double radius = spec.bounding_radius();
  const std::vector<Point> screen = probe_offsets(budget.screen_probes, n - 1, radius, seed);
  const std::vector<Point> full = probe_offsets(budget.probes, n - 1, radius, seed + 1);
  HyperplaneResult result;

  auto verify = [&](const Point& w) {
    result.probes += budget.probes;
    const int hits = inside_hits(spec, a, w, full, kInf, 1);
    if (hits == 0) {
      result.conormal = w;
      result.local_conormal = w;
      return true;
    }
    if (!result.local_conormal && inside_hits(spec, a, w, full, budget.local_radius, 1) == 0) {
      result.local_conormal = w;
    }
    return false;
  };

  // Complex tangent conormal of the nearest boundary point, moved to a.
  const SignedDistance sd = signed_boundary_distance(spec, a);
  if (sd.finite && sd.method != DistanceMethod::ray && sd.method != DistanceMethod::none) {
    const BoundaryPointData b = boundary_point_data(spec, sd.nearest);
    if (b.smooth()) {
      result.conormals_tried += 1;
      if (verify(b.normal)) return result;
    }
  }

  // Screening of random conormals in parallel, then descent from the best.
  const std::vector<int> scores = parallel_map(static_cast<std::size_t>(budget.conormals), [&](std::size_t k) {
    Rng rng = make_rng(seed, 0x300000 + k);
    return inside_hits(spec, a, random_unit(rng, n), screen, kInf, budget.screen_probes);
  });
  result.conormals_tried += budget.conormals;
  result.probes += static_cast<long>(budget.conormals) * budget.screen_probes;
  if (scores.empty()) return result;
  const auto best_it = std::min_element(scores.begin(), scores.end());
  const std::size_t best_index = static_cast<std::size_t>(best_it - scores.begin());
  Rng best_rng = make_rng(seed, 0x300000 + best_index);
  Point w = random_unit(best_rng, n);
  int best = *best_it;
  Rng rng = make_rng(seed, 0x3fffff);
  double step = 0.2;
  for (int k = 0; k < budget.descent_steps && best > 0; ++k) {
    Point trial = w + step * random_unit(rng, n);
    trial /= trial.norm();
    const int hits = inside_hits(spec, a, trial, screen, kInf, budget.screen_probes);
    result.probes += budget.screen_probes;
    if (hits < best) {
      best = hits;
      w = trial;
    } else {
      step = std::max(1e-4, 0.7 * step);
    }
  }
  result.best_hits = best;
  if (best == 0) verify(w);
  return result;
}

Verdict composed_convexity_check(const DomainSpec& spec, const CompositionDescriptor& f, const ConvexBudget& budget,
                                 std::uint64_t seed) {
  if (!f.convex()) throw PreconditionError("composition " + f.name() + " is not convex");
  const double band_high = budget.band_high_fraction * spec.bounding_radius();
  if (!(budget.band_low < band_high)) throw PreconditionError("near-boundary band is empty");
  const std::vector<BoundaryPointData> pool = sample_boundary(spec, budget.boundary_pool, seed);
  const std::string target = f.name() + "(s)";
  Verdict verdict;
  verdict.budget = describe_budget(target, budget, band_high, seed);
  const int m = spec.dimension();
  DistanceConfig fine;
  fine.rays = 32;

  const auto found = first_hit<ViolationCertificate>(budget.segments, [&](long index) {
    Probe<ViolationCertificate> probe;
    Rng rng = make_rng(seed, 0x400000 + static_cast<std::uint64_t>(index));
    const BoundaryPointData& b = pool[static_cast<std::size_t>(rng() % pool.size())];
    const double depth = log_uniform(rng, budget.depth_min, budget.depth_max);
    const auto& fractions = budget.length_fractions;
    const double length = fractions[static_cast<std::size_t>(index) % fractions.size()] * depth;
    const Point center = b.point - depth * b.normal;
    const Point u = random_unit(rng, m);
    const Point p = center - length * u, q = center + length * u;
    if (!in_window(spec, p) || !in_window(spec, q)) return probe;
    auto g = [&](const Point& z, const DistanceConfig& cfg) {
      const double s = signed_distance_value(spec, z, cfg);
      return std::pair{s, f(s)};
    };
    const auto [sp, gp] = g(p, {});
    const auto [sq, gq] = g(q, {});
    const auto [sc, gc] = g(center, {});
    auto in_band = [&](double s) { return s > budget.band_low && s < band_high; };
    if (!in_band(sp) || !in_band(sq) || !in_band(sc)) return probe;
    probe.tested = true;
    const double margin = gc - 0.5 * (gp + gq);
    if (!(margin > budget.tolerance)) return probe;
    const double again = g(center, fine).second - 0.5 * (g(p, fine).second + g(q, fine).second);
    if (!(again > budget.tolerance) || !(again >= 0.5 * margin)) return probe;
    ViolationCertificate cert;
    cert.kind = ViolationCertificate::Kind::segment;
    cert.target = target;
    cert.center = center;
    cert.direction = u;
    cert.radius = length;
    cert.margin = margin;
    cert.samples = 3;
    cert.recheck_samples = 3;
    cert.recheck_margin = again;
    cert.candidate = index;
    cert.points = {p, q, center};
    probe.hit = std::move(cert);
    return probe;
  });
  verdict.budget.candidates = found.enumerated;
  verdict.budget.tested = found.tested;
  verdict.certificate = found.hit;
  return verdict;
}

Verdict composed_psh_check(const DomainSpec& spec, const CompositionDescriptor& f, const PshBudget& budget,
                           std::uint64_t seed) {
  if (!f.increasing() || !f.convex()) throw PreconditionError("composition " + f.name() + " must be increasing and convex");
  PshTarget target = PshTarget::neglog_s();
  target.outer = f.function();
  target.outer_name = f.name();
  return psh_falsify(spec, target, budget, seed);
}

std::string to_string(RatioMode mode) {
  switch (mode) {
    case RatioMode::real_tangent:
      return "real";
    case RatioMode::complex_tangent:
      return "complex";
    case RatioMode::j_symmetrized:
      return "J";
  }
  return "";
}

RatioMode parse_ratio_mode(const std::string& text) {
  if (text == "real" || text == "real-tangent") return RatioMode::real_tangent;
  if (text == "complex" || text == "complex-tangent") return RatioMode::complex_tangent;
  if (text == "J" || text == "j" || text == "J-symmetrized") return RatioMode::j_symmetrized;
  throw PreconditionError("unknown ratio mode '" + text + "'");
}

RatioEstimate boundary_ratio(const DomainSpec& spec, const BoundaryPointData& a, RatioMode mode,
                             const std::vector<double>& radii, int directions, std::uint64_t seed) {
  if (!a.smooth()) throw PreconditionError("boundary point has no tangent frame");
  if (radii.size() < 2) throw PreconditionError("need at least two radii");
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (radii[k] < 1e-4 || (k > 0 && !(radii[k] < radii[k - 1]))) {
      throw PreconditionError("radii must decrease strictly and stay >= 1e-4");
    }
  }
  if (directions < 1) throw PreconditionError("need at least one direction");
  const ComplexMatrix& frame = mode == RatioMode::real_tangent ? a.real_tangent : a.complex_tangent;
  if (frame.cols() == 0) throw PreconditionError("tangent space is trivial");

  // Unit offsets: real combinations of the real tangent frame, or complex
  // combinations of the complex tangent frame.
  std::vector<Point> offsets;
  Rng rng = make_rng(seed, 0x7a7);
  for (int k = 0; k < directions; ++k) {
    Point c(frame.cols());
    for (Eigen::Index j = 0; j < c.size(); ++j) {
      const double re = std::normal_distribution<double>()(rng);
      const double im = mode == RatioMode::real_tangent ? 0.0 : std::normal_distribution<double>()(rng);
      c(j) = Complex(re, im);
    }
    Point v = frame * c;
    offsets.push_back(v / v.norm());
  }

  RatioEstimate out;
  out.radii = radii;
  out.minima = parallel_map(radii.size(), [&](std::size_t k) {
    const double r = radii[k];
    double best = kInf;
    for (const Point& v : offsets) {
      const Point z = a.point + r * v;
      double value = signed_distance_value(spec, z);
      if (mode == RatioMode::j_symmetrized) value += signed_distance_value(spec, a.point + Complex(0, r) * v);
      best = std::min(best, value / (r * r));
    }
    return best;
  });
  const std::size_t n = out.minima.size();
  out.estimate = std::min(out.minima[n - 1], out.minima[n - 2]);
  bool up = true, down = true;
  for (std::size_t k = 1; k < n; ++k) {
    up = up && out.minima[k] >= out.minima[k - 1];
    down = down && out.minima[k] <= out.minima[k - 1];
  }
  out.monotone = up || down;
  return out;
}

}  // namespace pcvx
