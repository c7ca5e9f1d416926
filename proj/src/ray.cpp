#include "pcvx/ray.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "pcvx/catalog.hpp"
#include "pcvx/random.hpp"

namespace pcvx {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_inputs(const DomainSpec& spec, const Point& z, const Point& x) {
  if (z.size() != spec.dimension() || x.size() != spec.dimension()) {
    throw DimensionError("point and direction must match the domain dimension");
  }
  if (!(x.norm() > 0.0)) throw PreconditionError("direction must be nonzero");
  if (!spec.contains(z)) throw PreconditionError("base point is not in the domain");
}

RealPoint rotated(const Point& x, double phi) { return to_real_point(unit_phase_vector(x, phi)); }

/// Exit time along y from z, looking no further than `cap`. Samples uniformly
/// in cap/16 steps when a cap from earlier angles is known, otherwise doubles
/// from a tiny step.
double exit_along(const DomainSpec& spec, const RealPoint& z, const RealPoint& y, double t_max, double cap,
                  double tolerance) {
  const double limit = std::min(cap, t_max);
  const bool capped = cap < t_max;
  const double first = capped ? limit / 16.0 : limit * 1e-6;
  const double step = capped ? limit / 16.0 : limit / 1024.0;
  const std::optional<double> t = first_change(spec, z, y, limit, first, step, tolerance);
  return t ? *t : kInf;
}

}  // namespace

Point unit_phase_vector(const Point& x, double phi) { return unit_phase(phi) * x; }

double ray_exit_time(const DomainSpec& spec, const Point& z, const Point& x, double phi, const RayConfig& cfg) {
  check_inputs(spec, z, x);
  const double t_max = spec.bounding_radius() / x.norm();
  return exit_along(spec, to_real_point(z), rotated(x, phi), t_max, kInf, cfg.tolerance);
}

DirectionalDistance directional_distance(const DomainSpec& spec, const Point& z, const Point& x,
                                         const RayConfig& cfg) {
  check_inputs(spec, z, x);
  if (cfg.angles < 8) throw PreconditionError("angle grid must have at least 8 points");
  const RealPoint zr = to_real_point(z);
  const double t_max = spec.bounding_radius() / x.norm();
  const int n = cfg.angles;
  const double h = kTwoPi / n;

  DirectionalDistance out;
  out.angles = n;
  if (spec.dimension() == 1 && !cfg.keep_profile) {
    // In C the indicatrix is the disk of radius s_D(z); a validated nearest
    // point gives d_D exactly, with no angular sampling.
    const SignedDistance sd = signed_boundary_distance(spec, z);
    if (sd.finite && sd.value > 0.0 && sd.method != DistanceMethod::ray) {
      out.finite = true;
      out.value = sd.value / x.norm();
      const double phi = std::arg((sd.nearest(0) - z(0)) / x(0));
      out.argmin_angle = std::fmod(phi + kTwoPi, kTwoPi);
      return out;
    }
  }
  std::vector<ExitSample> samples;
  double best = kInf;
  auto evaluate = [&](double phi) {
    const double cap = cfg.keep_profile || !std::isfinite(best) ? kInf : 1.05 * best;
    const double t = exit_along(spec, zr, rotated(x, phi), t_max, cap, cfg.tolerance);
    if (std::isfinite(t)) samples.push_back({phi, t});
    if (t < best) {
      best = t;
      out.argmin_angle = phi;
    }
    return t;
  };

  std::vector<double> grid(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) grid[static_cast<std::size_t>(k)] = evaluate(k * h);

  if (std::isfinite(best)) {
    // Local minima of the grid within 5% of the best get a golden-section
    // refinement over the neighboring cells.
    std::vector<int> starts;
    for (int k = 0; k < n; ++k) {
      const double t = grid[static_cast<std::size_t>(k)];
      const double left = grid[static_cast<std::size_t>((k + n - 1) % n)];
      const double right = grid[static_cast<std::size_t>((k + 1) % n)];
      if (std::isfinite(t) && t <= left && t <= right && t <= 1.05 * best) starts.push_back(k);
    }
    std::sort(starts.begin(), starts.end(), [&](int a, int b) {
      return std::make_pair(grid[static_cast<std::size_t>(a)], a) < std::make_pair(grid[static_cast<std::size_t>(b)], b);
    });
    if (starts.size() > 4) starts.resize(4);
    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int k : starts) {
      // The profile may jump where the disk starts to touch another part of
      // the boundary; the infimum is then the limit at the jump. Bisect
      // towards it from the low side on both neighboring cells.
      const double tk = grid[static_cast<std::size_t>(k)];
      for (int side : {-1, 1}) {
        const double neighbor = grid[static_cast<std::size_t>((k + side + n) % n)];
        const double threshold = std::isfinite(neighbor) ? 0.5 * (tk + neighbor) : 1.02 * tk;
        double low = k * h;
        double high = (k + side) * h;
        while (std::abs(high - low) > 1e-3 * cfg.angle_tolerance) {
          const double mid = 0.5 * (low + high);
          if (evaluate(mid) <= threshold) {
            low = mid;
          } else {
            high = mid;
          }
        }
      }
      double lo = (k - 1) * h;
      double hi = (k + 1) * h;
      double a = hi - ratio * (hi - lo);
      double b = lo + ratio * (hi - lo);
      double fa = evaluate(a);
      double fb = evaluate(b);
      while (hi - lo > cfg.angle_tolerance) {
        if (fa <= fb) {
          hi = b;
          b = a;
          fb = fa;
          a = hi - ratio * (hi - lo);
          fa = evaluate(a);
        } else {
          lo = a;
          a = b;
          fa = fb;
          b = lo + ratio * (hi - lo);
          fb = evaluate(b);
        }
      }
    }
  }

  // d_D(z, X) is also the boundary distance of the complex line slice
  // {lambda : z + lambda X in D} at lambda = 0; its foot points catch exits
  // that only graze the boundary, which angular sampling misses.
  const double scale = x.norm();
  ComplexMatrix frame(x.size(), 1);
  frame.col(0) = x / scale;
  const DomainSpec line = spec.restricted({z, frame});
  const SignedDistance sd = signed_boundary_distance(line, Point::Zero(1));
  if (sd.finite && sd.value > 0.0 && sd.value / scale < best) {
    best = sd.value / scale;
    out.argmin_angle = std::arg(sd.nearest(0));
    samples.push_back({out.argmin_angle, best});
  }

  out.finite = std::isfinite(best);
  out.value = best;
  out.argmin_angle = std::fmod(std::fmod(out.argmin_angle, kTwoPi) + kTwoPi, kTwoPi);
  if (cfg.keep_profile) {
    for (ExitSample& s : samples) s.angle = std::fmod(std::fmod(s.angle, kTwoPi) + kTwoPi, kTwoPi);
    std::sort(samples.begin(), samples.end(),
              [](const ExitSample& a, const ExitSample& b) { return a.angle < b.angle; });
    out.profile = std::move(samples);
  }
  return out;
}

double minkowski(const DomainSpec& spec, const Point& z, const Point& x, const RayConfig& cfg) {
  const DirectionalDistance d = directional_distance(spec, z, x, cfg);
  return d.finite ? 1.0 / d.value : 0.0;
}

double lemma5_s_min(double delta, double c) { return 3.0 / std::sqrt(1.0 - c) * std::pow(delta, 1.5); }

Lemma5Result lemma5_integral(double delta, double c, double s, double eps, int grid, const RayConfig& cfg) {
  if (!(c < 1.0)) throw PreconditionError("lemma5 needs c < 1");
  if (!(delta > 0.0) || !(delta <= eps / 4.0)) throw PreconditionError("lemma5 needs 0 < delta <= eps/4");
  if (!(s >= 0.0) || !(s <= delta)) throw PreconditionError("lemma5 needs 0 <= s <= delta");
  if (grid < 64) throw PreconditionError("lemma5 needs grid >= 64");
  const DomainSpec e = catalog_domain("lemma5-E", {{"c", c}, {"eps", eps}});
  Point z = Point::Zero(2);
  z(0) = -delta;

  Lemma5Result out;
  out.s_in_lemma_range = s >= lemma5_s_min(delta, c) * (1.0 - 1e-12) && s <= delta;
  double sum = 0.0;
  for (int k = 0; k < grid; ++k) {
    const double theta = kTwoPi * k / grid;
    Point x(2);
    x(0) = delta;
    x(1) = s * unit_phase(theta);
    const DirectionalDistance d = directional_distance(e, z, x, cfg);
    out.theta.push_back(theta);
    out.exit_time.push_back(d.value);
    sum += d.finite ? 1.0 / d.value : 0.0;
  }
  out.value = sum / grid;
  return out;
}

}  // namespace pcvx
