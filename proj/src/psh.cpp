#include "pcvx/psh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "pcvx/parallel.hpp"
#include "pcvx/random.hpp"

namespace pcvx {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Value {
  double u;
  bool reliable;
};

/// A target function together with the data it needs.
struct TargetFunction {
  const DomainSpec& spec;
  PshTarget::Kind kind;
  Point fixed;  // X for neglog_d, z for minkowski_at
  RayConfig ray;
  const std::function<double(double)>* outer = nullptr;

  Value operator()(const Point& p) const {
    Value v = base(p);
    if (outer != nullptr && *outer) {
      v.u = (*outer)(v.u);
      if (std::isnan(v.u)) v.u = kInf;
    }
    return v;
  }

  Value base(const Point& p) const {
    switch (kind) {
      case PshTarget::Kind::neglog_s: {
        if (p.norm() > spec.bounding_radius()) return {kInf, true};
        const SignedDistance sd = signed_boundary_distance(spec, p);
        if (!sd.finite) return {-std::log(spec.bounding_radius()), false};
        if (sd.value <= 0.0) return {kInf, true};
        // Ray-only values are upper bounds on s, so -log s would be biased low.
        return {-std::log(sd.value), sd.method != DistanceMethod::ray};
      }
      case PshTarget::Kind::neglog_d: {
        if (p.norm() > spec.bounding_radius() || !spec.contains(p)) return {kInf, true};
        const DirectionalDistance d = directional_distance(spec, p, fixed, ray);
        if (!d.finite) return {-kInf, false};
        return {-std::log(d.value), true};
      }
      case PshTarget::Kind::minkowski_at:
        return {minkowski(spec, fixed, p, ray), true};
      case PshTarget::Kind::hartogs_gauge: {
        const Eigen::Index n = spec.dimension();
        const Point z = p.head(n), w = p.tail(n);
        if (z.norm() > spec.bounding_radius() || !spec.contains(z)) return {kInf, true};
        if (w.norm() == 0.0) return {-kInf, false};
        const DirectionalDistance d = directional_distance(spec, z, w, ray);
        if (!d.finite) return {-kInf, false};
        return {-std::log(d.value), true};
      }
    }
    return {kInf, false};
  }
};

struct CircleResult {
  double margin;
  bool reliable;
  int non_finite;
};

CircleResult circle_margin(const TargetFunction& u, const Point& center, const Point& v, double r, int grid) {
  const Value c = u(center);
  if (!std::isfinite(c.u)) return {-kInf, false, grid};
  double sum = 0.0;
  int bad = 0;
  bool reliable = c.reliable;
  for (int k = 0; k < grid; ++k) {
    const Value w = u(center + (r * unit_phase(kTwoPi * k / grid)) * v);
    if (!std::isfinite(w.u)) {
      ++bad;
      continue;
    }
    reliable = reliable && w.reliable;
    sum += w.u;
  }
  if (bad > 0) return {-kInf, reliable, bad};
  return {c.u - sum / grid, reliable, 0};
}

std::string target_name(PshTarget::Kind kind) {
  switch (kind) {
    case PshTarget::Kind::neglog_s:
      return "neglog-s";
    case PshTarget::Kind::neglog_d:
      return "neglog-d";
    case PshTarget::Kind::minkowski_at:
      return "minkowski-at";
    case PshTarget::Kind::hartogs_gauge:
      return "hartogs-gauge";
  }
  return "";
}

Point unit_or_random(Point v, Rng& rng) {
  if (v.norm() > 1e-12) return v / v.norm();
  return random_unit(rng, v.size());
}

struct Candidate {
  Point center;
  Point direction;
  Point fixed;
  double radius = 0.0;
  double fraction = 1.0;
  bool usable = false;
};

class CircleSearch {
 public:
  CircleSearch(const DomainSpec& spec, const PshTarget& target, const PshBudget& budget, std::uint64_t seed)
      : spec_(spec), target_(target), budget_(budget), seed_(seed) {
    if (budget.circles < 1 || budget.grid < 8 || budget.radius_fractions.empty()) {
      throw PreconditionError("budget needs circles >= 1, grid >= 8 and at least one radius fraction");
    }
    band_high_ = budget.band_high_fraction * spec.bounding_radius();
    if (target.kind == PshTarget::Kind::minkowski_at) {
      if (target.point.size() != spec.dimension()) throw DimensionError("indicatrix base point dimension mismatch");
      if (!spec.contains(target.point)) throw PreconditionError("indicatrix base point is not in the domain");
      const SignedDistance sd = signed_boundary_distance(spec, target.point);
      nearest_direction_ = sd.finite ? Point(sd.nearest - target.point) : Point(Point::Zero(spec.dimension()));
    } else {
      pool_ = budget.focus ? sample_boundary_near(spec, *budget.focus, budget.focus_radius, budget.boundary_pool, seed)
                           : sample_boundary(spec, budget.boundary_pool, seed);
      if (target.direction && target.direction->size() != spec.dimension()) {
        throw DimensionError("target direction dimension mismatch");
      }
    }
  }

  Verdict run() {
    Verdict verdict;
    verdict.budget.target = to_string(target_);
    verdict.budget.grid = budget_.grid;
    verdict.budget.radius_fractions = budget_.radius_fractions;
    verdict.budget.band_low = budget_.band_low;
    verdict.budget.band_high = band_high_;
    verdict.budget.seed = seed_;
    const SearchOutcome<ViolationCertificate> found =
        first_hit<ViolationCertificate>(budget_.circles, [&](long index) { return evaluate(index); });
    verdict.budget.candidates = found.enumerated;
    verdict.budget.tested = found.tested;
    verdict.certificate = found.hit;
    return verdict;
  }

 private:
  Candidate make(long index) const {
    Rng rng = make_rng(seed_, 0x100000 + static_cast<std::uint64_t>(index));
    const int m = spec_.dimension();
    const auto& fractions = budget_.radius_fractions;
    const double fraction = fractions[static_cast<std::size_t>(index / 2) % fractions.size()];
    Candidate c;
    c.fraction = fraction;
    if (target_.kind == PshTarget::Kind::minkowski_at) {
      Point x;
      if (index % 4 == 0 && nearest_direction_.norm() > 0) {
        x = nearest_direction_;
      } else if (index % 4 == 1 && nearest_direction_.norm() > 0) {
        x = nearest_direction_ / nearest_direction_.norm() + 0.2 * gaussian_point(rng, m);
      } else {
        x = gaussian_point(rng, m);
      }
      const double h = minkowski(spec_, target_.point, x, budget_.ray);
      if (!(h > 0.0)) return c;
      c.center = x / h;
      c.fixed = target_.point;
      Point v = gaussian_point(rng, m);
      if (index % 2 == 0 && m > 1) v = hermitian_complement(c.center) * gaussian_point(rng, m - 1);
      c.direction = unit_or_random(v, rng);
      c.radius = fraction * c.center.norm();
      c.usable = true;
      return c;
    }
    const BoundaryPointData& b = pool_[static_cast<std::size_t>(rng() % pool_.size())];
    const double depth = log_uniform(rng, budget_.depth_min, budget_.depth_max);
    c.center = b.point - depth * b.normal;
    Point v = gaussian_point(rng, m);
    if (index % 2 == 0 && b.complex_tangent.cols() > 0) {
      v = b.complex_tangent * gaussian_point(rng, b.complex_tangent.cols());
      v /= v.norm();
      v += 0.1 * gaussian_point(rng, m) / std::sqrt(2.0 * m);
    }
    c.direction = unit_or_random(v, rng);
    c.fixed = target_.direction ? *target_.direction : b.normal;
    c.radius = fraction * depth;
    if (target_.kind == PshTarget::Kind::hartogs_gauge) {
      // Center (z, w) with |w| = 1; even candidates move z only, odd ones both.
      Point w = b.normal;
      if (index % 3 == 1 && b.complex_tangent.cols() > 0) w = b.complex_tangent.col(0);
      if (index % 3 == 2) w = random_unit(rng, m);
      Point center(2 * m), direction(2 * m);
      center << c.center, w;
      if (index % 2 == 0) {
        direction << c.direction, Point::Zero(m);
      } else {
        direction << gaussian_point(rng, m), gaussian_point(rng, m);
        direction /= direction.norm();
      }
      c.center = center;
      c.direction = direction;
    }
    c.usable = c.center.head(m).norm() < spec_.bounding_radius();
    return c;
  }

  Probe<ViolationCertificate> evaluate(long index) const {
    Candidate c = make(index);
    if (!c.usable) return {};
    if (target_.kind != PshTarget::Kind::minkowski_at) {
      const int m = spec_.dimension();
      const SignedDistance sd = signed_boundary_distance(spec_, c.center.head(m));
      if (!(sd.value > budget_.band_low && sd.value < band_high_)) return {};
      // The sub-mean-value test needs the closed disc in D, not just the
      // circle: keep it inside the ball of radius s_D around the center.
      const double reach = c.direction.head(m).norm();
      if (reach * c.radius >= sd.value) c.radius = c.fraction * sd.value / reach * (1.0 - 1e-3);
      if (target_.kind == PshTarget::Kind::hartogs_gauge) {
        const double w_reach = c.direction.tail(m).norm();
        const double w_norm = c.center.tail(m).norm();
        if (w_reach * c.radius >= w_norm) c.radius = c.fraction * w_norm / w_reach * (1.0 - 1e-3);
      }
    }
    const TargetFunction u{spec_, target_.kind, c.fixed, budget_.ray, &target_.outer};
    const CircleResult first = circle_margin(u, c.center, c.direction, c.radius, budget_.grid);
    if (first.non_finite >= budget_.grid / 8) return {};
    if (!first.reliable || !(first.margin > budget_.tolerance)) return {true, std::nullopt};
    const int fine = 4 * budget_.grid;
    const CircleResult again = circle_margin(u, c.center, c.direction, c.radius, fine);
    if (!again.reliable || !(again.margin > budget_.tolerance) || !(again.margin >= 0.5 * first.margin)) {
      return {true, std::nullopt};
    }
    ViolationCertificate cert;
    cert.kind = ViolationCertificate::Kind::circle_mean;
    cert.target = to_string(target_);
    cert.center = c.center;
    cert.direction = c.direction;
    cert.radius = c.radius;
    cert.margin = first.margin;
    cert.samples = budget_.grid;
    cert.recheck_samples = fine;
    cert.recheck_margin = again.margin;
    cert.candidate = index;
    if (target_.kind == PshTarget::Kind::neglog_d || target_.kind == PshTarget::Kind::minkowski_at) {
      cert.points.push_back(c.fixed);
    }
    return {true, cert};
  }

  const DomainSpec& spec_;
  const PshTarget& target_;
  const PshBudget& budget_;
  std::uint64_t seed_;
  double band_high_ = 0.0;
  std::vector<BoundaryPointData> pool_;
  Point nearest_direction_;
};

}  // namespace

std::string to_string(ViolationCertificate::Kind kind) {
  switch (kind) {
    case ViolationCertificate::Kind::circle_mean:
      return "circle-mean";
    case ViolationCertificate::Kind::levi:
      return "levi";
    case ViolationCertificate::Kind::disk_probe:
      return "disk-probe";
    case ViolationCertificate::Kind::segment:
      return "segment";
    case ViolationCertificate::Kind::hyperplane_sweep:
      return "hyperplane-sweep";
  }
  return "";
}

std::string to_string(const PshTarget& target) {
  if (!target.outer) return target_name(target.kind);
  return target.outer_name + "(" + target_name(target.kind) + ")";
}

double circle_mean_margin(const std::function<double(const Point&)>& u, const Point& center, const Point& v, double r,
                          int grid) {
  if (!(r > 0.0)) throw PreconditionError("circle radius must be positive");
  if (grid < 4) throw PreconditionError("circle grid must have at least 4 points");
  if (center.size() != v.size()) throw DimensionError("circle center and direction dimensions differ");
  const double c = u(center);
  if (!std::isfinite(c)) throw PreconditionError("function is not finite at the circle center");
  double sum = 0.0;
  int bad = 0;
  for (int k = 0; k < grid; ++k) {
    const double w = u(center + (r * unit_phase(kTwoPi * k / grid)) * v);
    if (!std::isfinite(w)) {
      ++bad;
      continue;
    }
    sum += w;
  }
  if (bad >= std::max(1, grid / 8)) throw PreconditionError("circle grazes the boundary; shrink the radius");
  if (bad > 0) return -kInf;
  return c - sum / grid;
}

Verdict psh_falsify(const DomainSpec& spec, const PshTarget& target, const PshBudget& budget, std::uint64_t seed) {
  return CircleSearch(spec, target, budget, seed).run();
}

Verdict indicatrix_psc_check(const DomainSpec& spec, const Point& z, const PshBudget& budget, std::uint64_t seed) {
  return psh_falsify(spec, PshTarget::minkowski_at(z), budget, seed);
}

double recheck_circle(const DomainSpec& spec, const ViolationCertificate& cert, int grid, const RayConfig& ray) {
  PshTarget::Kind kind = PshTarget::Kind::neglog_s;
  if (cert.target != "neglog-s" && cert.target != "neglog-d" && cert.target != "minkowski-at" &&
      cert.target != "hartogs-gauge") {
    throw PreconditionError("cannot recheck composed target " + cert.target);
  }
  if (cert.target == "neglog-d") kind = PshTarget::Kind::neglog_d;
  if (cert.target == "minkowski-at") kind = PshTarget::Kind::minkowski_at;
  if (cert.target == "hartogs-gauge") kind = PshTarget::Kind::hartogs_gauge;
  const TargetFunction u{spec, kind, cert.points.empty() ? Point() : cert.points.front(), ray};
  return circle_margin(u, cert.center, cert.direction, cert.radius, grid).margin;
}

double levi_min_eig(const ScalarField& f, const Point& a) {
  if (a.size() != f.dimension()) throw DimensionError("point dimension does not match the field");
  if (f.has_kinks() && f.kink_gap(real_view(a)) < 1e-6) throw PreconditionError("field is not smooth at the point");
  const Derivatives d = numeric_derivatives(f, a, 1e-4);
  const Eigen::Index n = a.size();
  Point dbar(n);  // conj(dF/dz_j) = (F_x + i F_y) / 2
  ComplexMatrix levi(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    dbar(j) = 0.5 * Complex(d.gradient(2 * j), d.gradient(2 * j + 1));
    for (Eigen::Index k = 0; k < n; ++k) {
      const double xx = d.hessian(2 * j, 2 * k);
      const double yy = d.hessian(2 * j + 1, 2 * k + 1);
      const double xy = d.hessian(2 * j, 2 * k + 1);
      const double yx = d.hessian(2 * j + 1, 2 * k);
      levi(j, k) = 0.25 * Complex(xx + yy, xy - yx);
    }
  }
  if (!(dbar.norm() > 1e-12)) throw PreconditionError("gradient vanishes at the point");
  if (n == 1) throw PreconditionError("complex tangent space is trivial in dimension 1");
  const ComplexMatrix t = hermitian_complement(dbar);
  const ComplexMatrix restricted = t.adjoint() * levi * t;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(0.5 * (restricted + restricted.adjoint()));
  return eig.eigenvalues().minCoeff();
}

double disk_probe(const DomainSpec& spec, const QuadraticDisk& p, int grid) {
  if (grid < 8) throw PreconditionError("disk grid must have at least 8 angles");
  if (p.c0.size() != spec.dimension() || p.c1.size() != spec.dimension() || p.c2.size() != spec.dimension()) {
    throw DimensionError("disk coefficients do not match the domain dimension");
  }
  const int rings = std::max(2, grid / 4);
  const Point center = p(0.0);
  if (!spec.contains(center)) throw PreconditionError("disk center is not in the domain");
  const double s0 = signed_distance_value(spec, center);
  double margin = kInf;
  for (int ring = 1; ring <= rings; ++ring) {
    const double rho = static_cast<double>(ring) / rings;
    for (int k = 0; k < grid; ++k) {
      const Point q = p(rho * unit_phase(kTwoPi * k / grid));
      if (q.norm() > spec.bounding_radius() || !spec.contains(q)) {
        throw PreconditionError("sampled disk leaves the domain");
      }
      margin = std::min(margin, signed_distance_value(spec, q) - s0);
    }
  }
  return margin;
}

}  // namespace pcvx
