#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pcvx/domain.hpp"
#include "pcvx/ray.hpp"

namespace pcvx {

/// Witness that a defining inequality fails. `margin` is the amount of the
/// failure; `recheck_margin` the same quantity at 4x angular resolution.
struct ViolationCertificate {
  enum class Kind { circle_mean, levi, disk_probe, segment, hyperplane_sweep };

  Kind kind = Kind::circle_mean;
  std::string target;
  Point center;
  Point direction;
  double radius = 0.0;
  double margin = 0.0;
  int samples = 0;
  int recheck_samples = 0;
  double recheck_margin = 0.0;
  long candidate = -1;         // index in the deterministic enumeration
  std::vector<Point> points;   // extra witness data (segment endpoints, ...)
};

std::string to_string(ViolationCertificate::Kind kind);

/// Exploration budget echoed by every verdict.
struct BudgetDescriptor {
  std::string target;
  long candidates = 0;  // enumerated
  long tested = 0;      // actually evaluated (inside the band, finite)
  int grid = 0;
  std::vector<double> radius_fractions;
  double band_low = 0.0;
  double band_high = 0.0;
  std::uint64_t seed = 0;
};

/// Falsified(certificate) or PassedAtResolution(budget). Never a proof.
struct Verdict {
  std::optional<ViolationCertificate> certificate;
  BudgetDescriptor budget;

  bool falsified() const { return certificate.has_value(); }
};

/// u(center) - (1/2pi) \int u(center + r e^{i theta} V) dtheta by the
/// trapezoid rule. Non-finite circle values count as +infinity (margin
/// -infinity); throws PreconditionError when at least grid/8 are non-finite.
double circle_mean_margin(const std::function<double(const Point&)>& u, const Point& center, const Point& v, double r,
                          int grid);

struct PshTarget {
  // hartogs_gauge: -log d_D(z, w) on C^{2n}, whose plurisubharmonicity is
  // pseudoconvexity of the Hartogs-like domain {(z, w) : w in I_{D,z}}.
  enum class Kind { neglog_s, neglog_d, minkowski_at, hartogs_gauge };

  Kind kind = Kind::neglog_s;
  Point point;                     // z for minkowski_at
  std::optional<Point> direction;  // fixed X for neglog_d; default: nearest-boundary direction per circle
  std::function<double(double)> outer;  // optional f, the target becomes f(u)
  std::string outer_name;

  static PshTarget neglog_s() { return {}; }
  static PshTarget neglog_d(std::optional<Point> x = std::nullopt) { return {Kind::neglog_d, {}, std::move(x), {}, {}}; }
  static PshTarget minkowski_at(Point z) { return {Kind::minkowski_at, std::move(z), std::nullopt, {}, {}}; }
  static PshTarget hartogs_gauge() { return {Kind::hartogs_gauge, {}, std::nullopt, {}, {}}; }
};

std::string to_string(const PshTarget& target);

struct PshBudget {
  long circles = 2000;
  std::vector<double> radius_fractions{0.25, 0.5, 0.75, 1.0};
  double band_low = 1e-4;             // centers need band_low < s_D
  double band_high_fraction = 0.2;    // ... and s_D < band_high_fraction * R
  double depth_min = 1e-3;            // centers sit at depth log-uniform in [depth_min, depth_max]
  double depth_max = 0.25;
  int grid = 32;
  double tolerance = 1e-5;
  std::optional<Point> focus;         // restrict boundary samples to a ball
  double focus_radius = 0.5;
  int boundary_pool = 256;
  RayConfig ray{1e-9, 64, 1e-6, false};
};

/// Seeded search for a circle on which the target fails the sub-mean-value
/// inequality. Returns the lowest-index certificate that survives the 4x
/// recheck (margin > tolerance and >= half the original), else Passed.
Verdict psh_falsify(const DomainSpec& spec, const PshTarget& target, const PshBudget& budget, std::uint64_t seed);

/// Re-evaluates a circle certificate at the given grid. Composed targets
/// (f applied on top) are not reconstructible from the certificate alone.
double recheck_circle(const DomainSpec& spec, const ViolationCertificate& cert, int grid, const RayConfig& ray = {});

/// Minimal eigenvalue of the complex Hessian of F at a, restricted to the
/// complex tangent space {X : sum dF/dz_j X_j = 0}.
double levi_min_eig(const ScalarField& f, const Point& a);

/// p(zeta) = c0 + c1 zeta + c2 zeta^2.
struct QuadraticDisk {
  Point c0, c1, c2;
  Point operator()(Complex zeta) const { return c0 + zeta * c1 + (zeta * zeta) * c2; }
};

/// min over sampled 0 < |zeta| <= 1 of s_D(p(zeta)) - s_D(p(0)); `grid`
/// angles on grid/4 rings. Throws PreconditionError if the sampled closed
/// disk leaves D.
double disk_probe(const DomainSpec& spec, const QuadraticDisk& p, int grid = 64);

/// psh_falsify on the gauge h = 1/d_D(z, .) of the balanced indicatrix.
Verdict indicatrix_psc_check(const DomainSpec& spec, const Point& z, const PshBudget& budget, std::uint64_t seed);

}  // namespace pcvx
