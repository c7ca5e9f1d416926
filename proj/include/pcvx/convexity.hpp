#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pcvx/domain.hpp"
#include "pcvx/psh.hpp"

namespace pcvx {

/// One-variable function f with monotonicity and convexity tags. Tags come
/// from sampled first and second differences on (0, R]; built-ins also check
/// that the sampled tags agree with their known shape.
class CompositionDescriptor {
 public:
  enum class Monotonicity { increasing, decreasing, constant, none };
  enum class Convexity { convex, concave, affine, none };

  /// neg-log, reciprocal, exp-neg, exp, identity, affine (a*t + b), or
  /// custom (formula in the variable t, e.g. "t^2 - 3*t").
  static CompositionDescriptor named(const std::string& name, double range = 10.0, double a = 1.0, double b = 0.0);
  static CompositionDescriptor custom(const std::string& formula, double range = 10.0);

  const std::string& name() const { return name_; }
  Monotonicity monotonicity() const { return monotonicity_; }
  Convexity convexity() const { return convexity_; }
  double operator()(double t) const { return f_(t); }
  const std::function<double(double)>& function() const { return f_; }

  bool increasing() const { return monotonicity_ == Monotonicity::increasing; }
  bool decreasing() const { return monotonicity_ == Monotonicity::decreasing; }
  bool convex() const { return convexity_ == Convexity::convex || convexity_ == Convexity::affine; }

 private:
  CompositionDescriptor(std::string name, std::function<double(double)> f, double range);

  std::string name_;
  std::function<double(double)> f_;
  Monotonicity monotonicity_ = Monotonicity::none;
  Convexity convexity_ = Convexity::none;
};

std::string to_string(CompositionDescriptor::Monotonicity m);
std::string to_string(CompositionDescriptor::Convexity c);

struct ConvexBudget {
  long segments = 10000;
  int interior_pool = 2000;
  double tolerance = 1e-5;
  // Near-boundary band for composed tests: band_low < s_D < band_high_fraction * R.
  double band_low = 1e-4;
  double band_high_fraction = 0.2;
  double depth_min = 1e-3;
  double depth_max = 0.25;
  std::vector<double> length_fractions{0.25, 0.5, 0.75, 1.0};
  int boundary_pool = 256;
};

/// Midpoint test on pairs of interior samples (D viewed in R^{2n}). A
/// certificate holds a, b, m in `points`; margin = -s_D(m).
Verdict segment_convexity_falsify(const DomainSpec& spec, const ConvexBudget& budget, std::uint64_t seed);

struct HyperplaneBudget {
  int conormals = 1000;
  int descent_steps = 50;
  int screen_probes = 256;
  int probes = 10000;
  double local_radius = 0.1;
};

struct HyperplaneResult {
  std::optional<Point> conormal;        // avoids every probe in the window
  std::optional<Point> local_conormal;  // avoids every probe within local_radius of a
  int conormals_tried = 0;
  long probes = 0;
  int best_hits = 0;  // inside probes of the best screened conormal
};

/// Looks for a complex hyperplane {z : <z - a, w> = 0} through a missing D.
/// Tries the conormal of the nearest boundary point first, then
/// random conormals with local descent on the count of inside probes.
HyperplaneResult hyperplane_search(const DomainSpec& spec, const Point& a, const HyperplaneBudget& budget,
                                   std::uint64_t seed);

/// Midpoint convexity of f(s_D) on short segments in the near-boundary band.
/// The monotonicity tag is reported, not enforced (increasing f is used to
/// exhibit failures). Requires a convex f.
Verdict composed_convexity_check(const DomainSpec& spec, const CompositionDescriptor& f, const ConvexBudget& budget,
                                 std::uint64_t seed);

/// Circle-mean falsifier on f(-log s_D). Requires f increasing and convex.
Verdict composed_psh_check(const DomainSpec& spec, const CompositionDescriptor& f, const PshBudget& budget,
                           std::uint64_t seed);

enum class RatioMode { real_tangent, complex_tangent, j_symmetrized };

std::string to_string(RatioMode mode);
RatioMode parse_ratio_mode(const std::string& text);

struct RatioEstimate {
  double estimate = 0.0;         // min over the two smallest radii
  std::vector<double> radii;
  std::vector<double> minima;    // per radius
  bool monotone = false;         // minima monotone in r
};

/// Sampled liminf of s_D(x)/|x-a|^2 over tangent offsets (real or complex
/// tangent space), or of (s_D(z) + s_D(a + i(z-a)))/|z-a|^2 in J mode.
RatioEstimate boundary_ratio(const DomainSpec& spec, const BoundaryPointData& a, RatioMode mode,
                             const std::vector<double>& radii = {0.1, 0.03, 0.01, 0.003, 0.001}, int directions = 64,
                             std::uint64_t seed = 1);

}  // namespace pcvx
