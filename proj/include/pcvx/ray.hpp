#pragma once

#include <vector>

#include "pcvx/domain.hpp"

namespace pcvx {

struct RayConfig {
  double tolerance = 1e-9;         // relative bisection tolerance on exit times
  int angles = 256;                // initial angle grid for directional distances
  double angle_tolerance = 1e-6;   // refinement tolerance around the arg-min angle
  bool keep_profile = false;
};

/// First t > 0 with z + t e^{i phi} X outside D; +infinity if none with t |X| <= R.
double ray_exit_time(const DomainSpec& spec, const Point& z, const Point& x, double phi, const RayConfig& cfg = {});

/// e^{i phi} X.
Point unit_phase_vector(const Point& x, double phi);

struct ExitSample {
  double angle;
  double time;
};

/// d_D(z, X): the largest r with {z + lambda X : |lambda| < r} inside D.
struct DirectionalDistance {
  double value = 0.0;  // +infinity when no angle exits within the window
  bool finite = true;
  int angles = 0;
  double argmin_angle = 0.0;
  std::vector<ExitSample> profile;  // grid and refinement evaluations, sorted by angle
};

DirectionalDistance directional_distance(const DomainSpec& spec, const Point& z, const Point& x,
                                         const RayConfig& cfg = {});

/// Gauge of the balanced indicatrix: 1 / d_D(z, X), 0 when d is infinite.
double minkowski(const DomainSpec& spec, const Point& z, const Point& x, const RayConfig& cfg = {});

struct Lemma5Result {
  double value = 0.0;
  bool s_in_lemma_range = false;  // 3 (1-c)^{-1/2} delta^{3/2} <= s <= delta
  std::vector<double> theta;
  std::vector<double> exit_time;  // r_delta(X_{s e^{i theta}})
};

/// (1/2pi) \int_0^{2pi} dtheta / r_delta(X_{s e^{i theta}}) on E(c, eps) at
/// z_delta = (-delta, 0), X = (delta, s e^{i theta}), trapezoid rule.
Lemma5Result lemma5_integral(double delta, double c, double s, double eps, int grid, const RayConfig& cfg = {});

/// Lower end of the s range in the lemma.
double lemma5_s_min(double delta, double c);

}  // namespace pcvx
