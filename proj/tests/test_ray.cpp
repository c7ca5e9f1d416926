#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "pcvx/catalog.hpp"
#include "pcvx/random.hpp"
#include "pcvx/ray.hpp"

using namespace pcvx;

namespace {

constexpr double kPi = std::numbers::pi;

Point pt(std::initializer_list<Complex> values) {
  Point z(static_cast<Eigen::Index>(values.size()));
  Eigen::Index k = 0;
  for (const Complex& v : values) z(k++) = v;
  return z;
}

/// Smallest positive root of a t^2 + b t + c = 0 with c < 0, or infinity.
double first_root(double a, double b, double c) {
  if (std::abs(a) < 1e-300) return b > 0 ? -c / b : INFINITY;
  const double disc = b * b - 4 * a * c;
  if (disc < 0) return INFINITY;
  const double r1 = (-b + std::sqrt(disc)) / (2 * a);
  const double r2 = (-b - std::sqrt(disc)) / (2 * a);
  double best = INFINITY;
  for (double r : {r1, r2}) {
    if (r > 0) best = std::min(best, r);
  }
  return best;
}

/// Closed-form exit time for E(c, eps) from z = (-delta, 0) along
/// lambda = t e^{i phi} times X = (delta, w).
double lemma5_exit(double delta, double c, double eps, Complex w, double phi) {
  const Complex e = std::polar(1.0, phi);
  const Complex a1 = delta * e;  // z_1 = -delta + t a1
  const Complex a2 = w * e;      // z_2 = t a2
  // Re z1 + (Im z1)^2 - (Re z2)^2 + c (Im z2)^2 < 0
  const double quad = a1.imag() * a1.imag() - a2.real() * a2.real() + c * a2.imag() * a2.imag();
  double t = first_root(quad, a1.real(), -delta);
  // |z1| < eps: |a1|^2 t^2 - 2 delta Re(a1) t + delta^2 - eps^2 = 0
  t = std::min(t, first_root(std::norm(a1), -2 * delta * a1.real(), delta * delta - eps * eps));
  if (std::abs(a2) > 0) t = std::min(t, eps / std::abs(a2));
  return t;
}

double lemma5_oracle(double delta, double c, double eps, Complex w) {
  // Dense angle scan, then ternary refinement of the best cell.
  const int n = 20000;
  double best = INFINITY;
  int arg = 0;
  for (int k = 0; k < n; ++k) {
    const double t = lemma5_exit(delta, c, eps, w, 2 * kPi * k / n);
    if (t < best) {
      best = t;
      arg = k;
    }
  }
  double lo = 2 * kPi * (arg - 1) / n, hi = 2 * kPi * (arg + 1) / n;
  for (int it = 0; it < 200; ++it) {
    const double a = lo + (hi - lo) / 3, b = hi - (hi - lo) / 3;
    if (lemma5_exit(delta, c, eps, w, a) < lemma5_exit(delta, c, eps, w, b)) {
      hi = b;
    } else {
      lo = a;
    }
  }
  return std::min(best, lemma5_exit(delta, c, eps, w, 0.5 * (lo + hi)));
}

}  // namespace

TEST_CASE("ray exit times") {
  const DomainSpec ball = catalog_domain("ball", {{"n", 2}});
  for (double phi : {0.0, 1.0, 2.5, 4.0}) CHECK(std::abs(ray_exit_time(ball, Point::Zero(2), pt({1, 0}), phi) - 1) < 1e-8);

  const DomainSpec half = catalog_domain("half-space", {{"n", 2}});
  CHECK(std::abs(ray_exit_time(half, pt({-1, 0}), pt({1, 0}), 0.0) - 1) < 1e-8);
  CHECK(std::isinf(ray_exit_time(half, pt({-1, 0}), pt({1, 0}), kPi)));

  const DomainSpec e = catalog_domain("lemma5-E", {{"c", 0.5}, {"eps", 0.5}});
  const double delta = 0.01;
  CHECK(std::abs(ray_exit_time(e, pt({-delta, 0}), pt({delta, 0}), 0.0) - 1) < 1e-6);

  CHECK_THROWS_AS(ray_exit_time(ball, pt({2, 0}), pt({1, 0}), 0.0), PreconditionError);
  CHECK_THROWS_AS(ray_exit_time(ball, Point::Zero(2), Point::Zero(2), 0.0), PreconditionError);
}

TEST_CASE("directional distance on the ball and the polydisc") {
  const DomainSpec ball = catalog_domain("ball", {{"n", 2}});
  const DomainSpec poly = catalog_domain("polydisc", {{"n", 2}});
  Rng rng(7);
  for (int k = 0; k < 20; ++k) {
    const Point x = gaussian_point(rng, 2);
    CHECK(std::abs(directional_distance(ball, Point::Zero(2), x).value - 1 / x.norm()) < 1e-6);
    const double mx = std::max(std::abs(x(0)), std::abs(x(1)));
    CHECK(std::abs(directional_distance(poly, Point::Zero(2), x).value - 1 / mx) < 1e-6);
  }
  CHECK(std::abs(minkowski(ball, Point::Zero(2), pt({2, 0})) - 2) < 1e-6);
}

TEST_CASE("directional distance on E matches the closed-form exit oracle") {
  const double c = 0.5, eps = 0.5, delta = 0.01;
  const DomainSpec e = catalog_domain("lemma5-E", {{"c", c}, {"eps", eps}});
  const double s = lemma5_s_min(delta, c);
  const Point z = pt({-delta, 0});
  // The disk shrinks in the theta = pi/2 direction of w; along w = s it grows.
  const DirectionalDistance d = directional_distance(e, z, pt({delta, {0, s}}));
  CHECK(d.value < 1.0);
  CHECK(std::abs(d.value - lemma5_oracle(delta, c, eps, Complex(0, s))) < 1e-6);
  CHECK(directional_distance(e, z, pt({delta, s})).value > 1.0);
  for (double theta : {0.3, kPi / 2, 2.0, 4.5}) {
    const Complex w = s * std::polar(1.0, theta);
    CHECK(std::abs(directional_distance(e, z, pt({delta, w})).value - lemma5_oracle(delta, c, eps, w)) < 1e-6);
  }
}

TEST_CASE("profile minimum equals the value") {
  const DomainSpec e = catalog_domain("lemma5-E", {{"c", 0.5}, {"eps", 0.5}});
  RayConfig cfg;
  cfg.keep_profile = true;
  const DirectionalDistance d = directional_distance(e, pt({-0.01, 0}), pt({0.01, 0.004}), cfg);
  double mn = INFINITY;
  for (const ExitSample& s : d.profile) mn = std::min(mn, s.time);
  CHECK(mn == d.value);
  CHECK(d.profile.size() >= 256);
}

TEST_CASE("gauge homogeneity and grid convergence") {
  Rng rng(12);
  for (const char* name : {"ball", "polydisc", "hartogs-figure", "lemma5-E", "model-hor"}) {
    const DomainSpec d = catalog_domain(name);
    const std::vector<Point> zs = sample_interior(d, 5, 3);
    for (const Point& z : zs) {
      const Point x = gaussian_point(rng, 2);
      const double base = directional_distance(d, z, x).value;
      for (int k = 0; k < 20; ++k) {
        const Complex lambda = gaussian_point(rng, 1)(0);
        const double scaled = directional_distance(d, z, lambda * x).value;
        if (std::isinf(base)) {
          REQUIRE(std::isinf(scaled));
        } else {
          REQUIRE(std::abs(scaled * std::abs(lambda) - base) < 1e-6 * std::max(1.0, base));
        }
      }
      RayConfig fine;
      fine.angles = 512;
      const double refined = directional_distance(d, z, x, fine).value;
      if (std::isfinite(base)) REQUIRE(std::abs(refined - base) < 1e-5 * std::max(1.0, base));
    }
  }
}

TEST_CASE("gauge is subadditive on convex domains") {
  Rng rng(13);
  const DomainSpec quadrant = catalog_domain("quadrant");
  const DomainSpec poly = catalog_domain("polydisc", {{"n", 2}});
  const Point zq = pt({{0.5, 1.5}});
  const Point zp = pt({0.2, {0, -0.4}});
  for (int k = 0; k < 50; ++k) {
    const Point x = gaussian_point(rng, 1), y = gaussian_point(rng, 1);
    CHECK(minkowski(quadrant, zq, x + y) <= minkowski(quadrant, zq, x) + minkowski(quadrant, zq, y) + 1e-6);
    const Point u = gaussian_point(rng, 2), v = gaussian_point(rng, 2);
    CHECK(minkowski(poly, zp, u + v) <= minkowski(poly, zp, u) + minkowski(poly, zp, v) + 1e-6);
  }
}

TEST_CASE("directional distance is monotone under inclusion") {
  const DomainSpec e = catalog_domain("lemma5-E", {{"c", 0.5}, {"eps", 0.5}});
  const DomainSpec bidisc(2, intersection_of({primitive("abs2(1) - 0.25", 2), primitive("abs2(2) - 0.25", 2)}));
  Rng rng(14);
  for (const Point& z : sample_interior(e, 20, 5)) {
    const Point x = gaussian_point(rng, 2);
    CHECK(directional_distance(e, z, x).value <= directional_distance(bidisc, z, x).value + 1e-6);
  }
}

TEST_CASE("indicatrix is balanced") {
  Rng rng(15);
  for (const char* name : {"hartogs-figure", "lemma5-E", "example10"}) {
    const DomainSpec d = catalog_domain(name);
    for (const Point& z : sample_interior(d, 10, 6)) {
      const Point x = 0.3 * gaussian_point(rng, d.dimension());
      const double h = minkowski(d, z, x);
      if (h > 1 - 1e-6) continue;
      for (int k = 0; k < 64; ++k) {
        const Complex lambda = std::sqrt(uniform(rng)) * unit_phase(uniform(rng, 0, 2 * kPi));
        REQUIRE(d.contains(z + lambda * x));
      }
    }
  }
}

TEST_CASE("E-domain circle integral") {
  const double c = 0.5, eps = 0.5;
  for (double delta : {0.01, 0.005}) {
    for (double s : {lemma5_s_min(delta, c), delta}) {
      const Lemma5Result r = lemma5_integral(delta, c, s, eps, 512);
      CHECK(r.s_in_lemma_range);
      CHECK(r.value < 1 - 1e-4);
      CHECK(std::abs(lemma5_integral(delta, c, s, eps, 1024).value - r.value) < 1e-5);
      CHECK(r.theta.size() == 512);
    }
  }
  const Lemma5Result degenerate = lemma5_integral(0.01, c, 0.0, eps, 64);
  CHECK(std::abs(degenerate.value - 1.0) < 1e-6);
  CHECK_FALSE(degenerate.s_in_lemma_range);
  CHECK_THROWS_AS(lemma5_integral(0.2, c, 0.01, eps, 512), PreconditionError);
  CHECK_THROWS_AS(lemma5_integral(0.01, 1.0, 0.01, eps, 512), PreconditionError);
  CHECK_THROWS_AS(lemma5_integral(0.01, c, 0.01, eps, 32), PreconditionError);
}
