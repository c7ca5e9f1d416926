#include <catch_amalgamated.hpp>

#include <cmath>

#include "pcvx/catalog.hpp"
#include "pcvx/convexity.hpp"
#include "pcvx/random.hpp"

using namespace pcvx;

namespace {

Point pt(std::initializer_list<Complex> values) {
  Point z(static_cast<Eigen::Index>(values.size()));
  Eigen::Index k = 0;
  for (const Complex& v : values) z(k++) = v;
  return z;
}

BoundaryPointData at(const DomainSpec& spec, const Point& a) { return boundary_point_data(spec, a); }

}  // namespace

TEST_CASE("composition tags") {
  using M = CompositionDescriptor::Monotonicity;
  using C = CompositionDescriptor::Convexity;
  const auto neglog = CompositionDescriptor::named("neg-log");
  CHECK(neglog.monotonicity() == M::decreasing);
  CHECK(neglog.convexity() == C::convex);
  CHECK(CompositionDescriptor::named("identity").convexity() == C::affine);
  CHECK(CompositionDescriptor::named("exp").increasing());
  CHECK(CompositionDescriptor::named("affine", 10, -2, 1).decreasing());
  const auto sq = CompositionDescriptor::custom("t^2 - 3*t");
  CHECK(sq(2.0) == -2.0);
  CHECK(sq.monotonicity() == M::none);
  CHECK(sq.convexity() == C::convex);
  CHECK(CompositionDescriptor::custom("-t^2").convexity() == C::concave);
  CHECK_THROWS_AS(CompositionDescriptor::named("no-such"), PreconditionError);
}

TEST_CASE("segment convexity") {
  ConvexBudget budget;
  budget.segments = 3000;
  CHECK_FALSE(segment_convexity_falsify(catalog_domain("ball", {{"n", 2}}), budget, 1).falsified());
  CHECK_FALSE(segment_convexity_falsify(catalog_domain("polydisc"), budget, 1).falsified());

  const DomainSpec lens = catalog_domain("example10");
  // The explicit witness: both endpoints in, the midpoint (0, 1.9) out.
  CHECK(lens.contains(pt({{-1, 1.9}})));
  CHECK(lens.contains(pt({{1, 1.9}})));
  CHECK_FALSE(lens.contains(pt({{0, 1.9}})));
  const Verdict v = segment_convexity_falsify(lens, budget, 1);
  REQUIRE(v.falsified());
  const auto& p = v.certificate->points;
  CHECK(lens.contains(p[0]));
  CHECK(lens.contains(p[1]));
  CHECK_FALSE(lens.contains(0.5 * (p[0] + p[1])));
  // Oracle: outside both discs.
  CHECK(std::abs(p[2](0) - 1.0) >= 2.0);
  CHECK(std::abs(p[2](0) + 1.0) >= 2.0);

  const Verdict l = segment_convexity_falsify(catalog_domain("l-tube"), budget, 2);
  REQUIRE(l.falsified());
  // Oracle: the real part of the midpoint is in the notch [0,1) x [0,1).
  const Point m = l.certificate->points[2];
  CHECK(m(0).real() >= 0.0);
  CHECK(m(1).real() >= 0.0);
}

TEST_CASE("hyperplane search") {
  HyperplaneBudget budget;
  budget.conormals = 200;
  const DomainSpec ball = catalog_domain("ball", {{"n", 2}});
  const HyperplaneResult tangent = hyperplane_search(ball, pt({1, 0}), budget, 1);
  REQUIRE(tangent.conormal);
  CHECK(std::abs(std::abs((*tangent.conormal)(0)) - 1.0) < 1e-6);
  CHECK(tangent.conormals_tried == 1);
  // A point outside the ball: some hyperplane avoids it.
  CHECK(hyperplane_search(ball, pt({1.5, {0, 0.5}}), budget, 2).conormal);

  const DomainSpec e15 = catalog_domain("example15");
  const HyperplaneResult origin = hyperplane_search(e15, Point::Zero(3), budget, 3);
  CHECK_FALSE(origin.conormal);
  CHECK(origin.best_hits > 0);

  const DomainSpec omega = catalog_domain("example13");
  // The complex tangent hyperplane at (1,0,1) contains (1, s, 1), which lies in
  // the cone for small s != 0, so no local conormal exists there.
  CHECK(omega.contains(pt({1, 0.01, 1})));
  const HyperplaneResult z0 = hyperplane_search(omega, pt({1, 0, 1}), budget, 4);
  CHECK_FALSE(z0.local_conormal);

  CHECK_THROWS_AS(hyperplane_search(ball, Point::Zero(2), budget, 1), PreconditionError);
}

TEST_CASE("hyperplane search succeeds on boundary samples of a cone component") {
  const DomainSpec d3 = catalog_domain("example15-component", {{"j", 3}});
  HyperplaneBudget budget;
  budget.conormals = 50;
  budget.probes = 2000;
  int smooth = 0, found = 0;
  for (const BoundaryPointData& b : sample_boundary(d3, 40, 5)) {
    if (!b.smooth()) continue;
    ++smooth;
    if (hyperplane_search(d3, b.point, budget, 6).conormal) ++found;
  }
  REQUIRE(smooth > 20);
  CHECK(found >= 0.95 * smooth);
}

TEST_CASE("composed convexity") {
  ConvexBudget budget;
  budget.segments = 4000;
  const DomainSpec quadrant = catalog_domain("quadrant");
  CHECK_FALSE(composed_convexity_check(quadrant, CompositionDescriptor::named("exp-neg"), budget, 1).falsified());
  const Verdict id = composed_convexity_check(quadrant, CompositionDescriptor::named("identity"), budget, 1);
  REQUIRE(id.falsified());
  // Oracle: s = min(x, y) on the quadrant.
  const auto& p = id.certificate->points;
  auto s = [](const Point& z) { return std::min(z(0).real(), z(0).imag()); };
  CHECK(s(p[2]) - 0.5 * (s(p[0]) + s(p[1])) > budget.tolerance);

  CHECK_FALSE(
      composed_convexity_check(catalog_domain("ball", {{"n", 2}}), CompositionDescriptor::named("neg-log"), budget, 2)
          .falsified());
  CHECK(composed_convexity_check(catalog_domain("l-tube"), CompositionDescriptor::named("neg-log"), budget, 3)
            .falsified());
  CHECK_THROWS_AS(composed_convexity_check(quadrant, CompositionDescriptor::custom("-t^2"), budget, 1),
                  PreconditionError);
}

TEST_CASE("composed plurisubharmonicity") {
  PshBudget budget;
  budget.circles = 300;
  CHECK_FALSE(composed_psh_check(catalog_domain("ball", {{"n", 2}}), CompositionDescriptor::named("identity"), budget, 1)
                  .falsified());
  const Verdict h = composed_psh_check(catalog_domain("hartogs-figure"), CompositionDescriptor::named("identity"), budget, 3);
  REQUIRE(h.falsified());
  CHECK(h.certificate->target == "identity(neglog-s)");
  budget.focus = Point::Zero(2);
  budget.focus_radius = 0.3;
  CHECK(composed_psh_check(catalog_domain("model-hor"), CompositionDescriptor::named("exp"), budget, 5).falsified());
  CHECK_THROWS_AS(composed_psh_check(catalog_domain("ball"), CompositionDescriptor::named("neg-log"), budget, 1),
                  PreconditionError);
}

TEST_CASE("boundary ratios") {
  const DomainSpec half = catalog_domain("half-space", {{"n", 2}});
  for (RatioMode mode : {RatioMode::real_tangent, RatioMode::complex_tangent, RatioMode::j_symmetrized}) {
    CHECK(std::abs(boundary_ratio(half, at(half, Point::Zero(2)), mode).estimate) < 1e-6);
  }
  const DomainSpec ball = catalog_domain("ball", {{"n", 2}});
  for (const BoundaryPointData& b : sample_boundary(ball, 8, 2)) {
    const RatioEstimate r = boundary_ratio(ball, b, RatioMode::real_tangent);
    // Closed form on the tangent plane: (1 - sqrt(1 + r^2)) / r^2 at the smallest radii.
    const double oracle = (1 - std::sqrt(1 + 0.003 * 0.003)) / (0.003 * 0.003);
    CHECK(std::abs(r.estimate - oracle) < 1e-2);
    CHECK(r.estimate >= -0.5 - 1e-2);
  }
  const DomainSpec model = catalog_domain("model-hor");
  CHECK(boundary_ratio(model, at(model, Point::Zero(2)), RatioMode::complex_tangent).estimate <= -0.1);
  CHECK_THROWS_AS(boundary_ratio(ball, at(ball, pt({1, 0})), RatioMode::real_tangent, {0.1, 0.2}), PreconditionError);
}
