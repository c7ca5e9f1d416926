#include <catch_amalgamated.hpp>

#include <cmath>

#include "pcvx/catalog.hpp"
#include "pcvx/domain.hpp"
#include "pcvx/random.hpp"

using namespace pcvx;

namespace {

Point pt(std::initializer_list<Complex> values) {
  Point z(static_cast<Eigen::Index>(values.size()));
  Eigen::Index k = 0;
  for (const Complex& v : values) z(k++) = v;
  return z;
}

DomainSpec punctured_ball() {
  return DomainSpec(2, minus_affine(primitive("norm2 - 1", 2), AffineSet(Point::Zero(2), ComplexMatrix(2, 0))));
}

}  // namespace

TEST_CASE("membership examples") {
  CHECK(contains(catalog_domain("ball", {{"n", 2}}), Point::Zero(2)));
  CHECK(contains(catalog_domain("example15"), pt({1, 0, 0})));
  CHECK_FALSE(contains(catalog_domain("example13"), pt({1, 0, 1})));
  CHECK_FALSE(contains(punctured_ball(), Point::Zero(2)));
  CHECK(contains(punctured_ball(), pt({1e-9, 0})));
  CHECK_THROWS_AS(contains(catalog_domain("ball", {{"n", 2}}), Point::Zero(3)), DimensionError);
}

TEST_CASE("tree semantics match logical combinations") {
  const RegionNode a = primitive("abs2(1) - 1", 2);
  const RegionNode b = primitive("re(2) - 0.2", 2);
  const DomainSpec da(2, a), db(2, b);
  const DomainSpec u(2, union_of({a, b})), i(2, intersection_of({a, b})), c(2, complement_of(a));
  Rng rng(1);
  for (int k = 0; k < 10000; ++k) {
    const Point z = 1.5 * gaussian_point(rng, 2);
    REQUIRE(u.contains(z) == (da.contains(z) || db.contains(z)));
    REQUIRE(i.contains(z) == (da.contains(z) && db.contains(z)));
    REQUIRE(c.contains(z) == !da.contains(z));
  }
}

TEST_CASE("three-piece union components are pairwise disjoint") {
  const DomainSpec d1 = catalog_domain("example15-component", {{"j", 1}});
  const DomainSpec d2 = catalog_domain("example15-component", {{"j", 2}});
  const DomainSpec d3 = catalog_domain("example15-component", {{"j", 3}});
  const DomainSpec d = catalog_domain("example15");
  Rng rng(2);
  for (int k = 0; k < 100000; ++k) {
    const Point z = gaussian_point(rng, 3);
    const int count = int(d1.contains(z)) + int(d2.contains(z)) + int(d3.contains(z));
    REQUIRE(count <= 1);
    REQUIRE(d.contains(z) == (count == 1));
    // Direct form |z| < sqrt(2) max |z_j|.
    const double mx = std::max({std::abs(z(0)), std::abs(z(1)), std::abs(z(2))});
    REQUIRE(d.contains(z) == (z.squaredNorm() < 2.0 * mx * mx));
  }
}

TEST_CASE("signed distance examples") {
  const DomainSpec ball = catalog_domain("ball", {{"n", 2}});
  const SignedDistance s0 = signed_boundary_distance(ball, Point::Zero(2));
  CHECK(std::abs(s0.value - 1.0) < 1e-6);
  CHECK(s0.finite);

  const DomainSpec quadrant = catalog_domain("quadrant");
  for (double t : {0.01, 0.3, 1.0, 4.0}) {
    CHECK(std::abs(signed_boundary_distance(quadrant, pt({{t, t}})).value - t) < 1e-6);
  }
  CHECK(std::abs(signed_boundary_distance(quadrant, pt({{0.2, 0.7}})).value - 0.2) < 1e-9);
  CHECK(std::abs(signed_boundary_distance(quadrant, pt({{-0.3, -0.4}})).value + 0.5) < 1e-9);

  const SignedDistance sp = signed_boundary_distance(punctured_ball(), pt({0.1, 0}));
  CHECK(std::abs(sp.value - 0.1) < 1e-6);
  CHECK(sp.method == DistanceMethod::affine);

  CHECK_THROWS_AS(signed_boundary_distance(ball, pt({20, 0})), PreconditionError);
}

TEST_CASE("signed distance agrees with closed forms") {
  Rng rng(4);
  const DomainSpec ball = catalog_domain("ball", {{"n", 3}});
  const DomainSpec polydisc = catalog_domain("polydisc", {{"n", 2}});
  const DomainSpec hartogs = catalog_domain("hartogs-figure");
  for (int k = 0; k < 300; ++k) {
    const Point z = 0.8 * gaussian_point(rng, 3);
    if (z.norm() > 5) continue;
    REQUIRE(std::abs(signed_boundary_distance(ball, z).value - (1.0 - z.norm())) < 1e-9);

    const Point w = z.head(2);
    const double oracle_poly = [&] {
      const double a = std::abs(w(0)), b = std::abs(w(1));
      if (a < 1 && b < 1) return std::min(1 - a, 1 - b);
      const double ea = std::max(a - 1, 0.0), eb = std::max(b - 1, 0.0);
      return -std::hypot(ea, eb);
    }();
    REQUIRE(std::abs(signed_boundary_distance(polydisc, w).value - oracle_poly) < 1e-9);

    // Hartogs figure, inside the bidisc: distance to the missing block
    // {|z1| <= p, |z2| >= q} or to the outer boundary.
    const double a = std::abs(w(0)), b = std::abs(w(1));
    if (a < 1 && b < 1 && hartogs.contains(w)) {
      const double dx = std::max(a - 0.5, 0.0), dy = std::max(0.5 - b, 0.0);
      const double oracle = std::min({1 - a, 1 - b, std::hypot(dx, dy)});
      REQUIRE(std::abs(signed_boundary_distance(hartogs, w).value - oracle) < 1e-8);
    }
  }
}

TEST_CASE("signed distance sign matches membership") {
  Rng rng(8);
  for (const char* name : {"example13", "example15", "example14"}) {
    const DomainSpec d = catalog_domain(name);
    for (int k = 0; k < 200; ++k) {
      const Point z = 1.5 * gaussian_point(rng, 3);
      if (z.norm() > 10) continue;
      const SignedDistance s = signed_boundary_distance(d, z);
      REQUIRE((s.value > 0) == d.contains(z));
    }
  }
}

TEST_CASE("signed distance is concave on segments of convex domains") {
  Rng rng(9);
  for (const char* name : {"ball", "polydisc", "tube"}) {
    const DomainSpec d = catalog_domain(name);
    int tested = 0;
    for (int k = 0; k < 2000 && tested < 200; ++k) {
      const Point a = 0.6 * gaussian_point(rng, 2);
      const Point b = 0.6 * gaussian_point(rng, 2);
      if (!d.contains(a) || !d.contains(b) || a.norm() > 10 || b.norm() > 10) continue;
      const double sa = signed_distance_value(d, a), sb = signed_distance_value(d, b);
      const double sm = signed_distance_value(d, 0.5 * (a + b));
      REQUIRE(sm >= 0.5 * (sa + sb) - 1e-7);
      ++tested;
    }
    CHECK(tested == 200);
  }
}

TEST_CASE("boundary samples of the ball") {
  const DomainSpec ball = catalog_domain("ball", {{"n", 2}});
  const auto samples = sample_boundary(ball, 64, 1);
  REQUIRE(samples.size() == 64);
  for (const auto& s : samples) {
    CHECK(std::abs(s.point.norm() - 1.0) < 1e-7);
    CHECK((s.normal - s.point / s.point.norm()).norm() < 1e-6);
    CHECK(s.smooth());
    for (Eigen::Index k = 0; k < s.real_tangent.cols(); ++k) {
      CHECK(std::abs(real_dot(s.normal, s.real_tangent.col(k))) < 1e-8);
    }
    CHECK(std::abs(s.normal.dot(s.complex_tangent.col(0))) < 1e-8);
  }
}

TEST_CASE("boundary samples are deterministic and on the zero set") {
  const DomainSpec model = catalog_domain("model-hor", {{"c", 0.5}, {"n", 2}});
  const auto a = sample_boundary(model, 40, 1);
  const auto b = sample_boundary(model, 40, 1);
  REQUIRE(a.size() == b.size());
  const ScalarField& q = model.primitive_field(0);
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].point == b[k].point);
    CHECK(std::abs(q(a[k].point)) < 1e-7);
    CHECK(std::abs(signed_boundary_distance(model, a[k].point).value) < 1e-7);
  }
}

TEST_CASE("lens junction is flagged") {
  const DomainSpec d = catalog_domain("example10");
  // The two circles |z-1| = 2 and |z+1| = 2 meet at +-i*sqrt(3).
  const BoundaryPointData junction = boundary_point_data(d, pt({{0, std::sqrt(3.0)}}));
  CHECK(junction.kind == BoundaryPointData::Kind::junction);
  const BoundaryPointData regular = boundary_point_data(d, pt({{3, 0}}));
  CHECK(regular.smooth());
  CHECK(std::abs(regular.normal(0) - Complex(1, 0)) < 1e-8);

  int flagged = 0;
  for (const auto& s : sample_boundary(d, 400, 3)) {
    const double near_junction = std::min(std::abs(s.point(0) - Complex(0, std::sqrt(3.0))),
                                          std::abs(s.point(0) - Complex(0, -std::sqrt(3.0))));
    if (!s.smooth()) {
      ++flagged;
      CHECK(near_junction < 1e-5);
    }
  }
  CHECK(flagged >= 0);
}

TEST_CASE("slices lift membership exactly") {
  const DomainSpec omega = catalog_domain("example13");
  Rng rng(21);
  Point base = gaussian_point(rng, 3);
  ComplexMatrix frame(3, 2);
  frame.col(0) = gaussian_point(rng, 3);
  frame.col(1) = gaussian_point(rng, 3);
  const DomainSpec slice = omega.restricted({base, frame});
  CHECK(slice.dimension() == 2);
  for (int k = 0; k < 100; ++k) {
    const Point zeta = gaussian_point(rng, 2);
    REQUIRE(slice.contains(zeta) == omega.contains(base + frame * zeta));
  }
}

TEST_CASE("slices pull back removed lines") {
  const DomainSpec g = catalog_domain("example14");
  // Plane through b = (0.3, 0, 0) transversal to l1.
  Point base = pt({0.3, 0, 0});
  ComplexMatrix frame = ComplexMatrix::Zero(3, 2);
  frame(1, 0) = 1.0;
  frame(2, 1) = 1.0;
  const DomainSpec slice = g.restricted({base, frame});
  REQUIRE(slice.local_affine_sets().size() == 1);
  CHECK(slice.local_affine_sets()[0].dimension() == 0);
  CHECK(slice.local_affine_sets()[0].base.norm() < 1e-12);
  CHECK_FALSE(slice.contains(Point::Zero(2)));
  CHECK(std::abs(signed_boundary_distance(slice, pt({0.05, 0})).value - 0.05) < 1e-9);
}

TEST_CASE("catalog formulas and errors") {
  const DomainSpec model = catalog_domain("model-hor", {{"c", 0.5}, {"n", 2}});
  CHECK(model.describe() == "{(((re(1) + (im(1))^2) + (0.5 * (im(2))^2)) - (re(2))^2) < 0}");
  CHECK(catalog_domain("ball", {{"n", 3}}).describe() == "{(norm2 - 1) < 0}");
  CHECK_THROWS_AS(catalog_domain("model-hor", {{"c", 1.0}}), PreconditionError);
  CHECK_THROWS_AS(catalog_domain("no-such-domain"), Error);
  CHECK_THROWS_AS(catalog_domain("ball", {{"m", 1}}), PreconditionError);
  const auto [name, params] = parse_catalog_reference("model-hor:c=0.25,n=3");
  CHECK(name == "model-hor");
  CHECK(params.at("c") == 0.25);
  CHECK(params.at("n") == 3);
}
