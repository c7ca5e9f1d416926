#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "pcvx/expression.hpp"
#include "pcvx/random.hpp"

using namespace pcvx;
using Catch::Approx;

namespace {

Point pt(std::initializer_list<Complex> values) {
  Point z(static_cast<Eigen::Index>(values.size()));
  Eigen::Index k = 0;
  for (const Complex& v : values) z(k++) = v;
  return z;
}

}  // namespace

TEST_CASE("single coordinate fields") {
  const ScalarField re1 = parse_field("re(1)", 2);
  CHECK(eval_field(re1, pt({{1.5, -2.0}, {3.0, 4.0}})) == 1.5);
  CHECK(eval_field(parse_field("im(2)", 2), pt({{1.5, -2.0}, {3.0, 4.0}})) == 4.0);
  CHECK(eval_field(parse_field("abs2(1)", 1), pt({{3.0, 4.0}})) == 25.0);
  CHECK(eval_field(parse_field("7", 3), pt({{0.3, 1}, {2, 2}, {-1, 0}})) == 7.0);
  CHECK(eval_field(parse_field("norm2", 2), pt({{1, 0}, {0, 1}})) == 2.0);
}

TEST_CASE("mixed polynomial against a hand-written evaluator") {
  const ScalarField f = parse_field("re(1) + im(1)^2 + abs2(2) - 0.5*re(2)^2", 2);
  CHECK(eval_field(f, pt({{0, 0}, {1, 0}})) == Approx(0.5).margin(1e-15));

  auto oracle = [](const Point& z) {
    const double x1 = z(0).real(), y1 = z(0).imag(), x2 = z(1).real(), y2 = z(1).imag();
    return x1 + y1 * y1 + (x2 * x2 + y2 * y2) - 0.5 * x2 * x2;
  };
  Rng rng(3);
  for (int k = 0; k < 1000; ++k) {
    const Point z = 3.0 * gaussian_point(rng, 2);
    REQUIRE(std::abs(eval_field(f, z) - oracle(z)) < 1e-12 * (1 + std::abs(oracle(z))));
  }
}

TEST_CASE("cone function vanishes on its boundary point") {
  const ScalarField rho = parse_field("abs2(3) - abs2(1) - abs2(2)", 3);
  CHECK(eval_field(rho, pt({1, 0, 1})) == 0.0);
}

TEST_CASE("precedence and unary minus") {
  const Point z = pt({{2, 3}});
  CHECK(eval_field(parse_field("1 - 2 - 3", 1), z) == -4.0);
  CHECK(eval_field(parse_field("2 * 3 + 4", 1), z) == 10.0);
  CHECK(eval_field(parse_field("2 * (3 + 4)", 1), z) == 14.0);
  CHECK(eval_field(parse_field("-re(1)^2", 1), z) == -4.0);
  CHECK(eval_field(parse_field("(-re(1))^2", 1), z) == 4.0);
  CHECK(eval_field(parse_field("-2*im(1)", 1), z) == -6.0);
  CHECK(eval_field(parse_field("1e-1 * 20", 1), z) == Approx(2.0));
  CHECK(eval_field(parse_field("max(re(1), im(1), 1)", 1), z) == 3.0);
  CHECK(eval_field(parse_field("min(re(1), im(1), 1)", 1), z) == 1.0);
  CHECK(eval_field(parse_field("max(re(1))", 1), z) == 2.0);
}

TEST_CASE("parse errors report positions") {
  auto position_of = [](const char* text, int n) -> std::size_t {
    try {
      parse_field(text, n);
    } catch (const ParseError& e) {
      return e.position();
    }
    return std::string::npos;
  };
  CHECK(position_of("re(1) + ", 1) == 8);
  CHECK(position_of("re(1) $ 2", 1) == 6);
  CHECK(position_of("foo(1)", 1) == 0);
  CHECK(position_of("re(3)", 2) == 3);
  CHECK(position_of("re(1)^0", 1) == 6);
  CHECK(position_of("(re(1)", 1) == 6);
  CHECK_THROWS_AS(parse_field("re(1)", 0), DimensionError);
  CHECK_THROWS_AS(eval_field(parse_field("re(1)", 2), pt({1})), DimensionError);
}

TEST_CASE("serialization round-trip preserves evaluation") {
  const char* formulas[] = {
      "re(1) + im(1)^2 + abs2(2) - 0.5*re(2)^2",
      "-re(1)^2 - -im(2)*3",
      "max(abs2(1) - 1, min(re(2), -im(1)), 0.25) * 2",
      "norm2 - 1e-3*(re(1) - im(2))^3",
      "1 - 2 - (3 - 4) * -re(1)",
  };
  Rng rng(11);
  for (const char* text : formulas) {
    const ScalarField f = parse_field(text, 2);
    const ScalarField g = parse_field(f.to_string(), 2);
    CHECK(g.to_string() == f.to_string());
    for (int k = 0; k < 1000; ++k) {
      const Point z = 2.0 * gaussian_point(rng, 2);
      REQUIRE(std::abs(f(z) - g(z)) < 1e-12);
    }
  }
}

TEST_CASE("abs2 equals re^2 + im^2 and max/min are exact") {
  const ScalarField a = parse_field("abs2(2)", 2);
  const ScalarField b = parse_field("re(2)^2 + im(2)^2", 2);
  const ScalarField f = parse_field("abs2(1) - re(2)", 2);
  const ScalarField g = parse_field("im(1)*re(2) + 0.3", 2);
  const ScalarField mx = parse_field("max(abs2(1) - re(2), im(1)*re(2) + 0.3)", 2);
  const ScalarField mn = parse_field("min(abs2(1) - re(2), im(1)*re(2) + 0.3)", 2);
  Rng rng(5);
  for (int k = 0; k < 1000; ++k) {
    const Point z = gaussian_point(rng, 2);
    REQUIRE(a(z) == b(z));
    REQUIRE(mx(z) == std::max(f(z), g(z)));
    REQUIRE(mn(z) == std::min(f(z), g(z)));
  }
}

TEST_CASE("finite-difference derivatives") {
  SECTION("linear field") {
    const Derivatives d = numeric_derivatives(parse_field("re(1)", 2), pt({{0.3, -1}, {2, 5}}), 1e-4);
    RealVector expected = RealVector::Zero(4);
    expected(0) = 1.0;
    CHECK((d.gradient - expected).norm() < 1e-8);
    CHECK(d.hessian.norm() < 1e-8);
  }
  SECTION("abs2 at the origin") {
    const Derivatives d = numeric_derivatives(parse_field("abs2(1)", 2), Point::Zero(2));
    Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(4, 4);
    expected(0, 0) = expected(1, 1) = 2.0;
    CHECK((d.hessian - expected).norm() < 1e-6);
  }
  SECTION("(im z)^2 at i matches the analytic second derivative") {
    const Derivatives d = numeric_derivatives(parse_field("im(1)^2", 1), pt({{0, 1}}), 1e-4);
    CHECK(std::abs(d.hessian(1, 1) - 2.0) < 1e-6);
    CHECK(std::abs(d.gradient(1) - 2.0) < 1e-6);
  }
  SECTION("hessian is symmetric") {
    const Derivatives d = numeric_derivatives(parse_field("re(1)*im(2)^2 + abs2(1)*re(2)", 2), pt({{0.5, 1}, {-1, 2}}));
    CHECK((d.hessian - d.hessian.transpose()).norm() == 0.0);
  }
  CHECK_THROWS_AS(numeric_derivatives(parse_field("re(1)", 1), pt({0}), 0.0), PreconditionError);
}

TEST_CASE("gradients obey the sum and product rules") {
  Rng rng(17);
  const ScalarField f = parse_field("re(1)^3 - 2*im(1)*re(2) + abs2(2)", 2);
  const ScalarField g = parse_field("im(2)^2 + 0.5*re(1)*im(1) - 1", 2);
  const ScalarField sum = parse_field("(re(1)^3 - 2*im(1)*re(2) + abs2(2)) + (im(2)^2 + 0.5*re(1)*im(1) - 1)", 2);
  const ScalarField prod = parse_field("(re(1)^3 - 2*im(1)*re(2) + abs2(2)) * (im(2)^2 + 0.5*re(1)*im(1) - 1)", 2);
  for (int k = 0; k < 50; ++k) {
    const Point z = gaussian_point(rng, 2);
    const RealVector gf = numeric_derivatives(f, z).gradient;
    const RealVector gg = numeric_derivatives(g, z).gradient;
    CHECK((numeric_derivatives(sum, z).gradient - (gf + gg)).norm() < 1e-6);
    CHECK((numeric_derivatives(prod, z).gradient - (gf * g(z) + gg * f(z))).norm() < 1e-6 * (1 + std::abs(f(z) * g(z))));
  }
}

TEST_CASE("kink gap locates max/min switching sets") {
  const ScalarField f = parse_field("max(re(1), im(1))", 1);
  CHECK(f.has_kinks());
  const Point z = pt({{1.0, 0.25}});
  CHECK(f.kink_gap(real_view(z)) == Approx(0.75));
  CHECK(std::isinf(parse_field("re(1)", 1).kink_gap(real_view(z))));
}
