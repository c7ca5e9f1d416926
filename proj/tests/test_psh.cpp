#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "pcvx/catalog.hpp"
#include "pcvx/psh.hpp"
#include "pcvx/random.hpp"

using namespace pcvx;

namespace {

Point pt(std::initializer_list<Complex> values) {
  Point z(static_cast<Eigen::Index>(values.size()));
  Eigen::Index k = 0;
  for (const Complex& v : values) z(k++) = v;
  return z;
}

// Closed-form s_D of the Hartogs figure (p = q = 0.5) inside the bidisc.
double hartogs_distance(const Point& w) {
  const double a = std::abs(w(0)), b = std::abs(w(1));
  const double dx = std::max(a - 0.5, 0.0), dy = std::max(0.5 - b, 0.0);
  return std::min({1 - a, 1 - b, std::hypot(dx, dy)});
}

QuadraticDisk hartogs_disk() {
  const double t = 0.05, sigma = 0.02;
  const Point c1 = sigma * pt({1, 1}) / std::sqrt(2.0);
  const Point c2 = -(sigma * sigma / (8 * t)) * pt({1, -1});
  return {pt({0.5 + t, 0.5 - t}), c1, c2};
}

}  // namespace

TEST_CASE("circle margin of simple functions") {
  Rng rng(1);
  const Point c = gaussian_point(rng, 2);
  const Point v = gaussian_point(rng, 2);
  // Re(z1 * z2) is pluriharmonic: the trapezoid rule is exact for it.
  auto harmonic = [](const Point& z) { return (z(0) * z(1)).real(); };
  CHECK(std::abs(circle_mean_margin(harmonic, c, v, 0.7, 16)) < 1e-12);
  // -|z|^2 has margin r^2 |V|^2.
  auto neg_norm = [](const Point& z) { return -z.squaredNorm(); };
  CHECK(std::abs(circle_mean_margin(neg_norm, c, v, 0.3, 16) - 0.09 * v.squaredNorm()) < 1e-12);
  // |z|^2 is psh.
  CHECK(circle_mean_margin([](const Point& z) { return z.squaredNorm(); }, c, v, 0.3, 16) < 0);
  CHECK_THROWS_AS(circle_mean_margin(harmonic, c, v, 0.0, 16), PreconditionError);
  CHECK_THROWS_AS(circle_mean_margin(harmonic, c, v, 1.0, 2), PreconditionError);
}

TEST_CASE("ball passes the boundary distance test") {
  PshBudget budget;
  budget.circles = 200;
  const Verdict v = psh_falsify(catalog_domain("ball", {{"n", 2}}), PshTarget::neglog_s(), budget, 7);
  CHECK_FALSE(v.falsified());
  CHECK(v.budget.candidates == 200);
  CHECK(v.budget.tested > 50);
  CHECK(v.budget.target == "neglog-s");
}

TEST_CASE("non-pseudoconvex domains are falsified") {
  PshBudget budget;
  budget.circles = 400;
  SECTION("hartogs figure") {
    const DomainSpec d = catalog_domain("hartogs-figure");
    const Verdict v = psh_falsify(d, PshTarget::neglog_s(), budget, 3);
    REQUIRE(v.falsified());
    const ViolationCertificate& c = *v.certificate;
    CHECK(c.kind == ViolationCertificate::Kind::circle_mean);
    CHECK(c.margin > budget.tolerance);
    CHECK(c.recheck_margin >= 0.5 * c.margin);
    // Independent recheck of the certificate with the closed-form distance.
    auto u = [](const Point& z) { return -std::log(hartogs_distance(z)); };
    CHECK(circle_mean_margin(u, c.center, c.direction, c.radius, 512) > 0);
    CHECK(recheck_circle(d, c, 256) > 0);
  }
  SECTION("model hypersurface near the origin") {
    budget.focus = Point::Zero(2);
    budget.focus_radius = 0.3;
    const Verdict v = psh_falsify(catalog_domain("model-hor"), PshTarget::neglog_s(), budget, 5);
    REQUIRE(v.falsified());
    CHECK(v.certificate->recheck_margin > budget.tolerance);
  }
}

TEST_CASE("search is deterministic") {
  PshBudget budget;
  budget.circles = 64;
  const DomainSpec d = catalog_domain("hartogs-figure");
  const Verdict a = psh_falsify(d, PshTarget::neglog_s(), budget, 11);
  const Verdict b = psh_falsify(d, PshTarget::neglog_s(), budget, 11);
  REQUIRE(a.falsified() == b.falsified());
  CHECK(a.budget.tested == b.budget.tested);
  if (a.falsified()) {
    CHECK(a.certificate->candidate == b.certificate->candidate);
    CHECK(a.certificate->margin == b.certificate->margin);
  }
}

TEST_CASE("levi form values") {
  CHECK(std::abs(levi_min_eig(parse_field("re(1) + im(1)^2 + 0.5*im(2)^2 - re(2)^2", 2), Point::Zero(2)) + 0.25) <
        1e-5);
  CHECK(std::abs(levi_min_eig(parse_field("norm2 - 1", 2), pt({1, 0})) - 1.0) < 1e-5);
  CHECK(std::abs(levi_min_eig(parse_field("norm2 - 1", 3), pt({0, 0.6, {0, 0.8}})) - 1.0) < 1e-5);
  CHECK(levi_min_eig(parse_field("1 - norm2", 2), pt({1, 0})) <= -1.0 + 1e-5);
  // Double cone at (1,0,1): the horizontal direction e2 gives -(|z1|^2 + |z2|^2).
  CHECK(levi_min_eig(parse_field("abs2(3) - abs2(1) - abs2(2)", 3), pt({1, 0, 1})) <= -1.0 + 1e-5);
  // Re z1 is Levi flat.
  CHECK(std::abs(levi_min_eig(parse_field("re(1)", 2), pt({0, 0.3}))) < 1e-6);
  CHECK_THROWS_AS(levi_min_eig(parse_field("max(re(1), re(2))", 2), Point::Zero(2)), PreconditionError);
  CHECK_THROWS_AS(levi_min_eig(parse_field("norm2", 2), Point::Zero(2)), PreconditionError);
}

TEST_CASE("disk probes") {
  SECTION("ball: boundary distance decreases along a disk") {
    const QuadraticDisk p{Point::Zero(2), pt({0.3, 0}), Point::Zero(2)};
    CHECK(disk_probe(catalog_domain("ball", {{"n", 2}}), p) < 0);
  }
  SECTION("hartogs figure: a disk around the missing corner stays farther away") {
    const QuadraticDisk p = hartogs_disk();
    const double value = disk_probe(catalog_domain("hartogs-figure"), p);
    double oracle = std::numeric_limits<double>::infinity();
    for (int ring = 1; ring <= 200; ++ring) {
      for (int k = 0; k < 720; ++k) {
        const Complex zeta = std::polar(ring / 200.0, 2 * std::numbers::pi * k / 720);
        oracle = std::min(oracle, hartogs_distance(p(zeta)) - hartogs_distance(p(0.0)));
      }
    }
    CHECK(oracle > 0);
    CHECK(value > 0);
    CHECK(std::abs(value - oracle) < 1e-4);
  }
  SECTION("model hypersurface") {
    const double delta = 1e-3, t = std::sqrt(1.5 * delta);
    const QuadraticDisk p{pt({-delta, 0}), pt({0, t}), pt({delta, 0})};
    CHECK(disk_probe(catalog_domain("model-hor"), p) > 0);
  }
  SECTION("leaving the domain throws") {
    const QuadraticDisk p{Point::Zero(2), pt({2, 0}), Point::Zero(2)};
    CHECK_THROWS_AS(disk_probe(catalog_domain("ball", {{"n", 2}}), p), PreconditionError);
  }
}

TEST_CASE("indicatrix checks") {
  PshBudget budget;
  budget.circles = 48;
  CHECK_FALSE(indicatrix_psc_check(catalog_domain("ball", {{"n", 2}}), pt({0.3, 0.1}), budget, 1).falsified());
  CHECK_FALSE(indicatrix_psc_check(catalog_domain("polydisc"), pt({0.2, {0, 0.4}}), budget, 1).falsified());
  CHECK_THROWS_AS(indicatrix_psc_check(catalog_domain("ball", {{"n", 2}}), pt({2, 0}), budget, 1), PreconditionError);
}

TEST_CASE("gauge of E at z_delta is not plurisubharmonic") {
  const double delta = 0.01, c = 0.5;
  const DomainSpec e = catalog_domain("lemma5-E", {{"c", c}, {"eps", 0.5}});
  const Point z = pt({-delta, 0});
  auto h = [&](const Point& x) { return minkowski(e, z, x); };
  for (double s : {lemma5_s_min(delta, c), delta}) {
    CHECK(circle_mean_margin(h, pt({delta, 0}), pt({0, 1}), s, 64) > 1e-4);
  }
  PshBudget budget;
  budget.circles = 64;
  const Verdict v = indicatrix_psc_check(e, z, budget, 1);
  REQUIRE(v.falsified());
  CHECK(v.certificate->target == "minkowski-at");
  CHECK(v.certificate->recheck_margin > budget.tolerance);
  CHECK(recheck_circle(e, *v.certificate, 128) > 0);
}
