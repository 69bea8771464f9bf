#include <cmath>
#include <random>

#include "doctest.h"
#include "hlab/errors.hpp"
#include "hlab/geometry.hpp"

using namespace hlab;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

// Hyperbolic distance in the Klein model: sinh d from the wedge form, which
// avoids the cancellation of the arccosh formula at short range.
double klein_distance(const Vec& x, const Vec& y) {
  double wedge2 = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    for (Eigen::Index j = i + 1; j < x.size(); ++j) wedge2 += std::pow(x(i) * y(j) - x(j) * y(i), 2);
  const double num = (x - y).squaredNorm() - wedge2;
  return std::asinh(std::sqrt(num / ((1 - x.squaredNorm()) * (1 - y.squaredNorm()))));
}

Vec klein_to_poincare(const Vec& k) { return k / (1.0 + std::sqrt(1.0 - k.squaredNorm())); }

// Busemann function of the hyperbolic disk through the Poisson kernel.
double disk_busemann(const Vec& xi, const Vec& x, const Vec& y) {
  auto log_poisson = [&](const Vec& k) {
    const Vec p = klein_to_poincare(k);
    return std::log((1 - p.squaredNorm()) / (xi - p).squaredNorm());
  };
  return log_poisson(y) - log_poisson(x);
}

// Hilbert distance on the open simplex in barycentric coordinates.
double simplex_distance(const Vec& x, const Vec& y) {
  Vec p(x.size() + 1), q(y.size() + 1);
  p << x, 1 - x.sum();
  q << y, 1 - y.sum();
  const Vec r = p.cwiseQuotient(q);
  return 0.5 * (std::log(r.maxCoeff()) - std::log(r.minCoeff()));
}

Vec random_in_disk(std::mt19937_64& rng, double rmax) {
  std::uniform_real_distribution<double> u(0, 1);
  const double th = 2 * M_PI * u(rng);
  const double r = rmax * std::sqrt(u(rng));
  return v2(r * std::cos(th), r * std::sin(th));
}

Vec random_boundary(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0, 2 * M_PI);
  const double th = u(rng);
  return v2(std::cos(th), std::sin(th));
}

}  // namespace

TEST_CASE("Hilbert distance examples") {
  const ConvexDomain disk = ConvexDomain::unit_ball(2);
  CHECK(hilbert_distance(disk, v2(0, 0), v2(0.5, 0)) == doctest::Approx(std::atanh(0.5)).epsilon(1e-14));
  CHECK(hilbert_distance(disk, v2(0.3, 0.1), v2(0.3, 0.1)) == 0.0);
  const ConvexDomain tri = ConvexDomain::standard_simplex(2);
  const Vec p = v2(1.0 / 3, 1.0 / 3), q = v2(0.5, 0.25);
  CHECK(simplex_distance(p, q) == doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-14));
  CHECK(hilbert_distance(tri, p, q) == doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(hilbert_distance(disk, v2(0, 0), v2(1, 0)), Error);
}

TEST_CASE("Hilbert distance matches the Klein model and the simplex formula") {
  std::mt19937_64 rng(1);
  const ConvexDomain ball = ConvexDomain::unit_ball(3);
  const ConvexDomain simplex = ConvexDomain::standard_simplex(3);
  for (int i = 0; i < 2000; ++i) {
    const Vec x = ball.sample_interior(rng), y = ball.sample_interior(rng);
    CHECK(std::abs(hilbert_distance(ball, x, y) - klein_distance(x, y)) < 1e-9);
    const Vec p = simplex.sample_interior(rng), q = simplex.sample_interior(rng);
    CHECK(std::abs(hilbert_distance(simplex, p, q) - simplex_distance(p, q)) < 1e-9);
  }
}

TEST_CASE("metric axioms on three domain kinds") {
  std::mt19937_64 rng(2);
  for (const ConvexDomain& d :
       {ConvexDomain::unit_ball(2), ConvexDomain::pnorm_ball(2, 4.0), ConvexDomain::standard_simplex(2)}) {
    for (int i = 0; i < 1000; ++i) {
      const Vec x = d.sample_interior(rng), y = d.sample_interior(rng), z = d.sample_interior(rng);
      const double dxy = hilbert_distance(d, x, y);
      CHECK(dxy == hilbert_distance(d, y, x));
      CHECK(dxy > 0.0);
      CHECK(hilbert_distance(d, x, z) + hilbert_distance(d, z, y) - dxy >= -1e-10);
    }
  }
}

TEST_CASE("orbit distance formula on ellipsoids") {
  const ConvexDomain disk = ConvexDomain::unit_ball(2);
  Mat boost = Mat::Identity(3, 3);
  const double s = 0.7;
  boost(0, 0) = boost(2, 2) = std::cosh(s);
  boost(0, 2) = boost(2, 0) = std::sinh(s);
  const ProjectiveMap g(boost);
  ProjectiveMap p = ProjectiveMap::identity(3);
  const Vec o = Vec::Unit(3, 2);
  for (int k = 1; k <= 30; ++k) {
    p = p * g;
    // A boost by s moves the centre a distance s along its axis.
    CHECK(ellipsoid_orbit_distance(disk, o, p, o) == doctest::Approx(k * s).epsilon(1e-12));
  }
  Vec x(3);
  x << 0.2, -0.4, 1.0;
  const Vec gx = g.apply(x);
  const Vec gxc = gx.head(2) / gx(2);
  CHECK(ellipsoid_orbit_distance(disk, o, g, x) == doctest::Approx(klein_distance(v2(0, 0), gxc)).epsilon(1e-12));
}

TEST_CASE("geodesic parametrisation") {
  const ConvexDomain disk = ConvexDomain::unit_ball(2);
  const GeodesicChord g(disk, v2(0, 0), v2(1, 0));
  CHECK(g.point_at(0.0) == g.origin());
  CHECK(g.point_at(1.0)(0) == doctest::Approx(std::tanh(1.0)).epsilon(1e-14));
  CHECK(std::abs(g.point_at(1.0)(1)) < 1e-15);
  std::mt19937_64 rng(4);
  for (const ConvexDomain& d : {ConvexDomain::unit_ball(2), ConvexDomain::pnorm_ball(2, 4.0)}) {
    std::uniform_real_distribution<double> near(-5, 5), far(-15, 15);
    for (int i = 0; i < 200; ++i) {
      const Vec x = d.sample_interior(rng);
      const GeodesicChord c(d, x, d.sample_interior(rng) - x);
      const double s = near(rng), t = near(rng);
      CHECK(std::abs(hilbert_distance(d, c.point_at(s), c.point_at(t)) - std::abs(s - t)) < 1e-9);
      CHECK(c.time_of(c.point_at(s)) == doctest::Approx(s).epsilon(1e-8));
      // Further out the chart spacing of doubles limits the accuracy: the
      // boundary gap of G(t) is of order e^{-2|t|}.
      const double s2 = far(rng), t2 = far(rng);
      const double bound = 1e-9 + 1e-13 * std::exp(2 * std::max(std::abs(s2), std::abs(t2)));
      CHECK(std::abs(hilbert_distance(d, c.point_at(s2), c.point_at(t2)) - std::abs(s2 - t2)) < bound);
    }
  }
}

TEST_CASE("Busemann function examples") {
  const ConvexDomain disk = ConvexDomain::unit_ball(2);
  const Estimate b = busemann(disk, v2(1, 0), v2(0, 0), v2(0.5, 0));
  CHECK(b.value == doctest::Approx(std::atanh(0.5)).epsilon(1e-12));
  CHECK(b.error < 1e-7);
  CHECK(busemann(disk, v2(1, 0), v2(0.1, 0.2), v2(0.1, 0.2)).value == 0.0);
  CHECK_THROWS_AS(busemann(ConvexDomain::standard_simplex(2), v2(0.5, 0.5), v2(0.2, 0.2), v2(0.3, 0.2)), Error);
}

TEST_CASE("Busemann function against the Poisson kernel") {
  std::mt19937_64 rng(6);
  const ConvexDomain disk = ConvexDomain::unit_ball(2);
  for (int i = 0; i < 500; ++i) {
    const Vec xi = random_boundary(rng);
    const Vec x = random_in_disk(rng, 0.95), y = random_in_disk(rng, 0.95);
    const Estimate b = busemann(disk, xi, x, y);
    CHECK(std::abs(b.value - disk_busemann(xi, x, y)) < 1e-9);
    CHECK(std::abs(b.value) <= hilbert_distance(disk, x, y) + 1e-9);
    CHECK(std::abs(busemann_support_form(disk, xi, x, y) - disk_busemann(xi, x, y)) < 1e-9);
  }
}

TEST_CASE("Busemann identities on the p = 4 ball") {
  std::mt19937_64 rng(8);
  const ConvexDomain p4 = ConvexDomain::pnorm_ball(2, 4.0);
  for (int i = 0; i < 200; ++i) {
    const Vec xi = p4.sample_boundary(rng);
    const Vec x = p4.sample_interior(rng), y = p4.sample_interior(rng), z = p4.sample_interior(rng);
    const Estimate bxy = busemann(p4, xi, x, y), byz = busemann(p4, xi, y, z), bxz = busemann(p4, xi, x, z);
    CHECK(std::abs(bxy.value + byz.value - bxz.value) <= bxy.error + byz.error + bxz.error + 1e-9);
    CHECK(std::abs(bxy.value - busemann_support_form(p4, xi, x, y)) < 1e-7);
    // Horofoliation: along the ray towards xi the Busemann function is the distance.
    const GeodesicChord ray(p4, x, xi - x);
    const Vec w = ray.point_at(1.7);
    const Estimate bw = busemann(p4, xi, x, w);
    CHECK(std::abs(bw.value - hilbert_distance(p4, x, w)) <= bw.error + 1e-9);
  }
}

TEST_CASE("Busemann equivariance under an automorphism") {
  std::mt19937_64 rng(10);
  const ConvexDomain disk = ConvexDomain::unit_ball(2);
  Mat boost = Mat::Identity(3, 3);
  boost(0, 0) = boost(2, 2) = std::cosh(0.8);
  boost(1, 2) = 0.0;
  boost(0, 2) = boost(2, 0) = std::sinh(0.8);
  const ProjectiveMap g(boost);
  auto img = [&](const Vec& p) { return g.apply(ProjPoint::from_chart(p)).chart(); };
  for (int i = 0; i < 100; ++i) {
    const Vec xi = random_boundary(rng);
    const Vec x = random_in_disk(rng, 0.8), y = random_in_disk(rng, 0.8);
    const double a = busemann(disk, xi, x, y).value;
    const Vec gxi = img(xi);
    const double b = busemann(disk, gxi / gxi.norm(), img(x), img(y)).value;
    CHECK(std::abs(a - b) < 1e-9);
  }
}

TEST_CASE("Gromov products") {
  const ConvexDomain disk = ConvexDomain::unit_ball(2);
  const Estimate g = gromov_product(disk, v2(0, 0.5), v2(1, 0), v2(-1, 0));
  // log cosh of the distance arctanh(1/2) from the point to the line.
  CHECK(g.value == doctest::Approx(std::log(2.0 / std::sqrt(3.0))).epsilon(1e-10));
  CHECK(gromov_product(disk, v2(0.3, 0), v2(1, 0), v2(-1, 0)).value < 1e-9);
  CHECK_THROWS_AS(gromov_product(disk, v2(0, 0), v2(1, 0), v2(1, 0)), Error);
  std::mt19937_64 rng(12);
  for (int i = 0; i < 100; ++i) {
    const Vec xi = random_boundary(rng), eta = random_boundary(rng);
    const Vec x = random_in_disk(rng, 0.9), y = random_in_disk(rng, 0.9);
    const double gx = gromov_product(disk, x, xi, eta).value;
    const GeodesicChord line = GeodesicChord::between_boundary(disk, xi, eta);
    CHECK(gx >= 0.0);
    CHECK(gx <= distance_to_line(disk, x, line).value + 1e-9);
    // Basepoint change.
    const double gy = gromov_product(disk, y, xi, eta).value;
    const double rhs = 2 * gy + busemann(disk, xi, x, y).value + busemann(disk, eta, x, y).value;
    CHECK(std::abs(2 * gx - rhs) < 1e-8);
    CHECK(std::abs(gx - gy) <= hilbert_distance(disk, x, y) + 1e-9);
  }
}

TEST_CASE("distance to a line") {
  const ConvexDomain disk = ConvexDomain::unit_ball(2);
  const GeodesicChord axis(disk, v2(0, 0), v2(1, 0));
  const LineDistance on = distance_to_line(disk, v2(0.4, 0), axis);
  CHECK(on.value < 1e-9);
  const LineDistance off = distance_to_line(disk, v2(0, 0.5), axis);
  CHECK(off.value == doctest::Approx(std::atanh(0.5)).epsilon(1e-10));
  CHECK(std::abs(off.t) < 1e-10);
  // Golden section alone on a parabola.
  CHECK(golden_section_minimize([](double t) { return (t - 1.25) * (t - 1.25); }, -4, 7, 1e-10) ==
        doctest::Approx(1.25).epsilon(1e-9));
  // Ray constraint: the minimiser is clamped to the source.
  const LineDistance ray = distance_to_line(disk, v2(-0.5, 0.3), axis, 0.0);
  CHECK(ray.t == 0.0);
  CHECK(ray.value == doctest::Approx(hilbert_distance(disk, v2(-0.5, 0.3), v2(0, 0))).epsilon(1e-12));
  std::mt19937_64 rng(14);
  const ConvexDomain p4 = ConvexDomain::pnorm_ball(2, 4.0);
  for (int i = 0; i < 50; ++i) {
    const Vec x = p4.sample_interior(rng);
    const GeodesicChord c(p4, x, p4.sample_interior(rng) - x);
    const Vec z = p4.sample_interior(rng);
    const LineDistance best = distance_to_line(p4, z, c);
    // Restarts from three seeds agree.
    for (double shift : {-3.0, 0.5, 4.0}) {
      const LineDistance again = distance_to_line(p4, z, c, -std::numeric_limits<double>::infinity(), best.t + shift);
      CHECK(std::abs(again.t - best.t) < 1e-8);
      CHECK(std::abs(again.value - best.value) < 1e-12);
    }
    CHECK(std::abs(distance_to_line_derivative(p4, z, c, best.t)) < 1e-6);
  }
}

TEST_CASE("shadows") {
  std::mt19937_64 rng(16);
  const ConvexDomain disk = ConvexDomain::unit_ball(2);
  for (int i = 0; i < 100; ++i) {
    const Vec x = random_in_disk(rng, 0.6), y = random_in_disk(rng, 0.9);
    if ((x - y).norm() < 1e-3) continue;
    const double r = 0.5 + i * 0.02;
    const Shadow s = make_shadow(disk, x, y, r);
    const Vec fwd = disk.ray_boundary(x, y - x);
    CHECK(shadow_contains(disk, s, fwd));
    // Sandwich for points of the shadow.
    for (int k = 0; k < 5; ++k) {
      const Vec dir = random_boundary(rng);
      const Vec p = GeodesicChord(disk, y, dir).point_at(r * (k + 0.5) / 5.5);
      const Vec xi = disk.ray_boundary(x, p - x);
      REQUIRE(shadow_contains(disk, s, xi));
      const double d = hilbert_distance(disk, x, y);
      const double b = busemann(disk, xi, x, y).value;
      CHECK(d - 2 * r < b);
      CHECK(b <= d + 1e-9);
    }
  }
  // Large radius: the whole visual half-sphere behind y.
  const Shadow big = make_shadow(disk, v2(0, 0), v2(0.3, 0), 2.0);
  for (int k = 0; k < 50; ++k) {
    const double th = -M_PI / 2 + M_PI * k / 49.0;
    CHECK(shadow_contains(disk, big, v2(std::cos(th), std::sin(th))));
  }
  // Boundary source: the full chord is used.
  const Shadow bs = make_shadow(disk, v2(-1, 0), v2(0, 0.2), 0.3);
  CHECK(bs.source_on_boundary);
  CHECK(shadow_contains(disk, bs, v2(1, 0)));
  CHECK_FALSE(shadow_contains(disk, bs, v2(0, -1)));
  CHECK_THROWS_AS(make_shadow(disk, v2(0, 0), v2(0.2, 0), 0.0), Error);
}

TEST_CASE("horoballs are convex") {
  std::mt19937_64 rng(18);
  const ConvexDomain p4 = ConvexDomain::pnorm_ball(2, 4.0);
  const Vec xi = p4.sample_boundary(rng);
  const HoroballSpec h{xi, Vec::Zero(2)};
  int tested = 0;
  while (tested < 200) {
    const Vec a = p4.sample_interior(rng), b = p4.sample_interior(rng);
    if (!horoball_contains(p4, h, a) || !horoball_contains(p4, h, b)) continue;
    ++tested;
    CHECK(horoball_contains(p4, h, 0.5 * (a + b)));
  }
}

TEST_CASE("Crampon inequality") {
  std::mt19937_64 rng(20);
  std::uniform_real_distribution<double> speed(0.3, 2.0);
  for (const ConvexDomain& d : {ConvexDomain::unit_ball(2), ConvexDomain::pnorm_ball(2, 4.0)}) {
    const GeodesicChord self(d, d.interior_point(), Vec::Unit(2, 0));
    CHECK(crampon_gap(d, self, self, 5.0));
    for (int i = 0; i < 100; ++i) {
      const Vec x1 = d.sample_interior(rng), x2 = d.sample_interior(rng);
      const GeodesicChord g1(d, x1, d.sample_interior(rng) - x1), g2(d, x2, d.sample_interior(rng) - x2);
      CHECK(crampon_slack(d, g1, g2, 5.0, speed(rng), speed(rng)) >= -1e-9);
    }
  }
}

TEST_CASE("Hopf coordinates") {
  std::mt19937_64 rng(22);
  const ConvexDomain disk = ConvexDomain::unit_ball(2);
  const Vec o = Vec::Zero(2);
  for (int i = 0; i < 50; ++i) {
    const Vec p = random_in_disk(rng, 0.8);
    const Vec dir = random_boundary(rng);
    const HopfVector v = hopf_coordinates(disk, o, p, dir);
    CHECK((hopf_footpoint(disk, o, v) - p).norm() < 1e-9);
    CHECK(busemann(disk, v.eta, o, hopf_footpoint(disk, o, v)).value == doctest::Approx(v.t).epsilon(1e-9));
    const HopfVector f = hopf_flip(disk, o, v);
    CHECK((hopf_footpoint(disk, o, f) - p).norm() < 1e-8);
    const HopfVector ff = hopf_flip(disk, o, f);
    CHECK(ff.t == doctest::Approx(v.t).epsilon(1e-9));
    CHECK((ff.xi - v.xi).norm() == 0.0);
  }
}
