#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>

#include "hlab/geometry.hpp"
#include "hlab/group.hpp"
#include "hlab/presets.hpp"
#include "hlab/ps_lab.hpp"

using namespace hlab;

namespace {

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::InvalidArgument;
}

// Upper half-space model: a horizontal translation by v moves the point at
// height 1 a distance acosh(1 + |v|^2 / 2).
double horizontal_translation_distance(double v_norm) { return std::acosh(1.0 + 0.5 * v_norm * v_norm); }

const GroupScenario& schottky() {
  static const GroupScenario s = scenario_preset("schottky-2");
  return s;
}

const OrbitBall& schottky_ball() {
  static const OrbitBall b = orbit_ball(schottky(), 10.0);
  return b;
}

// Rough exponent of the radius-10 ball, only used to choose s above it.
constexpr double kDelta = 0.75;

}  // namespace

TEST_CASE("poincare series at s = 0 counts the ball and decreases in s") {
  const OrbitBall& b = schottky_ball();
  CHECK(poincare_series(b, 0.0).partial_sum == doctest::Approx(static_cast<double>(b.size())).epsilon(1e-15));
  double prev = poincare_series(b, 0.0).partial_sum;
  for (double s = 0.1; s < 3.0; s += 0.1) {
    const double cur = poincare_series(b, s).partial_sum;
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("poincare series far above the exponent has a geometrically decaying tail") {
  const PoincareSeries p = poincare_series(schottky_ball(), 10.0 * kDelta);
  CHECK_FALSE(p.diverging);
  CHECK(p.tail_slope < -3.0);
  for (std::size_t k = 3; k < p.shell_sums.size(); ++k) CHECK(p.shell_sums[k] < p.shell_sums[k - 1]);
}

TEST_CASE("parabolic orbit distances follow the horocyclic formula") {
  const GroupScenario p1 = scenario_preset("parabolic-rank-1");
  const Vec o1 = p1.basepoint_homogeneous();
  for (int n = 1; n <= 40; ++n) {
    const ProjectiveMap g = p1.element(Word(static_cast<std::size_t>(n), 1));
    CHECK(orbit_distance(p1.domain, o1, g, o1) == doctest::Approx(horizontal_translation_distance(n)).epsilon(1e-9));
  }
  const GroupScenario p2 = scenario_preset("parabolic-rank-2");
  const Vec o2 = p2.basepoint_homogeneous();
  for (int a = -5; a <= 5; ++a)
    for (int c = -5; c <= 5; ++c) {
      if (a == 0 && c == 0) continue;
      Word w(static_cast<std::size_t>(std::abs(a)), a > 0 ? 1 : -1);
      w.insert(w.end(), static_cast<std::size_t>(std::abs(c)), c > 0 ? 2 : -2);
      const double ref = horizontal_translation_distance(std::hypot(a, c));
      CHECK(orbit_distance(p2.domain, o2, p2.element(w), o2) == doctest::Approx(ref).epsilon(1e-9));
    }
}

TEST_CASE("rank-1 parabolic divergence bracket sits at one half") {
  const OrbitBall b = orbit_ball(scenario_preset("parabolic-rank-1"), 14.0);
  const PoincareBracket br = poincare_bracket(b);
  CHECK(br.lo <= br.hi);
  CHECK(std::abs(0.5 * (br.lo + br.hi) - 0.5) <= 0.05);
  const CriticalExponentEstimate e = critical_exponent(b);
  CHECK(e.delta_hat == doctest::Approx(0.5).epsilon(0.1));
  CHECK(e.radii_used.size() >= 4);
  CHECK(e.bracket_agrees);
}

TEST_CASE("critical exponent needs radius 8") {
  CHECK(kind_of([] { critical_exponent(schottky(), 6.0); }) == ErrorKind::InsufficientData);
}

TEST_CASE("longer schottky generators lower the exponent") {
  const CriticalExponentEstimate a = critical_exponent(scenario_preset("schottky-2"), 12.0);
  const CriticalExponentEstimate b = critical_exponent(scenario_preset("schottky-2-long"), 12.0);
  const CriticalExponentEstimate c = critical_exponent(scenario_preset("schottky-2-xlong"), 12.0);
  CHECK(a.delta_hat > b.delta_hat);
  CHECK(b.delta_hat > c.delta_hat);
  // a free group acting convex cocompactly is not a lattice
  CHECK(a.delta_hat + 3.0 * a.fit_stderr < 1.0);
  std::size_t prev = 0;
  for (std::size_t n : a.counts_used) {
    CHECK(n >= prev);
    prev = n;
  }
}

TEST_CASE("ps density normalisation, conformality and equivariance") {
  const GroupScenario& s = schottky();
  const OrbitBall& b = schottky_ball();
  const double sv = kDelta * 1.02;
  CHECK(kind_of([&] { ps_density(s, b, s.basepoint, kDelta, kDelta); }) == ErrorKind::SubcriticalParameter);
  CHECK(kind_of([&] { ps_density(s, b, s.basepoint, 0.5, kDelta); }) == ErrorKind::SubcriticalParameter);

  const AtomicMeasure mu = ps_density(s, b, s.basepoint, sv, kDelta);
  CHECK(mu.total_mass == doctest::Approx(1.0).epsilon(1e-12));
  double sum = 0.0;
  for (const auto& a : mu.atoms) {
    CHECK(a.weight > 0.0);
    sum += a.weight;
  }
  CHECK(sum == doctest::Approx(mu.total_mass).epsilon(1e-12));

  const Vec xp = v2(0.1, -0.25);
  const AtomicMeasure mu2 = ps_density(s, b, xp, sv, kDelta);
  // independent weight ratio from the chart distances
  for (std::size_t i = 0; i < b.size(); i += 37) {
    const Vec go = mu.atoms[i].point.chart();
    const double ref = std::exp(-sv * (hilbert_distance(s.domain, go, xp) - hilbert_distance(s.domain, go, s.basepoint)));
    CHECK(mu2.atoms[i].weight / mu.atoms[i].weight == doctest::Approx(ref).epsilon(1e-9));
  }
  const ConformalityReport c = conformality_check(s, b, mu, mu2, 20);
  CHECK(c.far_atoms == 20);
  CHECK(c.exact_error <= 1e-9);
  CHECK(c.far_error <= 0.05);

  const ProjectiveMap& g = s.letter(1);
  const Vec gxh = g.apply(mu2.x.homogeneous());
  const Vec gx = gxh.head(2) / gxh(2);
  const AtomicMeasure mug = ps_density(s, b, gx, sv, kDelta);
  const EquivarianceReport eq = equivariance_check(s, b, mu2, mug, g);
  CHECK(eq.matched > 100);
  CHECK(eq.max_log_error <= 1e-9);
}

TEST_CASE("ps density weights do not depend on enumeration order") {
  const GroupScenario& s = schottky();
  OrbitBall shuffled = schottky_ball();
  std::mt19937_64 rng(5);
  std::shuffle(shuffled.elements.begin(), shuffled.elements.end(), rng);
  const AtomicMeasure a = ps_density(s, schottky_ball(), v2(0.2, 0.1), 0.8, kDelta);
  const AtomicMeasure b = ps_density(s, shuffled, v2(0.2, 0.1), 0.8, kDelta);
  std::map<Word, double> by_word;
  for (const auto& atom : a.atoms) by_word[schottky_ball().elements[atom.element].g.word()] = atom.weight;
  for (const auto& atom : b.atoms)
    CHECK(atom.weight == doctest::Approx(by_word.at(shuffled.elements[atom.element].g.word())).epsilon(1e-12));
}

TEST_CASE("shadow masses grow with r and the band must be non-empty") {
  const GroupScenario& s = schottky();
  const OrbitBall& b = schottky_ball();
  const AtomicMeasure mu = ps_density(s, b, s.basepoint, kDelta * 1.02, kDelta);
  const ShadowAudit r2 = shadow_audit(s, b, mu, kDelta, 2.0, 4.0, 8.0, false);
  const ShadowAudit r4 = shadow_audit(s, b, mu, kDelta, 4.0, 4.0, 8.0, false);
  REQUIRE(r2.rows.size() == r4.rows.size());
  REQUIRE(!r2.rows.empty());
  for (std::size_t i = 0; i < r2.rows.size(); ++i) {
    CHECK(r2.rows[i].element == r4.rows[i].element);
    CHECK(r4.rows[i].mass >= r2.rows[i].mass);
    CHECK(r2.rows[i].distance >= 4.0);
  }
  CHECK(r2.ratio >= 1.0);
  CHECK(kind_of([&] { shadow_audit(s, b, mu, kDelta, 2.0, 4.1, 4.3, false); }) == ErrorKind::InsufficientData);
}

TEST_CASE("shadow sandwich holds on a small band") {
  const GroupScenario& s = schottky();
  const OrbitBall& b = schottky_ball();
  const AtomicMeasure mu = ps_density(s, b, s.basepoint, kDelta * 1.02, kDelta);
  const ShadowAudit a = shadow_audit(s, b, mu, kDelta, 2.0, 4.0, 6.0, true);
  CHECK(a.sandwich_checks > 0);
  CHECK(a.sandwich_violations == 0);
  CHECK(a.max_busemann_error < 1e-7);
}

TEST_CASE("sullivan density: chord through x, flip and basepoint change") {
  const ConvexDomain disk = ConvexDomain::unit_ball(2);
  HopfVector v{v2(1, 0), v2(-1, 0), 0.4};
  CHECK(sullivan_density(disk, v2(0.3, 0), v, 0.7) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(kind_of([&] { sullivan_density(disk, v2(0, 0), HopfVector{v2(1, 0), v2(1, 0), 0.0}, 0.7); }) ==
        ErrorKind::DegenerateChord);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * std::numbers::pi);
  for (int i = 0; i < 50; ++i) {
    const double a = ang(rng), c = ang(rng);
    if (std::abs(std::remainder(a - c, 2.0 * std::numbers::pi)) < 0.1) continue;
    const HopfVector h{v2(std::cos(a), std::sin(a)), v2(std::cos(c), std::sin(c)), 0.3};
    const Vec x = v2(0.2, -0.3), y = v2(-0.4, 0.1);
    const double dens = sullivan_density(disk, x, h, 0.7);
    CHECK(sullivan_density(disk, x, hopf_flip(disk, Vec::Zero(2), h), 0.7) == doctest::Approx(dens).epsilon(1e-9));
    CHECK(sullivan_basepoint_ratio(disk, x, y, h, 0.7) == doctest::Approx(1.0).epsilon(1e-6));
    // same ratio assembled from Gromov products and Busemann functions
    const double wxi = std::exp(-0.7 * busemann(disk, h.xi, y, x).value);
    const double weta = std::exp(-0.7 * busemann(disk, h.eta, y, x).value);
    CHECK(sullivan_density(disk, y, h, 0.7, wxi, weta) / dens == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("orbit counting from the basepoint matches the orbit ball") {
  const GroupScenario& s = schottky();
  const std::vector<double> radii{0.0, 2.0, 4.0, 6.0, 8.0};
  const OrbitCountingResult oc = orbit_counting_experiment(s, s.basepoint, s.basepoint, radii, kDelta);
  REQUIRE(oc.rows.size() == radii.size());
  CHECK(oc.rows[0].count == 1);
  const OrbitBall b = orbit_ball(s, 8.0);
  for (std::size_t i = 0; i < radii.size(); ++i) {
    CHECK(oc.rows[i].count == b.count_within(radii[i]));
    if (i) CHECK(oc.rows[i].count >= oc.rows[i - 1].count);
    CHECK(oc.rows[i].normalized == doctest::Approx(oc.rows[i].count * std::exp(-kDelta * radii[i])));
  }
}

TEST_CASE("geodesic counting: single letters and conjugated generators") {
  const GroupScenario& s = schottky();
  const GeodesicCountingResult one = geodesic_counting_experiment(s, 1, kDelta);
  CHECK(one.classes == 4);
  REQUIRE(one.rows.size() == 1);
  CHECK(one.rows[0].length == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(one.rows[0].count == 4);

  // conjugating by a disk isometry keeps every translation length
  const Mat h = disk_translation(0.4, 1.1) * disk_rotation(0.3);
  std::vector<Mat> gens;
  for (const auto& g : s.generators) gens.push_back(h * g.matrix() * h.inverse());
  const GroupScenario t = make_scenario("conjugated", s.domain, gens, s.basepoint, true);
  const ConjugacyClassList a = primitive_conjugacy_classes(s, 6);
  const ConjugacyClassList b = primitive_conjugacy_classes(t, 6);
  REQUIRE(a.classes.size() == b.classes.size());
  for (std::size_t i = 0; i < a.classes.size(); ++i)
    CHECK(a.classes[i].translation_length == doctest::Approx(b.classes[i].translation_length).epsilon(1e-9));
}

TEST_CASE("equidistribution cross-ratios: repeated caps and swapped pairs") {
  const GroupScenario s = scenario_preset("schottky-2-generic");
  const Vec o = s.basepoint_homogeneous();
  auto anchor = [&](Word w) {
    const Vec p = s.element(w).apply(o);
    return Vec(p.head(2) / p(2));
  };
  const Cap a{anchor({1}), 1.0}, a2{anchor({2}), 1.0}, b{anchor({-1}), 1.0}, b2{anchor({-2}), 1.0};
  const std::vector<double> radii{6.0, 7.0, 8.0};
  const EquidistributionResult same = equidistribution_experiment(s, s.basepoint, s.basepoint, a, a, b, b, radii, 0.68);
  for (const auto& row : same.rows) CHECK(row.cross_ratio == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(same.measure_cross_ratio == doctest::Approx(1.0).epsilon(1e-12));

  const EquidistributionResult fwd = equidistribution_experiment(s, s.basepoint, s.basepoint, a, a2, b, b2, radii, 0.68);
  const EquidistributionResult rev = equidistribution_experiment(s, s.basepoint, s.basepoint, a, a2, b2, b, radii, 0.68);
  REQUIRE(fwd.rows.size() == rev.rows.size());
  for (std::size_t i = 0; i < fwd.rows.size(); ++i)
    CHECK(fwd.rows[i].cross_ratio * rev.rows[i].cross_ratio == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fwd.measure_cross_ratio * rev.measure_cross_ratio == doctest::Approx(1.0).epsilon(1e-9));
}
