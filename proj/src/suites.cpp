#include "hlab/suites.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "hlab/geometry.hpp"
#include "hlab/presets.hpp"

namespace hlab {

bool SuiteReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const SuiteCheck& c) { return c.pass; });
}

namespace {

std::mt19937_64 seeded(std::uint64_t seed, std::size_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

Vec hom(const Vec& x) {
  Vec h(x.size() + 1);
  h.head(x.size()) = x;
  h(x.size()) = 1.0;
  return h;
}

Vec chart(const Vec& h) { return h.head(h.size() - 1) / h(h.size() - 1); }

SuiteCheck at_most(const std::string& domain, const std::string& name, double value, double threshold) {
  return {domain, name, value, threshold, value <= threshold};
}

SuiteCheck at_least(const std::string& domain, const std::string& name, double value, double threshold) {
  return {domain, name, value, threshold, value >= threshold};
}

}  // namespace

SuiteReport klein_model_suite(int samples, std::uint64_t seed) {
  SuiteReport rep{"klein-model", {}};
  for (int n : {2, 3}) {
    const ConvexDomain d = ConvexDomain::unit_ball(n);
    auto rng = seeded(seed, static_cast<std::size_t>(n));
    double worst = 0.0;
    for (int i = 0; i < samples / 2; ++i) {
      const Vec x = d.sample_interior(rng), y = d.sample_interior(rng);
      const double xy = x.dot(y);
      const double chord = std::sqrt(std::max(0.0, (x - y).squaredNorm() - (x.squaredNorm() * y.squaredNorm() - xy * xy)));
      worst = std::max(worst, std::abs(hilbert_distance(d, x, y) - std::atanh(chord / (1.0 - xy))));
    }
    rep.checks.push_back(at_most(n == 2 ? "disk" : "ball3", "max |d - d_klein|", worst, 1e-9));
  }
  return rep;
}

SuiteReport metric_axioms_suite(const std::vector<std::string>& domains, int samples, std::uint64_t seed) {
  SuiteReport rep{"metric-axioms", {}};
  for (std::size_t k = 0; k < domains.size(); ++k) {
    const ConvexDomain d = domain_preset(domains[k]);
    const std::vector<ProjectiveMap> autos = domain_automorphisms(domains[k]);
    auto rng = seeded(seed, k);
    double sym = 0.0, slack = std::numeric_limits<double>::infinity(), inv = 0.0;
    for (int i = 0; i < samples; ++i) {
      const Vec x = d.sample_interior(rng), y = d.sample_interior(rng), z = d.sample_interior(rng);
      const double dxy = hilbert_distance(d, x, y);
      sym = std::max(sym, std::abs(dxy - hilbert_distance(d, y, x)));
      slack = std::min(slack, dxy + hilbert_distance(d, y, z) - hilbert_distance(d, x, z));
      for (const auto& g : autos)
        inv = std::max(inv, std::abs(hilbert_distance(d, chart(g.apply(hom(x))), chart(g.apply(hom(y)))) - dxy));
    }
    rep.checks.push_back(at_most(domains[k], "max symmetry defect", sym, 1e-12));
    rep.checks.push_back(at_least(domains[k], "min triangle slack", slack, -1e-10));
    rep.checks.push_back(at_most(domains[k], "max invariance defect", inv, 1e-9));
  }
  return rep;
}

SuiteReport crampon_suite(const std::vector<std::string>& domains, int pairs, double T, std::uint64_t seed) {
  SuiteReport rep{"crampon", {}};
  for (std::size_t k = 0; k < domains.size(); ++k) {
    const ConvexDomain d = domain_preset(domains[k]);
    auto rng = seeded(seed, 100 + k);
    std::uniform_real_distribution<double> speed(0.3, 2.0);
    double worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i < pairs; ++i) {
      const Vec x1 = d.sample_interior(rng), x2 = d.sample_interior(rng);
      const Vec t1 = d.sample_interior(rng), t2 = d.sample_interior(rng);
      if (!((t1 - x1).norm() > 0.0) || !((t2 - x2).norm() > 0.0)) continue;
      const GeodesicChord g1(d, x1, t1 - x1), g2(d, x2, t2 - x2);
      const double s1 = speed(rng), s2 = speed(rng);
      worst = std::min(worst, crampon_slack(d, g1, g2, T, s1, s2));
    }
    rep.checks.push_back(at_least(domains[k], "min Crampon slack", worst, -1e-9));
  }
  return rep;
}

SuiteReport busemann_suite(const std::vector<std::string>& domains, int configurations, std::uint64_t seed) {
  SuiteReport rep{"busemann", {}};
  for (std::size_t k = 0; k < domains.size(); ++k) {
    const ConvexDomain d = domain_preset(domains[k]);
    auto rng = seeded(seed, 200 + k);
    std::uniform_real_distribution<double> time(0.0, 5.0);
    const auto j = d.quadric();
    double cocycle = 0.0, horo = 0.0, max_err = 0.0, closed = 0.0;
    for (int i = 0; i < configurations; ++i) {
      const Vec xi = d.sample_boundary(rng);
      const Vec x = d.sample_interior(rng), y = d.sample_interior(rng), z = d.sample_interior(rng);
      const Estimate bxy = busemann(d, xi, x, y), byz = busemann(d, xi, y, z), bxz = busemann(d, xi, x, z);
      cocycle = std::max(cocycle, std::abs(bxy.value + byz.value - bxz.value) - (bxy.error + byz.error + bxz.error));
      const double t = time(rng);
      const Vec p = GeodesicChord(d, x, xi - x).point_at(t);
      const Estimate bt = busemann(d, xi, x, p);
      horo = std::max(horo, std::abs(bt.value - t) - bt.error);
      max_err = std::max({max_err, bxy.error, byz.error, bxz.error, bt.error});
      if (j) {
        // log(B(xi, x) / B(xi, y)) + 1/2 log(q(y) / q(x)) for the quadric q
        const Vec X = hom(x), Y = hom(y), Xi = hom(xi);
        const double ref = std::log((Xi.dot(*j * X)) / (Xi.dot(*j * Y))) +
                           0.5 * std::log((Y.dot(*j * Y)) / (X.dot(*j * X)));
        closed = std::max(closed, std::abs(bxy.value - ref));
      }
    }
    rep.checks.push_back(at_most(domains[k], "cocycle excess over reported error", cocycle, 1e-12));
    rep.checks.push_back(at_most(domains[k], "horofoliation excess over reported error", horo, 1e-12));
    rep.checks.push_back(at_most(domains[k], "max reported error", max_err, 1e-7));
    if (j) rep.checks.push_back(at_most(domains[k], "max closed-form error", closed, 1e-9));
  }
  return rep;
}

}  // namespace hlab
