#include "hlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hlab/errors.hpp"

namespace hlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMaxChordTime = 17.0;  // beyond this the chart cannot resolve the point

double logit(double u) { return std::log(u) - std::log1p(-u); }

}  // namespace

// ---------------------------------------------------------------- distance

double hilbert_distance(const ConvexDomain& d, const Vec& x, const Vec& y) {
  if (!d.contains(x) || !d.contains(y)) throw Error(ErrorKind::OutsideDomain, "distance query outside the domain");
  const Vec v = y - x;
  if (v.norm() == 0.0) return 0.0;
  const double back = d.exit_parameter(x, -v);
  const double fwd = d.exit_parameter(y, v);
  return 0.5 * (std::log1p(1.0 / back) + std::log1p(1.0 / fwd));
}

double hilbert_distance(const ConvexDomain& d, const ProjPoint& x, const ProjPoint& y) {
  if (!d.contains(x) || !d.contains(y)) throw Error(ErrorKind::OutsideDomain, "distance query outside the domain");
  return hilbert_distance(d, x.chart(), y.chart());
}

double ellipsoid_orbit_distance(const ConvexDomain& d, const Vec& x_hom, const ProjectiveMap& g, const Vec& y_hom) {
  const auto j = d.quadric();
  if (!j) throw Error(ErrorKind::UnsupportedScenario, "orbit distance formula needs an ellipsoid");
  const int n = d.dimension();
  const Vec gy = g.matrix() * y_hom;
  const double qx = x_hom.dot(*j * x_hom);
  const double qy = y_hom.dot(*j * y_hom);
  const double bxy = x_hom.dot(*j * gy);
  if (!(qx < 0.0) || !(qy < 0.0)) throw Error(ErrorKind::OutsideDomain, "orbit distance query outside the domain");
  const double log_c = 2.0 / (n + 1) * g.log_abs_det();
  const double l = std::log(std::abs(bxy)) - 0.5 * (std::log(-qx) + log_c + std::log(-qy));
  if (l > std::log(1.5)) return l + std::log1p(std::sqrt(-std::expm1(-2.0 * l)));
  // Short distances: the chart is accurate, and arccosh is not.
  const Vec x = x_hom.head(n) / x_hom(n);
  const Vec z = gy.head(n) / gy(n);
  return hilbert_distance(d, x, z);
}

// ------------------------------------------------------------------ chords

GeodesicChord::GeodesicChord(const ConvexDomain& d, Vec a, Vec b, Vec origin, double logit_origin)
    : domain_(&d), a_(std::move(a)), b_(std::move(b)), origin_(std::move(origin)), logit_origin_(logit_origin) {}

GeodesicChord::GeodesicChord(const ConvexDomain& d, const Vec& x, const Vec& dir) : domain_(&d), origin_(x) {
  if (!(dir.norm() > 0.0)) throw Error(ErrorKind::DegenerateChord, "chord direction is zero");
  const double back = d.exit_parameter(x, -dir);
  const double fwd = d.exit_parameter(x, dir);
  a_ = x - back * dir;
  b_ = x + fwd * dir;
  logit_origin_ = std::log(back) - std::log(fwd);
}

GeodesicChord GeodesicChord::between_boundary(const ConvexDomain& d, const Vec& a, const Vec& b) {
  if (!((b - a).norm() > kBoundaryTolerance * d.diameter())) throw Error(ErrorKind::DegenerateChord, "chord endpoints coincide");
  return GeodesicChord(d, a, b, 0.5 * (a + b), 0.0);
}

GeodesicChord GeodesicChord::through(const ConvexDomain& d, const Vec& x, const Vec& y) {
  if (!((y - x).norm() > 0.0)) throw Error(ErrorKind::DegenerateChord, "chord through a single point");
  return GeodesicChord(d, x, y - x);
}

Vec GeodesicChord::point_at(double t) const {
  if (t == 0.0) return origin_;
  const double l = logit_origin_ + 2.0 * t;
  if (l > 0.0) {
    const double v = 1.0 / (1.0 + std::exp(l));
    return b_ + v * (a_ - b_);
  }
  const double u = 1.0 / (1.0 + std::exp(-l));
  return a_ + u * (b_ - a_);
}

Vec GeodesicChord::velocity_at(double t) const {
  const double l = logit_origin_ + 2.0 * t;
  const double c = std::cosh(0.5 * l);
  return (0.5 / (c * c)) * (b_ - a_);
}

double GeodesicChord::time_of(const Vec& p) const {
  const Vec ab = b_ - a_;
  const double len2 = ab.squaredNorm();
  const double u = (p - a_).dot(ab) / len2;
  const double v = (b_ - p).dot(ab) / len2;
  return 0.5 * (std::log(u) - std::log(v) - logit_origin_);
}

// -------------------------------------------------------- line distances

double golden_section_minimize(const std::function<double(double)>& f, double lo, double hi, double tol) {
  const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = hi - inv_phi * (hi - lo);
  double e = lo + inv_phi * (hi - lo);
  double fc = f(c), fe = f(e);
  while (hi - lo > tol) {
    if (fc <= fe) {
      hi = e;
      e = c;
      fe = fc;
      c = hi - inv_phi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = e;
      fc = fe;
      e = lo + inv_phi * (hi - lo);
      fe = f(e);
    }
  }
  return fc <= fe ? c : e;
}

double distance_to_line_derivative(const ConvexDomain& d, const Vec& z, const GeodesicChord& g, double t) {
  const Vec p = g.point_at(t);
  const Vec w = p - z;
  if (!(w.norm() > 0.0)) return 0.0;
  const Vec dp = g.velocity_at(t);
  const double back = d.exit_parameter(z, -w);
  const double fwd = d.exit_parameter(p, w);
  const Vec ga = d.gradient(z - back * w);
  const Vec gb = d.gradient(p + fwd * w);
  return 0.5 * (ga.dot(dp) / ((1.0 + back) * ga.dot(w)) + gb.dot(dp) / (fwd * gb.dot(w)));
}

LineDistance distance_to_line(const ConvexDomain& d, const Vec& z, const GeodesicChord& g, double t_min,
                              std::optional<double> seed) {
  auto f = [&](double t) {
    const Vec p = g.point_at(t);
    if (!d.contains(p)) return kInf;
    return hilbert_distance(d, z, p);
  };
  const double lower = std::max(t_min, -kMaxChordTime);
  const double upper = kMaxChordTime;
  double c;
  if (seed) {
    c = std::clamp(*seed, lower, upper);
  } else {
    const Vec ab = g.b() - g.a();
    const double len2 = ab.squaredNorm();
    const double u = std::clamp((z - g.a()).dot(ab) / len2, 1e-9, 1.0 - 1e-9);
    c = std::clamp(0.5 * logit(u) - 0.5 * (std::log((g.origin() - g.a()).dot(ab) / len2) -
                                            std::log((g.b() - g.origin()).dot(ab) / len2)),
                   lower, upper);
  }
  double fc = f(c);
  double h = 1.0;
  double a = std::max(lower, c - h), b = std::min(upper, c + h);
  double fa = f(a), fb = f(b);
  while (a > lower && fa < fc) {
    b = c;
    c = a;
    fc = fa;
    h *= 2.0;
    a = std::max(lower, c - h);
    fa = f(a);
  }
  while (b < upper && fb < fc) {
    a = c;
    c = b;
    fc = fb;
    h *= 2.0;
    b = std::min(upper, c + h);
    fb = f(b);
  }
  double t = golden_section_minimize(f, a, b, 1e-6);
  // Refine on the derivative sign inside a bracket around the coarse minimum.
  auto df = [&](double s) {
    if (!d.contains(g.point_at(s))) return s > t ? 1.0 : -1.0;
    return distance_to_line_derivative(d, z, g, s);
  };
  double lo = std::max(a, t - 1e-5), hi = std::min(b, t + 1e-5);
  double step = 1e-5;
  while (lo > a && df(lo) > 0.0) lo = std::max(a, lo - (step *= 2.0));
  step = 1e-5;
  while (hi < b && df(hi) < 0.0) hi = std::min(b, hi + (step *= 2.0));
  if (df(lo) >= 0.0) {
    t = lo;
  } else if (df(hi) <= 0.0) {
    t = hi;
  } else {
    while (hi - lo > 1e-12 * (1.0 + std::abs(lo))) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      const double dm = df(mid);
      if (dm == 0.0) {
        lo = hi = mid;
        break;
      }
      if (dm < 0.0)
        lo = mid;
      else
        hi = mid;
    }
    t = 0.5 * (lo + hi);
  }
  return LineDistance{f(t), t, g.point_at(t)};
}

// ---------------------------------------------------------------- Busemann

Estimate busemann(const ConvexDomain& d, const Vec& xi, const Vec& x, const Vec& y) {
  if (!d.strictly_convex_c1()) throw Error(ErrorKind::UnsupportedScenario, "Busemann functions need a strictly convex C1 domain");
  if (!d.contains(x) || !d.contains(y)) throw Error(ErrorKind::OutsideDomain, "Busemann query outside the domain");
  if (!d.on_boundary(xi)) throw Error(ErrorKind::InvalidGeometry, "Busemann centre is not a boundary point");
  if (x == y) return {0.0, 0.0};
  const Vec v = x - xi;
  const double alpha = d.exit_parameter(x, v);
  auto beta_at = [&](double t) {
    // z_t on [x, xi) with d(x, z_t) = t, kept as xi + offset.
    const double sigma = (1.0 + alpha) / (1.0 + alpha * std::exp(2.0 * t));
    const Vec offset = sigma * v;
    const Vec w = (xi - y) + offset;
    if (!(w.norm() > 0.0)) return t;
    const double back = d.exit_parameter(y, -w);
    const double fwd = d.exit_parameter_near(xi, offset, w);
    return t - 0.5 * (std::log1p(1.0 / back) + std::log1p(1.0 / fwd));
  };
  // d(x, z_t) - d(y, z_t) settles like exp(-2 (t - d(x, y)))
  const double base = hilbert_distance(d, x, y);
  const double b1 = beta_at(base + 8.0), b2 = beta_at(base + 12.0), b3 = beta_at(base + 16.0);
  const double d1 = b2 - b1, d2 = b3 - b2;
  // rounding of the chart coordinates of x and y, amplified by their
  // closeness to the boundary
  const double eps = std::numeric_limits<double>::epsilon();
  auto chart_noise = [&](const Vec& p) {
    return eps * (1.0 + p.norm()) * d.gradient(p).norm() / std::abs(d.defining(p));
  };
  const double floor = 64.0 * eps * (1.0 + std::abs(b3));
  const double rounding = 4.0 * (chart_noise(x) + chart_noise(y));
  Estimate out{b3, std::abs(d2) + floor};
  const double denom = d2 - d1;
  if (std::abs(d2) > floor && denom != 0.0 && d2 / d1 > 0.0 && d2 / d1 < 0.9) {
    const double acc = b3 - d2 * d2 / denom;
    out = Estimate{acc, std::abs(acc - b3) + floor};
  }
  if (!std::isfinite(out.value) || out.error > 1e-7)
    throw Error(ErrorKind::NumericalFailure, "Busemann extrapolation did not converge");
  out.error += rounding;
  return out;
}

double busemann_support_form(const ConvexDomain& d, const Vec& xi, const Vec& x, const Vec& y) {
  const AffineFunctional phi = d.supporting_hyperplane(xi);
  const Vec vx = x - xi, vy = y - xi;
  const double ax = d.exit_parameter(x, vx);
  const double ay = d.exit_parameter(y, vy);
  // |a_x xi| / |a_x x| = (1 + ax) / ax along the chord from xi through x.
  const double num = std::log1p(ax) - std::log(ax) + std::log(-phi(x));
  const double den = std::log1p(ay) - std::log(ay) + std::log(-phi(y));
  return 0.5 * (num - den);
}

Estimate gromov_product(const ConvexDomain& d, const Vec& x, const Vec& xi, const Vec& eta) {
  if (!((xi - eta).norm() > kBoundaryTolerance * d.diameter())) throw Error(ErrorKind::DegenerateChord, "Gromov product of coincident points");
  const Vec u = 0.5 * (xi + eta);
  const Estimate bx = busemann(d, xi, x, u);
  const Estimate be = busemann(d, eta, x, u);
  return {std::max(0.0, 0.5 * (bx.value + be.value)), 0.5 * (bx.error + be.error)};
}

bool horoball_contains(const ConvexDomain& d, const HoroballSpec& h, const Vec& y) {
  return busemann(d, h.center, h.basepoint, y).value > 0.0;
}

// ----------------------------------------------------------------- shadows

Shadow make_shadow(const ConvexDomain& d, const Vec& source, const Vec& target, double r) {
  if (!(r > 0.0) || !std::isfinite(r)) throw Error(ErrorKind::InvalidGeometry, "shadow radius must be positive");
  if (!d.contains(target)) throw Error(ErrorKind::OutsideDomain, "shadow target outside the domain");
  if (!((source - target).norm() > 0.0)) throw Error(ErrorKind::InvalidGeometry, "shadow source equals target");
  Shadow s{source, target, r, false};
  if (!d.contains(source)) {
    if (!d.on_boundary(source)) throw Error(ErrorKind::OutsideDomain, "shadow source outside the closed domain");
    s.source_on_boundary = true;
  }
  return s;
}

double shadow_distance(const ConvexDomain& d, const Shadow& s, const Vec& xi) {
  if (s.source_on_boundary) {
    const GeodesicChord g = GeodesicChord::between_boundary(d, s.source, xi);
    return distance_to_line(d, s.target, g).value;
  }
  const GeodesicChord g(d, s.source, xi - s.source);
  return distance_to_line(d, s.target, g, 0.0).value;
}

bool shadow_contains(const ConvexDomain& d, const Shadow& s, const Vec& xi) {
  return shadow_distance(d, s, xi) <= s.radius;
}

// ---------------------------------------------------------------- Crampon

double crampon_slack(const ConvexDomain& d, const GeodesicChord& g1, const GeodesicChord& g2, double T, double speed1,
                     double speed2, int grid) {
  auto gap = [&](double t) { return hilbert_distance(d, g1.point_at(speed1 * t), g2.point_at(speed2 * t)); };
  const double bound = gap(0.0) + gap(T);
  double slack = kInf;
  for (int i = 0; i < grid; ++i) {
    const double t = T * i / (grid - 1);
    slack = std::min(slack, bound - gap(t));
  }
  return slack;
}

bool crampon_gap(const ConvexDomain& d, const GeodesicChord& g1, const GeodesicChord& g2, double T, double speed1,
                 double speed2, int grid) {
  return crampon_slack(d, g1, g2, T, speed1, speed2, grid) >= -1e-9;
}

// -------------------------------------------------------------------- Hopf

Vec hopf_footpoint(const ConvexDomain& d, const Vec& o, const HopfVector& v) {
  const GeodesicChord g = GeodesicChord::between_boundary(d, v.xi, v.eta);
  const double t0 = busemann(d, v.eta, o, g.origin()).value;
  return g.point_at(v.t - t0);
}

HopfVector hopf_coordinates(const ConvexDomain& d, const Vec& o, const Vec& p, const Vec& dir) {
  const GeodesicChord g(d, p, dir);
  return HopfVector{g.a(), g.b(), busemann(d, g.b(), o, p).value};
}

HopfVector hopf_flip(const ConvexDomain& d, const Vec& o, const HopfVector& v) {
  const double gp = gromov_product(d, o, v.xi, v.eta).value;
  return HopfVector{v.eta, v.xi, 2.0 * gp - v.t};
}

}  // namespace hlab
