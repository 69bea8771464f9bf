#include "hlab/ps_lab.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

namespace hlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  LineFit f;
  if (n < 2) return f;
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (n > 2) {
    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - f.intercept - f.slope * x[i];
      ssr += r * r;
    }
    f.stderr_slope = std::sqrt(ssr / static_cast<double>(n - 2) / sxx);
  }
  return f;
}

Vec homogeneous(const Vec& chart) {
  Vec h(chart.size() + 1);
  h.head(chart.size()) = chart;
  h(chart.size()) = 1.0;
  return h;
}

// Boundary endpoint of the ray from `from` through `p`; empty when p = from.
Vec ray_direction(const ConvexDomain& d, const Vec& from, const Vec& p) {
  const Vec v = p - from;
  if (!(v.norm() > 0.0)) return Vec();
  return d.ray_boundary(from, v);
}

std::size_t count_at_most(const std::vector<double>& sorted, double t) {
  return static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin());
}

// Log of the sums of exp(-s d) over unit shells, -inf for empty shells.
std::vector<double> log_shell_sums(const OrbitBall& b, double s) {
  const auto shells = static_cast<std::size_t>(std::max(0.0, std::floor(b.radius)));
  std::vector<double> peak(shells, -std::numeric_limits<double>::infinity());
  std::vector<double> acc(shells, 0.0);
  for (const auto& e : b.elements) {
    const auto k = static_cast<std::size_t>(std::floor(e.distance));
    if (k >= shells) continue;
    // shifted by the shell's lower edge so that the terms stay near 1
    acc[k] += std::exp(-s * (e.distance - static_cast<double>(k)));
  }
  for (std::size_t k = 0; k < shells; ++k)
    if (acc[k] > 0.0) peak[k] = std::log(acc[k]) - s * static_cast<double>(k);
  return peak;
}

LineFit tail_fit(const std::vector<double>& logs) {
  std::vector<double> x, y;
  for (std::size_t k = logs.size() / 2; k < logs.size(); ++k) {
    if (!std::isfinite(logs[k])) continue;
    x.push_back(static_cast<double>(k));
    y.push_back(logs[k]);
  }
  if (x.size() < 2) return LineFit{kNaN, kNaN, kNaN};
  return fit_line(x, y);
}

double tail_slope(const std::vector<double>& logs) { return tail_fit(logs).slope; }

}  // namespace

// ------------------------------------------------------------ Poincare series

PoincareSeries poincare_series(const OrbitBall& b, double s) {
  if (!(s >= 0.0)) throw Error(ErrorKind::InvalidArgument, "Poincare series parameter must be non-negative");
  PoincareSeries out;
  out.s = s;
  for (const auto& e : b.elements) out.partial_sum += std::exp(-s * e.distance);
  const std::vector<double> logs = log_shell_sums(b, s);
  for (double l : logs) out.shell_sums.push_back(std::isfinite(l) ? std::exp(l) : 0.0);
  out.tail_slope = tail_slope(logs);
  out.diverging = out.tail_slope >= 0.0;
  return out;
}

PoincareBracket poincare_bracket(const OrbitBall& b, double lo, double hi, double step) {
  auto slope = [&](double s) { return tail_slope(log_shell_sums(b, s)); };
  if (!std::isfinite(slope(lo))) throw Error(ErrorKind::InsufficientData, "too few non-empty shells for a Poincare bracket");
  if (slope(lo) >= 0.0 && slope(hi) < 0.0) {
    while (hi - lo > step) {
      const double mid = 0.5 * (lo + hi);
      if (slope(mid) >= 0.0)
        lo = mid;
      else
        hi = mid;
    }
  } else if (slope(lo) < 0.0) {
    hi = lo;
  } else {
    lo = hi;
  }
  return {lo, hi, tail_fit(log_shell_sums(b, 0.5 * (lo + hi))).stderr_slope};
}

// --------------------------------------------------------- critical exponent

CriticalExponentEstimate critical_exponent(const OrbitBall& b) {
  CriticalExponentEstimate est;
  est.ball_radius = b.radius;
  est.ball_size = b.size();
  std::vector<double> dist;
  dist.reserve(b.size());
  for (const auto& e : b.elements) dist.push_back(e.distance);
  std::sort(dist.begin(), dist.end());
  std::vector<double> logs;
  for (double r = std::ceil(b.radius / 2.0); r <= b.radius; r += 1.0) {
    const std::size_t n = count_at_most(dist, r);
    if (n == 0) continue;
    est.radii_used.push_back(r);
    est.counts_used.push_back(n);
    logs.push_back(std::log(static_cast<double>(n)));
  }
  if (est.radii_used.size() < 4)
    throw Error(ErrorKind::InsufficientData, "critical exponent needs at least 4 radii with non-empty balls");
  const LineFit f = fit_line(est.radii_used, logs);
  est.delta_hat = std::max(0.0, f.slope);
  est.fit_stderr = f.stderr_slope;
  est.bracket = poincare_bracket(b);
  const double mid = 0.5 * (est.bracket.lo + est.bracket.hi);
  const double err = est.fit_stderr + 0.5 * (est.bracket.hi - est.bracket.lo) + est.bracket.stderr_slope;
  est.bracket_agrees = std::abs(est.delta_hat - mid) <= 2.0 * err;
  return est;
}

CriticalExponentEstimate critical_exponent(const GroupScenario& s, double radius, const Exec& exec) {
  if (!(radius >= 8.0)) throw Error(ErrorKind::InsufficientData, "critical exponent needs a ball of radius at least 8");
  return critical_exponent(orbit_ball(s, radius, exec));
}

// ----------------------------------------------------------- atomic measures

AtomicMeasure ps_density(const GroupScenario& sc, const OrbitBall& b, const Vec& x, double s, double delta_hat,
                         double margin, const Exec& exec) {
  if (!(s > delta_hat))
    throw Error(ErrorKind::SubcriticalParameter, "ps_density needs s strictly above the critical exponent estimate");
  if (!sc.domain.contains(x)) throw Error(ErrorKind::OutsideDomain, "density seen from a point outside the domain");
  const Vec o = sc.basepoint_homogeneous();
  const Vec xh = homogeneous(x);
  const Vec oc = sc.basepoint;
  std::vector<double> dx(b.size());
  std::vector<Vec> dirs(b.size());
  parallel_for(b.size(), exec, [&](std::size_t i) {
    const auto& e = b.elements[i];
    dx[i] = orbit_distance(sc.domain, xh, e.g, o);
    dirs[i] = ray_direction(sc.domain, oc, e.image.chart());
  });
  double z = 0.0;
  for (const auto& e : b.elements) z += std::exp(-s * e.distance);
  AtomicMeasure mu;
  mu.s = s;
  mu.x = x;
  mu.label = "mu_{x,s}";
  mu.atoms.reserve(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) {
    const auto& e = b.elements[i];
    const double w = std::exp(-s * dx[i]) / z;
    mu.atoms.push_back({e.image, std::move(dirs[i]), w, e.distance, i, e.distance < b.radius - margin});
    mu.total_mass += w;
  }
  return mu;
}

ConformalityReport conformality_check(const GroupScenario& sc, const OrbitBall& b, const AtomicMeasure& mu,
                                      const AtomicMeasure& mu_prime, std::size_t far) {
  if (mu.atoms.size() != b.size() || mu_prime.atoms.size() != b.size() || mu.s != mu_prime.s)
    throw Error(ErrorKind::InvalidArgument, "conformality check needs two densities of the same ball and parameter");
  const Vec o = sc.basepoint_homogeneous();
  const Vec xh = homogeneous(mu.x), yh = homogeneous(mu_prime.x);
  const double s = mu.s;
  ConformalityReport rep;
  rep.atoms = b.size();
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double ratio = mu_prime.atoms[i].weight / mu.atoms[i].weight;
    const double dx = orbit_distance(sc.domain, xh, b.elements[i].g, o);
    const double dy = orbit_distance(sc.domain, yh, b.elements[i].g, o);
    rep.exact_error = std::max(rep.exact_error, std::abs(ratio / std::exp(-s * (dy - dx)) - 1.0));
  }
  // farthest atoms last in ball order
  std::size_t taken = 0;
  for (std::size_t i = b.size(); i-- > 0 && taken < far;) {
    const Atom& a = mu.atoms[i];
    if (a.direction.size() == 0) continue;
    const double ratio = mu_prime.atoms[i].weight / a.weight;
    const Estimate beta = busemann(sc.domain, a.direction, mu_prime.x, mu.x);
    rep.far_error = std::max(rep.far_error, std::abs(ratio / std::exp(-s * beta.value) - 1.0));
    ++taken;
  }
  rep.far_atoms = taken;
  return rep;
}

EquivarianceReport equivariance_check(const GroupScenario& sc, const OrbitBall& b, const AtomicMeasure& mu_x,
                                      const AtomicMeasure& mu_gx, const ProjectiveMap& g) {
  (void)sc;
  if (mu_x.atoms.size() != b.size() || mu_gx.atoms.size() != b.size())
    throw Error(ErrorKind::InvalidArgument, "equivariance check needs two densities of the same ball");
  std::vector<ProjectiveMap> moved;
  moved.reserve(b.size());
  for (const auto& e : b.elements) moved.push_back(g * e.g);
  const std::vector<std::ptrdiff_t> where = locate_elements(b, moved);
  EquivarianceReport rep;
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (where[i] < 0) continue;
    const double w = mu_gx.atoms[static_cast<std::size_t>(where[i])].weight;
    rep.max_log_error = std::max(rep.max_log_error, std::abs(std::log(w / mu_x.atoms[i].weight)));
    ++rep.matched;
  }
  return rep;
}

// -------------------------------------------------------------------- shadows

namespace {

// Rays from x through each atom, reused across the audited shadows.
struct AtomRays {
  std::vector<std::optional<GeodesicChord>> rays;
  std::vector<Vec> ends;
};

AtomRays atom_rays(const ConvexDomain& d, const AtomicMeasure& mu, const Exec& exec) {
  AtomRays r;
  r.rays.resize(mu.atoms.size());
  r.ends.resize(mu.atoms.size());
  parallel_for(mu.atoms.size(), exec, [&](std::size_t i) {
    const Vec p = mu.atoms[i].point.chart();
    const Vec v = p - mu.x;
    if (!(v.norm() > 0.0)) return;
    r.rays[i].emplace(d, mu.x, v);
    r.ends[i] = r.rays[i]->b();
  });
  return r;
}

// Whether the ray passes within r of z, where D = d(x, z). With m the
// distance from z to the ray, the ray point q at time D satisfies
// m <= d(z, q) <= 2m, which settles most atoms without a line search.
bool ray_in_shadow(const ConvexDomain& d, const GeodesicChord& ray, const Vec& z, double D, double r) {
  const Vec q = ray.point_at(D);
  if (d.contains(q)) {
    const double e = hilbert_distance(d, z, q);
    if (e <= r) return true;
    if (e > 2.0 * r) return false;
  }
  return distance_to_line(d, z, ray, 0.0).value <= r;
}

}  // namespace

ShadowAudit shadow_audit(const GroupScenario& sc, const OrbitBall& b, const AtomicMeasure& mu, double delta_hat,
                         double r, double band_lo, double band_hi, bool sandwich, const Exec& exec) {
  if (!(r > 0.0)) throw Error(ErrorKind::InvalidGeometry, "shadow radius must be positive");
  if (mu.atoms.size() != b.size()) throw Error(ErrorKind::InvalidArgument, "measure and ball do not match");
  if (band_hi < 0.0) band_hi = b.radius - 2.0;
  ShadowAudit out;
  out.r = r;
  out.band_lo = band_lo;
  out.band_hi = band_hi;
  const ConvexDomain& dom = sc.domain;
  const Vec xh = homogeneous(mu.x);
  std::vector<std::size_t> band;
  for (std::size_t i = 0; i < b.size(); ++i)
    if (b.elements[i].distance >= band_lo && b.elements[i].distance <= band_hi) band.push_back(i);
  if (band.empty()) throw Error(ErrorKind::InsufficientData, "no orbit point in the shadow band");
  if (std::none_of(mu.atoms.begin(), mu.atoms.end(), [](const Atom& a) { return !a.interior; }))
    throw Error(ErrorKind::InsufficientData, "the measure has no boundary-proxy atoms");
  const AtomRays rays = atom_rays(dom, mu, exec);

  struct Partial {
    ShadowRow row;
    std::size_t checks = 0, violations = 0;
    double max_err = 0.0;
  };
  std::vector<Partial> parts(band.size());
  parallel_for(band.size(), exec, [&](std::size_t k) {
    const auto& e = b.elements[band[k]];
    const Vec gx = e.g.apply(xh);
    const Vec z = gx.head(gx.size() - 1) / gx(gx.size() - 1);
    const double D = orbit_distance(dom, xh, e.g, xh);
    Partial& p = parts[k];
    p.row.element = band[k];
    p.row.distance = D;
    for (std::size_t i = 0; i < mu.atoms.size(); ++i) {
      if (!rays.rays[i] || mu.atoms[i].interior) continue;
      if (!ray_in_shadow(dom, *rays.rays[i], z, D, r)) continue;
      p.row.mass += mu.atoms[i].weight;
      ++p.row.atoms;
      if (sandwich) {
        const Estimate beta = busemann(dom, rays.ends[i], mu.x, z);
        ++p.checks;
        p.max_err = std::max(p.max_err, beta.error);
        if (!(beta.value > D - 2.0 * r) || !(beta.value <= D + beta.error)) ++p.violations;
      }
    }
    p.row.normalized = p.row.mass * std::exp(delta_hat * D);
  });
  out.min = std::numeric_limits<double>::infinity();
  out.max = 0.0;
  for (const auto& p : parts) {
    out.rows.push_back(p.row);
    out.min = std::min(out.min, p.row.normalized);
    out.max = std::max(out.max, p.row.normalized);
    out.sandwich_checks += p.checks;
    out.sandwich_violations += p.violations;
    out.max_busemann_error = std::max(out.max_busemann_error, p.max_err);
  }
  out.ratio = out.min > 0.0 ? out.max / out.min : std::numeric_limits<double>::infinity();
  return out;
}

ShadowLemmaReport shadow_lemma_audit(const GroupScenario& sc, const OrbitBall& b, const AtomicMeasure& mu,
                                     double delta_hat, double r, double r_wide, double band_lo, double band_hi,
                                     double bound, const Exec& exec) {
  if (band_hi < 0.0) band_hi = b.radius - 2.0;
  ShadowLemmaReport rep;
  rep.bound = bound;
  rep.base = shadow_audit(sc, b, mu, delta_hat, r, band_lo, band_hi, true, exec);
  rep.trimmed = shadow_audit(sc, b, mu, delta_hat, r, band_lo, band_hi - 1.0, false, exec);
  rep.wider = shadow_audit(sc, b, mu, delta_hat, r_wide, band_lo, band_hi, true, exec);
  auto within2 = [](double a, double c) { return a < 2.0 * c && c < 2.0 * a; };
  rep.pass = rep.base.ratio <= bound && rep.trimmed.ratio <= bound && rep.wider.ratio <= bound &&
             within2(rep.base.ratio, rep.trimmed.ratio) && within2(rep.base.ratio, rep.wider.ratio);
  return rep;
}

// ------------------------------------------------------------------- Sullivan

double sullivan_density(const ConvexDomain& d, const Vec& x, const HopfVector& v, double delta, double w_xi,
                        double w_eta) {
  if (!(delta > 0.0)) throw Error(ErrorKind::InvalidArgument, "Sullivan density needs a positive exponent");
  const Estimate g = gromov_product(d, x, v.xi, v.eta);
  return std::exp(2.0 * delta * g.value) * w_xi * w_eta;
}

double sullivan_basepoint_ratio(const ConvexDomain& d, const Vec& x, const Vec& y, const HopfVector& v, double delta) {
  const double wx_xi = 1.0, wx_eta = 1.0;
  const double wy_xi = wx_xi * std::exp(-delta * busemann(d, v.xi, y, x).value);
  const double wy_eta = wx_eta * std::exp(-delta * busemann(d, v.eta, y, x).value);
  return sullivan_density(d, y, v, delta, wy_xi, wy_eta) / sullivan_density(d, x, v, delta, wx_xi, wx_eta);
}

// ---------------------------------------------------------------- experiments

namespace {

void check_radii(const std::vector<double>& radii) {
  if (radii.empty()) throw Error(ErrorKind::InvalidArgument, "no radii given");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!std::isfinite(radii[i]) || radii[i] < 0.0) throw Error(ErrorKind::InvalidArgument, "radii must be finite and non-negative");
    if (i > 0 && !(radii[i] > radii[i - 1])) throw Error(ErrorKind::InvalidArgument, "radii must be increasing");
  }
}

// Ball large enough to contain every g with d(x, g y) <= t.
OrbitBall covering_ball(const GroupScenario& sc, const Vec& x, const Vec& y, double t, const Exec& exec) {
  const double dx = hilbert_distance(sc.domain, sc.basepoint, x);
  const double dy = hilbert_distance(sc.domain, sc.basepoint, y);
  return orbit_ball(sc, t + dx + dy, exec);
}

}  // namespace

OrbitCountingResult orbit_counting_experiment(const GroupScenario& sc, const Vec& x, const Vec& y,
                                              const std::vector<double>& radii, double delta_hat, double tolerance,
                                              const Exec& exec) {
  check_radii(radii);
  const OrbitBall b = covering_ball(sc, x, y, radii.back(), exec);
  const Vec xh = homogeneous(x), yh = homogeneous(y);
  std::vector<double> dist(b.size());
  parallel_for(b.size(), exec, [&](std::size_t i) { dist[i] = orbit_distance(sc.domain, xh, b.elements[i].g, yh); });
  std::sort(dist.begin(), dist.end());
  OrbitCountingResult out;
  out.delta_hat = delta_hat;
  out.tolerance = tolerance;
  for (double t : radii) {
    const std::size_t n = count_at_most(dist, t);
    out.rows.push_back({t, n, static_cast<double>(n) * std::exp(-delta_hat * t)});
  }
  if (out.rows.size() >= 3) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0, sum = 0.0;
    for (std::size_t i = out.rows.size() - 3; i < out.rows.size(); ++i) {
      lo = std::min(lo, out.rows[i].normalized);
      hi = std::max(hi, out.rows[i].normalized);
      sum += out.rows[i].normalized;
    }
    out.plateau = sum / 3.0;
    out.drift = out.plateau > 0.0 ? (hi - lo) / out.plateau : std::numeric_limits<double>::infinity();
    out.pass = out.drift < tolerance;
  }
  return out;
}

GeodesicCountingResult geodesic_counting_experiment(const GroupScenario& sc, int max_len, double delta_hat, int grid,
                                                    const Exec& exec) {
  if (grid < 1) throw Error(ErrorKind::InvalidArgument, "length grid needs at least one point");
  const ConjugacyClassList list = primitive_conjugacy_classes(sc, max_len, true, exec);
  GeodesicCountingResult out;
  out.delta_hat = delta_hat;
  out.classes = list.classes.size();
  if (list.classes.empty()) throw Error(ErrorKind::InsufficientData, "no primitive classes");
  std::vector<double> lengths;
  lengths.reserve(list.classes.size());
  double complete = std::numeric_limits<double>::infinity();
  for (const auto& c : list.classes) {
    lengths.push_back(c.translation_length);
    if (static_cast<int>(c.word.size()) == max_len) complete = std::min(complete, c.translation_length);
  }
  const double first = lengths.front();
  out.complete_length = complete;
  const int points = complete > first ? grid : 1;
  for (int k = 0; k < points; ++k) {
    const double l = points == 1 ? first : first + (complete - first) * k / (points - 1);
    const std::size_t n = count_at_most(lengths, l);
    out.rows.push_back({l, n, static_cast<double>(n) * delta_hat * l * std::exp(-delta_hat * l)});
  }
  const std::size_t q = std::max<std::size_t>(1, out.rows.size() / 4);
  double bottom = 0.0, top = 0.0;
  bool top_in_range = true;
  for (std::size_t i = 0; i < q; ++i) bottom += out.rows[i].normalized;
  for (std::size_t i = out.rows.size() - q; i < out.rows.size(); ++i) {
    top += out.rows[i].normalized;
    top_in_range = top_in_range && out.rows[i].normalized >= 0.5 && out.rows[i].normalized <= 2.0;
  }
  out.bottom_quartile_mean = bottom / static_cast<double>(q);
  out.top_quartile_mean = top / static_cast<double>(q);
  out.pass = top_in_range && std::abs(out.top_quartile_mean - 1.0) < std::abs(out.bottom_quartile_mean - 1.0);
  return out;
}

EquidistributionResult equidistribution_experiment(const GroupScenario& sc, const Vec& x, const Vec& y, const Cap& a,
                                                   const Cap& a2, const Cap& b, const Cap& b2,
                                                   const std::vector<double>& radii, double delta_hat,
                                                   double tolerance, const Exec& exec) {
  check_radii(radii);
  const ConvexDomain& dom = sc.domain;
  const Shadow sa = make_shadow(dom, x, a.anchor, a.r), sa2 = make_shadow(dom, x, a2.anchor, a2.r);
  const Shadow sb = make_shadow(dom, y, b.anchor, b.r), sb2 = make_shadow(dom, y, b2.anchor, b2.r);
  const OrbitBall ball = covering_ball(sc, x, y, radii.back(), exec);
  const Vec xh = homogeneous(x), yh = homogeneous(y);

  // per element: distance and cap membership of g y (seen from x) and of
  // g^-1 x (seen from y)
  struct Hit {
    double d = 0.0;
    bool in_a = false, in_a2 = false, in_b = false, in_b2 = false;
  };
  auto chart_of = [](const Vec& h) -> Vec { return h.head(h.size() - 1) / h(h.size() - 1); };
  std::vector<Hit> hits(ball.size());
  parallel_for(ball.size(), exec, [&](std::size_t i) {
    const ProjectiveMap& g = ball.elements[i].g;
    Hit& h = hits[i];
    h.d = orbit_distance(dom, xh, g, yh);
    const Vec gy = ray_direction(dom, x, chart_of(g.apply(yh)));
    const Vec gix = ray_direction(dom, y, chart_of(g.inverse_matrix() * xh));
    if (gy.size() > 0) {
      h.in_a = shadow_contains(dom, sa, gy);
      h.in_a2 = shadow_contains(dom, sa2, gy);
    }
    if (gix.size() > 0) {
      h.in_b = shadow_contains(dom, sb, gix);
      h.in_b2 = shadow_contains(dom, sb2, gix);
    }
  });

  EquidistributionResult out;
  out.tolerance = tolerance;
  for (double t : radii) {
    double ab = 0, ab2 = 0, a2b = 0, a2b2 = 0;
    for (const Hit& h : hits) {
      if (h.d > t) continue;
      ab += h.in_a && h.in_b;
      ab2 += h.in_a && h.in_b2;
      a2b += h.in_a2 && h.in_b;
      a2b2 += h.in_a2 && h.in_b2;
    }
    const double scale = std::exp(-delta_hat * t);
    EquidistributionRow row{t, ab * scale, ab2 * scale, a2b * scale, a2b2 * scale, kNaN};
    if (ab2 > 0 && a2b > 0) row.cross_ratio = (ab * a2b2) / (ab2 * a2b);
    out.rows.push_back(row);
  }
  const EquidistributionRow& last = out.rows.back();
  if (!(last.nu_ab > 0 && last.nu_ab2 > 0 && last.nu_a2b > 0 && last.nu_a2b2 > 0))
    throw Error(ErrorKind::InsufficientData, "a cap pair has no orbit point at the largest radius");

  // cap masses of the supercritical densities mu_x and mu_y on the same ball
  const double s = delta_hat * 1.02 + 1e-9;
  const AtomicMeasure mx = ps_density(sc, ball, x, s, delta_hat, 2.0, exec);
  const AtomicMeasure my = ps_density(sc, ball, y, s, delta_hat, 2.0, exec);
  std::vector<std::array<double, 4>> part(ball.size(), {0, 0, 0, 0});
  parallel_for(ball.size(), exec, [&](std::size_t i) {
    const Vec p = mx.atoms[i].point.chart();
    const Vec from_x = ray_direction(dom, x, p), from_y = ray_direction(dom, y, p);
    if (from_x.size() > 0) {
      if (shadow_contains(dom, sa, from_x)) part[i][0] = mx.atoms[i].weight;
      if (shadow_contains(dom, sa2, from_x)) part[i][1] = mx.atoms[i].weight;
    }
    if (from_y.size() > 0) {
      if (shadow_contains(dom, sb, from_y)) part[i][2] = my.atoms[i].weight;
      if (shadow_contains(dom, sb2, from_y)) part[i][3] = my.atoms[i].weight;
    }
  });
  out.cap_masses.assign(4, 0.0);
  for (const auto& p : part)
    for (int k = 0; k < 4; ++k) out.cap_masses[static_cast<std::size_t>(k)] += p[static_cast<std::size_t>(k)];
  const auto& m = out.cap_masses;
  if (!(m[0] > 0 && m[1] > 0 && m[2] > 0 && m[3] > 0))
    throw Error(ErrorKind::InsufficientData, "a cap has zero density mass");
  out.measure_cross_ratio = (m[0] * m[2] * m[1] * m[3]) / (m[0] * m[3] * m[1] * m[2]);
  out.relative_gap = std::abs(last.cross_ratio / out.measure_cross_ratio - 1.0);
  out.pass = out.relative_gap < tolerance;
  return out;
}

}  // namespace hlab
