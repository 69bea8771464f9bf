#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "hlab/geometry.hpp"
#include "hlab/group.hpp"

namespace hlab {

// ------------------------------------------------------------ Poincare series

struct PoincareSeries {
  double s = 0.0;
  double partial_sum = 0.0;
  /// Sums over unit shells [k, k+1) lying inside the ball.
  std::vector<double> shell_sums;
  /// Least-squares slope of log shell sum over the upper half of the shells;
  /// negative means the tail converges beyond the cutoff.
  double tail_slope = 0.0;
  bool diverging = false;
};

/// sum over the ball of exp(-s d(o, g o)).
PoincareSeries poincare_series(const OrbitBall& b, double s);

/// Parameters on a grid of step `step` in [lo, hi] between which the tail
/// slope changes sign: diverging at `lo`, converging at `hi`.
struct PoincareBracket {
  double lo = 0.0;
  double hi = 0.0;
  /// Standard error of the tail slope at the midpoint.
  double stderr_slope = 0.0;
};

PoincareBracket poincare_bracket(const OrbitBall& b, double lo = 0.0, double hi = 4.0, double step = 0.005);

// --------------------------------------------------------- critical exponent

struct CriticalExponentEstimate {
  double delta_hat = 0.0;
  double fit_stderr = 0.0;
  std::vector<double> radii_used;
  std::vector<std::size_t> counts_used;
  std::string method = "log-count slope";
  PoincareBracket bracket;
  /// |delta_hat - bracket midpoint| within fit_stderr + bracket error
  /// (half width plus slope standard error), doubled.
  bool bracket_agrees = false;
  double ball_radius = 0.0;
  std::size_t ball_size = 0;
};

/// Slope of log N(r) over the integer radii in [R/2, R], R the ball radius,
/// with the Poincare bracket as cross-check. Throws InsufficientData with
/// fewer than 4 radii of non-zero count.
CriticalExponentEstimate critical_exponent(const OrbitBall& b);
CriticalExponentEstimate critical_exponent(const GroupScenario& s, double radius, const Exec& exec = {});

// ----------------------------------------------------------- atomic measures

struct Atom {
  ProjPoint point;          // g o
  Vec direction;            // boundary endpoint of the ray from o through g o
  double weight = 0.0;
  double distance = 0.0;    // d(o, g o)
  std::size_t element = 0;  // index into the ball
  bool interior = false;    // distance < ball radius - margin
};

struct AtomicMeasure {
  std::vector<Atom> atoms;  // ball order
  double total_mass = 0.0;
  std::string label;
  double s = 0.0;
  Vec x;  // chart point the density is seen from
};

/// mu_{x,s}: atoms at the orbit points with weights exp(-s d(g o, x)),
/// divided by the same sum at x = o. Throws SubcriticalParameter for
/// s <= delta_hat.
AtomicMeasure ps_density(const GroupScenario& sc, const OrbitBall& b, const Vec& x, double s, double delta_hat,
                         double margin = 2.0, const Exec& exec = {});

struct ConformalityReport {
  std::size_t atoms = 0;
  /// max relative error of w'(a)/w(a) against exp(-s (d(a, x') - d(a, x))).
  double exact_error = 0.0;
  /// max relative error of the same ratio against exp(-s beta_xi(x', x)) over
  /// the `far` farthest atoms, xi the atom direction.
  double far_error = 0.0;
  std::size_t far_atoms = 0;
};

/// mu and mu_prime must come from the ball b with the same parameter.
ConformalityReport conformality_check(const GroupScenario& sc, const OrbitBall& b, const AtomicMeasure& mu,
                                      const AtomicMeasure& mu_prime, std::size_t far = 20);

struct EquivarianceReport {
  std::size_t matched = 0;
  /// max |log(w_{g x}(g a) / w_x(a))| over atoms a with g a in the ball.
  double max_log_error = 0.0;
};

/// Compares g_* mu_{x,s} with mu_{g x,s} on matched atoms.
EquivarianceReport equivariance_check(const GroupScenario& sc, const OrbitBall& b, const AtomicMeasure& mu_x,
                                      const AtomicMeasure& mu_gx, const ProjectiveMap& g);

// -------------------------------------------------------------------- shadows

struct ShadowRow {
  std::size_t element = 0;
  double distance = 0.0;
  double mass = 0.0;        // mu(O_r(x, g x))
  double normalized = 0.0;  // mass * exp(delta d)
  std::size_t atoms = 0;
};

struct ShadowAudit {
  double r = 0.0;
  double band_lo = 0.0;
  double band_hi = 0.0;
  std::vector<ShadowRow> rows;
  double min = 0.0;
  double max = 0.0;
  double ratio = 0.0;
  /// d - 2r < beta_xi(x, g x) <= d + err for every atom direction xi in
  /// every audited shadow.
  std::size_t sandwich_checks = 0;
  std::size_t sandwich_violations = 0;
  double max_busemann_error = 0.0;
};

/// Audits the elements of the ball with d(o, g o) in [band_lo, band_hi]
/// (band_hi < 0 means ball radius - 2), seen from the measure's point x.
/// Shadow masses use the boundary-proxy atoms only: near the critical
/// exponent a truncated density keeps most of its mass in the outer shells,
/// and counting interior atoms would favour shadows of short elements.
/// Throws InsufficientData for an empty band.
ShadowAudit shadow_audit(const GroupScenario& sc, const OrbitBall& b, const AtomicMeasure& mu, double delta_hat,
                         double r, double band_lo = 4.0, double band_hi = -1.0, bool sandwich = true,
                         const Exec& exec = {});

struct ShadowLemmaReport {
  ShadowAudit base;     // radius r, full band
  ShadowAudit trimmed;  // radius r, band shortened by one
  ShadowAudit wider;    // radius r_wide, full band
  double bound = 1e3;
  bool pass = false;
};

/// Pass iff all three ratios are at most `bound` and the ratio changes by
/// less than a factor 2 between the band choices and between r and r_wide.
ShadowLemmaReport shadow_lemma_audit(const GroupScenario& sc, const OrbitBall& b, const AtomicMeasure& mu,
                                     double delta_hat, double r = 2.0, double r_wide = 3.0, double band_lo = 4.0,
                                     double band_hi = -1.0, double bound = 1e3, const Exec& exec = {});

// ------------------------------------------------------------------- Sullivan

/// exp(2 delta <xi, eta>_x) w_xi w_eta for the Hopf vector's endpoints.
/// Throws DegenerateChord for xi = eta.
double sullivan_density(const ConvexDomain& d, const Vec& x, const HopfVector& v, double delta, double w_xi = 1.0,
                        double w_eta = 1.0);

/// Density seen from y over density seen from x, with the atom weights
/// transported by exp(-delta beta(y, x)); 1 up to numerical error.
double sullivan_basepoint_ratio(const ConvexDomain& d, const Vec& x, const Vec& y, const HopfVector& v, double delta);

// ---------------------------------------------------------------- experiments

struct CountingRow {
  double t = 0.0;
  std::size_t count = 0;
  double normalized = 0.0;  // count * exp(-delta t)
};

struct OrbitCountingResult {
  std::vector<CountingRow> rows;
  double delta_hat = 0.0;
  double plateau = 0.0;  // mean normalized value over the top three radii
  double drift = 0.0;    // (max - min) / mean over the top three radii
  double tolerance = 0.25;
  bool pass = false;
};

/// N(t) = #{g : d(x, g y) <= t} for increasing radii (chart points x, y).
OrbitCountingResult orbit_counting_experiment(const GroupScenario& sc, const Vec& x, const Vec& y,
                                              const std::vector<double>& radii, double delta_hat,
                                              double tolerance = 0.25, const Exec& exec = {});

struct GeodesicCountingRow {
  double length = 0.0;
  std::size_t count = 0;
  double normalized = 0.0;  // count * delta l * exp(-delta l)
};

struct GeodesicCountingResult {
  std::vector<GeodesicCountingRow> rows;
  double delta_hat = 0.0;
  /// Lengths up to this value are complete: every class of word length
  /// max_len is longer.
  double complete_length = 0.0;
  std::size_t classes = 0;
  double bottom_quartile_mean = 0.0;
  double top_quartile_mean = 0.0;
  bool pass = false;
};

/// Cumulative counts of oriented primitive classes on a grid of `grid`
/// lengths. Free scenarios only.
GeodesicCountingResult geodesic_counting_experiment(const GroupScenario& sc, int max_len, double delta_hat,
                                                    int grid = 40, const Exec& exec = {});

/// Boundary cap realised as the shadow O_r(x, anchor).
struct Cap {
  Vec anchor;
  double r = 2.0;
};

struct EquidistributionRow {
  double t = 0.0;
  double nu_ab = 0.0, nu_ab2 = 0.0, nu_a2b = 0.0, nu_a2b2 = 0.0;
  double cross_ratio = 0.0;
};

struct EquidistributionResult {
  std::vector<EquidistributionRow> rows;
  /// mu_x(A) mu_y(B) mu_x(A') mu_y(B') / (mu_x(A) mu_y(B') mu_x(A') mu_y(B)).
  double measure_cross_ratio = 0.0;
  std::vector<double> cap_masses;  // mu_x(A), mu_x(A'), mu_y(B), mu_y(B')
  double relative_gap = 0.0;       // at the largest radius
  double tolerance = 0.3;
  bool pass = false;
};

/// Counts g with d(x, g y) <= t, g y in the cone over A (resp. A') and
/// g^-1 x in the cone over B (resp. B'). Throws InsufficientData when a cap
/// pair has no hit at the largest radius.
EquidistributionResult equidistribution_experiment(const GroupScenario& sc, const Vec& x, const Vec& y, const Cap& a,
                                                   const Cap& a2, const Cap& b, const Cap& b2,
                                                   const std::vector<double>& radii, double delta_hat,
                                                   double tolerance = 0.3, const Exec& exec = {});

}  // namespace hlab
