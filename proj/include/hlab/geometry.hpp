#pragma once

#include <functional>
#include <limits>
#include <optional>

#include "hlab/domain.hpp"
#include "hlab/projective.hpp"

namespace hlab {

/// Hilbert distance between interior points (chart coordinates).
/// Throws OutsideDomain for points not in the open domain.
double hilbert_distance(const ConvexDomain& d, const Vec& x, const Vec& y);
double hilbert_distance(const ConvexDomain& d, const ProjPoint& x, const ProjPoint& y);

/// Distance d(X, g Y) on an ellipsoid from homogeneous data. Stays accurate
/// when g Y is far closer to the boundary than the chart can resolve, since
/// the quadric value of g Y is taken from the tracked determinant of g.
double ellipsoid_orbit_distance(const ConvexDomain& d, const Vec& x_hom, const ProjectiveMap& g, const Vec& y_hom);

/// Straight line through the domain with unit-speed Hilbert parametrisation.
/// Points are a + u (b - a) with u in (0,1); point_at(t) is at signed
/// distance t from the origin towards b.
class GeodesicChord {
 public:
  /// Line through x with direction dir, origin x.
  GeodesicChord(const ConvexDomain& d, const Vec& x, const Vec& dir);
  /// Line from boundary point a to boundary point b, origin at the chart
  /// midpoint.
  static GeodesicChord between_boundary(const ConvexDomain& d, const Vec& a, const Vec& b);
  /// Line through x and y, origin x, oriented towards y.
  static GeodesicChord through(const ConvexDomain& d, const Vec& x, const Vec& y);

  const ConvexDomain& domain() const { return *domain_; }
  const Vec& a() const { return a_; }
  const Vec& b() const { return b_; }
  ChordEndpoints endpoints() const { return {ProjPoint::from_chart(a_), ProjPoint::from_chart(b_)}; }
  const Vec& origin() const { return origin_; }

  Vec point_at(double t) const;
  /// d/dt point_at(t).
  Vec velocity_at(double t) const;
  ProjPoint projective_point_at(double t) const { return ProjPoint::from_chart(point_at(t)); }
  /// Signed time of a point of the chord (projected onto the line).
  double time_of(const Vec& p) const;

 private:
  GeodesicChord(const ConvexDomain& d, Vec a, Vec b, Vec origin, double logit_origin);

  const ConvexDomain* domain_;
  Vec a_;
  Vec b_;
  Vec origin_;
  double logit_origin_ = 0.0;
};

struct LineDistance {
  double value = 0.0;
  double t = 0.0;
  Vec point;
};

/// min over t >= t_min of d(z, G(t)). Golden-section search on a bracket
/// grown from seed (default: the Euclidean foot point of z), refined by
/// bisection on the sign of the derivative, which resolves the minimiser
/// to about 1e-10 where function values alone stop near sqrt(eps).
LineDistance distance_to_line(const ConvexDomain& d, const Vec& z, const GeodesicChord& g,
                              double t_min = -std::numeric_limits<double>::infinity(),
                              std::optional<double> seed = std::nullopt);

/// d/dt of d(z, G(t)); zero where G(t) = z.
double distance_to_line_derivative(const ConvexDomain& d, const Vec& z, const GeodesicChord& g, double t);

/// Golden-section minimiser of a convex function on [lo, hi].
double golden_section_minimize(const std::function<double(double)>& f, double lo, double hi, double tol);

/// Value with an attached error estimate.
struct Estimate {
  double value = 0.0;
  double error = 0.0;
};

/// Busemann function beta_xi(x, y) = lim d(x, z) - d(y, z), z -> xi along
/// [x, xi). Evaluated at t = D + 8, D + 12, D + 16 with D = d(x, y) and
/// Aitken-extrapolated; the error is the extrapolation residual. Requires a strictly convex C1 domain.
Estimate busemann(const ConvexDomain& d, const Vec& xi, const Vec& x, const Vec& y);

/// Same limit from the supporting hyperplane at xi (first-order boundary
/// expansion); exact for C1 boundary points.
double busemann_support_form(const ConvexDomain& d, const Vec& xi, const Vec& x, const Vec& y);

/// Gromov product of two boundary points seen from x, as half the sum of the
/// Busemann functions to the chart midpoint of (xi eta).
Estimate gromov_product(const ConvexDomain& d, const Vec& x, const Vec& xi, const Vec& eta);

struct HoroballSpec {
  Vec center;  // boundary point
  Vec basepoint;
};

bool horoball_contains(const ConvexDomain& d, const HoroballSpec& h, const Vec& y);

/// Closed shadow: boundary points xi whose ray (interior source) or chord
/// (boundary source) from the source passes within distance r of target.
struct Shadow {
  Vec source;
  Vec target;
  double radius = 0.0;
  bool source_on_boundary = false;
};

/// Validates the shadow and returns it; throws InvalidGeometry on r <= 0,
/// source = target or a target outside the domain.
Shadow make_shadow(const ConvexDomain& d, const Vec& source, const Vec& target, double r);

bool shadow_contains(const ConvexDomain& d, const Shadow& s, const Vec& xi);

/// Distance from the shadow target to the ray/chord from source to xi.
double shadow_distance(const ConvexDomain& d, const Shadow& s, const Vec& xi);

/// Smallest value over a grid of t in [0, T] of
/// d(l1(0), l2(0)) + d(l1(T), l2(T)) - d(l1(t), l2(t)), with l_i(t) = G_i(speed_i t).
double crampon_slack(const ConvexDomain& d, const GeodesicChord& g1, const GeodesicChord& g2, double T,
                     double speed1 = 1.0, double speed2 = 1.0, int grid = 101);

bool crampon_gap(const ConvexDomain& d, const GeodesicChord& g1, const GeodesicChord& g2, double T,
                 double speed1 = 1.0, double speed2 = 1.0, int grid = 101);

/// Point of the unit tangent bundle: backward endpoint xi, forward endpoint
/// eta, time t measured from basepoint o by beta_eta(o, footpoint) = t.
struct HopfVector {
  Vec xi;
  Vec eta;
  double t = 0.0;
};

/// Footpoint in the chart of a Hopf vector relative to basepoint o.
Vec hopf_footpoint(const ConvexDomain& d, const Vec& o, const HopfVector& v);

/// Hopf coordinates of the unit vector at p pointing along dir.
HopfVector hopf_coordinates(const ConvexDomain& d, const Vec& o, const Vec& p, const Vec& dir);

/// Flip involution (xi, eta, t) -> (eta, xi, 2 <xi,eta>_o - t); reverses the
/// direction of the vector and keeps its footpoint.
HopfVector hopf_flip(const ConvexDomain& d, const Vec& o, const HopfVector& v);

}  // namespace hlab
