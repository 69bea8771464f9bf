#pragma once

#include <optional>
#include <random>
#include <string>
#include <variant>

#include "hlab/projective.hpp"

namespace hlab {

/// x -> normal . x + offset. Supporting functionals are scaled to a unit
/// normal, vanish at the contact point and are negative on the domain.
struct AffineFunctional {
  Vec normal;
  double offset = 0.0;

  double operator()(const Vec& x) const { return normal.dot(x) + offset; }
};

struct ChordEndpoints {
  ProjPoint a;
  ProjPoint b;
};

/// Relative (to the Euclidean diameter) distance under which a point counts
/// as lying on the boundary when it is handed to a boundary oracle.
inline constexpr double kBoundaryTolerance = 1e-9;

/// A bounded open convex set in the affine chart x_{n+1} = 1. The three
/// oracles are membership, ray exit and supporting hyperplane.
class ConvexDomain {
 public:
  enum class Kind { Ellipsoid, PNormBall, HalfspacePolytope };

  /// {x : (x - c)^T S (x - c) < 1}, S symmetric positive definite.
  static ConvexDomain ellipsoid(const Vec& center, const Mat& shape);
  static ConvexDomain unit_ball(int n);
  /// {x : sum |x_i / scale|^p < 1}, 2 <= p < infinity.
  static ConvexDomain pnorm_ball(int n, double p, double scale = 1.0);
  /// {x : A x < b}; must be bounded with non-empty interior.
  static ConvexDomain polytope(const Mat& a, const Vec& b);
  /// {x_i > 0, sum x_i < 1}.
  static ConvexDomain standard_simplex(int n);

  Kind kind() const;
  std::string kind_name() const;
  int dimension() const { return dim_; }
  bool strictly_convex_c1() const { return kind() != Kind::HalfspacePolytope; }
  double diameter() const { return diameter_; }
  const Vec& interior_point() const { return interior_; }

  /// Defining function, negative exactly on the open domain.
  double defining(const Vec& x) const;
  Vec gradient(const Vec& x) const;
  /// F(xi + delta) - F(xi) evaluated without cancellation for small delta.
  double defining_increment(const Vec& xi, const Vec& delta) const;

  bool contains(const Vec& x) const { return x.size() == dim_ && defining(x) < 0.0; }
  bool contains(const ProjPoint& x) const;

  /// tau > 0 with x + tau * dir on the boundary. Throws OutsideDomain when x
  /// is not interior.
  double exit_parameter(const Vec& x, const Vec& dir) const;
  /// Exit parameter from the point xi + offset, where xi is a boundary point
  /// and offset is small. The boundary is taken to pass exactly through xi.
  double exit_parameter_near(const Vec& xi, const Vec& offset, const Vec& dir) const;

  ProjPoint ray_boundary(const ProjPoint& x, const Vec& dir) const;
  Vec ray_boundary(const Vec& x, const Vec& dir) const;
  /// Both boundary points of the line through x with direction dir; a lies
  /// behind x, b ahead.
  ChordEndpoints chord(const Vec& x, const Vec& dir) const;

  /// Throws NonUniqueSupport at polytope vertices and edges, InvalidGeometry
  /// if xi is not on the boundary.
  AffineFunctional supporting_hyperplane(const ProjPoint& xi) const;
  AffineFunctional supporting_hyperplane(const Vec& xi) const;

  bool on_boundary(const Vec& x, double rel_tol = kBoundaryTolerance) const;

  /// Homogeneous quadratic form J with J(v) < 0 on the cone over the domain
  /// (ellipsoids only).
  std::optional<Mat> quadric() const;

  /// Image of the domain under h. Supported for ellipsoids and polytopes;
  /// throws UnsupportedScenario for p-norm balls.
  ConvexDomain transformed(const ProjectiveMap& h) const;

  /// Sampled check that g maps random interior points inside (to boundary
  /// tolerance).
  bool preserved_by(const ProjectiveMap& g, std::mt19937_64& rng, int samples = 1000) const;

  Vec sample_interior(std::mt19937_64& rng) const;
  Vec sample_boundary(std::mt19937_64& rng) const;

  const Vec& ellipsoid_center() const;
  const Mat& ellipsoid_shape() const;
  double pnorm_exponent() const;
  double pnorm_scale() const;
  const Mat& polytope_normals() const;
  const Vec& polytope_offsets() const;

 private:
  struct Ellipsoid {
    Vec center;
    Mat shape;
    Mat sqrt_inverse;  // L^{-T} with shape = L L^T
  };
  struct PNorm {
    double p;
    double scale;
  };
  struct Polytope {
    Mat a;  // rows scaled to unit norm
    Vec b;
    Vec lo, hi;  // bounding box of the vertices
  };

  ConvexDomain(int dim, std::variant<Ellipsoid, PNorm, Polytope> rep);

  int dim_ = 0;
  std::variant<Ellipsoid, PNorm, Polytope> rep_;
  double diameter_ = 0.0;
  Vec interior_;
};

}  // namespace hlab
