#include "hlab/domain.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "hlab/errors.hpp"

namespace hlab {

namespace {

// Root of a function that is negative at 0 and positive at hi, increasing
// through its unique root. Newton steps guarded by bisection; runs until the
// bracket cannot shrink.
double bracketed_root(const std::function<double(double)>& f, const std::function<double(double)>& df,
                      double lo, double hi) {
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double fx = f(x);
    if (fx == 0.0) return x;
    if (fx < 0.0)
      lo = x;
    else
      hi = x;
    const double d = df(x);
    double next = (d > 0.0 && std::isfinite(d)) ? x - fx / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == x || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) return next;
    x = next;
  }
  return x;
}

void for_each_subset(int m, int k, const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> idx(static_cast<std::size_t>(k));
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == k) {
      fn(idx);
      return;
    }
    for (int i = start; i < m; ++i) {
      idx[static_cast<std::size_t>(depth)] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
}

Vec random_direction(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec d(n);
  do {
    for (int i = 0; i < n; ++i) d(i) = g(rng);
  } while (d.norm() < 1e-12);
  return d / d.norm();
}

}  // namespace

ConvexDomain::ConvexDomain(int dim, std::variant<Ellipsoid, PNorm, Polytope> rep) : dim_(dim), rep_(std::move(rep)) {}

// ------------------------------------------------------------- factories

ConvexDomain ConvexDomain::ellipsoid(const Vec& center, const Mat& shape) {
  const int n = static_cast<int>(center.size());
  if (n < 1 || shape.rows() != n || shape.cols() != n) throw Error(ErrorKind::InvalidGeometry, "ellipsoid shape must be n x n");
  if (!center.allFinite() || !shape.allFinite()) throw Error(ErrorKind::InvalidGeometry, "non-finite ellipsoid parameters");
  if ((shape - shape.transpose()).norm() > 1e-12 * shape.norm()) throw Error(ErrorKind::InvalidGeometry, "ellipsoid shape matrix is not symmetric");
  const Mat sym = 0.5 * (shape + shape.transpose());
  Eigen::LLT<Mat> llt(sym);
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::InvalidGeometry, "ellipsoid shape matrix is not positive definite");
  Eigen::SelfAdjointEigenSolver<Mat> es(sym);
  if (es.eigenvalues()(0) <= 0.0) throw Error(ErrorKind::InvalidGeometry, "ellipsoid shape matrix is not positive definite");
  const Mat l = llt.matrixL();
  Ellipsoid e{center, sym, l.transpose().inverse()};
  ConvexDomain d(n, e);
  d.diameter_ = 2.0 / std::sqrt(es.eigenvalues()(0));
  d.interior_ = center;
  return d;
}

ConvexDomain ConvexDomain::unit_ball(int n) { return ellipsoid(Vec::Zero(n), Mat::Identity(n, n)); }

ConvexDomain ConvexDomain::pnorm_ball(int n, double p, double scale) {
  if (n < 1) throw Error(ErrorKind::InvalidGeometry, "dimension must be positive");
  if (!(p >= 2.0) || !std::isfinite(p)) throw Error(ErrorKind::InvalidGeometry, "p-norm ball needs finite p >= 2");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw Error(ErrorKind::InvalidGeometry, "p-norm ball scale must be positive");
  ConvexDomain d(n, PNorm{p, scale});
  d.diameter_ = 2.0 * scale * std::pow(static_cast<double>(n), 0.5 - 1.0 / p);
  d.interior_ = Vec::Zero(n);
  return d;
}

ConvexDomain ConvexDomain::polytope(const Mat& a_in, const Vec& b_in) {
  const int n = static_cast<int>(a_in.cols());
  const int m = static_cast<int>(a_in.rows());
  if (n < 1 || b_in.size() != m || m < n + 1) throw Error(ErrorKind::InvalidGeometry, "polytope needs at least n+1 inequalities A x < b");
  if (!a_in.allFinite() || !b_in.allFinite()) throw Error(ErrorKind::InvalidGeometry, "non-finite polytope data");
  Mat a = a_in;
  Vec b = b_in;
  for (int i = 0; i < m; ++i) {
    const double nrm = a.row(i).norm();
    if (!(nrm > 0.0)) throw Error(ErrorKind::InvalidGeometry, "zero row in polytope inequalities");
    a.row(i) /= nrm;
    b(i) /= nrm;
  }
  Eigen::FullPivLU<Mat> rank_lu(a);
  if (rank_lu.rank() < n) throw Error(ErrorKind::InvalidGeometry, "polytope is unbounded (normals do not span)");
  // Recession cone {d : A d <= 0} must be trivial; its extreme rays are cut
  // out by n-1 tight constraints.
  bool unbounded = false;
  auto check_dir = [&](const Vec& dir) {
    if ((a * dir).maxCoeff() <= 1e-12) unbounded = true;
  };
  if (n == 1) {
    check_dir(Vec::Constant(1, 1.0));
    check_dir(Vec::Constant(1, -1.0));
  } else {
    for_each_subset(m, n - 1, [&](const std::vector<int>& rows) {
      if (unbounded) return;
      Mat sub(n - 1, n);
      for (int r = 0; r < n - 1; ++r) sub.row(r) = a.row(rows[static_cast<std::size_t>(r)]);
      Eigen::FullPivLU<Mat> lu(sub);
      if (lu.rank() != n - 1) return;
      const Mat k = lu.kernel();
      const Vec dir = k.col(0).normalized();
      check_dir(dir);
      check_dir(-dir);
    });
  }
  if (unbounded) throw Error(ErrorKind::InvalidGeometry, "polytope is unbounded");
  std::vector<Vec> vertices;
  for_each_subset(m, n, [&](const std::vector<int>& rows) {
    Mat sub(n, n);
    Vec rhs(n);
    for (int r = 0; r < n; ++r) {
      sub.row(r) = a.row(rows[static_cast<std::size_t>(r)]);
      rhs(r) = b(rows[static_cast<std::size_t>(r)]);
    }
    Eigen::FullPivLU<Mat> lu(sub);
    if (lu.rank() != n) return;
    const Vec v = lu.solve(rhs);
    if ((a * v - b).maxCoeff() <= 1e-10) vertices.push_back(v);
  });
  if (vertices.empty()) throw Error(ErrorKind::InvalidGeometry, "polytope is empty");
  Vec centroid = Vec::Zero(n);
  Vec lo = vertices[0], hi = vertices[0];
  for (const Vec& v : vertices) {
    centroid += v;
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  centroid /= static_cast<double>(vertices.size());
  if (!((a * centroid - b).maxCoeff() < 0.0)) throw Error(ErrorKind::InvalidGeometry, "polytope has empty interior");
  double diam = 0.0;
  for (const Vec& u : vertices)
    for (const Vec& v : vertices) diam = std::max(diam, (u - v).norm());
  ConvexDomain d(n, Polytope{a, b, lo, hi});
  d.diameter_ = diam;
  d.interior_ = centroid;
  return d;
}

ConvexDomain ConvexDomain::standard_simplex(int n) {
  Mat a = Mat::Zero(n + 1, n);
  Vec b = Vec::Zero(n + 1);
  for (int i = 0; i < n; ++i) a(i, i) = -1.0;
  a.row(n).setOnes();
  b(n) = 1.0;
  return polytope(a, b);
}

// ------------------------------------------------------------- accessors

ConvexDomain::Kind ConvexDomain::kind() const {
  switch (rep_.index()) {
    case 0: return Kind::Ellipsoid;
    case 1: return Kind::PNormBall;
    default: return Kind::HalfspacePolytope;
  }
}

std::string ConvexDomain::kind_name() const {
  switch (kind()) {
    case Kind::Ellipsoid: return "ellipsoid";
    case Kind::PNormBall: return "pnorm-ball";
    case Kind::HalfspacePolytope: return "polytope";
  }
  return "unknown";
}

const Vec& ConvexDomain::ellipsoid_center() const {
  if (const auto* e = std::get_if<Ellipsoid>(&rep_)) return e->center;
  throw Error(ErrorKind::InvalidArgument, "domain is not an ellipsoid");
}
const Mat& ConvexDomain::ellipsoid_shape() const {
  if (const auto* e = std::get_if<Ellipsoid>(&rep_)) return e->shape;
  throw Error(ErrorKind::InvalidArgument, "domain is not an ellipsoid");
}
double ConvexDomain::pnorm_exponent() const {
  if (const auto* p = std::get_if<PNorm>(&rep_)) return p->p;
  throw Error(ErrorKind::InvalidArgument, "domain is not a p-norm ball");
}
double ConvexDomain::pnorm_scale() const {
  if (const auto* p = std::get_if<PNorm>(&rep_)) return p->scale;
  throw Error(ErrorKind::InvalidArgument, "domain is not a p-norm ball");
}
const Mat& ConvexDomain::polytope_normals() const {
  if (const auto* p = std::get_if<Polytope>(&rep_)) return p->a;
  throw Error(ErrorKind::InvalidArgument, "domain is not a polytope");
}
const Vec& ConvexDomain::polytope_offsets() const {
  if (const auto* p = std::get_if<Polytope>(&rep_)) return p->b;
  throw Error(ErrorKind::InvalidArgument, "domain is not a polytope");
}

// ------------------------------------------------------- defining function

double ConvexDomain::defining(const Vec& x) const {
  if (const auto* e = std::get_if<Ellipsoid>(&rep_)) {
    const Vec d = x - e->center;
    return d.dot(e->shape * d) - 1.0;
  }
  if (const auto* p = std::get_if<PNorm>(&rep_)) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) s += std::pow(std::abs(x(i)) / p->scale, p->p);
    return s - 1.0;
  }
  const auto& poly = std::get<Polytope>(rep_);
  return (poly.a * x - poly.b).maxCoeff();
}

Vec ConvexDomain::gradient(const Vec& x) const {
  if (const auto* e = std::get_if<Ellipsoid>(&rep_)) return 2.0 * (e->shape * (x - e->center));
  if (const auto* p = std::get_if<PNorm>(&rep_)) {
    Vec g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double u = x(i) / p->scale;
      g(i) = p->p * std::pow(std::abs(u), p->p - 1.0) * (u < 0.0 ? -1.0 : 1.0) / p->scale;
    }
    return g;
  }
  const auto& poly = std::get<Polytope>(rep_);
  Eigen::Index arg = 0;
  (poly.a * x - poly.b).maxCoeff(&arg);
  return poly.a.row(arg).transpose();
}

double ConvexDomain::defining_increment(const Vec& xi, const Vec& delta) const {
  if (const auto* e = std::get_if<Ellipsoid>(&rep_)) {
    const Vec sd = e->shape * delta;
    return 2.0 * (xi - e->center).dot(sd) + delta.dot(sd);
  }
  if (const auto* p = std::get_if<PNorm>(&rep_)) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < xi.size(); ++i) {
      const double u = xi(i) / p->scale;
      const double v = delta(i) / p->scale;
      if (u == 0.0) {
        s += std::pow(std::abs(v), p->p);
        continue;
      }
      const double r = v / u;
      if (r > -1.0)
        s += std::pow(std::abs(u), p->p) * std::expm1(p->p * std::log1p(r));
      else
        s += std::pow(std::abs(u + v), p->p) - std::pow(std::abs(u), p->p);
    }
    return s;
  }
  return defining(xi + delta) - defining(xi);
}

bool ConvexDomain::contains(const ProjPoint& x) const {
  if (x.dim() != dim_ || !x.in_chart()) return false;
  return contains(x.chart());
}

bool ConvexDomain::on_boundary(const Vec& x, double rel_tol) const {
  if (x.size() != dim_) return false;
  const double f = defining(x);
  if (kind() == Kind::HalfspacePolytope) return std::abs(f) <= rel_tol * diameter_;
  const double g = gradient(x).norm();
  if (!(g > 0.0)) return false;
  return std::abs(f) / g <= rel_tol * diameter_;
}

// ------------------------------------------------------------- ray casting

double ConvexDomain::exit_parameter(const Vec& x, const Vec& dir) const {
  if (x.size() != dim_ || dir.size() != dim_) throw Error(ErrorKind::InvalidArgument, "dimension mismatch in ray query");
  if (!(dir.norm() > 0.0)) throw Error(ErrorKind::InvalidGeometry, "ray direction is zero");
  if (const auto* e = std::get_if<Ellipsoid>(&rep_)) {
    const Vec d = x - e->center;
    const Vec sdir = e->shape * dir;
    const double qa = dir.dot(sdir);
    const double qb = d.dot(sdir);
    const double c0 = 1.0 - d.dot(e->shape * d);
    if (!(c0 > 0.0)) throw Error(ErrorKind::OutsideDomain, "ray origin is not inside the domain");
    const double disc = std::sqrt(qb * qb + qa * c0);
    return qb >= 0.0 ? c0 / (qb + disc) : (disc - qb) / qa;
  }
  if (const auto* p = std::get_if<PNorm>(&rep_)) {
    if (!(defining(x) < 0.0)) throw Error(ErrorKind::OutsideDomain, "ray origin is not inside the domain");
    const double pp = p->p;
    const double sc = p->scale;
    auto f = [&](double t) { return defining(x + t * dir); };
    auto df = [&](double t) {
      double s = 0.0;
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double u = (x(i) + t * dir(i)) / sc;
        s += pp * std::pow(std::abs(u), pp - 1.0) * (u < 0.0 ? -1.0 : 1.0) * dir(i) / sc;
      }
      return s;
    };
    double hi = diameter_ / dir.norm();
    while (!(f(hi) > 0.0)) hi *= 2.0;
    return bracketed_root(f, df, 0.0, hi);
  }
  const auto& poly = std::get<Polytope>(rep_);
  const Vec slack = poly.b - poly.a * x;
  if (!(slack.minCoeff() > 0.0)) throw Error(ErrorKind::OutsideDomain, "ray origin is not inside the domain");
  const Vec rate = poly.a * dir;
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < rate.size(); ++i)
    if (rate(i) > 0.0) best = std::min(best, slack(i) / rate(i));
  if (!std::isfinite(best)) throw Error(ErrorKind::NumericalFailure, "ray does not leave the polytope");
  return best;
}

double ConvexDomain::exit_parameter_near(const Vec& xi, const Vec& offset, const Vec& dir) const {
  if (!(dir.norm() > 0.0)) throw Error(ErrorKind::InvalidGeometry, "ray direction is zero");
  if (const auto* e = std::get_if<Ellipsoid>(&rep_)) {
    const Vec grad_half = e->shape * (xi - e->center);
    const Vec s_off = e->shape * offset;
    const double c0 = -(2.0 * grad_half.dot(offset) + offset.dot(s_off));
    if (!(c0 > 0.0)) throw Error(ErrorKind::OutsideDomain, "near-boundary point is not inside the domain");
    const double qb = grad_half.dot(dir) + s_off.dot(dir);
    const double qa = dir.dot(e->shape * dir);
    const double disc = std::sqrt(qb * qb + qa * c0);
    return qb >= 0.0 ? c0 / (qb + disc) : (disc - qb) / qa;
  }
  if (kind() == Kind::PNormBall) {
    auto g = [&](double t) { return defining_increment(xi, offset + t * dir); };
    if (!(g(0.0) < 0.0)) throw Error(ErrorKind::OutsideDomain, "near-boundary point is not inside the domain");
    auto dg = [&](double t) { return gradient(xi + offset + t * dir).dot(dir); };
    double hi = std::max(offset.norm(), 1e-300) / dir.norm();
    int guard = 0;
    while (!(g(hi) > 0.0)) {
      hi *= 2.0;
      if (++guard > 2000) throw Error(ErrorKind::NumericalFailure, "near-boundary ray does not exit");
    }
    return bracketed_root(g, dg, 0.0, hi);
  }
  return exit_parameter(xi + offset, dir);
}

Vec ConvexDomain::ray_boundary(const Vec& x, const Vec& dir) const { return x + exit_parameter(x, dir) * dir; }

ProjPoint ConvexDomain::ray_boundary(const ProjPoint& x, const Vec& dir) const {
  if (!contains(x)) throw Error(ErrorKind::OutsideDomain, "ray origin is not inside the domain");
  return ProjPoint::from_chart(ray_boundary(x.chart(), dir));
}

ChordEndpoints ConvexDomain::chord(const Vec& x, const Vec& dir) const {
  return ChordEndpoints{ProjPoint::from_chart(x - exit_parameter(x, -dir) * dir),
                        ProjPoint::from_chart(x + exit_parameter(x, dir) * dir)};
}

// --------------------------------------------------------- support planes

AffineFunctional ConvexDomain::supporting_hyperplane(const ProjPoint& xi) const {
  if (xi.dim() != dim_ || !xi.in_chart()) throw Error(ErrorKind::InvalidGeometry, "boundary point is not in the chart");
  return supporting_hyperplane(xi.chart());
}

AffineFunctional ConvexDomain::supporting_hyperplane(const Vec& xi) const {
  if (!on_boundary(xi)) throw Error(ErrorKind::InvalidGeometry, "point is not on the boundary");
  if (const auto* poly = std::get_if<Polytope>(&rep_)) {
    const Vec r = poly->a * xi - poly->b;
    int active = 0;
    Eigen::Index which = 0;
    for (Eigen::Index i = 0; i < r.size(); ++i) {
      if (std::abs(r(i)) <= kBoundaryTolerance * diameter_) {
        ++active;
        which = i;
      }
    }
    if (active != 1) throw Error(ErrorKind::NonUniqueSupport, "boundary point lies on several facets");
    AffineFunctional f{poly->a.row(which).transpose(), 0.0};
    f.offset = -f.normal.dot(xi);
    return f;
  }
  Vec g = gradient(xi);
  g /= g.norm();
  return AffineFunctional{g, -g.dot(xi)};
}

// ---------------------------------------------------- projective transport

std::optional<Mat> ConvexDomain::quadric() const {
  const auto* e = std::get_if<Ellipsoid>(&rep_);
  if (!e) return std::nullopt;
  const int n = dim_;
  Mat j(n + 1, n + 1);
  const Vec sc = e->shape * e->center;
  j.topLeftCorner(n, n) = e->shape;
  j.topRightCorner(n, 1) = -sc;
  j.bottomLeftCorner(1, n) = -sc.transpose();
  j(n, n) = e->center.dot(sc) - 1.0;
  return j;
}

ConvexDomain ConvexDomain::transformed(const ProjectiveMap& h) const {
  if (h.size() != dim_ + 1) throw Error(ErrorKind::InvalidArgument, "map size does not match domain dimension");
  const Mat& inv = h.inverse_matrix();
  const int n = dim_;
  if (kind() == Kind::Ellipsoid) {
    Mat j = inv.transpose() * (*quadric()) * inv;
    j = 0.5 * (j + j.transpose());
    const Mat a = j.topLeftCorner(n, n);
    const Vec b = j.topRightCorner(n, 1);
    const double c = j(n, n);
    Eigen::LLT<Mat> llt(a);
    if (llt.info() != Eigen::Success) throw Error(ErrorKind::InvalidGeometry, "image of the ellipsoid is not bounded in the chart");
    const Vec center = -llt.solve(b);
    const double k = -(c + b.dot(center));
    if (!(k > 0.0)) throw Error(ErrorKind::InvalidGeometry, "image of the ellipsoid is empty");
    return ellipsoid(center, a / k);
  }
  if (kind() == Kind::HalfspacePolytope) {
    const auto& poly = std::get<Polytope>(rep_);
    const Vec img = h.apply(ProjPoint::from_chart(interior_).coords());
    const Vec pre = inv * img;
    const double sigma = pre(n) > 0.0 ? 1.0 : -1.0;
    const double sigma_img = img(n) > 0.0 ? 1.0 : -1.0;
    Mat a(poly.a.rows(), n);
    Vec b(poly.a.rows());
    for (Eigen::Index i = 0; i < poly.a.rows(); ++i) {
      Eigen::RowVectorXd r(n + 1);
      r.head(n) = poly.a.row(i);
      r(n) = -poly.b(i);
      const Eigen::RowVectorXd rn = sigma * sigma_img * (r * inv);
      a.row(i) = rn.head(n);
      b(i) = -rn(n);
    }
    return polytope(a, b);
  }
  throw Error(ErrorKind::UnsupportedScenario, "p-norm balls are not closed under projective maps");
}

bool ConvexDomain::preserved_by(const ProjectiveMap& g, std::mt19937_64& rng, int samples) const {
  if (g.size() != dim_ + 1) return false;
  for (int s = 0; s < samples; ++s) {
    const ProjPoint x = ProjPoint::from_chart(sample_interior(rng));
    const Vec img = g.apply(x.coords());
    if (img(dim_) == 0.0) return false;
    const Vec y = img.head(dim_) / img(dim_);
    if (contains(y)) continue;
    if (!on_boundary(y)) return false;
  }
  return true;
}

// --------------------------------------------------------------- sampling

Vec ConvexDomain::sample_interior(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (const auto* e = std::get_if<Ellipsoid>(&rep_)) {
    for (;;) {
      const Vec u = random_direction(dim_, rng) * std::pow(unit(rng), 1.0 / dim_);
      const Vec x = e->center + e->sqrt_inverse * u;
      if (contains(x)) return x;
    }
  }
  Vec lo, hi;
  if (const auto* p = std::get_if<PNorm>(&rep_)) {
    lo = Vec::Constant(dim_, -p->scale);
    hi = Vec::Constant(dim_, p->scale);
  } else {
    const auto& poly = std::get<Polytope>(rep_);
    lo = poly.lo;
    hi = poly.hi;
  }
  for (;;) {
    Vec x(dim_);
    for (int i = 0; i < dim_; ++i) x(i) = lo(i) + (hi(i) - lo(i)) * unit(rng);
    if (contains(x)) return x;
  }
}

Vec ConvexDomain::sample_boundary(std::mt19937_64& rng) const {
  return ray_boundary(interior_, random_direction(dim_, rng));
}

}  // namespace hlab
