#include "hlab/projective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hlab/errors.hpp"

namespace hlab {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidGeometry: return "InvalidGeometry";
    case ErrorKind::DegenerateChord: return "DegenerateChord";
    case ErrorKind::NumericalFailure: return "NumericalFailure";
    case ErrorKind::OutsideDomain: return "OutsideDomain";
    case ErrorKind::NonUniqueSupport: return "NonUniqueSupport";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::SpectralAmbiguity: return "SpectralAmbiguity";
    case ErrorKind::UnsupportedScenario: return "UnsupportedScenario";
    case ErrorKind::NotBiproximal: return "NotBiproximal";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::SubcriticalParameter: return "SubcriticalParameter";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

// ---------------------------------------------------------------- ProjPoint

Vec ProjPoint::normalize(const Vec& h) {
  if (h.size() < 2) throw Error(ErrorKind::InvalidGeometry, "homogeneous vector needs at least 2 entries");
  if (!h.allFinite()) throw Error(ErrorKind::InvalidGeometry, "non-finite homogeneous coordinates");
  const double last = h(h.size() - 1);
  if (last != 0.0) {
    if (last == 1.0) return h;
    return h / last;
  }
  const double n = h.norm();
  if (n == 0.0) throw Error(ErrorKind::InvalidGeometry, "zero vector is not a projective point");
  Vec r = h;
  if (std::abs(n - 1.0) > 1e-14) r /= n;
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    if (r(i) != 0.0) {
      if (r(i) < 0.0) r = -r;
      break;
    }
  }
  return r;
}

ProjPoint::ProjPoint(const Vec& homogeneous) : coords_(normalize(homogeneous)) {}

ProjPoint ProjPoint::from_chart(const Vec& chart) {
  Vec h(chart.size() + 1);
  h.head(chart.size()) = chart;
  h(chart.size()) = 1.0;
  return ProjPoint(h);
}

Vec ProjPoint::chart() const {
  if (!in_chart()) throw Error(ErrorKind::InvalidGeometry, "point at infinity has no chart coordinates");
  return coords_.head(coords_.size() - 1);
}

// ------------------------------------------------------------ canonical form

namespace {

// Returns the canonical representative and writes log of the scale s with
// m = +-s * result.
Mat canonicalize(const Mat& m, double& log_scale) {
  const double n = m.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw Error(ErrorKind::InvalidGeometry, "matrix is zero or non-finite");
  Mat r = m;
  log_scale = 0.0;
  if (std::abs(n - 1.0) > 1e-14) {
    r /= n;
    log_scale = std::log(n);
  }
  const double cutoff = 1e-9 * r.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < r.rows(); ++i) {
    for (Eigen::Index j = 0; j < r.cols(); ++j) {
      if (std::abs(r(i, j)) > cutoff) {
        if (r(i, j) < 0.0) r = -r;
        return r;
      }
    }
  }
  return r;
}

double log_abs_det_of(const Mat& m) {
  Eigen::PartialPivLU<Mat> lu(m);
  const Mat& u = lu.matrixLU();
  double s = 0.0;
  for (Eigen::Index i = 0; i < u.rows(); ++i) s += std::log(std::abs(u(i, i)));
  return s;
}

}  // namespace

Mat canonical_matrix(const Mat& m) {
  double unused = 0.0;
  return canonicalize(m, unused);
}

std::size_t DedupKeyHash::operator()(const DedupKey& key) const noexcept {
  std::uint64_t h = 1469598103934665603ULL;
  for (std::int64_t c : key.cells) {
    h ^= static_cast<std::uint64_t>(c) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h *= 1099511628211ULL;
  }
  return static_cast<std::size_t>(h);
}

// ---------------------------------------------------------- ProjectiveMap

ProjectiveMap::ProjectiveMap(const Mat& m, Word word) : word_(reduce_word(std::move(word))) {
  if (m.rows() != m.cols() || m.rows() < 2) throw Error(ErrorKind::InvalidGeometry, "projective map needs a square matrix of size >= 2");
  if (!m.allFinite()) throw Error(ErrorKind::InvalidGeometry, "non-finite matrix entries");
  double log_scale = 0.0;
  matrix_ = canonicalize(m, log_scale);
  Eigen::JacobiSVD<Mat> svd(matrix_);
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  if (!(smin > 0.0) || sv(0) / smin > 1e12) throw Error(ErrorKind::InvalidGeometry, "matrix is singular (condition number above 1e12)");
  const Mat inv = matrix_.inverse();
  double log_inv = 0.0;
  inverse_ = canonicalize(inv, log_inv);
  log_inverse_scale_ = log_inv;
  log_abs_det_ = log_abs_det_of(matrix_);
}

ProjectiveMap ProjectiveMap::identity(int size) { return ProjectiveMap(Mat::Identity(size, size)); }

double ProjectiveMap::log_kappa() const {
  Eigen::JacobiSVD<Mat> a(matrix_);
  Eigen::JacobiSVD<Mat> b(inverse_);
  return std::log(a.singularValues()(0)) + log_inverse_scale_ + std::log(b.singularValues()(0));
}

double ProjectiveMap::kappa() const { return std::exp(log_kappa()); }

ProjectiveMap ProjectiveMap::inverse() const {
  ProjectiveMap r;
  r.matrix_ = inverse_;
  r.inverse_ = matrix_;
  r.log_inverse_scale_ = log_inverse_scale_;
  r.log_abs_det_ = -log_abs_det_ - static_cast<double>(size()) * log_inverse_scale_;
  r.word_ = invert_word(word_);
  return r;
}

ProjectiveMap ProjectiveMap::operator*(const ProjectiveMap& other) const {
  if (size() != other.size()) throw Error(ErrorKind::InvalidArgument, "composing maps of different sizes");
  ProjectiveMap r;
  double log_a = 0.0;
  double log_b = 0.0;
  r.matrix_ = canonicalize(matrix_ * other.matrix_, log_a);
  r.inverse_ = canonicalize(other.inverse_ * inverse_, log_b);
  r.log_inverse_scale_ = log_a + log_b + log_inverse_scale_ + other.log_inverse_scale_;
  r.log_abs_det_ = log_abs_det_ + other.log_abs_det_ - static_cast<double>(size()) * log_a;
  Word w = word_;
  w.insert(w.end(), other.word_.begin(), other.word_.end());
  r.word_ = reduce_word(std::move(w));
  return r;
}

DedupKey ProjectiveMap::key() const {
  DedupKey k;
  k.cells.reserve(static_cast<std::size_t>(matrix_.size()));
  for (Eigen::Index i = 0; i < matrix_.rows(); ++i)
    for (Eigen::Index j = 0; j < matrix_.cols(); ++j) k.cells.push_back(std::llround(matrix_(i, j) / kDedupGrid));
  return k;
}

std::vector<DedupKey> ProjectiveMap::probe_keys() const {
  std::vector<DedupKey> keys{key()};
  std::vector<std::size_t> ambiguous;
  std::vector<std::int64_t> alternate;
  std::size_t idx = 0;
  for (Eigen::Index i = 0; i < matrix_.rows(); ++i) {
    for (Eigen::Index j = 0; j < matrix_.cols(); ++j, ++idx) {
      const double q = matrix_(i, j) / kDedupGrid;
      const double frac = q - std::floor(q);
      if (std::abs(frac - 0.5) < 0.05 && ambiguous.size() < 4) {
        ambiguous.push_back(idx);
        const std::int64_t primary = keys[0].cells[idx];
        alternate.push_back(primary == static_cast<std::int64_t>(std::floor(q)) ? primary + 1 : primary - 1);
      }
    }
  }
  const std::size_t combos = std::size_t{1} << ambiguous.size();
  for (std::size_t mask = 1; mask < combos; ++mask) {
    DedupKey k = keys[0];
    for (std::size_t b = 0; b < ambiguous.size(); ++b)
      if (mask & (std::size_t{1} << b)) k.cells[ambiguous[b]] = alternate[b];
    keys.push_back(std::move(k));
  }
  return keys;
}

Word reduce_word(Word w) {
  Word out;
  out.reserve(w.size());
  for (int letter : w) {
    if (letter == 0) throw Error(ErrorKind::InvalidArgument, "word letters are non-zero signed generator indices");
    if (!out.empty() && out.back() == -letter)
      out.pop_back();
    else
      out.push_back(letter);
  }
  return out;
}

Word invert_word(const Word& w) {
  Word r(w.rbegin(), w.rend());
  for (int& l : r) l = -l;
  return r;
}

// ------------------------------------------------------------- eigenvalues

namespace {

double gelfand_log_radius(const Mat& m);

// Power iteration on vectors; NaN when the dominant eigenvalue is not a
// simple real one (no convergence within the cap).
double power_log_radius(const Mat& m) {
  const Eigen::Index n = m.rows();
  Mat a = m / m.norm();
  for (int k = 0; k < 4; ++k) {
    a = a * a;
    const double s = a.norm();
    if (!(s > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    a /= s;
  }
  Eigen::Index col = 0;
  a.colwise().norm().maxCoeff(&col);
  Vec x = a.col(col);
  if (!(x.norm() > 0.0)) x = Vec::Ones(n);
  x.normalize();
  double prev = -1.0;
  int stable = 0;
  for (int it = 0; it < 4000; ++it) {
    Vec y = m * x;
    const double r = y.norm();
    if (!(r > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    y /= r;
    const double turn = std::min((y - x).norm(), (y + x).norm());
    x = y;
    if (turn < 1e-14 && std::abs(r - prev) <= 4e-16 * r) {
      if (++stable >= 3) return std::log(r);
    } else {
      stable = 0;
    }
    prev = r;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

double log_spectral_radius(const Mat& m) {
  if (!(m.norm() > 0.0)) return -std::numeric_limits<double>::infinity();
  const double p = power_log_radius(m);
  if (std::isfinite(p)) return p;
  return gelfand_log_radius(m);
}

namespace {

double gelfand_log_radius(const Mat& m) {
  constexpr int kSquarings = 44;
  Mat a = m;
  double n = a.norm();
  if (!(n > 0.0)) return -std::numeric_limits<double>::infinity();
  a /= n;
  double result = std::log(n);
  double weight = 1.0;
  Mat tmp(a.rows(), a.cols());
  for (int k = 0; k < kSquarings; ++k) {
    tmp.noalias() = a * a;
    n = tmp.norm();
    if (!(n > 0.0)) return -std::numeric_limits<double>::infinity();
    a = tmp / n;
    weight *= 0.5;
    result += weight * std::log(n);
  }
  return result;
}

}  // namespace

namespace {

struct TopEigen {
  bool simple_real = false;
  Vec vector;
};

TopEigen top_eigen(const Mat& m, std::vector<double>* moduli_out) {
  Eigen::EigenSolver<Mat> es(m);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::NumericalFailure, "eigen-solver did not converge");
  const auto& values = es.eigenvalues();
  std::vector<std::pair<double, Eigen::Index>> order;
  for (Eigen::Index i = 0; i < values.size(); ++i) order.emplace_back(std::abs(values(i)), i);
  std::sort(order.begin(), order.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
  if (moduli_out) {
    moduli_out->clear();
    for (const auto& o : order) moduli_out->push_back(o.first);
  }
  TopEigen t;
  const auto top = values(order[0].second);
  const bool real = std::abs(top.imag()) <= 1e-12 * std::abs(top);
  const bool gap = order.size() < 2 || order[0].first > order[1].first * (1.0 + 1e-9);
  if (real && gap) {
    t.simple_real = true;
    t.vector = es.eigenvectors().col(order[0].second).real();
  }
  return t;
}

}  // namespace

EigenSummary eigen_summary(const ProjectiveMap& g) {
  EigenSummary s;
  const TopEigen fwd = top_eigen(g.matrix(), &s.moduli);
  const TopEigen bwd = top_eigen(g.inverse_matrix(), nullptr);
  s.top_is_simple_real = fwd.simple_real;
  if (fwd.simple_real) s.attracting_point = ProjPoint(fwd.vector);
  if (bwd.simple_real) s.repelling_point = ProjPoint(bwd.vector);
  s.log_top = log_spectral_radius(g.matrix());
  s.log_bottom = -(log_spectral_radius(g.inverse_matrix()) + g.log_kappa_frobenius());
  return s;
}

// ------------------------------------------------------------- cross-ratio

double cross_ratio(const ProjPoint& a, const ProjPoint& x, const ProjPoint& y, const ProjPoint& b) {
  const Vec pa = a.chart();
  const Vec px = x.chart();
  const Vec py = y.chart();
  const Vec pb = b.chart();
  const Vec span = pb - pa;
  const double len = span.norm();
  if (!(len > 0.0)) throw Error(ErrorKind::DegenerateChord, "chord endpoints coincide");
  const Vec u = span / len;
  auto param = [&](const Vec& p) {
    const Vec d = p - pa;
    const double t = d.dot(u);
    if ((d - t * u).norm() > 1e-9 * len) throw Error(ErrorKind::InvalidGeometry, "cross-ratio points are not collinear");
    return t;
  };
  const double tx = param(px);
  const double ty = param(py);
  if (tx == 0.0 || ty == len) throw Error(ErrorKind::DegenerateChord, "a = x or y = b");
  if (tx < 0.0 || ty < tx || ty > len) throw Error(ErrorKind::InvalidGeometry, "points are not ordered a, x, y, b");
  return (ty * (len - tx)) / (tx * (len - ty));
}

}  // namespace hlab
