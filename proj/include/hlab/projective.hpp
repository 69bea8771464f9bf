#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace hlab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Signed generator indices: +k is generator k (1-based), -k its inverse.
using Word = std::vector<int>;

/// A point of RP^n stored by homogeneous coordinates. Points in the affine
/// chart x_{n+1} = 1 are stored with last coordinate exactly 1, so reading the
/// chart coordinates back never rounds.
class ProjPoint {
 public:
  explicit ProjPoint(const Vec& homogeneous);

  static ProjPoint from_chart(const Vec& chart);

  const Vec& coords() const { return coords_; }
  /// Projective dimension n (coords has n+1 entries).
  int dim() const { return static_cast<int>(coords_.size()) - 1; }
  bool in_chart() const { return coords_(coords_.size() - 1) != 0.0; }
  /// Affine chart coordinates; throws InvalidGeometry for points at infinity.
  Vec chart() const;

  static Vec normalize(const Vec& homogeneous);

 private:
  Vec coords_;
};

/// Hash key of a projective class: entries of the canonical representative
/// rounded to a 1e-9 grid.
struct DedupKey {
  std::vector<std::int64_t> cells;
  bool operator==(const DedupKey&) const = default;
};

struct DedupKeyHash {
  std::size_t operator()(const DedupKey& key) const noexcept;
};

inline constexpr double kDedupGrid = 1e-9;

/// Canonical PGL representative: unit Frobenius norm, first non-negligible
/// entry positive. Idempotent bitwise.
Mat canonical_matrix(const Mat& m);

/// Element of PGL(n+1). Besides the canonical matrix it carries the canonical
/// inverse and the exact log-scales relating them, so that products of many
/// factors keep extreme eigenvalue moduli and determinants accurate long
/// after the smallest singular value has dropped below double resolution.
class ProjectiveMap {
 public:
  /// Throws InvalidGeometry when the matrix is singular or numerically so.
  explicit ProjectiveMap(const Mat& m, Word word = {});

  static ProjectiveMap identity(int size);

  int size() const { return static_cast<int>(matrix_.rows()); }
  const Mat& matrix() const { return matrix_; }
  const Mat& inverse_matrix() const { return inverse_; }
  const Word& word() const { return word_; }
  void set_word(Word w) { word_ = std::move(w); }

  /// log(|M|_F * |M^{-1}|_F) for the canonical representative M.
  double log_kappa_frobenius() const { return log_inverse_scale_; }
  /// log |det M| for the canonical representative M.
  double log_abs_det() const { return log_abs_det_; }
  /// log kappa with the operator 2-norm.
  double log_kappa() const;
  double kappa() const;

  ProjectiveMap inverse() const;
  /// Composition (this o other); words are concatenated and freely reduced.
  ProjectiveMap operator*(const ProjectiveMap& other) const;

  Vec apply(const Vec& homogeneous) const { return matrix_ * homogeneous; }
  ProjPoint apply(const ProjPoint& p) const { return ProjPoint(matrix_ * p.coords()); }

  DedupKey key() const;
  /// The primary key followed by alternates for entries that sit within
  /// rounding noise of a grid boundary.
  std::vector<DedupKey> probe_keys() const;

 private:
  ProjectiveMap() = default;

  Mat matrix_;
  Mat inverse_;
  double log_inverse_scale_ = 0.0;
  double log_abs_det_ = 0.0;
  Word word_;
};

Word reduce_word(Word w);
Word invert_word(const Word& w);

struct EigenSummary {
  /// Eigenvalue moduli of the canonical representative, non-increasing.
  std::vector<double> moduli;
  bool top_is_simple_real = false;
  std::optional<ProjPoint> attracting_point;
  std::optional<ProjPoint> repelling_point;
  /// log lambda_1 and log lambda_{n+1} of the canonical representative,
  /// from the spectral radii of M and M^{-1}.
  double log_top = 0.0;
  double log_bottom = 0.0;
};

/// Throws NumericalFailure if the dense solver does not converge.
EigenSummary eigen_summary(const ProjectiveMap& g);

/// log of the spectral radius of a square matrix by repeated squaring with
/// renormalisation (Gelfand's formula), 44 squarings.
double log_spectral_radius(const Mat& m);

/// Collinear cross-ratio |ay||bx| / (|ax||by|) in chart coordinates, for
/// a, x, y, b in this order along a line.
double cross_ratio(const ProjPoint& a, const ProjPoint& x, const ProjPoint& y, const ProjPoint& b);

}  // namespace hlab
