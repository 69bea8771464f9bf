#include "hlab/group.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <unordered_map>

#include "hlab/geometry.hpp"

namespace hlab {

namespace {

// Projective classes matched entrywise to kMatchTolerance on canonical
// matrices. Buckets are cells of a coarse grid; a query also visits the
// neighbouring cell of every entry lying within the tolerance of a cell wall,
// so two matrices closer than the tolerance always meet.
class ClassIndex {
 public:
  static constexpr double kCell = 1e-6;
  static constexpr double kMatchTolerance = 1e-8;

  bool contains(const Mat& m) const { return find(m) >= 0; }

  /// Insertion index of a stored matrix matching m, or -1.
  std::ptrdiff_t find(const Mat& m) const {
    std::ptrdiff_t found = -1;
    visit(m, [&](const DedupKey& k) {
      auto range = buckets_.equal_range(k);
      for (auto it = range.first; it != range.second && found < 0; ++it)
        if (close(it->second, m)) found = static_cast<std::ptrdiff_t>(it->second);
      return found < 0;
    });
    return found;
  }

  void insert(const Mat& m) {
    const std::size_t id = store_.size() / static_cast<std::size_t>(m.size());
    store_.insert(store_.end(), m.data(), m.data() + m.size());
    buckets_.emplace(cell_key(m), id);
  }

 private:
  static DedupKey cell_key(const Mat& m) {
    DedupKey k;
    k.cells.resize(static_cast<std::size_t>(m.size()));
    for (Eigen::Index i = 0; i < m.size(); ++i)
      k.cells[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(std::floor(m.data()[i] / kCell));
    return k;
  }

  template <class F>
  void visit(const Mat& m, F&& f) const {
    DedupKey k = cell_key(m);
    std::vector<std::pair<std::size_t, std::int64_t>> walls;
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      const double q = m.data()[i] / kCell;
      const double frac = q - std::floor(q);
      const double w = kMatchTolerance / kCell;
      if (frac < w) walls.emplace_back(static_cast<std::size_t>(i), -1);
      else if (frac > 1.0 - w) walls.emplace_back(static_cast<std::size_t>(i), 1);
    }
    if (walls.size() > 16) walls.resize(16);
    const std::size_t combos = std::size_t{1} << walls.size();
    const DedupKey base = k;
    for (std::size_t mask = 0; mask < combos; ++mask) {
      k = base;
      for (std::size_t b = 0; b < walls.size(); ++b)
        if (mask & (std::size_t{1} << b)) k.cells[walls[b].first] += walls[b].second;
      if (!f(k)) return;
    }
  }

  bool close(std::size_t id, const Mat& m) const {
    const double* p = store_.data() + id * static_cast<std::size_t>(m.size());
    for (Eigen::Index i = 0; i < m.size(); ++i)
      if (std::abs(p[i] - m.data()[i]) > kMatchTolerance) return false;
    return true;
  }

  std::vector<double> store_;
  std::unordered_multimap<DedupKey, std::size_t, DedupKeyHash> buckets_;
};

bool word_less(const Word& a, const Word& b);

bool element_less(const OrbitElement& a, const OrbitElement& b) {
  if (a.distance != b.distance) return a.distance < b.distance;
  return word_less(a.g.word(), b.g.word());
}

int letter_rank(int l) { return l > 0 ? 2 * (l - 1) : 2 * (-l - 1) + 1; }

bool word_less(const Word& a, const Word& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(),
                                      [](int x, int y) { return letter_rank(x) < letter_rank(y); });
}

std::vector<int> alphabet(int rank) {
  std::vector<int> letters;
  for (int k = 1; k <= rank; ++k) {
    letters.push_back(k);
    letters.push_back(-k);
  }
  return letters;
}

struct Child {
  ProjectiveMap g;
  double distance;
  int last;
};

// Shared breadth-first driver. depth_limit < 0 means distance-limited.
OrbitBall enumerate(const GroupScenario& s, double radius, int depth_limit, const Exec& exec) {
  const Vec o = s.basepoint_homogeneous();
  const std::vector<int> letters = alphabet(s.rank());
  const bool by_radius = depth_limit < 0;
  const double keep_limit = by_radius ? radius + s.prune_margin : std::numeric_limits<double>::infinity();

  OrbitBall ball;
  ball.radius = by_radius ? radius : 0.0;
  ball.word_length_cutoff = by_radius ? -1 : depth_limit;
  const ProjectiveMap id = ProjectiveMap::identity(s.domain.dimension() + 1);
  ball.elements.push_back({id, ProjPoint(o), 0.0});

  std::vector<Child> frontier{{id, 0.0, 0}};
  ClassIndex index;
  index.insert(id.matrix());

  auto fail_budget = [&](double cutoff) {
    std::sort(ball.elements.begin(), ball.elements.end(), element_less);
    throw OrbitBudgetError(std::move(ball), cutoff);
  };

  for (int depth = 1; !frontier.empty() && (by_radius || depth <= depth_limit); ++depth) {
    // Children of every frontier node, computed in parallel, merged in order.
    std::vector<std::vector<Child>> kids(frontier.size());
    parallel_for(frontier.size(), exec, [&](std::size_t i) {
      const Child& parent = frontier[i];
      for (int l : letters) {
        if (s.free_group && parent.last == -l) continue;
        ProjectiveMap g = parent.g * s.letter(l);
        const double d = orbit_distance(s.domain, o, g, o);
        if (d > keep_limit) continue;
        kids[i].push_back({std::move(g), d, l});
      }
    });
    std::vector<Child> upcoming;
    for (std::size_t gi = 0; gi < kids.size(); ++gi) {
      for (std::size_t ci = 0; ci < kids[gi].size(); ++ci) {
        Child& c = kids[gi][ci];
        ++ball.generated;
        if (index.contains(c.g.matrix())) {
          // Distinct reduced words of a free group never coincide; a match
          // there is a numerical collision and the element is still kept.
          if (!s.free_group) {
            ++ball.duplicates;
            continue;
          }
          ++ball.key_collisions;
        } else {
          index.insert(c.g.matrix());
        }
        if (c.distance <= (by_radius ? radius : keep_limit))
          ball.elements.push_back({c.g, ProjPoint(c.g.apply(o)), c.distance});
        upcoming.push_back(std::move(c));
        if (ball.elements.size() + upcoming.size() > s.element_budget) {
          if (!by_radius) fail_budget(depth - 1);
          // Complete below the nearest unexpanded node, less the margin the
          // pruning already relies on.
          double nearest = std::numeric_limits<double>::infinity();
          for (const auto& u : upcoming) nearest = std::min(nearest, u.distance);
          for (std::size_t gj = gi; gj < kids.size(); ++gj)
            for (std::size_t cj = (gj == gi ? ci + 1 : 0); cj < kids[gj].size(); ++cj)
              nearest = std::min(nearest, kids[gj][cj].distance);
          fail_budget(std::clamp(nearest - s.prune_margin, 0.0, radius));
        }
      }
    }
    frontier = std::move(upcoming);
  }
  std::sort(ball.elements.begin(), ball.elements.end(), element_less);
  return ball;
}

}  // namespace

// ------------------------------------------------------------------ scenario

const ProjectiveMap& GroupScenario::letter(int signed_index) const {
  const int k = std::abs(signed_index);
  if (signed_index == 0 || k > rank()) throw Error(ErrorKind::InvalidArgument, "letter out of range");
  if (inverses.size() != generators.size()) throw Error(ErrorKind::InvalidArgument, "scenario is not finalized");
  return signed_index > 0 ? generators[static_cast<std::size_t>(k - 1)] : inverses[static_cast<std::size_t>(k - 1)];
}

ProjectiveMap GroupScenario::element(const Word& w) const {
  ProjectiveMap g = ProjectiveMap::identity(domain.dimension() + 1);
  for (int a : reduce_word(w)) g = g * letter(a);
  return g;
}

void GroupScenario::finalize() {
  inverses.clear();
  for (std::size_t k = 0; k < generators.size(); ++k) {
    ProjectiveMap inv = generators[k].inverse();
    inv.set_word(Word{-static_cast<int>(k + 1)});
    inverses.push_back(std::move(inv));
  }
}

Vec GroupScenario::basepoint_homogeneous() const { return ProjPoint::from_chart(basepoint).coords(); }

GroupScenario make_scenario(std::string name, ConvexDomain domain, std::vector<Mat> generators, Vec basepoint,
                            bool free_group, std::uint64_t seed) {
  if (generators.empty()) throw Error(ErrorKind::InvalidArgument, "scenario needs at least one generator");
  if (!domain.contains(basepoint)) throw Error(ErrorKind::OutsideDomain, "basepoint is not interior");
  std::mt19937_64 rng(seed);
  GroupScenario s{std::move(name), std::move(domain), {}, {}, std::move(basepoint), free_group};
  for (std::size_t k = 0; k < generators.size(); ++k) {
    if (generators[k].rows() != s.domain.dimension() + 1 || generators[k].cols() != s.domain.dimension() + 1)
      throw Error(ErrorKind::InvalidArgument, "generator " + std::to_string(k + 1) + " has the wrong size");
    ProjectiveMap g(generators[k], Word{static_cast<int>(k + 1)});
    if (!s.domain.preserved_by(g, rng) || !s.domain.preserved_by(g.inverse(), rng))
      throw Error(ErrorKind::InvalidGeometry, "generator " + std::to_string(k + 1) + " does not preserve the domain");
    s.generators.push_back(g);
  }
  s.finalize();
  return s;
}

double orbit_distance(const ConvexDomain& d, const Vec& x_hom, const ProjectiveMap& g, const Vec& y_hom) {
  if (d.kind() == ConvexDomain::Kind::Ellipsoid) return ellipsoid_orbit_distance(d, x_hom, g, y_hom);
  const ProjPoint x(x_hom), gy(g.apply(y_hom));
  return hilbert_distance(d, x, gy);
}

// ---------------------------------------------------------------- orbit ball

std::size_t OrbitBall::count_within(double r) const {
  const auto it = std::upper_bound(elements.begin(), elements.end(), r,
                                   [](double v, const OrbitElement& e) { return v < e.distance; });
  return static_cast<std::size_t>(it - elements.begin());
}

OrbitBudgetError::OrbitBudgetError(OrbitBall partial, double cutoff)
    : Error(ErrorKind::BudgetExceeded, "orbit enumeration exceeded the element budget (complete up to " +
                                           std::to_string(cutoff) + ")"),
      partial_(std::move(partial)),
      cutoff_(cutoff) {}

OrbitBall orbit_ball(const GroupScenario& s, double radius, const Exec& exec) {
  if (!(radius >= 0.0)) throw Error(ErrorKind::InvalidArgument, "radius must be non-negative");
  if (radius > s.max_radius) throw Error(ErrorKind::InvalidArgument, "radius exceeds the scenario's max_radius");
  return enumerate(s, radius, -1, exec);
}

OrbitBall orbit_ball_words(const GroupScenario& s, int max_len, const Exec& exec) {
  if (max_len < 0) throw Error(ErrorKind::InvalidArgument, "word length must be non-negative");
  if (max_len > s.max_word_length) throw Error(ErrorKind::InvalidArgument, "word length exceeds max_word_length");
  return enumerate(s, 0.0, max_len, exec);
}

// ----------------------------------------------------------- classification

namespace {

// All eigenvalues equal: the stored matrix of a unipotent-like map has its
// moduli spread by about (eps kappa)^{1/m} (m the Jordan block size), far
// above any useful clamp, so such maps are recognised structurally. Two
// conditions must hold. (M - cI)^{n+1} vanishes for c = tr M / (n+1), which
// separates Jordan blocks from diagonalisable maps with a small gap; and
// |c| matches the spectral radius (mean and largest eigenvalue modulus
// coincide only when all eigenvalues do), which rejects strongly non-normal
// hyperbolic maps that look nilpotent after normalisation.
inline constexpr double kNilpotentRatio = 1e-8;
inline constexpr double kTraceGap = 0.05;

double min_gelfand_estimate(const Mat& m) {
  const double n0 = m.norm();
  Mat a = m / n0;
  double f = std::log(n0), best = f, scale = 1.0;
  for (int k = 1; k <= 44; ++k) {
    Mat b = a * a;
    const double n = b.norm();
    if (!(n > 0.0)) break;
    f = 2.0 * f + std::log(n);
    scale *= 2.0;
    a = b / n;
    best = std::min(best, f / scale);
  }
  return best;
}

bool nilpotent_after_shift(const Mat& m) {
  const Eigen::Index size = m.rows();
  const Mat shifted = m - (m.trace() / static_cast<double>(size)) * Mat::Identity(size, size);
  const double base = shifted.norm();
  if (base <= 1e-12 * m.norm()) return true;
  const Mat unit = shifted / base;
  Mat p = unit;
  for (Eigen::Index k = 1; k < size; ++k) p = p * unit;
  return p.norm() <= kNilpotentRatio;
}

bool trace_matches_radius(const Mat& m) {
  const double c = std::abs(m.trace()) / static_cast<double>(m.rows());
  return c > 0.0 && min_gelfand_estimate(m) - std::log(c) <= kTraceGap;
}

bool single_eigenvalue(const ProjectiveMap& g) {
  return nilpotent_after_shift(g.matrix()) && trace_matches_radius(g.matrix()) &&
         trace_matches_radius(g.inverse_matrix());
}

}  // namespace

double translation_length(const ProjectiveMap& g) {
  if (single_eigenvalue(g)) return 0.0;
  const double top = log_spectral_radius(g.matrix());
  const double bottom = -(log_spectral_radius(g.inverse_matrix()) + g.log_kappa_frobenius());
  const double l = 0.5 * (top - bottom);
  return l < 1e-9 ? 0.0 : l;
}

const char* to_string(ElementType t) {
  switch (t) {
    case ElementType::Elliptic: return "elliptic";
    case ElementType::Parabolic: return "parabolic";
    case ElementType::Hyperbolic: return "hyperbolic";
  }
  return "unknown";
}

namespace {

// Proximality of the top of a modulus list: true / false, or throws in the
// ambiguous band.
bool gap_test(double top, double second) {
  const double gap = top / second - 1.0;
  if (gap > kProximalGap) return true;
  if (gap < kFlatGap) return false;
  throw Error(ErrorKind::SpectralAmbiguity, "spectral gap " + std::to_string(gap) + " is too small to decide proximality");
}

bool has_interior_fixed_point(const ProjectiveMap& g, const ConvexDomain& d) {
  const Mat& m = g.matrix();
  Eigen::EigenSolver<Mat> es(m);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::NumericalFailure, "eigen-solver did not converge");
  const Vec o = ProjPoint::from_chart(d.interior_point()).coords();
  const int size = static_cast<int>(m.rows());
  std::vector<double> tried;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const auto lambda = es.eigenvalues()(i);
    if (std::abs(lambda.imag()) > 1e-6 * std::abs(lambda)) continue;
    const double lr = lambda.real();
    if (std::any_of(tried.begin(), tried.end(), [&](double t) { return std::abs(t - lr) <= 1e-9 * std::abs(lr); })) continue;
    tried.push_back(lr);
    const Mat shifted = m - lr * Mat::Identity(size, size);
    Eigen::JacobiSVD<Mat> svd(shifted, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double scale = std::max(sv(0), m.norm());
    std::vector<Eigen::Index> null_cols;
    for (Eigen::Index k = 0; k < sv.size(); ++k)
      if (sv(k) <= 1e-7 * scale) null_cols.push_back(k);
    if (null_cols.empty()) continue;
    Mat basis(size, static_cast<Eigen::Index>(null_cols.size()));
    for (std::size_t c = 0; c < null_cols.size(); ++c) basis.col(static_cast<Eigen::Index>(c)) = svd.matrixV().col(null_cols[c]);
    const Vec proj = basis * (basis.transpose() * o);
    if (proj.norm() < 1e-12) continue;
    const ProjPoint p(proj);
    if (p.in_chart() && d.contains(p.chart()) && !d.on_boundary(p.chart(), 1e-7)) return true;
  }
  return false;
}

}  // namespace

Classification classify(const ProjectiveMap& g, const ConvexDomain& d) {
  Classification c;
  c.translation_length = translation_length(g);
  if (c.translation_length == 0.0) {
    // All moduli coincide: nothing is proximal; decide elliptic vs parabolic
    // by looking for a fixed point inside the domain.
    c.type = has_interior_fixed_point(g, d) ? ElementType::Elliptic : ElementType::Parabolic;
    return c;
  }
  c.type = ElementType::Hyperbolic;
  const EigenSummary s = eigen_summary(g);
  const std::size_t n = s.moduli.size();
  c.proximal = gap_test(s.moduli[0], s.moduli[1]) && s.top_is_simple_real;
  const bool inverse_proximal = gap_test(1.0 / s.moduli[n - 1], 1.0 / s.moduli[n - 2]) && s.repelling_point.has_value();
  c.biproximal = c.proximal && inverse_proximal;
  c.rank_one = c.biproximal && d.strictly_convex_c1();
  return c;
}

AxisEndpoints axis_endpoints(const ProjectiveMap& g) {
  const EigenSummary s = eigen_summary(g);
  const std::size_t n = s.moduli.size();
  const bool prox = s.top_is_simple_real && s.moduli[0] > s.moduli[1] * (1.0 + kProximalGap);
  const bool inv_prox = s.repelling_point.has_value() && s.moduli[n - 2] > s.moduli[n - 1] * (1.0 + kProximalGap);
  if (!prox || !inv_prox) throw Error(ErrorKind::NotBiproximal, "map is not biproximal");
  return AxisEndpoints{*s.repelling_point, *s.attracting_point};
}

AxisEndpoints axis_endpoints(const ProjectiveMap& g, const ConvexDomain& d) {
  const AxisEndpoints e = axis_endpoints(g);
  for (const ProjPoint* p : {&e.repelling, &e.attracting})
    if (!p->in_chart() || !d.on_boundary(p->chart(), 1e-7))
      throw Error(ErrorKind::InvalidGeometry, "fixed point of the map is not on the domain boundary");
  return e;
}

// -------------------------------------------------------------- kappa audit

KappaAudit kappa_distance_audit(const GroupScenario& s, const OrbitBall& b) {
  (void)s;
  if (b.elements.empty()) throw Error(ErrorKind::InsufficientData, "empty orbit ball");
  KappaAudit a;
  std::vector<double> logs;
  logs.reserve(b.size());
  for (const auto& e : b.elements) logs.push_back(2.0 * e.distance - e.g.log_kappa());
  a.log_min = *std::min_element(logs.begin(), logs.end());
  a.log_max = *std::max_element(logs.begin(), logs.end());
  const double top = b.radius > 0.0 ? b.radius : b.elements.back().distance;
  const int r_hi = static_cast<int>(std::floor(top));
  const int r_lo = std::max(1, r_hi / 2);
  for (int r = r_lo; r <= r_hi; ++r) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < b.size() && b.elements[i].distance <= r; ++i) {
      lo = std::min(lo, logs[i]);
      hi = std::max(hi, logs[i]);
    }
    a.radii.push_back(r);
    a.spread.push_back(hi - lo);
  }
  const bool finite = std::isfinite(a.log_min) && std::isfinite(a.log_max);
  a.stable = finite && (a.spread.empty() || a.spread.back() - a.spread.front() <= 0.25);
  return a;
}

// ------------------------------------------------------- conjugacy classes

Word minimal_rotation(const Word& w) {
  Word best = w;
  Word rot = w;
  for (std::size_t k = 1; k < w.size(); ++k) {
    std::rotate(rot.begin(), rot.begin() + 1, rot.end());
    if (word_less(rot, best)) best = rot;
  }
  return best;
}

int smallest_period(const Word& w) {
  const int n = static_cast<int>(w.size());
  for (int p = 1; p < n; ++p) {
    if (n % p) continue;
    bool ok = true;
    for (int i = p; i < n && ok; ++i) ok = w[static_cast<std::size_t>(i)] == w[static_cast<std::size_t>(i - p)];
    if (ok) return p;
  }
  return n;
}

std::vector<std::ptrdiff_t> locate_elements(const OrbitBall& b, const std::vector<ProjectiveMap>& queries) {
  ClassIndex index;
  for (const auto& e : b.elements) index.insert(e.g.matrix());
  std::vector<std::ptrdiff_t> out;
  out.reserve(queries.size());
  for (const auto& q : queries) out.push_back(index.find(q.matrix()));
  return out;
}

Word cyclic_reduction(const Word& w) {
  Word r = reduce_word(w);
  std::size_t a = 0, b = r.size();
  while (b - a >= 2 && r[a] == -r[b - 1]) {
    ++a;
    --b;
  }
  return Word(r.begin() + static_cast<std::ptrdiff_t>(a), r.begin() + static_cast<std::ptrdiff_t>(b));
}

double translation_length(const GroupScenario& s, const Word& w) {
  return translation_length(s.element(cyclic_reduction(w)));
}

bool cyclically_reduced(const Word& w) {
  if (w.empty()) return true;
  if (reduce_word(w) != w) return false;
  return w.size() == 1 || w.front() != -w.back();
}

ConjugacyClassList primitive_conjugacy_classes(const GroupScenario& s, int max_len, bool oriented, const Exec& exec) {
  if (!s.free_group) throw Error(ErrorKind::UnsupportedScenario, "conjugacy-class enumeration needs a free scenario");
  if (max_len < 1) throw Error(ErrorKind::InvalidArgument, "max_len must be positive");
  const std::vector<int> letters = alphabet(s.rank());
  ConjugacyClassList out;
  out.oriented = oriented;

  // Lyndon words (strictly minimal among their rotations, hence primitive)
  // by the Fredricksen-Kessler-Maiorana recursion, restricted to reduced words.
  std::vector<ConjugacyClass> found;
  Word a;
  std::vector<ProjectiveMap> prefix{ProjectiveMap::identity(s.domain.dimension() + 1)};
  auto rec = [&](auto&& self, int p) -> void {
    const int t = static_cast<int>(a.size());
    if (t > 0 && p == t && a.front() != -a.back()) {
      if (oriented || !word_less(minimal_rotation(invert_word(a)), a))
        found.push_back({a, prefix.back(), 0.0});
    }
    if (t == max_len) return;
    for (int c : letters) {
      if (t > 0 && c == -a.back()) continue;
      int np;
      if (t == 0) {
        np = 1;
      } else {
        const int ref = a[static_cast<std::size_t>(t - p)];
        if (letter_rank(c) < letter_rank(ref)) continue;
        np = (c == ref) ? p : t + 1;
      }
      a.push_back(c);
      prefix.push_back(prefix.back() * s.letter(c));
      self(self, np);
      prefix.pop_back();
      a.pop_back();
    }
  };
  rec(rec, 0);

  parallel_for(found.size(), exec, [&](std::size_t i) { found[i].translation_length = translation_length(found[i].representative); });
  std::sort(found.begin(), found.end(), [](const ConjugacyClass& x, const ConjugacyClass& y) {
    if (x.translation_length != y.translation_length) return x.translation_length < y.translation_length;
    return word_less(x.word, y.word);
  });
  out.classes = std::move(found);
  return out;
}

// ------------------------------------------------------- non-arithmeticity

NonarithmeticityReport nonarithmeticity_audit(const std::vector<double>& lengths, double tol) {
  if (lengths.size() < 2) throw Error(ErrorKind::InsufficientData, "need at least two lengths");
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "tolerance must be positive");
  NonarithmeticityReport r;
  double g = std::abs(lengths[0]);
  for (std::size_t i = 1; i < lengths.size() && g >= tol; ++i) {
    double a = std::max(g, std::abs(lengths[i]));
    double b = std::min(g, std::abs(lengths[i]));
    const double noise = 1e-12 * a;
    while (b >= tol) {
      ++r.steps;
      const double rem = std::fmod(a, b);
      if (rem <= noise || b - rem <= noise) break;  // b divides a up to rounding
      a = b;
      b = rem;
    }
    g = b;
  }
  r.approx_generator = g;
  r.dense_consistent = g < tol;
  return r;
}

}  // namespace hlab
