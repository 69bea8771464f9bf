#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hlab/domain.hpp"
#include "hlab/errors.hpp"
#include "hlab/parallel.hpp"
#include "hlab/projective.hpp"

namespace hlab {

/// Generators, domain, basepoint and enumeration limits of a discrete group
/// acting on a domain.
struct GroupScenario {
  std::string name;
  ConvexDomain domain;
  std::vector<ProjectiveMap> generators;  // generator k carries the word {k}
  std::vector<ProjectiveMap> inverses;    // filled by finalize()
  Vec basepoint;                          // chart coordinates
  bool free_group = false;
  int max_word_length = 64;
  double max_radius = 20.0;
  /// Elements whose orbit point lies further than radius + prune_margin are
  /// not expanded during enumeration.
  double prune_margin = 3.0;
  std::size_t element_budget = 10'000'000;

  int rank() const { return static_cast<int>(generators.size()); }
  /// Generator for a signed letter (+k or -k).
  const ProjectiveMap& letter(int signed_index) const;
  Vec basepoint_homogeneous() const;
  /// Product of the letters of the freely reduced word (identity for {}).
  /// Avoids the cancellation of multiplying unreduced factors.
  ProjectiveMap element(const Word& w) const;
  /// Recomputes the inverse generators after generators changed.
  void finalize();
};

/// Validates (every generator preserves the domain on sampled points, the
/// basepoint is interior) and attaches single-letter words.
GroupScenario make_scenario(std::string name, ConvexDomain domain, std::vector<Mat> generators, Vec basepoint,
                            bool free_group, std::uint64_t seed = 1);

/// d(x, g y) for homogeneous x, y. Uses the quadric formula on ellipsoids,
/// chart ray casting otherwise.
double orbit_distance(const ConvexDomain& d, const Vec& x_hom, const ProjectiveMap& g, const Vec& y_hom);

struct OrbitElement {
  ProjectiveMap g;
  ProjPoint image;  // g o
  double distance = 0.0;
};

struct OrbitBall {
  std::vector<OrbitElement> elements;  // sorted by distance, then word
  double radius = 0.0;
  int word_length_cutoff = -1;  // set for word-length balls
  std::size_t generated = 0;    // children produced during enumeration
  std::size_t duplicates = 0;   // children matching an earlier projective class
  /// Free scenarios: distinct reduced words whose matrices coincide to 1e-8.
  std::size_t key_collisions = 0;

  std::size_t size() const { return elements.size(); }
  /// #{elements with distance <= r}; r must not exceed radius.
  std::size_t count_within(double r) const;
};

/// Thrown when enumeration would exceed the element budget; carries the ball
/// enumerated so far.
class OrbitBudgetError : public Error {
 public:
  OrbitBudgetError(OrbitBall partial, double cutoff);
  const OrbitBall& partial() const { return partial_; }
  double cutoff() const { return cutoff_; }

 private:
  OrbitBall partial_;
  double cutoff_;
};

/// All elements with d(o, g o) <= radius. Free scenarios walk the reduced-word
/// tree; others run a breadth-first search deduplicated by projective class.
OrbitBall orbit_ball(const GroupScenario& s, double radius, const Exec& exec = {});

/// All reduced words of length <= max_len (free scenarios) or elements at
/// word distance <= max_len (others).
OrbitBall orbit_ball_words(const GroupScenario& s, int max_len, const Exec& exec = {});

/// Index in b.elements of the element equal (as a projective class, to
/// 1e-8 entrywise on canonical matrices) to each query, or -1.
std::vector<std::ptrdiff_t> locate_elements(const OrbitBall& b, const std::vector<ProjectiveMap>& queries);

/// 1/2 log(lambda_1 / lambda_{n+1}); values below 1e-9 are clamped to 0.
double translation_length(const ProjectiveMap& g);
/// Same quantity for the element spelled by w, computed on its cyclic
/// reduction. Long conjugators make the eigenvalues of the full product
/// ill-conditioned (error ~ eps exp(4 d(o, h o))); the reduced core is not.
double translation_length(const GroupScenario& s, const Word& w);
/// Strips cancelling letter pairs and conjugating end pairs.
Word cyclic_reduction(const Word& w);

enum class ElementType { Elliptic, Parabolic, Hyperbolic };
const char* to_string(ElementType t);

struct Classification {
  ElementType type = ElementType::Elliptic;
  double translation_length = 0.0;
  bool proximal = false;
  bool biproximal = false;
  bool rank_one = false;
};

/// Gaps lambda_1/lambda_2 above 1 + kProximalGap are proximal, below
/// 1 + kFlatGap not; in between SpectralAmbiguity is thrown.
inline constexpr double kProximalGap = 1e-6;
inline constexpr double kFlatGap = 1e-9;

Classification classify(const ProjectiveMap& g, const ConvexDomain& d);

struct AxisEndpoints {
  ProjPoint repelling;
  ProjPoint attracting;
};

/// Fixed points of a biproximal map, without a domain check.
AxisEndpoints axis_endpoints(const ProjectiveMap& g);
/// Same, verified to lie on the boundary of d.
AxisEndpoints axis_endpoints(const ProjectiveMap& g, const ConvexDomain& d);

struct KappaAudit {
  double log_min = 0.0;  // min over the ball of 2 d(o, g o) - log kappa(g)
  double log_max = 0.0;
  std::vector<double> radii;
  std::vector<double> spread;  // log_max - log_min over the sub-ball of each radius
  bool stable = false;
};

/// Ratios e^{2 d(o, g o)} / kappa(g) over the ball; stable when the spread
/// grows by less than 25% (in log) over the upper half of the radii.
KappaAudit kappa_distance_audit(const GroupScenario& s, const OrbitBall& b);

struct ConjugacyClass {
  Word word;  // minimal cyclic rotation
  ProjectiveMap representative;
  double translation_length = 0.0;
};

struct ConjugacyClassList {
  std::vector<ConjugacyClass> classes;  // sorted by translation length, then word
  bool primitive_only = true;
  bool oriented = true;
};

/// Primitive conjugacy classes of cyclically reduced words of length
/// <= max_len. With oriented = false, a class and its inverse are merged.
ConjugacyClassList primitive_conjugacy_classes(const GroupScenario& s, int max_len, bool oriented = true,
                                               const Exec& exec = {});

/// Lexicographically minimal rotation and smallest period of a cyclic word,
/// under the letter order 1 < -1 < 2 < -2 < ...
Word minimal_rotation(const Word& w);
int smallest_period(const Word& w);
bool cyclically_reduced(const Word& w);

struct NonarithmeticityReport {
  double approx_generator = 0.0;
  bool dense_consistent = false;
  int steps = 0;
  /// Floating point cannot certify density; the report is a heuristic.
  bool heuristic = true;
};

/// Euclid-style reduction of the group generated by the lengths, stopped once
/// the running generator falls below tol.
NonarithmeticityReport nonarithmeticity_audit(const std::vector<double>& lengths, double tol);

}  // namespace hlab
