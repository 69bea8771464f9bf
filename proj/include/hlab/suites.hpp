#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hlab {

/// One measured quantity of a property suite and its verdict.
struct SuiteCheck {
  std::string domain;
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct SuiteReport {
  std::string suite;
  std::vector<SuiteCheck> checks;
  bool pass() const;
};

// Randomised property suites of the Hilbert geometry on preset domains
// (names as in list_presets). Each is deterministic for a fixed seed.

/// Hilbert distance on the unit disk and 3-ball against the Klein model
/// formula; max error must stay below 1e-9.
SuiteReport klein_model_suite(int samples, std::uint64_t seed);

/// Symmetry (1e-12), triangle slack on triples (>= -1e-10) and invariance
/// under the preset automorphisms (1e-9).
SuiteReport metric_axioms_suite(const std::vector<std::string>& domains, int samples, std::uint64_t seed);

/// Crampon's inequality on random pairs of constant-speed lines over [0, T];
/// min slack must be >= -1e-9.
SuiteReport crampon_suite(const std::vector<std::string>& domains, int pairs, double T, std::uint64_t seed);

/// Cocycle and horofoliation identities within the reported extrapolation
/// errors; on ellipsoids also the closed form (1e-9).
SuiteReport busemann_suite(const std::vector<std::string>& domains, int configurations, std::uint64_t seed);

}  // namespace hlab
