#pragma once

#include <string>
#include <vector>

#include "hlab/group.hpp"

namespace hlab {

// Matrices below act on homogeneous coordinates whose last entry is the
// chart denominator; the hyperbolic plane is the unit disk x^2 + y^2 < z^2.

/// Hyperbolic translation of length `length` along the diameter at angle
/// `angle` of the unit disk.
Mat disk_translation(double length, double angle);
Mat disk_rotation(double angle);

/// SL(2,R) -> SO(2,1) by the symmetric square, written in the disk
/// coordinates. Translation length of the image is 2 log of the larger
/// eigenvalue modulus.
Mat so21_from_sl2(const Mat& a);

/// Unipotent of SO(3,1) fixing the boundary point (0,0,1) of the unit 3-ball,
/// translating horospheres by v (2 entries).
Mat ball3_parabolic(const Vec& v);

struct PresetInfo {
  std::string name;
  std::string category;  // "scenario" or "domain"
  std::string description;
};

std::vector<PresetInfo> list_presets();

/// Throws InvalidArgument for unknown names.
GroupScenario scenario_preset(const std::string& name);
ConvexDomain domain_preset(const std::string& name);

/// Free pair of disk translations of lengths l1, l2 along axes meeting at the
/// centre with angle `angle`. Ping-pong holds when both half-arc angles
/// acos(tanh(l/2)) are below angle/2.
GroupScenario schottky_pair(double l1, double l2, double angle, const std::string& name = "schottky");

/// A few automorphisms of a preset domain (linear symmetries and, where the
/// group is larger, non-compact elements), for invariance checks.
std::vector<ProjectiveMap> domain_automorphisms(const std::string& domain_name);

}  // namespace hlab
