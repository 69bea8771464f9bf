#include "hlab/presets.hpp"

#include <cmath>
#include <numbers>

namespace hlab {

Mat disk_translation(double length, double angle) {
  Mat boost = Mat::Identity(3, 3);
  boost(0, 0) = boost(2, 2) = std::cosh(length);
  boost(0, 2) = boost(2, 0) = std::sinh(length);
  return disk_rotation(angle) * boost * disk_rotation(-angle);
}

Mat disk_rotation(double angle) {
  Mat r = Mat::Identity(3, 3);
  r(0, 0) = r(1, 1) = std::cos(angle);
  r(0, 1) = -std::sin(angle);
  r(1, 0) = std::sin(angle);
  return r;
}

Mat so21_from_sl2(const Mat& a) {
  if (a.rows() != 2 || a.cols() != 2) throw Error(ErrorKind::InvalidArgument, "expected a 2x2 matrix");
  const double p = a(0, 0), q = a(0, 1), r = a(1, 0), s = a(1, 1);
  Mat sym(3, 3);
  // action on (u^2, uv, v^2)
  sym << p * p, 2 * p * q, q * q,  //
      p * r, p * s + q * r, q * s,   //
      r * r, 2 * r * s, s * s;
  // (u^2, uv, v^2) = (Z + X, Y, Z - X): the cone P R = Q^2 becomes
  // X^2 + Y^2 = Z^2.
  Mat c(3, 3);
  c << 1, 0, 1, 0, 1, 0, -1, 0, 1;
  return c.inverse() * sym * c;
}

Mat ball3_parabolic(const Vec& v2) {
  if (v2.size() != 2) throw Error(ErrorKind::InvalidArgument, "parabolic translation needs 2 entries");
  const Vec j = (Vec(4) << 1, 1, 1, -1).finished();
  const Vec e = (Vec(4) << 0, 0, 1, 1).finished();
  const Vec v = (Vec(4) << v2(0), v2(1), 0, 0).finished();
  const Mat n = e * j.cwiseProduct(v).transpose() - v * j.cwiseProduct(e).transpose();
  return Mat::Identity(4, 4) + n + 0.5 * n * n;
}

GroupScenario schottky_pair(double l1, double l2, double angle, const std::string& name) {
  GroupScenario s = make_scenario(name, ConvexDomain::unit_ball(2), {disk_translation(l1, 0.0), disk_translation(l2, angle)},
                                  Vec::Zero(2), true);
  s.max_word_length = 40;
  s.max_radius = 16.0;
  s.prune_margin = 3.0;
  return s;
}

namespace {

struct ScenarioEntry {
  const char* name;
  const char* description;
  GroupScenario (*make)();
};

GroupScenario surface_genus2() {
  // Regular octagon with interior angles pi/4, opposite sides paired by
  // translations through the centre; the apothem a has cosh a = cot(pi/8).
  const double a = std::acosh(1.0 + std::sqrt(2.0));
  std::vector<Mat> gens;
  for (int k = 0; k < 4; ++k) gens.push_back(disk_translation(2.0 * a, k * std::numbers::pi / 4.0));
  GroupScenario s = make_scenario("surface-genus2", ConvexDomain::unit_ball(2), gens, Vec::Zero(2), false);
  s.max_word_length = 64;
  s.max_radius = 12.0;
  // Octagon circumradius is acosh(cot^2(pi/8)) ~ 2.45; every element of the
  // ball is reached through elements within that distance of the segment.
  s.prune_margin = 2.6;
  return s;
}

GroupScenario parabolic_rank1() {
  Mat u(2, 2);
  u << 1, 1, 0, 1;
  GroupScenario s = make_scenario("parabolic-rank-1", ConvexDomain::unit_ball(2), {so21_from_sl2(u)}, Vec::Zero(2), true);
  s.max_word_length = 1'000'000;
  s.max_radius = 14.0;
  s.prune_margin = 1.0;
  return s;
}

GroupScenario parabolic_rank2() {
  GroupScenario s = make_scenario("parabolic-rank-2", ConvexDomain::unit_ball(3),
                                  {ball3_parabolic(Vec::Unit(2, 0)), ball3_parabolic(Vec::Unit(2, 1))}, Vec::Zero(3),
                                  false);
  s.max_word_length = 100'000;
  s.max_radius = 10.0;
  s.prune_margin = 1.0;
  return s;
}

const std::vector<ScenarioEntry>& scenario_table() {
  static const std::vector<ScenarioEntry> table{
      {"schottky-2",
       "free pair of disk translations, lengths 2 and 2, axes at right angles (ping-pong needs length > 1.763)",
       [] { return schottky_pair(2.0, 2.0, std::numbers::pi / 2.0, "schottky-2"); }},
      {"schottky-2-long", "as schottky-2 with translation lengths 2.5",
       [] { return schottky_pair(2.5, 2.5, std::numbers::pi / 2.0, "schottky-2-long"); }},
      {"schottky-2-xlong", "as schottky-2 with translation lengths 3",
       [] { return schottky_pair(3.0, 3.0, std::numbers::pi / 2.0, "schottky-2-xlong"); }},
      {"schottky-2-generic", "free pair with unequal lengths 2 and 2.3 and axes at angle 1.7",
       [] { return schottky_pair(2.0, 2.3, 1.7, "schottky-2-generic"); }},
      {"surface-genus2",
       "cocompact genus-2 surface group: opposite sides of the regular octagon with angles pi/4 paired; "
       "N(r) ~ (cosh r - 1)/2",
       surface_genus2},
      {"parabolic-rank-1", "cyclic group of the unipotent symmetric square of [[1,1],[0,1]] on the disk; delta = 1/2",
       parabolic_rank1},
      {"parabolic-rank-2", "Z^2 of commuting unipotents of SO(3,1) fixing (0,0,1) on the 3-ball; delta = 1",
       parabolic_rank2},
  };
  return table;
}

struct DomainEntry {
  const char* name;
  const char* description;
  ConvexDomain (*make)();
};

const std::vector<DomainEntry>& domain_table() {
  static const std::vector<DomainEntry> table{
      {"disk", "unit disk (Klein model of the hyperbolic plane)", [] { return ConvexDomain::unit_ball(2); }},
      {"ball3", "unit 3-ball", [] { return ConvexDomain::unit_ball(3); }},
      {"ellipse", "ellipse centred at (0.2, -0.1) with semi-axes 1.5 and 0.7",
       [] {
         Mat s(2, 2);
         s << 1.0 / (1.5 * 1.5), 0.0, 0.0, 1.0 / (0.7 * 0.7);
         return ConvexDomain::ellipsoid((Vec(2) << 0.2, -0.1).finished(), s);
       }},
      {"p4-ball", "planar 4-norm ball |x|^4 + |y|^4 < 1 (strictly convex, not an ellipse)",
       [] { return ConvexDomain::pnorm_ball(2, 4.0); }},
      {"simplex", "standard triangle x, y > 0, x + y < 1", [] { return ConvexDomain::standard_simplex(2); }},
  };
  return table;
}

}  // namespace

std::vector<PresetInfo> list_presets() {
  std::vector<PresetInfo> out;
  for (const auto& e : scenario_table()) out.push_back({e.name, "scenario", e.description});
  for (const auto& e : domain_table()) out.push_back({e.name, "domain", e.description});
  return out;
}

GroupScenario scenario_preset(const std::string& name) {
  for (const auto& e : scenario_table())
    if (name == e.name) return e.make();
  throw Error(ErrorKind::InvalidArgument, "unknown scenario preset '" + name + "'");
}

ConvexDomain domain_preset(const std::string& name) {
  for (const auto& e : domain_table())
    if (name == e.name) return e.make();
  throw Error(ErrorKind::InvalidArgument, "unknown domain preset '" + name + "'");
}

std::vector<ProjectiveMap> domain_automorphisms(const std::string& domain_name) {
  std::vector<Mat> mats;
  if (domain_name == "disk") {
    mats = {disk_translation(0.7, 0.3), disk_translation(2.0, 2.0) * disk_rotation(0.4), disk_rotation(1.1)};
  } else if (domain_name == "ball3") {
    Mat boost = Mat::Identity(4, 4);
    boost(0, 0) = boost(3, 3) = std::cosh(1.3);
    boost(0, 3) = boost(3, 0) = std::sinh(1.3);
    mats = {boost, ball3_parabolic((Vec(2) << 0.5, -1.0).finished())};
  } else if (domain_name == "ellipse") {
    // conjugate disk isometries by the affine map disk -> ellipse
    Mat h = Mat::Identity(3, 3);
    h(0, 0) = 1.5;
    h(1, 1) = 0.7;
    h(0, 2) = 0.2;
    h(1, 2) = -0.1;
    for (const Mat& g : {disk_translation(0.9, 0.5), disk_translation(1.5, -1.0)}) mats.push_back(h * g * h.inverse());
  } else if (domain_name == "p4-ball") {
    Mat swap = Mat::Zero(3, 3);
    swap(0, 1) = swap(1, 0) = swap(2, 2) = 1.0;
    Mat flip = Mat::Identity(3, 3);
    flip(0, 0) = -1.0;
    mats = {swap, flip, swap * flip};
  } else if (domain_name == "simplex") {
    // In the coordinates (x, y, z - x - y) the cone over the triangle is the
    // positive octant, preserved by positive diagonals and permutations.
    Mat b = Mat::Identity(3, 3);
    b(2, 0) = b(2, 1) = -1.0;
    const Mat diag = (Vec(3) << 2.0, 0.3, 1.0).finished().asDiagonal();
    Mat cyc = Mat::Zero(3, 3);
    cyc(0, 1) = cyc(1, 2) = cyc(2, 0) = 1.0;
    const Mat diag2 = (Vec(3) << 0.1, 5.0, 1.7).finished().asDiagonal();
    for (const Mat& g : {Mat(diag), cyc, Mat(diag2 * cyc)}) mats.push_back(b.inverse() * g * b);
  } else {
    throw Error(ErrorKind::InvalidArgument, "unknown domain preset '" + domain_name + "'");
  }
  std::vector<ProjectiveMap> out;
  for (const Mat& m : mats) out.emplace_back(m);
  return out;
}

}  // namespace hlab
