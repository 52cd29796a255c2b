#include "roboface/reference_rig.hpp"

#include "roboface/random.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <tuple>

namespace roboface {

Region blendshape_region(std::string_view name) {
  if (name.starts_with("eye")) return Region::Eye;
  if (name.starts_with("brow")) return Region::Brow;
  if (name.starts_with("nose")) return Region::Nose;
  if (name.starts_with("cheek")) return Region::Cheek;
  if (name.starts_with("mouth")) return Region::Mouth;
  if (name.starts_with("jaw")) return Region::Jaw;
  throw std::invalid_argument("no region for blendshape '" + std::string(name) + "'");
}

namespace {

struct FaceParams {
  int cols = 68;
  int rows = 70;
  double scale = 1.0;
  double a = 62.0, b = 80.0, c = 70.0;
  double lambda_max = 1.1;
  double phi_max = 1.35;
};

constexpr double kEyeX = 22.0, kEyeY = 12.0;
constexpr double kEyeRadius = 11.0;
constexpr double kLookAngle = 0.3;

struct Bump {
  Eigen::Vector2d centre;
  double sigma;
  Eigen::Vector3d disp;
};

struct EyeRotation {
  int side;  // +1 left (+x), -1 right
  Eigen::Vector3d axis;
  double angle;
};

struct ShapeSpec {
  std::vector<Bump> bumps;
  std::optional<EyeRotation> eye;
};

Bump mirror(const Bump& b) {
  return {{-b.centre.x(), b.centre.y()}, b.sigma, {-b.disp.x(), b.disp.y(), b.disp.z()}};
}

// Left-side (+x) shape definitions; Right shapes mirror them.
ShapeSpec left_shape(std::string_view name) {
  auto one = [](double x, double y, double s, double dx, double dy, double dz) {
    return ShapeSpec{{Bump{{x, y}, s, {dx, dy, dz}}}, std::nullopt};
  };
  if (name == "eyeBlink") return one(kEyeX, 16.5, 3.5, 0.0, -5.0, 0.8);
  if (name == "eyeSquint") return one(kEyeX, 8.0, 3.5, 0.0, 2.0, 0.5);
  if (name == "eyeWide") return one(kEyeX, 19.0, 3.5, 0.0, 2.5, 0.3);
  // Eye-look: left eyeball rotation. "In" turns toward the nose (-x).
  if (name == "eyeLookIn") return {{}, EyeRotation{1, Eigen::Vector3d::UnitY(), -kLookAngle}};
  if (name == "eyeLookOut") return {{}, EyeRotation{1, Eigen::Vector3d::UnitY(), kLookAngle}};
  if (name == "eyeLookUp") return {{}, EyeRotation{1, Eigen::Vector3d::UnitX(), -kLookAngle}};
  if (name == "eyeLookDown") return {{}, EyeRotation{1, Eigen::Vector3d::UnitX(), kLookAngle}};
  if (name == "browDown") return one(20.0, 28.0, 5.0, -1.0, -3.0, 0.0);
  if (name == "browOuterUp") return one(30.0, 27.0, 4.5, 0.0, 3.0, 0.2);
  if (name == "cheekSquint") return one(36.0, -9.0, 5.5, 0.0, 2.5, 1.0);
  if (name == "noseSneer") return one(7.0, -7.0, 3.5, 0.0, 2.0, 0.5);
  if (name == "mouthDimple") return one(24.0, -36.0, 3.5, 1.5, 0.0, -1.0);
  if (name == "mouthFrown") return one(21.0, -38.0, 3.5, 0.0, -2.5, 0.0);
  if (name == "mouthSmile") return one(21.0, -35.0, 3.5, 2.0, 2.5, -0.5);
  if (name == "mouthStretch") return one(22.0, -37.0, 3.5, 2.5, -1.0, -0.5);
  if (name == "mouthUpperUp") return one(9.0, -31.0, 3.5, 0.0, 2.5, 0.3);
  if (name == "mouthLowerDown") return one(9.0, -41.0, 3.5, 0.0, -2.5, 0.3);
  if (name == "mouthPress") {
    return {{Bump{{12.0, -32.0}, 3.0, {0.0, -1.0, 0.0}}, Bump{{12.0, -40.0}, 3.0, {0.0, 1.0, 0.0}}},
            std::nullopt};
  }
  throw std::invalid_argument("no left shape '" + std::string(name) + "'");
}

ShapeSpec shape_spec(std::string_view name) {
  auto pair = [](double x, double y, double s, double dx, double dy, double dz) {
    Bump b{{x, y}, s, {dx, dy, dz}};
    return ShapeSpec{{b, mirror(b)}, std::nullopt};
  };
  auto one = [](double x, double y, double s, double dx, double dy, double dz) {
    return ShapeSpec{{Bump{{x, y}, s, {dx, dy, dz}}}, std::nullopt};
  };
  if (name == "browInnerUp") return pair(10.0, 29.0, 4.5, 0.0, 3.0, 0.2);
  if (name == "cheekPuff") return pair(36.0, -18.0, 6.0, 1.5, 0.0, 3.0);
  if (name == "jawOpen") return one(0.0, -62.0, 7.0, 0.0, -6.0, -1.5);
  if (name == "jawForward") return one(0.0, -61.0, 6.5, 0.0, 0.0, 3.0);
  if (name == "jawLeft") return one(4.0, -61.0, 6.5, 3.0, 0.3, 0.0);
  if (name == "jawRight") return one(-4.0, -61.0, 6.5, -3.0, 0.3, 0.0);
  if (name == "mouthClose") return one(0.0, -41.0, 4.0, 0.0, 2.0, 0.5);
  if (name == "mouthFunnel") {
    return {{Bump{{0.0, -31.0}, 4.0, {0.0, 1.0, 2.0}}, Bump{{0.0, -41.0}, 4.0, {0.0, -1.0, 2.0}}},
            std::nullopt};
  }
  if (name == "mouthPucker") return pair(12.0, -36.0, 4.0, -2.5, 0.0, 1.5);
  if (name == "mouthLeft") return one(5.0, -36.0, 5.0, 3.0, 0.0, 0.0);
  if (name == "mouthRight") return one(-5.0, -36.0, 5.0, -3.0, 0.0, 0.0);
  if (name == "mouthRollLower") return one(0.0, -42.0, 3.5, 0.0, 1.0, -2.0);
  if (name == "mouthRollUpper") return one(0.0, -30.0, 3.5, 0.0, -1.0, -2.0);
  if (name == "mouthShrugLower") return one(0.0, -44.0, 3.5, 0.0, 1.5, 1.0);
  if (name == "mouthShrugUpper") return one(0.0, -29.0, 3.5, 0.0, 1.0, 1.0);
  for (std::string_view side : {"Left", "Right"}) {
    if (name.ends_with(side)) {
      ShapeSpec s = left_shape(name.substr(0, name.size() - side.size()));
      if (side == "Right") {
        for (auto& b : s.bumps) b = mirror(b);
        if (s.eye) {
          s.eye->side = -1;
          // Mirroring flips the sense of rotations about y; x rotations keep theirs.
          if (s.eye->axis.y() != 0.0) s.eye->angle = -s.eye->angle;
        }
      }
      return s;
    }
  }
  throw std::invalid_argument("no shape definition for '" + std::string(name) + "'");
}

struct Anchor {
  Region region;
  Eigen::Vector2d xy;
};

// Landmark sites; also the seeds of the region partition.
std::vector<Anchor> anchors() {
  std::vector<Anchor> out;
  auto both = [&](Region r, double x, double y) {
    out.push_back({r, {x, y}});
    if (x != 0.0) out.push_back({r, {-x, y}});
  };
  for (auto [x, y] : {std::pair{22.0, 17.0}, {22.0, 7.0}, {14.0, 12.0}, {30.0, 12.0}, {22.0, 20.0}}) {
    both(Region::Eye, x, y);
  }
  for (auto [x, y] : {std::pair{10.0, 29.0}, {16.0, 30.0}, {22.0, 29.0}, {28.0, 28.0}, {33.0, 26.0}}) {
    both(Region::Brow, x, y);
  }
  for (auto [x, y] : {std::pair{0.0, -2.0}, {7.0, -7.0}, {9.0, -10.0}, {5.0, -4.0}, {0.0, 8.0}}) {
    both(Region::Nose, x, y);
  }
  for (auto [x, y] : {std::pair{38.0, -14.0}, {34.0, -8.0}, {42.0, -20.0}, {32.0, -18.0}, {36.0, -12.0}}) {
    both(Region::Cheek, x, y);
  }
  for (auto [x, y] : {std::pair{21.0, -36.0}, {12.0, -31.0}, {0.0, -31.0}, {12.0, -41.0}, {0.0, -41.0},
                      {7.0, -31.0}, {7.0, -42.0}, {17.0, -38.0}, {9.0, -41.0}, {9.0, -31.0},
                      {0.0, -44.0}, {0.0, -29.0}}) {
    both(Region::Mouth, x, y);
  }
  for (auto [x, y] : {std::pair{0.0, -58.0}, {10.0, -60.0}, {18.0, -56.0}, {0.0, -66.0}, {25.0, -50.0},
                      {5.0, -62.0}}) {
    both(Region::Jaw, x, y);
  }
  return out;
}

constexpr double kRegionRadius = 14.0;

class FaceBuilder {
 public:
  explicit FaceBuilder(const FaceParams& p) : p_(p) {}

  double height(double x, double y) const {
    const double s = p_.scale;
    const double phi = std::asin(std::clamp(y / p_.b, -1.0, 1.0));
    const double lam = std::asin(std::clamp(x / (p_.a * std::cos(phi)), -1.0, 1.0));
    double z = p_.c * std::cos(phi) * std::cos(lam);
    const double nx = x / (6.0 * s), ny = (y + 2.0 * s) / (12.0 * s);
    z += 16.0 * s * std::exp(-0.5 * (nx * nx + ny * ny));
    for (double side : {1.0, -1.0}) {
      const double ex = (x - side * kEyeX * s) / (7.0 * s), ey = (y - kEyeY * s) / (7.0 * s);
      z -= 4.0 * s * std::exp(-0.5 * (ex * ex + ey * ey));
    }
    return z;
  }

  Eigen::Vector3d surface(double x, double y) const { return {x, y, height(x, y)}; }

  Eigen::Vector3d eye_centre(int side) const {
    const double s = p_.scale;
    const double x = side * kEyeX * s, y = kEyeY * s;
    return {x, y, height(x, y) + (1.0 - kEyeRadius) * s};
  }

  ProceduralFace build(std::uint64_t seed) {
    ProceduralFace face;
    LbsRig& rig = face.rig;
    const double s = p_.scale;

    // Skin grid: row-major, rows bottom to top.
    std::vector<Eigen::Vector3d> verts;
    for (int r = 0; r < p_.rows; ++r) {
      const double phi = -p_.phi_max + 2.0 * p_.phi_max * r / (p_.rows - 1);
      for (int c = 0; c < p_.cols; ++c) {
        const double lam = -p_.lambda_max + 2.0 * p_.lambda_max * c / (p_.cols - 1);
        const double x = p_.a * std::cos(phi) * std::sin(lam);
        const double y = p_.b * std::sin(phi);
        verts.push_back(surface(x, y));
      }
    }
    auto grid = [&](int r, int c) { return static_cast<std::uint32_t>(r * p_.cols + c); };
    for (int r = 0; r + 1 < p_.rows; ++r) {
      for (int c = 0; c + 1 < p_.cols; ++c) {
        rig.mesh.triangles.push_back({grid(r, c), grid(r, c + 1), grid(r + 1, c + 1)});
        rig.mesh.triangles.push_back({grid(r, c), grid(r + 1, c + 1), grid(r + 1, c)});
      }
    }
    skin_count_ = verts.size();

    // Eyeball patches, left then right.
    constexpr std::array<double, 4> kPatch{-0.45, -0.15, 0.15, 0.45};
    for (int side : {1, -1}) {
      const auto base = static_cast<std::uint32_t>(verts.size());
      eyeball_start_[side > 0 ? 0 : 1] = base;
      const Eigen::Vector3d centre = eye_centre(side);
      for (double beta : kPatch) {
        for (double alpha : kPatch) {
          verts.push_back(centre + kEyeRadius * s *
                                       Eigen::Vector3d(std::sin(alpha) * std::cos(beta), std::sin(beta),
                                                       std::cos(alpha) * std::cos(beta)));
        }
      }
      for (std::uint32_t i = 0; i < 3; ++i) {
        for (std::uint32_t j = 0; j < 3; ++j) {
          const std::uint32_t v = base + 4 * i + j;
          rig.mesh.triangles.push_back({v, v + 1, v + 5});
          rig.mesh.triangles.push_back({v, v + 5, v + 4});
        }
      }
    }

    rig.mesh.positions.resize(3 * static_cast<Eigen::Index>(verts.size()));
    for (std::size_t i = 0; i < verts.size(); ++i) {
      rig.mesh.positions.segment<3>(3 * static_cast<Eigen::Index>(i)) = verts[i];
    }

    // Blendshapes.
    std::mt19937_64 rng(seed);
    rig.basis.names = arkit_blendshape_names();
    for (const auto& name : rig.basis.names) {
      const double amp = 1.0 + 0.1 * uniform(rng, -1.0, 1.0);
      const ShapeSpec spec = shape_spec(name);
      Eigen::VectorXd field = Eigen::VectorXd::Zero(rig.mesh.positions.size());
      for (const auto& bump : spec.bumps) {
        const Eigen::Vector2d centre = s * bump.centre;
        const double sigma = s * bump.sigma;
        for (std::size_t v = 0; v < skin_count_; ++v) {
          const double d = (verts[v].head<2>() - centre).norm();
          if (d >= 3.0 * sigma) continue;
          const double taper = 1.0 - (d / (3.0 * sigma)) * (d / (3.0 * sigma));
          const double w = std::exp(-0.5 * d * d / (sigma * sigma)) * taper * taper;
          field.segment<3>(3 * static_cast<Eigen::Index>(v)) += amp * s * w * bump.disp;
        }
      }
      if (spec.eye) {
        const Eigen::Vector3d centre = eye_centre(spec.eye->side);
        const Eigen::Matrix3d rot =
            Eigen::AngleAxisd(amp * spec.eye->angle, spec.eye->axis).toRotationMatrix();
        const auto base = eyeball_start_[spec.eye->side > 0 ? 0 : 1];
        for (std::uint32_t v = base; v < base + 16; ++v) {
          field.segment<3>(3 * static_cast<Eigen::Index>(v)) =
              rot * (verts[v] - centre) + centre - verts[v];
        }
      }
      rig.basis.displacements.push_back(std::move(field));
    }

    // Region partition and landmarks.
    const auto sites = anchors();
    std::array<std::vector<std::uint32_t>, kRegionCount> landmarks;
    for (const auto& a : sites) {
      const Eigen::Vector2d xy = s * a.xy;
      std::uint32_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t v = 0; v < skin_count_; ++v) {
        const double d = (verts[v].head<2>() - xy).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = static_cast<std::uint32_t>(v);
        }
      }
      landmarks[static_cast<std::size_t>(a.region)].push_back(best);
    }
    for (int e = 0; e < 2; ++e) {
      for (std::uint32_t k : {5u, 6u, 9u, 10u}) {
        landmarks[static_cast<std::size_t>(Region::Eye)].push_back(eyeball_start_[e] + k);
      }
    }
    for (std::size_t v = 0; v < skin_count_; ++v) {
      double best_d = (kRegionRadius * s) * (kRegionRadius * s);
      int best = -1;
      for (const auto& a : sites) {
        const double d = (verts[v].head<2>() - s * a.xy).squaredNorm();
        if (d <= best_d) {
          best_d = d;
          best = static_cast<int>(a.region);
        }
      }
      if (best >= 0) face.region_masks[static_cast<std::size_t>(best)].push_back(static_cast<std::uint32_t>(v));
    }
    for (int e = 0; e < 2; ++e) {
      for (std::uint32_t k = 0; k < 16; ++k) {
        face.region_masks[static_cast<std::size_t>(Region::Eye)].push_back(eyeball_start_[e] + k);
      }
    }
    for (Region r : all_regions()) {
      auto& idx = landmarks[static_cast<std::size_t>(r)];
      std::sort(idx.begin(), idx.end());
      idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
      rig.landmark_groups.push_back({std::string(region_name(r)), idx});
      std::sort(face.region_masks[static_cast<std::size_t>(r)].begin(),
                face.region_masks[static_cast<std::size_t>(r)].end());
    }
    rig.mouth_mask = face.region_masks[static_cast<std::size_t>(Region::Mouth)];
    return face;
  }

  std::size_t skin_count() const { return skin_count_; }
  std::uint32_t eyeball_start(int side) const { return eyeball_start_[side > 0 ? 0 : 1]; }

 private:
  FaceParams p_;
  std::size_t skin_count_ = 0;
  std::array<std::uint32_t, 2> eyeball_start_{};
};

struct CpSpec {
  const char* id;
  ControlRegion region;
  double x, y;
  double radius;
};

RigConfig build_config(const FaceBuilder& builder, const LbsRig& rig) {
  RigConfig config;
  const std::vector<CpSpec> specs{
      {"brow_inner_l", ControlRegion::Brow, 10.0, 29.0, 9.0},
      {"brow_outer_l", ControlRegion::Brow, 28.0, 28.0, 9.0},
      {"brow_inner_r", ControlRegion::Brow, -10.0, 29.0, 9.0},
      {"brow_outer_r", ControlRegion::Brow, -28.0, 28.0, 9.0},
      {"eyelid_upper_l", ControlRegion::Eyelid, 22.0, 17.0, 6.0},
      {"eyelid_lower_l", ControlRegion::Eyelid, 22.0, 7.0, 6.0},
      {"eyelid_upper_r", ControlRegion::Eyelid, -22.0, 17.0, 6.0},
      {"eyelid_lower_r", ControlRegion::Eyelid, -22.0, 7.0, 6.0},
      {"eyeball_l", ControlRegion::Eyeball, 22.0, 12.0, 0.0},
      {"eyeball_r", ControlRegion::Eyeball, -22.0, 12.0, 0.0},
      {"nose_l", ControlRegion::Nose, 7.0, -7.0, 7.0},
      {"nose_r", ControlRegion::Nose, -7.0, -7.0, 7.0},
      {"cheek_l", ControlRegion::Cheek, 36.0, -12.0, 12.0},
      {"cheek_r", ControlRegion::Cheek, -36.0, -12.0, 12.0},
      {"mouth_corner_l", ControlRegion::Mouth, 21.0, -36.0, 7.0},
      {"mouth_corner_r", ControlRegion::Mouth, -21.0, -36.0, 7.0},
      {"upper_lip_l", ControlRegion::Mouth, 9.0, -31.0, 6.0},
      {"upper_lip_r", ControlRegion::Mouth, -9.0, -31.0, 6.0},
      {"lower_lip_l", ControlRegion::Mouth, 9.0, -41.0, 6.0},
      {"lower_lip_r", ControlRegion::Mouth, -9.0, -41.0, 6.0},
      {"jaw", ControlRegion::Jaw, 0.0, -58.0, 22.0},
  };
  std::map<std::string, std::uint32_t> index;
  for (const auto& sp : specs) {
    ControlPoint cp;
    cp.id = sp.id;
    cp.region = sp.region;
    if (sp.region == ControlRegion::Eyeball) {
      cp.position = builder.eye_centre(sp.x > 0 ? 1 : -1);
    } else {
      cp.position = builder.surface(sp.x, sp.y);
    }
    cp.pivot = cp.position;
    if (sp.region == ControlRegion::Jaw) cp.pivot = Eigen::Vector3d(0.0, -15.0, 0.0);
    index[cp.id] = static_cast<std::uint32_t>(config.control_points.size());
    config.control_points.push_back(cp);
  }

  // Skinning: smooth compact falloff per control point, rows capped at 1.
  const std::size_t skin = builder.skin_count();
  for (std::size_t v = 0; v < skin; ++v) {
    std::vector<SkinWeight> row;
    double sum = 0.0;
    for (std::size_t c = 0; c < specs.size(); ++c) {
      if (specs[c].radius <= 0.0) continue;
      const double d = (rig.mesh.vertex(v) - config.control_points[c].position).norm();
      if (d >= specs[c].radius) continue;
      const double q = 1.0 - (d / specs[c].radius) * (d / specs[c].radius);
      row.push_back({static_cast<std::uint32_t>(v), static_cast<std::uint32_t>(c), q * q});
      sum += q * q;
    }
    for (auto& w : row) {
      if (sum > 1.0) w.weight /= sum;
      config.skinning.push_back(w);
    }
  }
  for (int side : {1, -1}) {
    const auto base = builder.eyeball_start(side);
    const auto cp = index[side > 0 ? "eyeball_l" : "eyeball_r"];
    for (std::uint32_t k = 0; k < 16; ++k) config.skinning.push_back({base + k, cp, 1.0});
  }

  auto channel = [&](std::string name, ChannelGroup group, double p0, double p1,
                     std::vector<std::tuple<const char*, Dof, double>> gains) {
    ActuatorChannel ch;
    ch.name = std::move(name);
    ch.group = group;
    ch.pulse_at_zero_us = p0;
    ch.pulse_at_one_us = p1;
    for (auto& [cp, dof, value] : gains) ch.gains.push_back({index.at(cp), dof, value});
    config.channels.push_back(std::move(ch));
  };
  using D = Dof;
  const auto F = ChannelGroup::Facial;
  // Left-side servos sweep 1000 -> 2000 us, right-side ones are mounted mirrored.
  channel("brow_inner_raise_l", F, 1000, 2000, {{"brow_inner_l", D::Ty, 3.0}, {"brow_inner_l", D::Tz, 0.3}});
  channel("brow_inner_raise_r", F, 2000, 1000, {{"brow_inner_r", D::Ty, 3.0}, {"brow_inner_r", D::Tz, 0.3}});
  channel("brow_outer_raise_l", F, 1000, 2000, {{"brow_outer_l", D::Ty, 3.0}, {"brow_outer_l", D::Tz, 0.3}});
  channel("brow_outer_raise_r", F, 2000, 1000, {{"brow_outer_r", D::Ty, 3.0}, {"brow_outer_r", D::Tz, 0.3}});
  channel("eyelid_upper_l", F, 1000, 2000, {{"eyelid_upper_l", D::Ty, -6.0}, {"eyelid_upper_l", D::Tz, 0.8}});
  channel("eyelid_upper_r", F, 2000, 1000, {{"eyelid_upper_r", D::Ty, -6.0}, {"eyelid_upper_r", D::Tz, 0.8}});
  channel("eyelid_lower_l", F, 1000, 2000, {{"eyelid_lower_l", D::Ty, 3.0}, {"eyelid_lower_l", D::Tz, 0.5}});
  channel("eyelid_lower_r", F, 2000, 1000, {{"eyelid_lower_r", D::Ty, 3.0}, {"eyelid_lower_r", D::Tz, 0.5}});
  // The eye pairs are coupled through linkages with slightly unequal arms.
  channel("eyes_look_left", F, 1000, 2000, {{"eyeball_l", D::Ry, 0.30}, {"eyeball_r", D::Ry, 0.26}});
  channel("eyes_look_right", F, 1000, 2000, {{"eyeball_l", D::Ry, -0.26}, {"eyeball_r", D::Ry, -0.30}});
  channel("eyes_look_up", F, 1000, 2000, {{"eyeball_l", D::Rx, -0.30}, {"eyeball_r", D::Rx, -0.26}});
  channel("eyes_look_down", F, 1000, 2000, {{"eyeball_l", D::Rx, 0.26}, {"eyeball_r", D::Rx, 0.30}});
  channel("nose_sneer_l", F, 1000, 2000, {{"nose_l", D::Ty, 2.0}, {"nose_l", D::Tz, 0.5}});
  channel("nose_sneer_r", F, 2000, 1000, {{"nose_r", D::Ty, 2.0}, {"nose_r", D::Tz, 0.5}});
  channel("cheek_raise_l", F, 1000, 2000, {{"cheek_l", D::Ty, 2.5}, {"cheek_l", D::Tz, 2.0}});
  channel("cheek_raise_r", F, 2000, 1000, {{"cheek_r", D::Ty, 2.5}, {"cheek_r", D::Tz, 2.0}});
  channel("mouth_smile_l", F, 1000, 2000,
          {{"mouth_corner_l", D::Tx, 2.5}, {"mouth_corner_l", D::Ty, 3.0}, {"mouth_corner_l", D::Tz, -0.5}});
  channel("mouth_smile_r", F, 2000, 1000,
          {{"mouth_corner_r", D::Tx, -2.5}, {"mouth_corner_r", D::Ty, 3.0}, {"mouth_corner_r", D::Tz, -0.5}});
  channel("mouth_frown_l", F, 1000, 2000, {{"mouth_corner_l", D::Tx, 0.5}, {"mouth_corner_l", D::Ty, -3.0}});
  channel("mouth_frown_r", F, 2000, 1000, {{"mouth_corner_r", D::Tx, -0.5}, {"mouth_corner_r", D::Ty, -3.0}});
  channel("upper_lip_raise_l", F, 1000, 2000, {{"upper_lip_l", D::Ty, 2.5}, {"upper_lip_l", D::Tz, 0.3}});
  channel("upper_lip_raise_r", F, 2000, 1000, {{"upper_lip_r", D::Ty, 2.5}, {"upper_lip_r", D::Tz, 0.3}});
  channel("lower_lip_down_l", F, 1000, 2000, {{"lower_lip_l", D::Ty, -2.5}, {"lower_lip_l", D::Tz, 0.3}});
  channel("lower_lip_down_r", F, 2000, 1000, {{"lower_lip_r", D::Ty, -2.5}, {"lower_lip_r", D::Tz, 0.3}});
  const auto J = ChannelGroup::Jaw;
  channel("jaw_open", J, 900, 2100, {{"jaw", D::Rx, 0.12}});
  channel("jaw_left", J, 900, 2100, {{"jaw", D::Tx, 5.0}, {"jaw", D::Ty, -1.0}});
  channel("jaw_right", J, 2100, 900, {{"jaw", D::Tx, -5.0}, {"jaw", D::Ty, -0.5}});
  channel("jaw_forward", J, 900, 2100, {{"jaw", D::Tz, 4.0}});
  for (const char* name : {"neck_pitch", "neck_yaw", "neck_roll"}) {
    channel(name, ChannelGroup::Neck, 500, 2500, {});
    config.channels.back().rest = 0.5;
  }
  fit_bounds_to_gains(config, 0.1);
  return config;
}

}  // namespace

ReferenceRig build_reference_rig(std::uint64_t seed) {
  FaceBuilder builder(FaceParams{});
  ReferenceRig out;
  out.face = builder.build(seed);
  out.config = build_config(builder, out.face.rig);
  return out;
}

ProceduralFace build_human_rig(std::uint64_t seed) {
  FaceParams p;
  p.cols = 48;
  p.rows = 50;
  p.scale = 0.92;
  p.a = 58.0;
  p.b = 76.0;
  p.c = 66.0;
  FaceBuilder builder(p);
  return builder.build(seed ^ 0x9e3779b97f4a7c15ULL);
}

}  // namespace roboface
