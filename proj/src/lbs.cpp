#include "roboface/lbs.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace roboface {

namespace {

void check_theta(const LbsRig& rig, const BlendCoefficients& theta) {
  if (theta.size() != rig.blendshape_count()) {
    std::ostringstream msg;
    msg << "coefficient count " << theta.size() << " does not match rig blendshape count "
        << rig.blendshape_count();
    throw std::invalid_argument(msg.str());
  }
  if (rig.basis.displacements.size() != rig.blendshape_count()) {
    throw std::invalid_argument("rig basis field count does not match its names");
  }
  for (std::size_t b = 0; b < rig.basis.displacements.size(); ++b) {
    if (rig.basis.displacements[b].size() != rig.mesh.positions.size()) {
      throw std::invalid_argument("displacement field '" + rig.basis.names[b] +
                                  "' does not match the mesh size");
    }
  }
}

}  // namespace

std::size_t BlendshapeBasis::index_of(std::string_view name) const {
  auto it = std::find(names.begin(), names.end(), name);
  return static_cast<std::size_t>(it - names.begin());
}

Eigen::MatrixXd BlendshapeBasis::as_matrix() const {
  const Eigen::Index rows = displacements.empty() ? 0 : displacements.front().size();
  Eigen::MatrixXd m(rows, static_cast<Eigen::Index>(displacements.size()));
  for (std::size_t b = 0; b < displacements.size(); ++b) {
    m.col(static_cast<Eigen::Index>(b)) = displacements[b];
  }
  return m;
}

bool BlendCoefficients::in_range() const {
  return ((values.array() >= 0.0) && (values.array() <= 1.0)).all();
}

std::string_view region_name(Region r) {
  switch (r) {
    case Region::Eye: return "eye";
    case Region::Brow: return "brow";
    case Region::Nose: return "nose";
    case Region::Cheek: return "cheek";
    case Region::Mouth: return "mouth";
    case Region::Jaw: return "jaw";
  }
  return "unknown";
}

const std::array<Region, kRegionCount>& all_regions() {
  static const std::array<Region, kRegionCount> regions{Region::Eye,   Region::Brow,  Region::Nose,
                                                        Region::Cheek, Region::Mouth, Region::Jaw};
  return regions;
}

const LandmarkGroup* LbsRig::find_group(std::string_view name) const {
  for (const auto& g : landmark_groups) {
    if (g.name == name) return &g;
  }
  return nullptr;
}

std::vector<std::uint32_t> LbsRig::landmark_vertices() const {
  std::vector<std::uint32_t> out;
  for (const auto& g : landmark_groups) out.insert(out.end(), g.indices.begin(), g.indices.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

const std::vector<std::string>& arkit_blendshape_names() {
  static const std::vector<std::string> names{
      "eyeBlinkLeft",      "eyeLookDownLeft",    "eyeLookInLeft",    "eyeLookOutLeft",
      "eyeLookUpLeft",     "eyeSquintLeft",      "eyeWideLeft",      "eyeBlinkRight",
      "eyeLookDownRight",  "eyeLookInRight",     "eyeLookOutRight",  "eyeLookUpRight",
      "eyeSquintRight",    "eyeWideRight",       "jawForward",       "jawLeft",
      "jawRight",          "jawOpen",            "mouthClose",       "mouthFunnel",
      "mouthPucker",       "mouthLeft",          "mouthRight",       "mouthSmileLeft",
      "mouthSmileRight",   "mouthFrownLeft",     "mouthFrownRight",  "mouthDimpleLeft",
      "mouthDimpleRight",  "mouthStretchLeft",   "mouthStretchRight", "mouthRollLower",
      "mouthRollUpper",    "mouthShrugLower",    "mouthShrugUpper",  "mouthPressLeft",
      "mouthPressRight",   "mouthLowerDownLeft", "mouthLowerDownRight", "mouthUpperUpLeft",
      "mouthUpperUpRight", "browDownLeft",       "browDownRight",    "browInnerUp",
      "browOuterUpLeft",   "browOuterUpRight",   "cheekPuff",        "cheekSquintLeft",
      "cheekSquintRight",  "noseSneerLeft",      "noseSneerRight"};
  return names;
}

Eigen::VectorXd vertex_delta(const LbsRig& rig, const BlendCoefficients& theta) {
  check_theta(rig, theta);
  Eigen::VectorXd delta = Eigen::VectorXd::Zero(rig.mesh.positions.size());
  const auto& fields = rig.basis.displacements;
  for (std::size_t b = 0; b < fields.size(); ++b) {
    const double w = theta.values[static_cast<Eigen::Index>(b)];
    if (w == 0.0) continue;
    delta.noalias() += w * fields[b];
  }
  return delta;
}

FaceMesh apply_skinning(const LbsRig& rig, const BlendCoefficients& theta) {
  check_theta(rig, theta);
  FaceMesh out = rig.mesh;
  if ((theta.values.array() == 0.0).all()) return out;
  out.positions += vertex_delta(rig, theta);
  return out;
}

Eigen::VectorXd skin_vertices(const LbsRig& rig, const BlendCoefficients& theta,
                              std::span<const std::uint32_t> vertices) {
  check_theta(rig, theta);
  const auto& fields = rig.basis.displacements;
  const std::size_t u = rig.vertex_count();
  Eigen::VectorXd out(3 * vertices.size());
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const std::size_t v = vertices[i];
    if (v >= u) throw std::out_of_range("skin_vertices: vertex index out of range");
    for (int k = 0; k < 3; ++k) {
      const Eigen::Index row = static_cast<Eigen::Index>(3 * v + k);
      double d = 0.0;
      for (std::size_t b = 0; b < fields.size(); ++b) {
        const double w = theta.values[static_cast<Eigen::Index>(b)];
        if (w != 0.0) d += w * fields[b][row];
      }
      out[static_cast<Eigen::Index>(3 * i + k)] = rig.mesh.positions[row] + d;
    }
  }
  return out;
}

std::vector<std::string> validate_rig(const LbsRig& rig) {
  std::vector<std::string> issues;
  const auto n = static_cast<std::size_t>(rig.mesh.positions.size());
  if (n == 0) issues.emplace_back("mesh has no vertices");
  if (n % 3 != 0) issues.emplace_back("positions length is not a multiple of 3");
  if (!rig.mesh.positions.allFinite()) issues.emplace_back("mesh has non-finite coordinates");
  const std::size_t u = n / 3;

  const auto& basis = rig.basis;
  if (basis.names.empty()) issues.emplace_back("basis has no blendshapes");
  if (basis.displacements.size() != basis.names.size()) {
    issues.push_back("basis has " + std::to_string(basis.displacements.size()) +
                     " displacement fields but " + std::to_string(basis.names.size()) + " names");
  }
  for (std::size_t b = 0; b < basis.displacements.size(); ++b) {
    const std::string name = b < basis.names.size() ? basis.names[b] : "#" + std::to_string(b);
    const auto& field = basis.displacements[b];
    if (static_cast<std::size_t>(field.size()) != n) {
      issues.push_back("blendshape '" + name + "' has " + std::to_string(field.size()) +
                       " displacement entries, expected " + std::to_string(n));
    } else if (!field.allFinite()) {
      issues.push_back("blendshape '" + name + "' has non-finite displacements");
    }
  }
  std::unordered_set<std::string> seen;
  for (const auto& name : basis.names) {
    if (name.empty()) issues.emplace_back("blendshape with empty name");
    if (!seen.insert(name).second) issues.push_back("duplicate blendshape name '" + name + "'");
  }

  for (auto idx : rig.mouth_mask) {
    if (idx >= u) {
      issues.push_back("mouth mask index " + std::to_string(idx) + " out of range");
      break;
    }
  }
  for (const auto& g : rig.landmark_groups) {
    for (auto idx : g.indices) {
      if (idx >= u) {
        issues.push_back("landmark group '" + g.name + "' index " + std::to_string(idx) +
                         " out of range");
        break;
      }
    }
  }
  for (auto& t : rig.mesh.triangles) {
    if (t[0] >= u || t[1] >= u || t[2] >= u) {
      issues.emplace_back("triangle index out of range");
      break;
    }
  }
  return issues;
}

void validate_motion(const MotionSequence& seq) {
  if (!(seq.fps > 0.0) || !std::isfinite(seq.fps)) {
    throw std::invalid_argument("motion sequence fps must be positive");
  }
  const std::size_t b = seq.blendshape_count();
  for (const auto& f : seq.frames) {
    if (f.size() != b) throw std::invalid_argument("motion frames disagree on blendshape count");
  }
}

}  // namespace roboface
