#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace roboface {

/// Vertex positions of a face in millimeters, packed as x0 y0 z0 x1 y1 z1 ...
struct FaceMesh {
  Eigen::VectorXd positions;
  /// Optional connectivity, only consumed by the OBJ writer.
  std::vector<std::array<std::uint32_t, 3>> triangles;

  std::size_t vertex_count() const { return static_cast<std::size_t>(positions.size()) / 3; }
  Eigen::Vector3d vertex(std::size_t i) const { return positions.segment<3>(3 * i); }
};

/// B displacement fields over a fixed topology. `displacements[b]` holds the
/// per-coordinate offsets (mm) of blendshape `names[b]`.
struct BlendshapeBasis {
  std::vector<std::string> names;
  std::vector<Eigen::VectorXd> displacements;

  std::size_t size() const { return names.size(); }
  /// Fields stacked as columns of a 3U x B matrix.
  Eigen::MatrixXd as_matrix() const;
  /// Index of `name`, or size() if absent.
  std::size_t index_of(std::string_view name) const;
};

/// Per-frame coefficient vector; every value lies in [0, 1].
struct BlendCoefficients {
  Eigen::VectorXd values;

  BlendCoefficients() = default;
  explicit BlendCoefficients(Eigen::VectorXd v) : values(std::move(v)) {}
  static BlendCoefficients zeros(std::size_t count) {
    return BlendCoefficients(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(count)));
  }

  std::size_t size() const { return static_cast<std::size_t>(values.size()); }
  bool in_range() const;
  bool operator==(const BlendCoefficients& o) const {
    return values.size() == o.values.size() && values == o.values;
  }
};

/// Facial regions used for evaluation, in the order the tracking report uses.
enum class Region : std::uint8_t { Eye, Brow, Nose, Cheek, Mouth, Jaw };
inline constexpr std::size_t kRegionCount = 6;
std::string_view region_name(Region r);
const std::array<Region, kRegionCount>& all_regions();

struct LandmarkGroup {
  std::string name;
  std::vector<std::uint32_t> indices;
};

struct LbsRig {
  FaceMesh mesh;
  BlendshapeBasis basis;
  std::vector<std::uint32_t> mouth_mask;
  std::vector<LandmarkGroup> landmark_groups;

  std::size_t vertex_count() const { return mesh.vertex_count(); }
  std::size_t blendshape_count() const { return basis.size(); }
  /// Group with the given name, or nullptr.
  const LandmarkGroup* find_group(std::string_view name) const;
  /// Sorted union of all landmark group indices.
  std::vector<std::uint32_t> landmark_vertices() const;
};

struct MotionSequence {
  double fps = 25.0;
  std::vector<BlendCoefficients> frames;

  std::size_t blendshape_count() const { return frames.empty() ? 0 : frames.front().size(); }
};

/// ARKit blendshape names without tongueOut (51 entries).
const std::vector<std::string>& arkit_blendshape_names();

/// Displacement sum over blendshapes in ascending index order. Zero
/// coefficients are skipped, so a zero vector yields an exact zero array.
Eigen::VectorXd vertex_delta(const LbsRig& rig, const BlendCoefficients& theta);

/// neutral + vertex_delta. The all-zero pose returns the neutral unchanged.
FaceMesh apply_skinning(const LbsRig& rig, const BlendCoefficients& theta);

/// Skinned positions restricted to `vertices` (3 * vertices.size() values).
Eigen::VectorXd skin_vertices(const LbsRig& rig, const BlendCoefficients& theta,
                              std::span<const std::uint32_t> vertices);

/// Human-readable invariant violations; empty when the rig is well formed.
std::vector<std::string> validate_rig(const LbsRig& rig);

void validate_motion(const MotionSequence& seq);

}  // namespace roboface
