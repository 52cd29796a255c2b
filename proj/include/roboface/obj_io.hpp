#pragma once

#include "roboface/lbs.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace roboface {

struct ObjObject {
  std::string name;
  Eigen::VectorXd positions;  // 3V
  /// Zero-based, local to this object.
  std::vector<std::array<std::uint32_t, 3>> triangles;
};

/// One "o frame_<i>" block per frame, vertices with six decimals, faces
/// (one-based, offset by the preceding objects) when triangles are given.
std::string format_obj(const std::vector<Eigen::VectorXd>& frames,
                       const std::vector<std::array<std::uint32_t, 3>>& triangles);
void write_obj(const std::filesystem::path& path, const std::vector<Eigen::VectorXd>& frames,
               const std::vector<std::array<std::uint32_t, 3>>& triangles);
void write_obj(const std::filesystem::path& path, const FaceMesh& mesh);
/// Every frame of a motion skinned on the rig.
void write_obj(const std::filesystem::path& path, const MotionSequence& seq, const LbsRig& rig);

/// Reads "o", "v" and triangular or polygon "f" lines (polygons are fanned).
/// Vertices before any "o" line land in an object named "default".
std::vector<ObjObject> parse_obj(const std::string& text);
std::vector<ObjObject> read_obj(const std::filesystem::path& path);

}  // namespace roboface
