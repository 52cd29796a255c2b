#pragma once

#include "roboface/binary_io.hpp"
#include "roboface/lbs.hpp"

#include <filesystem>
#include <vector>

namespace roboface {

// ".lbsrig": "LBSR", u32 version=1, u32 U, u32 B, neutral 3U f32, B fields of
// 3U f32, B names (u16 length + UTF-8), mouth mask (u32 count + u32 indices),
// six landmark groups (u16 name length + UTF-8 + u32 count + u32 indices).
// Writers append an optional "TRIS" section (u32 count + 3*count u32) when the
// mesh carries triangles; readers accept files with or without it.
std::vector<std::uint8_t> encode_rig(const LbsRig& rig);
LbsRig decode_rig(std::span<const std::uint8_t> bytes);
void save_rig(const LbsRig& rig, const std::filesystem::path& path);
LbsRig load_rig(const std::filesystem::path& path);

// ".lbsm": "LBSM", u32 version=1, f32 fps, u32 frame_count, u32 B, frames row-major f32.
std::vector<std::uint8_t> encode_motion(const MotionSequence& seq);
MotionSequence decode_motion(std::span<const std::uint8_t> bytes);
void save_motion(const MotionSequence& seq, const std::filesystem::path& path);
MotionSequence load_motion(const std::filesystem::path& path);

/// Dense per-vertex capture: one 3V position vector per frame.
struct DenseFrames {
  double fps = 25.0;
  std::size_t vertex_count = 0;
  std::vector<Eigen::VectorXd> frames;
};

// "DNSF": u32 version=1, u32 V, u32 frame_count, f32 fps, frames 3V f32 row-major.
std::vector<std::uint8_t> encode_dense(const DenseFrames& frames);
DenseFrames decode_dense(std::span<const std::uint8_t> bytes);
void save_dense(const DenseFrames& frames, const std::filesystem::path& path);
DenseFrames load_dense(const std::filesystem::path& path);

}  // namespace roboface
