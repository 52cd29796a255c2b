#include "roboface/formats.hpp"

#include <fstream>
#include <iterator>

namespace roboface {

namespace {

constexpr std::uint32_t kVersion = 1;

void write_indices(ByteWriter& w, const std::vector<std::uint32_t>& idx) {
  w.u32(static_cast<std::uint32_t>(idx.size()));
  for (auto i : idx) w.u32(i);
}

std::vector<std::uint32_t> read_indices(ByteReader& r) {
  std::vector<std::uint32_t> idx(r.count(4));
  for (auto& i : idx) i = r.u32();
  return idx;
}

void check_version(ByteReader& r, const char* what) {
  const auto v = r.u32();
  if (v != kVersion) {
    throw FormatError(std::string(what) + ": unsupported version " + std::to_string(v));
  }
}

}  // namespace

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<std::uint8_t> encode_rig(const LbsRig& rig) {
  if (auto issues = validate_rig(rig); !issues.empty()) {
    throw FormatError("cannot encode invalid rig: " + issues.front());
  }
  if (rig.landmark_groups.size() != kRegionCount) {
    throw FormatError("rig file requires exactly 6 landmark groups");
  }
  const std::size_t n = static_cast<std::size_t>(rig.mesh.positions.size());
  ByteWriter w;
  w.magic("LBSR");
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(rig.vertex_count()));
  w.u32(static_cast<std::uint32_t>(rig.blendshape_count()));
  for (std::size_t i = 0; i < n; ++i) w.f32(static_cast<float>(rig.mesh.positions[static_cast<Eigen::Index>(i)]));
  for (const auto& field : rig.basis.displacements) {
    for (Eigen::Index i = 0; i < field.size(); ++i) w.f32(static_cast<float>(field[i]));
  }
  for (const auto& name : rig.basis.names) w.short_string(name);
  write_indices(w, rig.mouth_mask);
  for (const auto& g : rig.landmark_groups) {
    w.short_string(g.name);
    write_indices(w, g.indices);
  }
  if (!rig.mesh.triangles.empty()) {
    w.magic("TRIS");
    w.u32(static_cast<std::uint32_t>(rig.mesh.triangles.size()));
    for (const auto& t : rig.mesh.triangles) {
      w.u32(t[0]);
      w.u32(t[1]);
      w.u32(t[2]);
    }
  }
  return w.take();
}

LbsRig decode_rig(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic("LBSR");
  check_version(r, "lbsrig");
  const std::size_t u = r.u32();
  const std::size_t b = r.u32();
  if (u == 0 || b == 0) throw FormatError("lbsrig: empty rig");
  if (3 * u * (b + 1) > r.remaining() / 4) throw FormatError("lbsrig: truncated payload");

  LbsRig rig;
  rig.mesh.positions.resize(static_cast<Eigen::Index>(3 * u));
  for (Eigen::Index i = 0; i < rig.mesh.positions.size(); ++i) rig.mesh.positions[i] = r.f32();
  rig.basis.displacements.resize(b);
  for (auto& field : rig.basis.displacements) {
    field.resize(static_cast<Eigen::Index>(3 * u));
    for (Eigen::Index i = 0; i < field.size(); ++i) field[i] = r.f32();
  }
  rig.basis.names.resize(b);
  for (auto& name : rig.basis.names) name = r.short_string();
  rig.mouth_mask = read_indices(r);
  rig.landmark_groups.resize(kRegionCount);
  for (auto& g : rig.landmark_groups) {
    g.name = r.short_string();
    g.indices = read_indices(r);
  }
  if (r.peek_magic("TRIS")) {
    r.expect_magic("TRIS");
    rig.mesh.triangles.resize(r.count(12));
    for (auto& t : rig.mesh.triangles) {
      t[0] = r.u32();
      t[1] = r.u32();
      t[2] = r.u32();
    }
  }
  if (!r.at_end()) throw FormatError("lbsrig: trailing bytes");
  if (auto issues = validate_rig(rig); !issues.empty()) {
    throw FormatError("lbsrig: " + issues.front());
  }
  return rig;
}

void save_rig(const LbsRig& rig, const std::filesystem::path& path) {
  write_file_bytes(path, encode_rig(rig));
}

LbsRig load_rig(const std::filesystem::path& path) { return decode_rig(read_file_bytes(path)); }

std::vector<std::uint8_t> encode_motion(const MotionSequence& seq) {
  validate_motion(seq);
  ByteWriter w;
  w.magic("LBSM");
  w.u32(kVersion);
  w.f32(static_cast<float>(seq.fps));
  w.u32(static_cast<std::uint32_t>(seq.frames.size()));
  w.u32(static_cast<std::uint32_t>(seq.blendshape_count()));
  for (const auto& f : seq.frames) {
    for (Eigen::Index i = 0; i < f.values.size(); ++i) w.f32(static_cast<float>(f.values[i]));
  }
  return w.take();
}

MotionSequence decode_motion(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic("LBSM");
  check_version(r, "lbsm");
  MotionSequence seq;
  seq.fps = r.f32();
  const std::size_t frames = r.u32();
  const std::size_t b = r.u32();
  if (frames * b > r.remaining() / 4) throw FormatError("lbsm: truncated payload");
  seq.frames.resize(frames);
  for (auto& f : seq.frames) {
    f.values.resize(static_cast<Eigen::Index>(b));
    for (Eigen::Index i = 0; i < f.values.size(); ++i) f.values[i] = r.f32();
  }
  if (!r.at_end()) throw FormatError("lbsm: trailing bytes");
  if (!(seq.fps > 0.0)) throw FormatError("lbsm: fps must be positive");
  return seq;
}

void save_motion(const MotionSequence& seq, const std::filesystem::path& path) {
  write_file_bytes(path, encode_motion(seq));
}

MotionSequence load_motion(const std::filesystem::path& path) {
  return decode_motion(read_file_bytes(path));
}

std::vector<std::uint8_t> encode_dense(const DenseFrames& d) {
  ByteWriter w;
  w.magic("DNSF");
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(d.vertex_count));
  w.u32(static_cast<std::uint32_t>(d.frames.size()));
  w.f32(static_cast<float>(d.fps));
  for (const auto& f : d.frames) {
    if (static_cast<std::size_t>(f.size()) != 3 * d.vertex_count) {
      throw FormatError("dense frame length does not match vertex count");
    }
    for (Eigen::Index i = 0; i < f.size(); ++i) w.f32(static_cast<float>(f[i]));
  }
  return w.take();
}

DenseFrames decode_dense(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic("DNSF");
  check_version(r, "dnsf");
  DenseFrames d;
  d.vertex_count = r.u32();
  const std::size_t frames = r.u32();
  d.fps = r.f32();
  if (frames * 3 * d.vertex_count > r.remaining() / 4) throw FormatError("dnsf: truncated payload");
  d.frames.resize(frames);
  for (auto& f : d.frames) {
    f.resize(static_cast<Eigen::Index>(3 * d.vertex_count));
    for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = r.f32();
  }
  if (!r.at_end()) throw FormatError("dnsf: trailing bytes");
  return d;
}

void save_dense(const DenseFrames& frames, const std::filesystem::path& path) {
  write_file_bytes(path, encode_dense(frames));
}

DenseFrames load_dense(const std::filesystem::path& path) {
  return decode_dense(read_file_bytes(path));
}

}  // namespace roboface
