#include "roboface/obj_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace roboface {

std::string format_obj(const std::vector<Eigen::VectorXd>& frames,
                       const std::vector<std::array<std::uint32_t, 3>>& triangles) {
  std::string out;
  char line[128];
  std::size_t offset = 1;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const auto& p = frames[f];
    if (p.size() % 3 != 0) throw std::invalid_argument("frame length is not a multiple of 3");
    const auto vertices = static_cast<std::size_t>(p.size() / 3);
    out += "o frame_" + std::to_string(f) + "\n";
    for (std::size_t v = 0; v < vertices; ++v) {
      const auto i = static_cast<Eigen::Index>(3 * v);
      std::snprintf(line, sizeof line, "v %.6f %.6f %.6f\n", p[i], p[i + 1], p[i + 2]);
      out += line;
    }
    for (const auto& t : triangles) {
      if (t[0] >= vertices || t[1] >= vertices || t[2] >= vertices) {
        throw std::out_of_range("triangle index outside the frame's vertices");
      }
      std::snprintf(line, sizeof line, "f %zu %zu %zu\n", t[0] + offset, t[1] + offset, t[2] + offset);
      out += line;
    }
    offset += vertices;
  }
  return out;
}

void write_obj(const std::filesystem::path& path, const std::vector<Eigen::VectorXd>& frames,
               const std::vector<std::array<std::uint32_t, 3>>& triangles) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << format_obj(frames, triangles);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_obj(const std::filesystem::path& path, const FaceMesh& mesh) {
  write_obj(path, std::vector<Eigen::VectorXd>{mesh.positions}, mesh.triangles);
}

void write_obj(const std::filesystem::path& path, const MotionSequence& seq, const LbsRig& rig) {
  std::vector<Eigen::VectorXd> frames;
  frames.reserve(seq.frames.size());
  for (const auto& f : seq.frames) frames.push_back(apply_skinning(rig, f).positions);
  write_obj(path, frames, rig.mesh.triangles);
}

std::vector<ObjObject> parse_obj(const std::string& text) {
  std::vector<ObjObject> objects;
  std::vector<std::vector<double>> coords;
  std::size_t base = 1;  // global index of the current object's first vertex
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  auto current = [&]() -> ObjObject& {
    if (objects.empty()) {
      objects.push_back({"default", {}, {}});
      coords.emplace_back();
    }
    return objects.back();
  };
  auto fail = [&](const std::string& what) {
    throw std::runtime_error("obj line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "o") {
      if (!objects.empty()) base += coords.back().size() / 3;
      std::string name;
      ls >> name;
      objects.push_back({name, {}, {}});
      coords.emplace_back();
    } else if (tag == "v") {
      current();
      double x, y, z;
      if (!(ls >> x >> y >> z)) fail("vertex needs three coordinates");
      coords.back().insert(coords.back().end(), {x, y, z});
    } else if (tag == "f") {
      ObjObject& obj = current();
      std::vector<std::uint32_t> idx;
      std::string tok;
      while (ls >> tok) {
        const long g = std::stol(tok.substr(0, tok.find('/')));
        const long local = g - static_cast<long>(base);
        if (g < 1 || local < 0 || static_cast<std::size_t>(local) >= coords.back().size() / 3) {
          fail("face index outside the current object");
        }
        idx.push_back(static_cast<std::uint32_t>(local));
      }
      if (idx.size() < 3) fail("face needs at least three vertices");
      for (std::size_t k = 1; k + 1 < idx.size(); ++k) obj.triangles.push_back({idx[0], idx[k], idx[k + 1]});
    }
  }
  for (std::size_t i = 0; i < objects.size(); ++i) {
    objects[i].positions = Eigen::Map<const Eigen::VectorXd>(coords[i].data(),
                                                             static_cast<Eigen::Index>(coords[i].size()));
  }
  return objects;
}

std::vector<ObjObject> read_obj(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_obj(buffer.str());
}

}  // namespace roboface
