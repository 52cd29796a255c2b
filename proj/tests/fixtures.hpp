#pragma once

#include "roboface/lbs.hpp"
#include "roboface/random.hpp"
#include "roboface/reference_rig.hpp"
#include "roboface/rig_sim.hpp"

#include <array>
#include <random>
#include <string>
#include <vector>

namespace fixtures {

/// Random well-conditioned rig with six one-vertex landmark groups.
inline roboface::LbsRig random_rig(std::size_t vertices, std::size_t blendshapes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  roboface::LbsRig rig;
  rig.mesh.positions.resize(static_cast<Eigen::Index>(3 * vertices));
  for (auto& p : rig.mesh.positions) p = roboface::uniform(rng, -50.0, 50.0);
  for (std::size_t b = 0; b < blendshapes; ++b) {
    rig.basis.names.push_back("shape" + std::to_string(b));
    Eigen::VectorXd field(3 * static_cast<Eigen::Index>(vertices));
    for (auto& v : field) v = roboface::standard_normal(rng);
    rig.basis.displacements.push_back(field);
  }
  for (std::uint32_t v = 0; v < vertices && v < 3; ++v) rig.mouth_mask.push_back(v);
  for (auto r : roboface::all_regions()) {
    rig.landmark_groups.push_back(
        {std::string(roboface::region_name(r)),
         {static_cast<std::uint32_t>(static_cast<std::size_t>(r) % vertices)}});
  }
  return rig;
}

inline Eigen::VectorXd random_theta(std::size_t n, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  Eigen::VectorXd t(static_cast<Eigen::Index>(n));
  for (auto& v : t) v = roboface::uniform(rng, lo, hi);
  return t;
}

inline const roboface::ReferenceRig& reference() {
  static const roboface::ReferenceRig ref = roboface::build_reference_rig(0);
  return ref;
}

inline const roboface::ProceduralFace& human() {
  static const roboface::ProceduralFace face = roboface::build_human_rig(0);
  return face;
}

/// Twelve vertices on a line, two translation-only control points, two
/// channels and two blendshapes; landmark group r holds vertices 2r, 2r+1.
struct ToyRig {
  roboface::LbsRig rig;
  roboface::RigConfig config;
};

inline ToyRig toy_rig() {
  using namespace roboface;
  ToyRig toy;
  toy.rig.mesh.positions.resize(36);
  for (int v = 0; v < 12; ++v) toy.rig.mesh.positions.segment<3>(3 * v) << 4.0 * v, 0.5 * v, 1.0;
  std::mt19937_64 rng(7);
  for (int b = 0; b < 2; ++b) {
    toy.rig.basis.names.push_back(b == 0 ? "raise" : "spread");
    Eigen::VectorXd field(36);
    for (auto& x : field) x = uniform(rng, -3.0, 3.0);
    toy.rig.basis.displacements.push_back(field);
  }
  for (auto r : all_regions()) {
    const auto k = static_cast<std::uint32_t>(r);
    toy.rig.landmark_groups.push_back({std::string(region_name(r)), {2 * k, 2 * k + 1}});
  }
  toy.rig.mouth_mask = {8, 9};

  ControlPoint a{"upper", ControlRegion::Brow, {10.0, 1.0, 1.0}, {10.0, 1.0, 1.0}, {}, {}};
  ControlPoint b{"lower", ControlRegion::Mouth, {34.0, 4.0, 1.0}, {34.0, 4.0, 1.0}, {}, {}};
  toy.config.control_points = {a, b};
  ActuatorChannel lift{"lift", ChannelGroup::Facial, {{0, Dof::Ty, 3.0}, {0, Dof::Tz, 1.0}}, 1000, 2000, 0.0};
  ActuatorChannel pull{"pull", ChannelGroup::Facial, {{1, Dof::Ty, -2.0}, {1, Dof::Tx, 1.5}, {0, Dof::Tx, 0.5}},
                       2000, 1000, 0.0};
  toy.config.channels = {lift, pull};
  for (std::uint32_t v = 0; v < 6; ++v) toy.config.skinning.push_back({v, 0, 0.2 + 0.15 * v});
  for (std::uint32_t v = 5; v < 12; ++v) toy.config.skinning.push_back({v, 1, v == 5 ? 0.05 : 1.0 - 0.05 * v});
  fit_bounds_to_gains(toy.config, 0.1);
  return toy;
}

/// Toy-rig FK written directly from the gains and weights (translations only).
inline Eigen::VectorXd toy_forward(const ToyRig& toy, const std::array<double, 2>& u) {
  Eigen::VectorXd p = toy.rig.mesh.positions;
  for (const auto& w : toy.config.skinning) {
    for (std::size_t c = 0; c < 2; ++c) {
      for (const auto& g : toy.config.channels[c].gains) {
        if (g.control_point != w.control_point) continue;
        p[3 * w.vertex + static_cast<int>(g.dof)] += w.weight * g.value * u[c];
      }
    }
  }
  return p;
}

}  // namespace fixtures
