#pragma once

#include "roboface/lbs.hpp"
#include "roboface/rig_sim.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace roboface {

/// A procedural face plus the vertex set of each evaluation region.
struct ProceduralFace {
  LbsRig rig;
  std::array<std::vector<std::uint32_t>, kRegionCount> region_masks;
};

struct ReferenceRig {
  ProceduralFace face;
  RigConfig config;
};

/// Region a blendshape name belongs to, from its ARKit prefix.
Region blendshape_region(std::string_view name);

/// Robot face: a 68 x 70 ellipsoid grid with a nose and eye sockets plus two
/// 4 x 4 eyeball patches (4792 vertices), the 51 ARKit shapes as tapered
/// Gaussian bumps around fixed features (eye-look shapes rotate the eyeball
/// patch), and a 21-point / 31-channel actuator config. `seed` jitters the
/// shape amplitudes by up to 10%.
ReferenceRig build_reference_rig(std::uint64_t seed = 0);

/// Human capture rig with the same shape semantics on a coarser, smaller
/// face (48 x 50 grid + eyeballs, 2432 vertices).
ProceduralFace build_human_rig(std::uint64_t seed = 0);

}  // namespace roboface
