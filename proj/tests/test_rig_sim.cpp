#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"

#include "roboface/reference_rig.hpp"
#include "roboface/rig_sim.hpp"

#include "json.hpp"

#include <filesystem>
#include <fstream>

using namespace roboface;

namespace {

const KinematicsModel& reference_model() {
  static const KinematicsModel model(fixtures::reference().config, fixtures::reference().face.rig);
  return model;
}

ActuatorState random_state(const KinematicsModel& m, std::mt19937_64& rng, double lo, double hi) {
  ActuatorState s = m.rest_state();
  for (auto c : m.ik_channels()) s.u[static_cast<Eigen::Index>(c)] = uniform(rng, lo, hi);
  return s;
}

}  // namespace

TEST_SUITE("rig_sim") {
  TEST_CASE("zero command gives the neutral bitwise") {
    const KinematicsModel& m = reference_model();
    ActuatorState zero{Eigen::VectorXd::Zero(31)};
    CHECK(m.forward(zero).positions == m.rig().mesh.positions);
    CHECK(m.forward(m.rest_state()).positions == m.rig().mesh.positions);
    CHECK(forward_kinematics(fixtures::reference().config, zero, fixtures::reference().face.rig).positions ==
          m.rig().mesh.positions);
  }

  TEST_CASE("single channel displacement is weight times gain times u") {
    const KinematicsModel& m = reference_model();
    const auto& config = m.config();
    REQUIRE(config.channels[0].name == "brow_inner_raise_l");
    const std::uint32_t cp = config.channels[0].gains[0].control_point;
    std::vector<SkinWeight> weights;
    for (const auto& w : config.skinning) {
      if (w.control_point == cp) weights.push_back(w);
    }
    std::sort(weights.begin(), weights.end(), [](auto& a, auto& b) { return a.weight > b.weight; });
    REQUIRE(weights.size() >= 3);
    ActuatorState s{Eigen::VectorXd::Zero(31)};
    s.u[0] = 0.7;
    const FaceMesh mesh = m.forward(s);
    for (int i = 0; i < 3; ++i) {
      const auto v = weights[static_cast<std::size_t>(i)].vertex;
      const double w = weights[static_cast<std::size_t>(i)].weight;
      const Eigen::Vector3d d = mesh.vertex(v) - m.rig().mesh.vertex(v);
      CHECK(d.x() == doctest::Approx(0.0).scale(1e-12));
      CHECK(d.y() == doctest::Approx(w * 3.0 * 0.7).epsilon(1e-12));
      CHECK(d.z() == doctest::Approx(w * 0.3 * 0.7).epsilon(1e-12));
    }
  }

  TEST_CASE("toy rig forward kinematics against an independent sum") {
    const fixtures::ToyRig toy = fixtures::toy_rig();
    const KinematicsModel m(toy.config, toy.rig, {}, false);
    ActuatorState s{Eigen::Vector2d(0.3, 0.8)};
    CHECK((m.forward(s).positions - fixtures::toy_forward(toy, {0.3, 0.8})).cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("control-point DOFs stay within bounds") {
    const KinematicsModel& m = reference_model();
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
      ActuatorState s{fixtures::random_theta(31, rng)};
      const Eigen::VectorXd d = m.dofs(s);
      for (std::size_t c = 0; c < 21; ++c) {
        for (int k = 0; k < kDofCount; ++k) {
          const auto& b = m.config().control_points[c].bounds[static_cast<std::size_t>(k)];
          const double v = d[static_cast<Eigen::Index>(6 * c + static_cast<std::size_t>(k))];
          CHECK(v >= b.min);
          CHECK(v <= b.max);
        }
      }
    }
  }

  TEST_CASE("bounds narrower than the gain image are rejected") {
    fixtures::ToyRig toy = fixtures::toy_rig();
    toy.config.control_points[0].bounds[static_cast<std::size_t>(Dof::Ty)] = {0.0, 1.0};
    CHECK_FALSE(validate_config(toy.config, 12, false).empty());
    CHECK_THROWS(KinematicsModel(toy.config, toy.rig, {}, false));
  }

  TEST_CASE("out-of-box commands are rejected") {
    const KinematicsModel& m = reference_model();
    ActuatorState s{Eigen::VectorXd::Zero(31)};
    s.u[4] = 1.2;
    CHECK_THROWS(m.forward(s));
    CHECK_THROWS(m.forward(ActuatorState{Eigen::VectorXd::Zero(30)}));
  }

  TEST_CASE("interior targets are recovered") {
    const KinematicsModel& m = reference_model();
    CHECK(m.ik_channels().size() == 28);
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 10; ++trial) {
      const ActuatorState u0 = random_state(m, rng, 0.05, 0.95);
      const IkResult r = m.solve(m.forward(u0).positions);
      CHECK(r.converged);
      CHECK((r.state.u - u0.u).cwiseAbs().maxCoeff() < 1e-6);
      CHECK(r.residual < 1e-10);
    }
  }

  TEST_CASE("evaluation-set and full targets agree") {
    const KinematicsModel& m = reference_model();
    std::mt19937_64 rng(5);
    const ActuatorState u0 = random_state(m, rng, 0.1, 0.9);
    const IkResult full = m.solve(m.forward(u0).positions);
    const IkResult eval = m.solve(m.forward_eval(u0));
    CHECK(full.state.u == eval.state.u);
    CHECK_THROWS(m.solve(Eigen::VectorXd::Zero(7)));
  }

  TEST_CASE("neutral target gives the rest command") {
    const KinematicsModel& m = reference_model();
    const IkResult r = m.solve(m.rig().mesh.positions);
    CHECK(r.state.u == m.rest_state().u);
    CHECK(r.residual == 0.0);
  }

  TEST_CASE("neck channels pass through") {
    const KinematicsModel& m = reference_model();
    const IkResult r = m.solve(m.rig().mesh.positions, {}, nullptr, Eigen::Vector3d(0.1, 0.9, 1.4));
    CHECK(r.state.u[28] == 0.1);
    CHECK(r.state.u[29] == 0.9);
    CHECK(r.state.u[30] == 1.0);
  }

  TEST_CASE("unreachable targets saturate with positive residual") {
    const KinematicsModel& m = reference_model();
    std::mt19937_64 rng(6);
    const ActuatorState u0 = random_state(m, rng, 0.2, 0.8);
    const Eigen::VectorXd neutral = m.rig().mesh.positions;
    const Eigen::VectorXd target = neutral + 10.0 * (m.forward(u0).positions - neutral);
    const IkResult r = m.solve(target);
    CHECK(r.residual > 0.0);
    int saturated = 0;
    for (auto c : m.ik_channels()) {
      const double v = r.state.u[static_cast<Eigen::Index>(c)];
      saturated += (v == 0.0 || v == 1.0) ? 1 : 0;
    }
    CHECK(saturated > 0);
    CHECK(r.state.in_box());
  }

  TEST_CASE("residual does not grow when the box widens") {
    const KinematicsModel& m = reference_model();
    std::mt19937_64 rng(7);
    const ActuatorState u0 = random_state(m, rng, 0.0, 1.0);
    const Eigen::VectorXd neutral = m.rig().mesh.positions;
    const Eigen::VectorXd target = neutral + 1.5 * (m.forward(u0).positions - neutral);
    double prev = INFINITY;
    for (double upper : {0.25, 0.5, 0.75, 1.0}) {
      ProjectionSettings s;
      s.upper = upper;
      const double res = m.solve(target, s).residual;
      CHECK(res <= prev * (1.0 + 1e-12));
      prev = res;
    }
  }

  TEST_CASE("warm start reaches the same optimum") {
    const KinematicsModel& m = reference_model();
    std::mt19937_64 rng(8);
    const ActuatorState a = random_state(m, rng, 0.1, 0.9), b = random_state(m, rng, 0.1, 0.9);
    const IkResult cold = m.solve(m.forward(b).positions);
    const IkResult warm = m.solve(m.forward(b).positions, {}, &a);
    CHECK((cold.state.u - warm.state.u).cwiseAbs().maxCoeff() < 1e-6);
  }

  TEST_CASE("all-zero reference yields zero medians") {
    MotionSequence zero;
    zero.frames.assign(5, BlendCoefficients::zeros(51));
    const TrackingReport r = evaluate_tracking(reference_model(), zero);
    REQUIRE(r.regions.size() == 6);
    for (const auto& [name, s] : r.regions) {
      CHECK(s.median_mm == 0.0);
      CHECK(s.q1_mm == 0.0);
      CHECK(s.q3_mm == 0.0);
      CHECK(s.frames == 5);
    }
  }

  TEST_CASE("report schema carries the six regions") {
    MotionSequence m;
    std::mt19937_64 rng(9);
    for (int f = 0; f < 6; ++f) m.frames.push_back(BlendCoefficients(fixtures::random_theta(51, rng, 0.0, 0.6)));
    const TrackingReport r = evaluate_tracking(reference_model(), m);
    const auto j = nlohmann::json::parse(r.to_json());
    for (const char* region : {"eye", "brow", "nose", "cheek", "mouth", "jaw"}) {
      REQUIRE(j.contains(region));
      for (const char* key : {"median_mm", "q1_mm", "q3_mm", "frames"}) CHECK(j[region].contains(key));
      CHECK(j[region]["frames"] == 6);
      const RegionStats* s = r.find(region);
      REQUIRE(s != nullptr);
      CHECK(s->q1_mm <= s->median_mm);
      CHECK(s->median_mm <= s->q3_mm);
    }
    CHECK(j.size() == 6);
  }

  TEST_CASE("tracking is deterministic and independent of worker count") {
    MotionSequence m;
    std::mt19937_64 rng(10);
    for (int f = 0; f < 9; ++f) m.frames.push_back(BlendCoefficients(fixtures::random_theta(51, rng, 0.0, 0.7)));
    const TrackingReport a = evaluate_tracking(reference_model(), m, {}, 1);
    const TrackingReport b = evaluate_tracking(reference_model(), m, {}, 1);
    const TrackingReport c = evaluate_tracking(reference_model(), m, {}, 4);
    CHECK(a.to_json() == b.to_json());
    CHECK(a.to_json() == c.to_json());
    CHECK(a.frame_errors == c.frame_errors);
  }

  TEST_CASE("toy rig medians match a grid-search IK") {
    const fixtures::ToyRig toy = fixtures::toy_rig();
    const KinematicsModel model(toy.config, toy.rig, {}, false);
    MotionSequence ref;
    std::mt19937_64 rng(11);
    for (int f = 0; f < 15; ++f) ref.frames.push_back(BlendCoefficients(fixtures::random_theta(2, rng)));
    const TrackingReport report = evaluate_tracking(model, ref);

    std::array<std::vector<double>, 6> errors;
    for (const auto& frame : ref.frames) {
      const Eigen::VectorXd target = apply_skinning(toy.rig, frame).positions;
      const std::function<double(const std::array<double, 2>&)> f = [&](const std::array<double, 2>& u) {
        return (fixtures::toy_forward(toy, u) - target).squaredNorm();
      };
      const auto u = oracle::refine_grid_search<2>(f, oracle::grid_search<2>(f, 20), 0.005, 5e-8);
      const Eigen::VectorXd achieved = fixtures::toy_forward(toy, u);
      for (std::size_t r = 0; r < 6; ++r) {
        double sum = 0.0;
        for (std::uint32_t v : {2 * static_cast<std::uint32_t>(r), 2 * static_cast<std::uint32_t>(r) + 1}) {
          sum += (achieved.segment<3>(3 * v) - target.segment<3>(3 * v)).norm();
        }
        errors[r].push_back(sum / 2.0);
      }
    }
    for (std::size_t r = 0; r < 6; ++r) {
      std::sort(errors[r].begin(), errors[r].end());
      const double median = errors[r][7];
      CHECK(std::abs(report.regions[r].second.median_mm - median) < 1e-3);
    }
  }

  TEST_CASE("missing landmark groups are reported") {
    fixtures::ToyRig toy = fixtures::toy_rig();
    toy.rig.landmark_groups.pop_back();
    const KinematicsModel model(toy.config, toy.rig, {}, false);
    MotionSequence m;
    m.frames.assign(2, BlendCoefficients::zeros(2));
    CHECK_THROWS(evaluate_tracking(model, m));
  }

  TEST_CASE("quantiles interpolate linearly") {
    CHECK(quantile({3.0, 1.0, 2.0, 4.0}, 0.5) == 2.5);
    CHECK(quantile({3.0, 1.0, 2.0, 4.0}, 0.25) == 1.75);
    CHECK(quantile({5.0}, 0.75) == 5.0);
  }

  TEST_CASE("histograms are written per region") {
    MotionSequence m;
    std::mt19937_64 rng(12);
    for (int f = 0; f < 8; ++f) m.frames.push_back(BlendCoefficients(fixtures::random_theta(51, rng, 0.0, 0.5)));
    const TrackingReport r = evaluate_tracking(reference_model(), m);
    const auto dir = std::filesystem::temp_directory_path() / "roboface_hist_test";
    std::filesystem::remove_all(dir);
    write_histograms(r, dir, 5);
    for (const char* region : {"eye", "brow", "nose", "cheek", "mouth", "jaw"}) {
      std::ifstream in(dir / (std::string(region) + ".csv"));
      REQUIRE(in.good());
      std::string line;
      int rows = 0;
      std::size_t total = 0;
      std::getline(in, line);
      CHECK(line == "bin_lo_mm,bin_hi_mm,count");
      while (std::getline(in, line)) {
        ++rows;
        total += std::stoul(line.substr(line.rfind(',') + 1));
      }
      CHECK(rows == 5);
      CHECK(total == 8);
    }
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("config JSON round trip") {
    const RigConfig& c = fixtures::reference().config;
    const std::string text = rig_config_to_json(c);
    const auto j = nlohmann::json::parse(text);
    CHECK(j.contains("control_points"));
    CHECK(j.contains("actuator_channels"));
    CHECK(j.contains("skinning_weights"));
    const RigConfig back = rig_config_from_json(text);
    REQUIRE(back.control_points.size() == 21);
    REQUIRE(back.channels.size() == 31);
    CHECK(back.skinning.size() == c.skinning.size());
    CHECK(back.channels[24].name == c.channels[24].name);
    CHECK(back.channels[24].gains[0].value == c.channels[24].gains[0].value);
    CHECK(back.control_points[20].pivot == c.control_points[20].pivot);
    CHECK(back.control_points[3].bounds[1].max == c.control_points[3].bounds[1].max);
    CHECK(rig_config_to_json(back) == text);
  }

  TEST_CASE("config validation catches violations") {
    const RigConfig& good = fixtures::reference().config;
    CHECK(validate_config(good, 4792).empty());

    RigConfig bad = good;
    bad.control_points[0].bounds[0] = {1.0, -1.0};
    CHECK_FALSE(validate_config(bad, 4792).empty());

    bad = good;
    bad.channels[28].gains.push_back({0, Dof::Tx, 0.1});
    CHECK_FALSE(validate_config(bad, 4792).empty());

    bad = good;
    bad.control_points.pop_back();
    CHECK_FALSE(validate_config(bad, 4792).empty());

    bad = good;
    bad.channels.pop_back();
    CHECK_FALSE(validate_config(bad, 4792).empty());

    bad = good;
    bad.skinning.push_back({bad.skinning[0].vertex, 20, 1.0});
    CHECK_FALSE(validate_config(bad, 4792).empty());

    bad = good;
    bad.skinning.erase(std::remove_if(bad.skinning.begin(), bad.skinning.end(),
                                      [](const SkinWeight& w) { return w.control_point == 11; }),
                       bad.skinning.end());
    CHECK_FALSE(validate_config(bad, 4792).empty());

    bad = good;
    bad.channels[0].pulse_at_zero_us = 0.0;
    CHECK_FALSE(validate_config(bad, 4792).empty());
  }
}

TEST_SUITE("reference_rig") {
  TEST_CASE("topology counts") {
    const ReferenceRig& ref = fixtures::reference();
    CHECK(ref.face.rig.vertex_count() == 4792);
    CHECK(ref.face.rig.blendshape_count() == 51);
    CHECK(ref.config.control_points.size() == 21);
    CHECK(ref.config.channels.size() == 31);
    CHECK(validate_rig(ref.face.rig).empty());
    CHECK(validate_config(ref.config, 4792).empty());

    std::map<ControlRegion, int> per_region;
    for (const auto& cp : ref.config.control_points) per_region[cp.region]++;
    CHECK(per_region[ControlRegion::Brow] == 4);
    CHECK(per_region[ControlRegion::Eyelid] == 4);
    CHECK(per_region[ControlRegion::Eyeball] == 2);
    CHECK(per_region[ControlRegion::Nose] == 2);
    CHECK(per_region[ControlRegion::Cheek] == 2);
    CHECK(per_region[ControlRegion::Mouth] == 6);
    CHECK(per_region[ControlRegion::Jaw] == 1);

    std::map<ChannelGroup, int> per_group;
    for (const auto& ch : ref.config.channels) per_group[ch.group]++;
    CHECK(per_group[ChannelGroup::Facial] == 24);
    CHECK(per_group[ChannelGroup::Jaw] == 4);
    CHECK(per_group[ChannelGroup::Neck] == 3);
  }

  TEST_CASE("landmark groups and mouth mask") {
    const LbsRig& rig = fixtures::reference().face.rig;
    for (auto r : all_regions()) {
      const LandmarkGroup* g = rig.find_group(region_name(r));
      REQUIRE(g != nullptr);
      CHECK_FALSE(g->indices.empty());
    }
    CHECK_FALSE(rig.mouth_mask.empty());
  }

  TEST_CASE("blendshape energy concentrates in its own region") {
    for (const ProceduralFace* face : {&fixtures::reference().face, &fixtures::human()}) {
      const LbsRig& rig = face->rig;
      for (std::size_t b = 0; b < rig.blendshape_count(); ++b) {
        const Region region = blendshape_region(rig.basis.names[b]);
        const auto& mask = face->region_masks[static_cast<std::size_t>(region)];
        const Eigen::VectorXd& field = rig.basis.displacements[b];
        double inside = 0.0;
        for (auto v : mask) inside += field.segment<3>(3 * static_cast<Eigen::Index>(v)).squaredNorm();
        const double total = field.squaredNorm();
        INFO(rig.basis.names[b]);
        REQUIRE(total > 0.0);
        CHECK(inside / total >= 0.8);
      }
    }
  }

  TEST_CASE("blendshape regions follow the name prefixes") {
    CHECK(blendshape_region("eyeBlinkLeft") == Region::Eye);
    CHECK(blendshape_region("browInnerUp") == Region::Brow);
    CHECK(blendshape_region("noseSneerRight") == Region::Nose);
    CHECK(blendshape_region("cheekPuff") == Region::Cheek);
    CHECK(blendshape_region("mouthSmileLeft") == Region::Mouth);
    CHECK(blendshape_region("jawOpen") == Region::Jaw);
  }

  TEST_CASE("construction is deterministic and the seed jitters amplitudes") {
    const ReferenceRig a = build_reference_rig(0);
    CHECK(a.face.rig.mesh.positions == fixtures::reference().face.rig.mesh.positions);
    CHECK(a.face.rig.basis.displacements[5] == fixtures::reference().face.rig.basis.displacements[5]);
    const ReferenceRig b = build_reference_rig(1);
    CHECK(b.face.rig.mesh.positions == a.face.rig.mesh.positions);
    CHECK_FALSE(b.face.rig.basis.displacements[5] == a.face.rig.basis.displacements[5]);
  }

  TEST_CASE("human rig shares the semantics on its own topology") {
    const ProceduralFace& h = fixtures::human();
    CHECK(h.rig.vertex_count() == 2432);
    CHECK(h.rig.blendshape_count() == 51);
    CHECK(validate_rig(h.rig).empty());
    auto a = h.rig.basis.names, b = fixtures::reference().face.rig.basis.names;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CHECK(a == b);
  }
}
