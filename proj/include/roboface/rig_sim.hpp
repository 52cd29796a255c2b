#pragma once

#include "roboface/box_qp.hpp"
#include "roboface/lbs.hpp"

#include <Eigen/Core>

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace roboface {

/// Degrees of freedom of a control point, in DOF-vector order.
enum class Dof : std::uint8_t { Tx, Ty, Tz, Rx, Ry, Rz };
inline constexpr int kDofCount = 6;
std::string_view dof_name(Dof d);
Dof parse_dof(std::string_view name);

enum class ControlRegion : std::uint8_t { Brow, Eyelid, Eyeball, Nose, Cheek, Mouth, Jaw };
std::string_view control_region_name(ControlRegion r);
ControlRegion parse_control_region(std::string_view name);

struct DofBound {
  double min = 0.0;
  double max = 0.0;
};

struct ControlPoint {
  std::string id;
  ControlRegion region = ControlRegion::Brow;
  /// Site the skinning weights are centred on (mm).
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  /// Centre of rotation for the rotational DOFs (mm).
  Eigen::Vector3d pivot = Eigen::Vector3d::Zero();
  /// Rest orientation (radians, x/y/z); informational.
  Eigen::Vector3d orientation = Eigen::Vector3d::Zero();
  std::array<DofBound, kDofCount> bounds{};
};

enum class ChannelGroup : std::uint8_t { Facial, Jaw, Neck };
std::string_view channel_group_name(ChannelGroup g);
ChannelGroup parse_channel_group(std::string_view name);

struct Gain {
  std::uint32_t control_point = 0;
  Dof dof = Dof::Tx;
  /// DOF displacement at u = 1 (mm or radians).
  double value = 0.0;
};

struct ActuatorChannel {
  std::string name;
  ChannelGroup group = ChannelGroup::Facial;
  std::vector<Gain> gains;
  /// Pulse width at u = 0 and at u = 1; either may be the larger one.
  double pulse_at_zero_us = 1000.0;
  double pulse_at_one_us = 2000.0;
  /// Value used when nothing drives the channel (neck pass-through).
  double rest = 0.0;
};

struct SkinWeight {
  std::uint32_t vertex = 0;
  std::uint32_t control_point = 0;
  double weight = 0.0;
};

/// Robot topology: control points, actuator map and skinning weights.
struct RigConfig {
  std::vector<ControlPoint> control_points;
  std::vector<ActuatorChannel> channels;
  std::vector<SkinWeight> skinning;

  std::size_t channel_count() const { return channels.size(); }
  std::size_t dof_count() const { return kDofCount * control_points.size(); }
};

inline constexpr std::size_t kReferenceControlPoints = 21;
inline constexpr std::size_t kReferenceChannels = 31;

/// Invariant violations. `reference_topology` additionally requires the
/// 21-point / 31-channel layout with its per-region counts.
std::vector<std::string> validate_config(const RigConfig& config, std::size_t vertex_count,
                                         bool reference_topology = true);

/// DOF bounds that contain the image of [0,1]^C, expanded by `margin` (relative).
void fit_bounds_to_gains(RigConfig& config, double margin = 0.1);

std::string rig_config_to_json(const RigConfig& config);
RigConfig rig_config_from_json(const std::string& text);
void save_rig_config(const RigConfig& config, const std::filesystem::path& path);
RigConfig load_rig_config(const std::filesystem::path& path);

/// Normalized actuator command, one value per channel in [0, 1].
struct ActuatorState {
  Eigen::VectorXd u;

  bool in_box() const;
};

struct IkResult {
  ActuatorState state;
  /// Squared position error over the evaluation vertices (mm^2).
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Forward and inverse kinematics of one config on one robot rig.
///
/// FK maps u to DOFs d = G u, clamps d to the bounds, and moves every skinned
/// vertex by sum_c w_vc (t_c + r_c x (x_v - pivot_c)), the small-angle form of
/// a rotation about the pivot. Neck channels carry no gains and are passed
/// through. IK minimizes the squared error on the evaluation vertices over
/// the non-neck channels inside [0, 1].
class KinematicsModel {
 public:
  /// `eval_vertices` defaults to the rig's landmark vertices.
  KinematicsModel(RigConfig config, const LbsRig& rig, std::vector<std::uint32_t> eval_vertices = {},
                  bool reference_topology = true);

  const RigConfig& config() const { return config_; }
  const LbsRig& rig() const { return *rig_; }
  const std::vector<std::uint32_t>& eval_vertices() const { return eval_vertices_; }
  /// Channels solved by IK, in channel order.
  const std::vector<std::size_t>& ik_channels() const { return ik_channels_; }
  /// Gain matrix G (DOFs x channels).
  const Eigen::MatrixXd& gain_matrix() const { return gains_; }
  /// Displacement of the evaluation vertices per IK channel (3L x C_ik).
  const Eigen::MatrixXd& eval_jacobian() const { return eval_jacobian_; }

  ActuatorState rest_state() const;

  /// Clamped DOF vector for `u`.
  Eigen::VectorXd dofs(const ActuatorState& u) const;
  FaceMesh forward(const ActuatorState& u) const;
  /// FK positions of the evaluation vertices only.
  Eigen::VectorXd forward_eval(const ActuatorState& u) const;

  /// `target` is either a full 3U position vector or a 3L vector over the
  /// evaluation vertices. Neck channels are copied from `neck` (or rest).
  IkResult solve(const Eigen::VectorXd& target, const ProjectionSettings& settings = {},
                 const ActuatorState* warm_start = nullptr,
                 const std::optional<Eigen::Vector3d>& neck = std::nullopt) const;

 private:
  Eigen::VectorXd displace(const Eigen::VectorXd& d, std::span<const std::uint32_t> vertices) const;

  RigConfig config_;
  const LbsRig* rig_;
  std::vector<std::uint32_t> eval_vertices_;
  std::vector<std::size_t> ik_channels_;
  std::vector<std::size_t> neck_channels_;
  Eigen::MatrixXd gains_;
  Eigen::MatrixXd eval_jacobian_;
  Eigen::VectorXd eval_neutral_;
  std::vector<std::vector<std::pair<std::uint32_t, double>>> weights_by_vertex_;
  BoxLeastSquares solver_;
};

FaceMesh forward_kinematics(const RigConfig& config, const ActuatorState& u, const LbsRig& rig);
IkResult solve_ik(const RigConfig& config, const Eigen::VectorXd& target, const LbsRig& rig,
                  const ProjectionSettings& settings = {});

struct RegionStats {
  double median_mm = 0.0;
  double q1_mm = 0.0;
  double q3_mm = 0.0;
  std::size_t frames = 0;
};

struct TrackingReport {
  /// Keyed by region name, in all_regions() order.
  std::vector<std::pair<std::string, RegionStats>> regions;
  /// Per region, the per-frame mean landmark error (mm).
  std::vector<std::vector<double>> frame_errors;
  /// Frames whose IK did not converge.
  std::size_t unconverged_frames = 0;

  const RegionStats* find(std::string_view region) const;
  std::string to_json() const;
};

/// Quartiles by linear interpolation between order statistics.
double quantile(std::vector<double> values, double q);

/// Per frame: reference = skinning of theta on the robot rig, u = IK of the
/// reference, achieved = FK(u); the per-frame error of a region is the mean
/// Euclidean distance over its landmark group. Every frame is solved from a
/// cold start, so the report does not depend on `workers`.
TrackingReport evaluate_tracking(const KinematicsModel& model, const MotionSequence& reference,
                                 const ProjectionSettings& settings = {}, unsigned workers = 1);
TrackingReport evaluate_tracking(const RigConfig& config, const MotionSequence& reference,
                                 const LbsRig& rig, const ProjectionSettings& settings = {});

/// One CSV per region ("<region>.csv": bin_lo_mm,bin_hi_mm,count).
void write_histograms(const TrackingReport& report, const std::filesystem::path& dir, int bins = 20);

}  // namespace roboface
