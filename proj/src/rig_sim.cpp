#include "roboface/rig_sim.hpp"

#include "json.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace roboface {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, kDofCount> kDofNames{"tx", "ty", "tz", "rx", "ry", "rz"};
constexpr std::array<std::string_view, 7> kControlRegionNames{"brow",  "eyelid", "eyeball", "nose",
                                                              "cheek", "mouth",  "jaw"};
constexpr std::array<std::string_view, 3> kChannelGroupNames{"facial", "jaw", "neck"};

template <class E, std::size_t N>
E parse_enum(std::string_view name, const std::array<std::string_view, N>& names, const char* what) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == name) return static_cast<E>(i);
  }
  throw std::invalid_argument(std::string("unknown ") + what + " '" + std::string(name) + "'");
}

}  // namespace

std::string_view dof_name(Dof d) { return kDofNames[static_cast<std::size_t>(d)]; }
Dof parse_dof(std::string_view name) { return parse_enum<Dof>(name, kDofNames, "dof"); }

std::string_view control_region_name(ControlRegion r) {
  return kControlRegionNames[static_cast<std::size_t>(r)];
}
ControlRegion parse_control_region(std::string_view name) {
  return parse_enum<ControlRegion>(name, kControlRegionNames, "control region");
}

std::string_view channel_group_name(ChannelGroup g) {
  return kChannelGroupNames[static_cast<std::size_t>(g)];
}
ChannelGroup parse_channel_group(std::string_view name) {
  return parse_enum<ChannelGroup>(name, kChannelGroupNames, "channel group");
}

namespace {

// Per-DOF sums of the positive and negative gains: the image of [0,1]^C.
std::pair<Eigen::VectorXd, Eigen::VectorXd> gain_extent(const RigConfig& config) {
  Eigen::VectorXd pos = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(config.dof_count()));
  Eigen::VectorXd neg = pos;
  for (const auto& ch : config.channels) {
    for (const auto& g : ch.gains) {
      if (g.control_point >= config.control_points.size()) continue;
      const auto i = static_cast<Eigen::Index>(kDofCount * g.control_point + static_cast<int>(g.dof));
      (g.value > 0.0 ? pos : neg)[i] += g.value;
    }
  }
  return {pos, neg};
}

}  // namespace

std::vector<std::string> validate_config(const RigConfig& config, std::size_t vertex_count,
                                         bool reference_topology) {
  std::vector<std::string> issues;
  const std::size_t n = config.control_points.size();

  for (const auto& cp : config.control_points) {
    for (int d = 0; d < kDofCount; ++d) {
      const auto& b = cp.bounds[static_cast<std::size_t>(d)];
      if (!(b.min <= b.max)) {
        issues.push_back("control point '" + cp.id + "' has min > max on " +
                         std::string(kDofNames[static_cast<std::size_t>(d)]));
      }
    }
  }

  for (const auto& ch : config.channels) {
    for (const auto& g : ch.gains) {
      if (g.control_point >= n) {
        issues.push_back("channel '" + ch.name + "' drives unknown control point " +
                         std::to_string(g.control_point));
      }
      if (!std::isfinite(g.value)) issues.push_back("channel '" + ch.name + "' has a non-finite gain");
    }
    if (ch.group == ChannelGroup::Neck && !ch.gains.empty()) {
      issues.push_back("neck channel '" + ch.name + "' must not drive control points");
    }
    for (double p : {ch.pulse_at_zero_us, ch.pulse_at_one_us}) {
      if (!(p > 0.0 && p <= 65535.0)) {
        issues.push_back("channel '" + ch.name + "' has a pulse width outside (0, 65535] us");
      }
    }
    if (!(ch.rest >= 0.0 && ch.rest <= 1.0)) {
      issues.push_back("channel '" + ch.name + "' has a rest value outside [0, 1]");
    }
  }

  const auto [pos, neg] = gain_extent(config);
  for (std::size_t c = 0; c < n; ++c) {
    const auto& cp = config.control_points[c];
    for (int d = 0; d < kDofCount; ++d) {
      const auto i = static_cast<Eigen::Index>(kDofCount * c + static_cast<std::size_t>(d));
      const auto& b = cp.bounds[static_cast<std::size_t>(d)];
      if (pos[i] > b.max + 1e-12 || neg[i] < b.min - 1e-12) {
        issues.push_back("control point '" + cp.id + "' can leave its " +
                         std::string(kDofNames[static_cast<std::size_t>(d)]) + " bounds");
      }
    }
  }

  std::vector<double> row_sum(vertex_count, 0.0);
  std::vector<std::size_t> influenced(n, 0);
  for (const auto& w : config.skinning) {
    if (w.vertex >= vertex_count || w.control_point >= n) {
      issues.push_back("skinning weight (" + std::to_string(w.vertex) + ", " +
                       std::to_string(w.control_point) + ") is out of range");
      continue;
    }
    if (!(w.weight >= 0.0)) {
      issues.push_back("skinning weight on vertex " + std::to_string(w.vertex) + " is negative");
    }
    row_sum[w.vertex] += w.weight;
    if (w.weight > 0.0) ++influenced[w.control_point];
  }
  for (std::size_t v = 0; v < vertex_count; ++v) {
    if (row_sum[v] > 1.0 + 1e-9) {
      issues.push_back("skinning weights of vertex " + std::to_string(v) + " sum above 1");
    }
  }
  for (std::size_t c = 0; c < n; ++c) {
    if (influenced[c] == 0) {
      issues.push_back("control point '" + config.control_points[c].id + "' influences no vertex");
    }
  }

  if (reference_topology) {
    if (n != kReferenceControlPoints) {
      issues.push_back("expected 21 control points, found " + std::to_string(n));
    }
    const std::map<ControlRegion, std::size_t> expected{
        {ControlRegion::Brow, 4},  {ControlRegion::Eyelid, 4}, {ControlRegion::Eyeball, 2},
        {ControlRegion::Nose, 2},  {ControlRegion::Cheek, 2},  {ControlRegion::Mouth, 6},
        {ControlRegion::Jaw, 1}};
    for (const auto& [region, count] : expected) {
      const auto found = static_cast<std::size_t>(
          std::count_if(config.control_points.begin(), config.control_points.end(),
                        [r = region](const ControlPoint& cp) { return cp.region == r; }));
      if (found != count) {
        issues.push_back(std::string(control_region_name(region)) + " has " + std::to_string(found) +
                         " control points, expected " + std::to_string(count));
      }
    }
    if (config.channels.size() != kReferenceChannels) {
      issues.push_back("expected 31 actuator channels, found " +
                       std::to_string(config.channels.size()));
    }
    const std::map<ChannelGroup, std::size_t> groups{
        {ChannelGroup::Facial, 24}, {ChannelGroup::Jaw, 4}, {ChannelGroup::Neck, 3}};
    for (const auto& [group, count] : groups) {
      const auto found = static_cast<std::size_t>(
          std::count_if(config.channels.begin(), config.channels.end(),
                        [g = group](const ActuatorChannel& ch) { return ch.group == g; }));
      if (found != count) {
        issues.push_back(std::string(channel_group_name(group)) + " has " + std::to_string(found) +
                         " channels, expected " + std::to_string(count));
      }
    }
  }
  return issues;
}

void fit_bounds_to_gains(RigConfig& config, double margin) {
  const auto [pos, neg] = gain_extent(config);
  for (std::size_t c = 0; c < config.control_points.size(); ++c) {
    for (int d = 0; d < kDofCount; ++d) {
      const auto i = static_cast<Eigen::Index>(kDofCount * c + static_cast<std::size_t>(d));
      auto& b = config.control_points[c].bounds[static_cast<std::size_t>(d)];
      b.min = std::min(0.0, neg[i]) * (1.0 + margin);
      b.max = std::max(0.0, pos[i]) * (1.0 + margin);
    }
  }
}

namespace {

json vec3(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

Eigen::Vector3d read_vec3(const json& j) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

std::string rig_config_to_json(const RigConfig& config) {
  json root;
  root["control_points"] = json::array();
  for (const auto& cp : config.control_points) {
    json bounds = json::object();
    for (int d = 0; d < kDofCount; ++d) {
      const auto& b = cp.bounds[static_cast<std::size_t>(d)];
      bounds[std::string(kDofNames[static_cast<std::size_t>(d)])] = json::array({b.min, b.max});
    }
    root["control_points"].push_back({{"id", cp.id},
                                      {"region", control_region_name(cp.region)},
                                      {"position", vec3(cp.position)},
                                      {"pivot", vec3(cp.pivot)},
                                      {"orientation", vec3(cp.orientation)},
                                      {"bounds", bounds}});
  }
  root["actuator_channels"] = json::array();
  for (const auto& ch : config.channels) {
    json gains = json::array();
    for (const auto& g : ch.gains) {
      gains.push_back({{"control_point", g.control_point}, {"dof", dof_name(g.dof)}, {"value", g.value}});
    }
    root["actuator_channels"].push_back({{"name", ch.name},
                                         {"group", channel_group_name(ch.group)},
                                         {"pulse_at_zero_us", ch.pulse_at_zero_us},
                                         {"pulse_at_one_us", ch.pulse_at_one_us},
                                         {"rest", ch.rest},
                                         {"gains", gains}});
  }
  json weights = json::array();
  for (const auto& w : config.skinning) weights.push_back(json::array({w.vertex, w.control_point, w.weight}));
  root["skinning_weights"] = std::move(weights);
  return root.dump(1);
}

RigConfig rig_config_from_json(const std::string& text) {
  const json root = json::parse(text);
  RigConfig config;
  for (const auto& j : root.at("control_points")) {
    ControlPoint cp;
    cp.id = j.at("id").get<std::string>();
    cp.region = parse_control_region(j.at("region").get<std::string>());
    cp.position = read_vec3(j.at("position"));
    cp.pivot = j.contains("pivot") ? read_vec3(j.at("pivot")) : cp.position;
    if (j.contains("orientation")) cp.orientation = read_vec3(j.at("orientation"));
    const auto& bounds = j.at("bounds");
    for (int d = 0; d < kDofCount; ++d) {
      const auto& b = bounds.at(std::string(kDofNames[static_cast<std::size_t>(d)]));
      cp.bounds[static_cast<std::size_t>(d)] = {b.at(0).get<double>(), b.at(1).get<double>()};
    }
    config.control_points.push_back(std::move(cp));
  }
  for (const auto& j : root.at("actuator_channels")) {
    ActuatorChannel ch;
    ch.name = j.at("name").get<std::string>();
    ch.group = parse_channel_group(j.at("group").get<std::string>());
    ch.pulse_at_zero_us = j.at("pulse_at_zero_us").get<double>();
    ch.pulse_at_one_us = j.at("pulse_at_one_us").get<double>();
    ch.rest = j.value("rest", 0.0);
    for (const auto& g : j.at("gains")) {
      ch.gains.push_back({g.at("control_point").get<std::uint32_t>(),
                          parse_dof(g.at("dof").get<std::string>()), g.at("value").get<double>()});
    }
    config.channels.push_back(std::move(ch));
  }
  for (const auto& w : root.at("skinning_weights")) {
    config.skinning.push_back({w.at(0).get<std::uint32_t>(), w.at(1).get<std::uint32_t>(),
                               w.at(2).get<double>()});
  }
  return config;
}

void save_rig_config(const RigConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << rig_config_to_json(config) << '\n';
}

RigConfig load_rig_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return rig_config_from_json(buffer.str());
}

bool ActuatorState::in_box() const {
  return ((u.array() >= 0.0) && (u.array() <= 1.0)).all();
}

KinematicsModel::KinematicsModel(RigConfig config, const LbsRig& rig,
                                 std::vector<std::uint32_t> eval_vertices, bool reference_topology)
    : config_(std::move(config)),
      rig_(&rig),
      eval_vertices_(std::move(eval_vertices)),
      solver_(Eigen::MatrixXd(0, 0)) {
  if (auto issues = validate_config(config_, rig.vertex_count(), reference_topology); !issues.empty()) {
    throw std::invalid_argument("invalid rig config: " + issues.front());
  }
  if (eval_vertices_.empty()) eval_vertices_ = rig.landmark_vertices();
  if (eval_vertices_.empty()) throw std::invalid_argument("no evaluation vertices for IK");
  for (auto v : eval_vertices_) {
    if (v >= rig.vertex_count()) throw std::out_of_range("evaluation vertex out of range");
  }

  const auto dof = static_cast<Eigen::Index>(config_.dof_count());
  const auto channels = static_cast<Eigen::Index>(config_.channel_count());
  gains_ = Eigen::MatrixXd::Zero(dof, channels);
  for (Eigen::Index c = 0; c < channels; ++c) {
    const auto& ch = config_.channels[static_cast<std::size_t>(c)];
    for (const auto& g : ch.gains) {
      gains_(static_cast<Eigen::Index>(kDofCount * g.control_point + static_cast<int>(g.dof)), c) += g.value;
    }
    (ch.group == ChannelGroup::Neck ? neck_channels_ : ik_channels_).push_back(static_cast<std::size_t>(c));
  }

  weights_by_vertex_.assign(rig.vertex_count(), {});
  for (const auto& w : config_.skinning) {
    if (w.weight > 0.0) weights_by_vertex_[w.vertex].emplace_back(w.control_point, w.weight);
  }

  eval_neutral_.resize(3 * static_cast<Eigen::Index>(eval_vertices_.size()));
  for (std::size_t i = 0; i < eval_vertices_.size(); ++i) {
    eval_neutral_.segment<3>(3 * static_cast<Eigen::Index>(i)) = rig.mesh.vertex(eval_vertices_[i]);
  }
  eval_jacobian_.resize(eval_neutral_.size(), static_cast<Eigen::Index>(ik_channels_.size()));
  for (std::size_t k = 0; k < ik_channels_.size(); ++k) {
    eval_jacobian_.col(static_cast<Eigen::Index>(k)) =
        displace(gains_.col(static_cast<Eigen::Index>(ik_channels_[k])), eval_vertices_);
  }
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(eval_jacobian_.cols(), eval_jacobian_.cols());
  gram.selfadjointView<Eigen::Lower>().rankUpdate(eval_jacobian_.transpose());
  solver_ = BoxLeastSquares(Eigen::MatrixXd(gram.selfadjointView<Eigen::Lower>()));
}

ActuatorState KinematicsModel::rest_state() const {
  ActuatorState s{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(config_.channel_count()))};
  for (std::size_t c = 0; c < config_.channels.size(); ++c) {
    s.u[static_cast<Eigen::Index>(c)] = config_.channels[c].rest;
  }
  return s;
}

Eigen::VectorXd KinematicsModel::dofs(const ActuatorState& u) const {
  if (u.u.size() != static_cast<Eigen::Index>(config_.channel_count())) {
    throw std::invalid_argument("actuator state has " + std::to_string(u.u.size()) +
                                " channels, expected " + std::to_string(config_.channel_count()));
  }
  if (!u.in_box()) throw std::out_of_range("actuator values must lie in [0, 1]");
  Eigen::VectorXd d = gains_ * u.u;
  for (std::size_t c = 0; c < config_.control_points.size(); ++c) {
    for (int k = 0; k < kDofCount; ++k) {
      const auto& b = config_.control_points[c].bounds[static_cast<std::size_t>(k)];
      double& v = d[static_cast<Eigen::Index>(kDofCount * c + static_cast<std::size_t>(k))];
      v = std::clamp(v, b.min, b.max);
    }
  }
  return d;
}

Eigen::VectorXd KinematicsModel::displace(const Eigen::VectorXd& d,
                                          std::span<const std::uint32_t> vertices) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(3 * static_cast<Eigen::Index>(vertices.size()));
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const auto v = vertices[i];
    const Eigen::Vector3d x = rig_->mesh.vertex(v);
    Eigen::Vector3d acc = Eigen::Vector3d::Zero();
    for (const auto& [c, w] : weights_by_vertex_[v]) {
      const auto base = static_cast<Eigen::Index>(kDofCount * c);
      const Eigen::Vector3d t = d.segment<3>(base);
      const Eigen::Vector3d r = d.segment<3>(base + 3);
      acc += w * (t + r.cross(x - config_.control_points[c].pivot));
    }
    out.segment<3>(3 * static_cast<Eigen::Index>(i)) = acc;
  }
  return out;
}

FaceMesh KinematicsModel::forward(const ActuatorState& u) const {
  const Eigen::VectorXd d = dofs(u);
  FaceMesh mesh = rig_->mesh;
  if ((d.array() == 0.0).all()) return mesh;
  std::vector<std::uint32_t> all(rig_->vertex_count());
  for (std::uint32_t v = 0; v < all.size(); ++v) all[v] = v;
  mesh.positions += displace(d, all);
  return mesh;
}

Eigen::VectorXd KinematicsModel::forward_eval(const ActuatorState& u) const {
  const Eigen::VectorXd d = dofs(u);
  if ((d.array() == 0.0).all()) return eval_neutral_;
  return eval_neutral_ + displace(d, eval_vertices_);
}

IkResult KinematicsModel::solve(const Eigen::VectorXd& target, const ProjectionSettings& settings,
                                const ActuatorState* warm_start,
                                const std::optional<Eigen::Vector3d>& neck) const {
  Eigen::VectorXd eval_target;
  if (target.size() == eval_neutral_.size()) {
    eval_target = target;
  } else if (target.size() == rig_->mesh.positions.size()) {
    eval_target.resize(eval_neutral_.size());
    for (std::size_t i = 0; i < eval_vertices_.size(); ++i) {
      eval_target.segment<3>(3 * static_cast<Eigen::Index>(i)) =
          target.segment<3>(3 * static_cast<Eigen::Index>(eval_vertices_[i]));
    }
  } else {
    throw std::invalid_argument("IK target has " + std::to_string(target.size()) +
                                " values; expected the full mesh or the evaluation set");
  }

  const Eigen::VectorXd b = eval_target - eval_neutral_;
  Eigen::VectorXd warm;
  if (warm_start) {
    warm.resize(static_cast<Eigen::Index>(ik_channels_.size()));
    for (std::size_t k = 0; k < ik_channels_.size(); ++k) {
      warm[static_cast<Eigen::Index>(k)] = warm_start->u[static_cast<Eigen::Index>(ik_channels_[k])];
    }
  }
  const BoxSolveResult r =
      solver_.solve(eval_jacobian_.transpose() * b, b.squaredNorm(), settings, warm);

  IkResult out;
  out.state = rest_state();
  for (std::size_t k = 0; k < ik_channels_.size(); ++k) {
    out.state.u[static_cast<Eigen::Index>(ik_channels_[k])] = r.x[static_cast<Eigen::Index>(k)];
  }
  if (neck) {
    for (std::size_t k = 0; k < neck_channels_.size() && k < 3; ++k) {
      out.state.u[static_cast<Eigen::Index>(neck_channels_[k])] =
          std::clamp((*neck)[static_cast<Eigen::Index>(k)], 0.0, 1.0);
    }
  }
  out.residual = (forward_eval(out.state) - eval_target).squaredNorm();
  out.iterations = r.iterations;
  out.converged = r.converged;
  return out;
}

FaceMesh forward_kinematics(const RigConfig& config, const ActuatorState& u, const LbsRig& rig) {
  return KinematicsModel(config, rig).forward(u);
}

IkResult solve_ik(const RigConfig& config, const Eigen::VectorXd& target, const LbsRig& rig,
                  const ProjectionSettings& settings) {
  return KinematicsModel(config, rig).solve(target, settings);
}

const RegionStats* TrackingReport::find(std::string_view region) const {
  for (const auto& [name, stats] : regions) {
    if (name == region) return &stats;
  }
  return nullptr;
}

std::string TrackingReport::to_json() const {
  json root = json::object();
  for (const auto& [name, s] : regions) {
    root[name] = {{"median_mm", s.median_mm}, {"q1_mm", s.q1_mm}, {"q3_mm", s.q3_mm}, {"frames", s.frames}};
  }
  return root.dump(2);
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

TrackingReport evaluate_tracking(const KinematicsModel& model, const MotionSequence& reference,
                                 const ProjectionSettings& settings, unsigned workers) {
  const LbsRig& rig = model.rig();
  std::vector<const LandmarkGroup*> groups;
  for (Region r : all_regions()) {
    const LandmarkGroup* g = rig.find_group(region_name(r));
    if (!g || g->indices.empty()) {
      throw std::invalid_argument("rig has no '" + std::string(region_name(r)) + "' landmark group");
    }
    groups.push_back(g);
  }

  const std::size_t frames = reference.frames.size();
  TrackingReport report;
  report.frame_errors.assign(kRegionCount, std::vector<double>(frames, 0.0));
  std::vector<char> converged(frames, 1);

  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t f = begin; f < end; ++f) {
      const FaceMesh target = apply_skinning(rig, reference.frames[f]);
      const IkResult ik = model.solve(target.positions, settings);
      converged[f] = ik.converged ? 1 : 0;
      const FaceMesh achieved = model.forward(ik.state);
      for (std::size_t r = 0; r < kRegionCount; ++r) {
        double sum = 0.0;
        for (auto v : groups[r]->indices) sum += (achieved.vertex(v) - target.vertex(v)).norm();
        report.frame_errors[r][f] = sum / static_cast<double>(groups[r]->indices.size());
      }
    }
  };
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(frames, 1))));
  if (workers <= 1) {
    run(0, frames);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, frames * w / workers, frames * (w + 1) / workers);
    for (auto& t : pool) t.join();
  }

  report.unconverged_frames = static_cast<std::size_t>(std::count(converged.begin(), converged.end(), 0));
  for (std::size_t r = 0; r < kRegionCount; ++r) {
    RegionStats s;
    s.frames = frames;
    s.median_mm = quantile(report.frame_errors[r], 0.5);
    s.q1_mm = quantile(report.frame_errors[r], 0.25);
    s.q3_mm = quantile(report.frame_errors[r], 0.75);
    report.regions.emplace_back(std::string(region_name(all_regions()[r])), s);
  }
  return report;
}

TrackingReport evaluate_tracking(const RigConfig& config, const MotionSequence& reference,
                                 const LbsRig& rig, const ProjectionSettings& settings) {
  return evaluate_tracking(KinematicsModel(config, rig), reference, settings);
}

void write_histograms(const TrackingReport& report, const std::filesystem::path& dir, int bins) {
  if (bins < 1) throw std::invalid_argument("histogram needs at least one bin");
  std::filesystem::create_directories(dir);
  for (std::size_t r = 0; r < report.regions.size(); ++r) {
    const auto& errors = report.frame_errors[r];
    const double hi = errors.empty() ? 0.0 : *std::max_element(errors.begin(), errors.end());
    const double width = hi > 0.0 ? hi / bins : 1.0;
    std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
    for (double e : errors) {
      auto b = static_cast<std::size_t>(e / width);
      counts[std::min(b, counts.size() - 1)]++;
    }
    std::ofstream out(dir / (report.regions[r].first + ".csv"));
    if (!out) throw std::runtime_error("cannot write histogram for " + report.regions[r].first);
    out << "bin_lo_mm,bin_hi_mm,count\n";
    for (int b = 0; b < bins; ++b) {
      out << b * width << ',' << (b + 1) * width << ',' << counts[static_cast<std::size_t>(b)] << '\n';
    }
  }
}

}  // namespace roboface
