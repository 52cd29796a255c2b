#pragma once

#include "roboface/frontend.hpp"
#include "roboface/motion_net.hpp"
#include "roboface/rig_sim.hpp"
#include "roboface/servo.hpp"
#include "roboface/smoothing.hpp"

#include <condition_variable>
#include <deque>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace roboface {

struct PipelineConfig {
  double tick_hz = 25.0;
  double frame_budget_ms = 40.0;
  FilterSpec filter;
  int style_id = 0;
  ProjectionSettings ik;
  /// Consecutive unconverged IK ticks tolerated before the run aborts.
  int max_unconverged_streak = 25;
  std::string model_path;
  std::string robot_rig_path;
  std::string rig_config_path;
  std::string human_rig_path;

  void validate() const;
  std::string to_json() const;
  /// Missing keys keep their defaults.
  static PipelineConfig from_json(const std::string& text);
  static PipelineConfig load(const std::filesystem::path& path);
};

class PipelineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TickOutput {
  BlendCoefficients raw;       // model output, source rig order
  BlendCoefficients smoothed;  // after the causal filter
  BlendCoefficients robot;     // robot rig order
  ActuatorState state;
  ServoFrame frame;
  double ik_residual = 0.0;
  bool ik_converged = true;
};

/// The per-tick work shared by the offline and streaming runners:
/// window -> eval forward -> filter step -> transfer -> IK (warm) -> frame.
class Orchestrator {
 public:
  Orchestrator(const ModelParams& model, std::vector<std::string> source_names,
               const KinematicsModel& kinematics, const PipelineConfig& config);

  TickOutput tick(const LogitWindow& window);

  const PipelineConfig& config() const { return config_; }
  const KinematicsModel& kinematics() const { return *kinematics_; }
  int window() const { return model_->shape().window; }
  double filter_group_delay_frames() const;
  std::uint16_t next_counter() const { return counter_; }

 private:
  const ModelParams* model_;
  std::vector<std::string> source_names_;
  const KinematicsModel* kinematics_;
  PipelineConfig config_;
  SequenceFilter filter_;
  std::optional<ActuatorState> previous_;
  std::uint16_t counter_ = 0;
  int unconverged_streak_ = 0;
};

struct LatencyStats {
  double mean_ms = 0.0;
  double p50_ms = 0.0;
  double p99_ms = 0.0;
  double max_ms = 0.0;
};

LatencyStats latency_stats(const std::vector<double>& ms);

struct PipelineReport {
  std::size_t frames = 0;
  std::size_t over_budget = 0;
  std::size_t unconverged = 0;
  LatencyStats tick;
  double budget_ms = 40.0;
  double window_lookahead_frames = 0.0;
  double filter_delay_frames = 0.0;
  double total_lookahead_frames = 0.0;
  std::string mode;

  std::string to_json() const;
};

struct PipelineRun {
  PipelineReport report;
  /// Smoothed robot-order coefficients, one frame per tick.
  MotionSequence motion;
  std::vector<double> tick_ms;
};

/// Resamples the whole stream, windows it and ticks once per output frame.
PipelineRun run_offline(Orchestrator& orch, const PhonemeLogitStream& logits, ByteSink& sink);

/// Three threads joined by depth-2 queues: frontend (incremental resampling
/// and windowing), tick, and sink writing.
PipelineRun run_streaming(Orchestrator& orch, const PhonemeLogitStream& logits, ByteSink& sink);

struct BenchReport {
  std::size_t frames = 0;
  double model_fps = 0.0;
  LatencyStats model;
  double tick_fps = 0.0;
  LatencyStats tick;
  double budget_ms = 40.0;

  std::string to_json() const;
};

/// Model forward alone, then the full tick, on seeded random logit windows.
BenchReport bench(Orchestrator& orch, const ModelParams& model, std::size_t frames,
                  std::uint64_t seed);

/// Fixed-capacity blocking queue; close() wakes every waiter.
template <class T>
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t capacity) : capacity_(capacity) {}

  bool push(T value) {
    std::unique_lock lock(mutex_);
    not_full_.wait(lock, [&] { return closed_ || items_.size() < capacity_; });
    if (closed_) return false;
    items_.push_back(std::move(value));
    not_empty_.notify_one();
    return true;
  }

  std::optional<T> pop() {
    std::unique_lock lock(mutex_);
    not_empty_.wait(lock, [&] { return closed_ || !items_.empty(); });
    if (items_.empty()) return std::nullopt;
    T v = std::move(items_.front());
    items_.pop_front();
    not_full_.notify_one();
    return v;
  }

  /// No more pushes; pending items can still be popped.
  void close() {
    std::lock_guard lock(mutex_);
    closed_ = true;
    not_empty_.notify_all();
    not_full_.notify_all();
  }

 private:
  std::size_t capacity_;
  std::deque<T> items_;
  bool closed_ = false;
  std::mutex mutex_;
  std::condition_variable not_empty_, not_full_;
};

}  // namespace roboface
