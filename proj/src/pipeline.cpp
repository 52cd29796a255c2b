#include "roboface/pipeline.hpp"

#include "roboface/random.hpp"
#include "roboface/retarget.hpp"

#include "json.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

namespace roboface {

using nlohmann::json;

void PipelineConfig::validate() const {
  if (!(tick_hz > 0.0)) throw std::invalid_argument("tick rate must be positive");
  if (std::abs(frame_budget_ms - 1000.0 / tick_hz) > 1e-9 * frame_budget_ms) {
    throw std::invalid_argument("frame budget must equal 1000 / tick_hz ms");
  }
  filter.validate();
  if (std::abs(filter.sample_hz - tick_hz) > 1e-9 * tick_hz) {
    throw std::invalid_argument("filter sample rate must equal the tick rate");
  }
  ik.validate();
  if (max_unconverged_streak < 1) throw std::invalid_argument("unconverged streak limit must be >= 1");
}

std::string PipelineConfig::to_json() const {
  json j{{"tick_hz", tick_hz},
         {"frame_budget_ms", frame_budget_ms},
         {"filter", {{"order", filter.order}, {"cutoff_hz", filter.cutoff_hz}, {"sample_hz", filter.sample_hz}}},
         {"style_id", style_id},
         {"ik", {{"max_iterations", ik.max_iterations}, {"tolerance", ik.tolerance}}},
         {"max_unconverged_streak", max_unconverged_streak},
         {"model", model_path},
         {"robot_rig", robot_rig_path},
         {"rig_config", rig_config_path},
         {"human_rig", human_rig_path}};
  return j.dump(2);
}

PipelineConfig PipelineConfig::from_json(const std::string& text) {
  const json j = json::parse(text);
  PipelineConfig c;
  c.tick_hz = j.value("tick_hz", c.tick_hz);
  c.frame_budget_ms = j.value("frame_budget_ms", 1000.0 / c.tick_hz);
  c.filter.sample_hz = c.tick_hz;
  if (j.contains("filter")) {
    const auto& f = j.at("filter");
    c.filter.order = f.value("order", c.filter.order);
    c.filter.cutoff_hz = f.value("cutoff_hz", c.filter.cutoff_hz);
    c.filter.sample_hz = f.value("sample_hz", c.filter.sample_hz);
  }
  c.style_id = j.value("style_id", c.style_id);
  if (j.contains("ik")) {
    c.ik.max_iterations = j.at("ik").value("max_iterations", c.ik.max_iterations);
    c.ik.tolerance = j.at("ik").value("tolerance", c.ik.tolerance);
  }
  c.max_unconverged_streak = j.value("max_unconverged_streak", c.max_unconverged_streak);
  c.model_path = j.value("model", std::string());
  c.robot_rig_path = j.value("robot_rig", std::string());
  c.rig_config_path = j.value("rig_config", std::string());
  c.human_rig_path = j.value("human_rig", std::string());
  return c;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_json(buffer.str());
}

Orchestrator::Orchestrator(const ModelParams& model, std::vector<std::string> source_names,
                           const KinematicsModel& kinematics, const PipelineConfig& config)
    : model_(&model),
      source_names_(std::move(source_names)),
      kinematics_(&kinematics),
      config_(config),
      filter_(design(config.filter), source_names_.size()) {
  config_.validate();
  if (static_cast<std::size_t>(model.shape().blendshapes) != source_names_.size()) {
    throw PipelineError("model emits " + std::to_string(model.shape().blendshapes) +
                        " coefficients but the source rig names " +
                        std::to_string(source_names_.size()));
  }
  if (source_names_.size() != kinematics.rig().blendshape_count()) {
    throw PipelineError("model blendshape count " + std::to_string(source_names_.size()) +
                        " does not match the robot rig's " +
                        std::to_string(kinematics.rig().blendshape_count()));
  }
  // Fails early when the name sets differ.
  (void)transfer_coefficients(BlendCoefficients::zeros(source_names_.size()), source_names_,
                              kinematics.rig().basis.names);
  if (config_.style_id < 0 || config_.style_id >= model.shape().styles) {
    throw PipelineError("style id " + std::to_string(config_.style_id) + " is not in the model");
  }
}

double Orchestrator::filter_group_delay_frames() const { return filter_.cascade().group_delay(0.0); }

TickOutput Orchestrator::tick(const LogitWindow& window) {
  TickOutput out;
  out.raw = forward(*model_, window, config_.style_id, Mode::Eval);
  out.smoothed = filter_.step(out.raw);
  out.robot = transfer_coefficients(out.smoothed, source_names_, kinematics_->rig().basis.names);
  const Eigen::VectorXd target =
      skin_vertices(kinematics_->rig(), out.robot, kinematics_->eval_vertices());
  const IkResult ik = kinematics_->solve(target, config_.ik, previous_ ? &*previous_ : nullptr);
  out.state = ik.state;
  out.ik_residual = ik.residual;
  out.ik_converged = ik.converged;
  previous_ = ik.state;
  unconverged_streak_ = ik.converged ? 0 : unconverged_streak_ + 1;
  if (unconverged_streak_ > config_.max_unconverged_streak) {
    std::ostringstream msg;
    msg << "IK failed to converge on " << unconverged_streak_ << " consecutive ticks (frame "
        << counter_ << ", residual " << ik.residual << " mm^2, " << ik.iterations << " iterations)";
    throw PipelineError(msg.str());
  }
  out.frame = make_frame(kinematics_->config(), out.state, counter_);
  ++counter_;
  return out;
}

LatencyStats latency_stats(const std::vector<double>& ms) {
  LatencyStats s;
  if (ms.empty()) return s;
  double sum = 0.0;
  for (double v : ms) sum += v;
  s.mean_ms = sum / static_cast<double>(ms.size());
  s.p50_ms = quantile(ms, 0.50);
  s.p99_ms = quantile(ms, 0.99);
  s.max_ms = quantile(ms, 1.0);
  return s;
}

namespace {

json latency_json(const LatencyStats& s) {
  return {{"mean_ms", s.mean_ms}, {"p50_ms", s.p50_ms}, {"p99_ms", s.p99_ms}, {"max_ms", s.max_ms}};
}

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

PipelineRun start_run(const Orchestrator& orch, const char* mode) {
  PipelineRun run;
  run.motion.fps = orch.config().tick_hz;
  run.report.mode = mode;
  run.report.budget_ms = orch.config().frame_budget_ms;
  run.report.window_lookahead_frames = orch.window() / 2;
  run.report.filter_delay_frames = orch.filter_group_delay_frames();
  run.report.total_lookahead_frames = run.report.window_lookahead_frames + run.report.filter_delay_frames;
  return run;
}

void record(PipelineRun& run, const TickOutput& out, double ms) {
  run.motion.frames.push_back(out.robot);
  run.tick_ms.push_back(ms);
  ++run.report.frames;
  if (ms > run.report.budget_ms) ++run.report.over_budget;
  if (!out.ik_converged) ++run.report.unconverged;
}

void finish_run(PipelineRun& run) { run.report.tick = latency_stats(run.tick_ms); }

}  // namespace

std::string PipelineReport::to_json() const {
  json j{{"mode", mode},
         {"frames", frames},
         {"over_budget", over_budget},
         {"unconverged_ik", unconverged},
         {"budget_ms", budget_ms},
         {"tick", latency_json(tick)},
         {"lookahead_frames",
          {{"window", window_lookahead_frames},
           {"filter_group_delay", filter_delay_frames},
           {"total", total_lookahead_frames}}}};
  return j.dump(2);
}

PipelineRun run_offline(Orchestrator& orch, const PhonemeLogitStream& logits, ByteSink& sink) {
  PipelineRun run = start_run(orch, "offline");
  const auto windows = make_windows(resample(logits, orch.config().tick_hz), orch.window());
  for (const auto& w : windows) {
    const auto t0 = Clock::now();
    const TickOutput out = orch.tick(w);
    const double ms = elapsed_ms(t0);
    record(run, out, ms);
    sink.write(encode_frame(out.frame));
  }
  sink.flush();
  finish_run(run);
  return run;
}

PipelineRun run_streaming(Orchestrator& orch, const PhonemeLogitStream& logits, ByteSink& sink) {
  logits.validate();
  PipelineRun run = start_run(orch, "streaming");
  BoundedQueue<LogitWindow> windows(2);
  BoundedQueue<std::vector<std::uint8_t>> bytes(2);
  std::exception_ptr front_error, tick_error, sink_error;

  std::thread frontend([&] {
    try {
      StreamingResampler resampler(logits.rate_hz, orch.config().tick_hz);
      StreamingWindower windower(orch.window());
      const StreamingWindower::Sink emit = [&](const LogitWindow& w) {
        if (!windows.push(w)) throw PipelineError("pipeline stopped");
      };
      const StreamingResampler::Sink to_windower = [&](const Eigen::VectorXd& f) { windower.push(f, emit); };
      for (const auto& frame : logits.frames) resampler.push(frame, to_windower);
      resampler.finish(to_windower);
      windower.finish(emit);
    } catch (...) {
      front_error = std::current_exception();
    }
    windows.close();
  });

  std::thread writer([&] {
    try {
      while (auto b = bytes.pop()) sink.write(*b);
      sink.flush();
    } catch (...) {
      sink_error = std::current_exception();
      bytes.close();
      windows.close();
    }
  });

  try {
    while (auto w = windows.pop()) {
      const auto t0 = Clock::now();
      const TickOutput out = orch.tick(*w);
      const double ms = elapsed_ms(t0);
      record(run, out, ms);
      if (!bytes.push(encode_frame(out.frame))) break;
    }
  } catch (...) {
    tick_error = std::current_exception();
    windows.close();
  }
  bytes.close();
  frontend.join();
  writer.join();

  if (tick_error) std::rethrow_exception(tick_error);
  if (sink_error) std::rethrow_exception(sink_error);
  if (front_error) std::rethrow_exception(front_error);
  finish_run(run);
  return run;
}

std::string BenchReport::to_json() const {
  json j{{"frames", frames},
         {"budget_ms", budget_ms},
         {"model_forward", {{"fps", model_fps}, {"latency", latency_json(model)}}},
         {"full_tick", {{"fps", tick_fps}, {"latency", latency_json(tick)}}}};
  return j.dump(2);
}

BenchReport bench(Orchestrator& orch, const ModelParams& model, std::size_t frames, std::uint64_t seed) {
  if (frames == 0) throw std::invalid_argument("bench needs at least one frame");
  std::mt19937_64 rng(seed);
  std::vector<LogitWindow> inputs(frames);
  for (auto& w : inputs) {
    w.frames.resize(model.shape().classes, model.shape().window);
    for (Eigen::Index i = 0; i < w.frames.size(); ++i) w.frames.data()[i] = standard_normal(rng);
  }

  BenchReport r;
  r.frames = frames;
  r.budget_ms = orch.config().frame_budget_ms;
  std::vector<double> model_ms, tick_ms;
  model_ms.reserve(frames);
  tick_ms.reserve(frames);

  const int style = orch.config().style_id;
  double checksum = 0.0;
  const auto m0 = Clock::now();
  for (const auto& w : inputs) {
    const auto t0 = Clock::now();
    checksum += forward(model, w, style).values[0];
    model_ms.push_back(elapsed_ms(t0));
  }
  const double model_total = elapsed_ms(m0);

  const auto k0 = Clock::now();
  for (const auto& w : inputs) {
    const auto t0 = Clock::now();
    checksum += orch.tick(w).frame.pulses.front();
    tick_ms.push_back(elapsed_ms(t0));
  }
  const double tick_total = elapsed_ms(k0);
  if (!std::isfinite(checksum)) throw PipelineError("non-finite output during bench");

  r.model = latency_stats(model_ms);
  r.tick = latency_stats(tick_ms);
  r.model_fps = 1000.0 * static_cast<double>(frames) / model_total;
  r.tick_fps = 1000.0 * static_cast<double>(frames) / tick_total;
  return r;
}

}  // namespace roboface
