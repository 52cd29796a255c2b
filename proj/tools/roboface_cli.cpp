#include "roboface/dataset.hpp"
#include "roboface/formats.hpp"
#include "roboface/frontend.hpp"
#include "roboface/motion_net.hpp"
#include "roboface/obj_io.hpp"
#include "roboface/pipeline.hpp"
#include "roboface/reference_rig.hpp"
#include "roboface/retarget.hpp"
#include "roboface/rig_sim.hpp"
#include "roboface/servo.hpp"
#include "roboface/smoothing.hpp"
#include "roboface/trainer.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

using namespace roboface;

namespace {

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text << "\n";
}

void check_rig(const LbsRig& rig, const std::string& path) {
  const auto issues = validate_rig(rig);
  if (!issues.empty()) throw std::runtime_error(path + ": " + issues.front());
}

struct MakeRigArgs {
  std::string out = "robot.lbsrig";
  std::string config = "rig.json";
  std::string human;
  std::uint64_t seed = 0;
};

void run_make_rig(const MakeRigArgs& a) {
  const ReferenceRig ref = build_reference_rig(a.seed);
  save_rig(ref.face.rig, a.out);
  save_rig_config(ref.config, a.config);
  std::printf("robot rig: %zu vertices, %zu blendshapes -> %s\n", ref.face.rig.vertex_count(),
              ref.face.rig.blendshape_count(), a.out.c_str());
  std::printf("rig config: %zu control points, %zu channels -> %s\n", ref.config.control_points.size(),
              ref.config.channel_count(), a.config.c_str());
  if (!a.human.empty()) {
    const ProceduralFace human = build_human_rig(a.seed);
    save_rig(human.rig, a.human);
    std::printf("human rig: %zu vertices -> %s\n", human.rig.vertex_count(), a.human.c_str());
  }
}

struct MakeDataArgs {
  std::string rig;
  std::string out;
  CorpusConfig corpus;
};

void run_make_data(const MakeDataArgs& a) {
  const LbsRig rig = load_rig(a.rig);
  check_rig(rig, a.rig);
  const Corpus corpus = generate_corpus(rig, a.corpus);
  save_corpus(corpus, a.out);
  std::printf("%zu train / %zu val sequences, %d styles -> %s\n", corpus.train.size(), corpus.val.size(),
              corpus.styles, a.out.c_str());
}

struct FrontendArgs {
  std::string wav;
  std::string logits;
  double resample_hz = 0.0;
  std::string out;
};

void run_frontend(const FrontendArgs& a) {
  if (a.wav.empty() == a.logits.empty()) throw std::runtime_error("give exactly one of --wav or --logits");
  PhonemeLogitStream stream;
  if (!a.wav.empty()) {
    const WavAudio audio = read_wav(a.wav);
    if (audio.sample_rate != StubExtractor::kSampleRate) {
      throw std::runtime_error("the stub extractor expects 16 kHz audio, got " +
                               std::to_string(audio.sample_rate) + " Hz");
    }
    stream = stub_extractor(audio.samples);
  } else {
    stream = load_logits(a.logits);
  }
  if (a.resample_hz > 0.0) stream = resample(stream, a.resample_hz);
  save_logits(stream, a.out);
  std::printf("%zu frames at %g Hz, %d classes -> %s\n", stream.size(), stream.rate_hz, stream.class_count,
              a.out.c_str());
}

struct RetargetArgs {
  std::string rig;
  std::string dest;
  std::string in;
  std::string out;
  ProjectionSettings settings;
};

void run_retarget(const RetargetArgs& a) {
  const LbsRig rig = load_rig(a.rig);
  check_rig(rig, a.rig);
  const DenseFrames dense = load_dense(a.in);
  if (dense.vertex_count != rig.vertex_count()) {
    throw std::runtime_error("capture has " + std::to_string(dense.vertex_count) + " vertices, rig has " +
                             std::to_string(rig.vertex_count()));
  }
  const auto fits = project_sequence(dense.frames, rig, a.settings, default_worker_count());
  std::optional<LbsRig> dest;
  if (!a.dest.empty()) dest = load_rig(a.dest);
  MotionSequence motion;
  motion.fps = dense.fps;
  std::size_t unconverged = 0;
  double residual = 0.0;
  for (const auto& p : fits) {
    motion.frames.push_back(dest ? transfer_coefficients(p.theta, rig, *dest) : p.theta);
    if (!p.converged) ++unconverged;
    residual += p.residual;
  }
  save_motion(motion, a.out);
  std::printf("%zu frames, mean residual %.6g mm^2, %zu unconverged -> %s\n", fits.size(),
              fits.empty() ? 0.0 : residual / static_cast<double>(fits.size()), unconverged, a.out.c_str());
}

struct TrainArgs {
  std::string rig;
  std::string data;
  std::string out;
  std::string resume;
  std::string history;
  TrainConfig config;
  NetShape shape;
};

void run_train(TrainArgs a) {
  const LbsRig rig = load_rig(a.rig);
  check_rig(rig, a.rig);
  const Corpus corpus = load_corpus(a.data);
  a.shape.styles = corpus.styles;
  a.shape.blendshapes = static_cast<int>(rig.blendshape_count());
  a.config.workers = default_worker_count();
  const auto train_set = make_samples(corpus.train, a.shape.window);
  const auto val_set = make_samples(corpus.val, a.shape.window);
  if (train_set.empty()) throw std::runtime_error("dataset has no training samples");
  a.shape.classes = train_set.front().window.class_count();

  std::optional<AdamState> adam;
  ModelParams init = a.resume.empty() ? ModelParams::initialized(a.shape, a.config.seed)
                                      : load_checkpoint(a.resume, &adam);
  if (!(init.shape() == a.shape)) throw std::runtime_error("resumed checkpoint has a different shape");

  nlohmann::json log = nlohmann::json::array();
  const TrainResult result =
      train(init, rig, train_set, val_set, a.config, adam ? &*adam : nullptr, [&](const EpochStats& e) {
        if (e.val_loss) {
          std::printf("epoch %3d  train %.6g  val %.6g\n", e.epoch, e.train_loss, *e.val_loss);
        } else {
          std::printf("epoch %3d  train %.6g\n", e.epoch, e.train_loss);
        }
        std::fflush(stdout);
        nlohmann::json row{{"epoch", e.epoch}, {"train_loss", e.train_loss}};
        if (e.val_loss) row["val_loss"] = *e.val_loss;
        log.push_back(row);
      });
  save_checkpoint(result.params, a.out, &result.adam);
  if (!a.history.empty()) write_text(a.history, log.dump(2));
  std::printf("model -> %s\n", a.out.c_str());
}

struct PipelineArgs {
  std::string pipeline_json;
  std::string model;
  std::string robot_rig;
  std::string rig_config;
  std::string human_rig;
  int style_id = -1;
  double cutoff = 0.0;
  int order = 0;
};

PipelineConfig resolve_pipeline(const PipelineArgs& a) {
  PipelineConfig c = a.pipeline_json.empty() ? PipelineConfig{} : PipelineConfig::load(a.pipeline_json);
  if (!a.model.empty()) c.model_path = a.model;
  if (!a.robot_rig.empty()) c.robot_rig_path = a.robot_rig;
  if (!a.rig_config.empty()) c.rig_config_path = a.rig_config;
  if (!a.human_rig.empty()) c.human_rig_path = a.human_rig;
  if (a.style_id >= 0) c.style_id = a.style_id;
  if (a.cutoff > 0.0) c.filter.cutoff_hz = a.cutoff;
  if (a.order > 0) c.filter.order = a.order;
  c.validate();
  if (c.robot_rig_path.empty() || c.rig_config_path.empty()) {
    throw std::runtime_error("robot rig and rig config paths are required");
  }
  return c;
}

/// Everything the orchestrator borrows, kept alive together.
struct LoadedPipeline {
  PipelineConfig config;
  ModelParams model;
  LbsRig robot;
  std::unique_ptr<KinematicsModel> kinematics;
  std::vector<std::string> source_names;

  LoadedPipeline(PipelineConfig c, ModelParams m) : config(std::move(c)), model(std::move(m)) {}
};

std::unique_ptr<LoadedPipeline> load_pipeline(const PipelineConfig& config, bool allow_random_model,
                                              std::uint64_t seed) {
  LbsRig robot = load_rig(config.robot_rig_path);
  check_rig(robot, config.robot_rig_path);
  ModelParams model = [&] {
    if (!config.model_path.empty()) return load_checkpoint(config.model_path);
    if (!allow_random_model) throw std::runtime_error("a model checkpoint is required");
    NetShape shape;
    shape.blendshapes = static_cast<int>(robot.blendshape_count());
    return ModelParams::initialized(shape, seed);
  }();
  auto p = std::make_unique<LoadedPipeline>(config, std::move(model));
  p->robot = std::move(robot);
  p->kinematics = std::make_unique<KinematicsModel>(load_rig_config(config.rig_config_path), p->robot);
  if (!config.human_rig_path.empty()) {
    p->source_names = load_rig(config.human_rig_path).basis.names;
  } else {
    p->source_names = arkit_blendshape_names();
  }
  return p;
}

struct SynthArgs {
  PipelineArgs pipeline;
  std::string logits;
  std::string out;
  std::string motion;
  std::string report;
  std::string mode = "offline";
};

void run_synth(const SynthArgs& a) {
  const PipelineConfig config = resolve_pipeline(a.pipeline);
  auto p = load_pipeline(config, false, 0);
  Orchestrator orch(p->model, p->source_names, *p->kinematics, p->config);
  const PhonemeLogitStream logits = load_logits(a.logits);
  FileSink sink(a.out);
  const PipelineRun run = a.mode == "streaming" ? run_streaming(orch, logits, sink)
                                                : run_offline(orch, logits, sink);
  if (!a.motion.empty()) save_motion(run.motion, a.motion);
  write_text(a.report, run.report.to_json());
  std::fprintf(stderr, "%zu frames -> %s (look-ahead %.2f frames, %zu over budget)\n", run.report.frames,
               a.out.c_str(), run.report.total_lookahead_frames, run.report.over_budget);
}

struct SimulateArgs {
  std::string rig;
  std::string config;
  std::string in;
  std::string out;
  std::string histograms;
  int bins = 20;
  ProjectionSettings settings;
};

void run_simulate(const SimulateArgs& a) {
  const LbsRig rig = load_rig(a.rig);
  check_rig(rig, a.rig);
  const KinematicsModel model(load_rig_config(a.config), rig);
  const MotionSequence motion = load_motion(a.in);
  const TrackingReport report = evaluate_tracking(model, motion, a.settings, default_worker_count());
  write_text(a.out, report.to_json());
  if (!a.histograms.empty()) write_histograms(report, a.histograms, a.bins);
}

struct SmoothArgs {
  std::string in;
  std::string out;
  FilterSpec spec;
};

void run_smooth(SmoothArgs a) {
  const MotionSequence motion = load_motion(a.in);
  a.spec.sample_hz = motion.fps;
  const MotionSequence smoothed = filter_sequence(design(a.spec), motion);
  save_motion(smoothed, a.out);
  std::printf("%zu frames filtered (order %d, %g Hz) -> %s\n", smoothed.frames.size(), a.spec.order,
              a.spec.cutoff_hz, a.out.c_str());
}

struct BenchArgs {
  PipelineArgs pipeline;
  std::size_t frames = 500;
  std::uint64_t seed = 0;
  std::string out;
};

void run_bench(const BenchArgs& a) {
  const PipelineConfig config = resolve_pipeline(a.pipeline);
  auto p = load_pipeline(config, true, a.seed);
  Orchestrator orch(p->model, p->source_names, *p->kinematics, p->config);
  write_text(a.out, bench(orch, p->model, a.frames, a.seed).to_json());
}

struct ExportArgs {
  std::string rig;
  std::string motion;
  std::string out;
};

void run_export(const ExportArgs& a) {
  const LbsRig rig = load_rig(a.rig);
  check_rig(rig, a.rig);
  if (a.motion.empty()) {
    write_obj(a.out, rig.mesh);
    std::printf("neutral -> %s\n", a.out.c_str());
  } else {
    const MotionSequence motion = load_motion(a.motion);
    write_obj(a.out, motion, rig);
    std::printf("%zu frames -> %s\n", motion.frames.size(), a.out.c_str());
  }
}

void add_ik_options(CLI::App* cmd, ProjectionSettings& s) {
  cmd->add_option("--tol", s.tolerance, "Projected-gradient tolerance")->capture_default_str();
  cmd->add_option("--max-iter", s.max_iterations, "Solver iteration limit")->capture_default_str();
}

void add_pipeline_options(CLI::App* cmd, PipelineArgs& p) {
  cmd->add_option("--config", p.pipeline_json, "Pipeline JSON; flags override its values");
  cmd->add_option("--model", p.model, "Model checkpoint (.mnet)");
  cmd->add_option("--rig", p.robot_rig, "Robot rig (.lbsrig)");
  cmd->add_option("--rig-config", p.rig_config, "Robot actuator config (JSON)");
  cmd->add_option("--human", p.human_rig, "Human rig whose name order the model emits");
  cmd->add_option("--style", p.style_id, "Speaking style id");
  cmd->add_option("--cutoff", p.cutoff, "Smoothing cutoff (Hz)");
  cmd->add_option("--order", p.order, "Smoothing filter order");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Speech-driven animatronic face toolkit"};
  app.require_subcommand(1);

  MakeRigArgs make_rig;
  auto* c_rig = app.add_subcommand("make-rig", "Build the procedural reference robot rig");
  c_rig->add_option("--out", make_rig.out, "Robot rig output")->capture_default_str();
  c_rig->add_option("--config", make_rig.config, "Actuator config output")->capture_default_str();
  c_rig->add_option("--human", make_rig.human, "Also write the procedural human rig here");
  c_rig->add_option("--seed", make_rig.seed, "Shape amplitude jitter seed")->capture_default_str();
  c_rig->callback([&] { run_make_rig(make_rig); });

  MakeDataArgs make_data;
  auto* c_data = app.add_subcommand("make-data", "Generate a synthetic speech/motion corpus");
  c_data->add_option("--rig", make_data.rig, "Human rig")->required();
  c_data->add_option("--out", make_data.out, "Output directory")->required();
  c_data->add_option("--sequences", make_data.corpus.sequences)->capture_default_str();
  c_data->add_option("--seconds", make_data.corpus.seconds)->capture_default_str();
  c_data->add_option("--styles", make_data.corpus.styles)->capture_default_str();
  c_data->add_option("--val-every", make_data.corpus.val_every)->capture_default_str();
  c_data->add_option("--seed", make_data.corpus.seed)->capture_default_str();
  c_data->callback([&] { run_make_data(make_data); });

  FrontendArgs frontend;
  auto* c_front = app.add_subcommand("frontend", "Extract or resample phoneme logits");
  c_front->add_option("--wav", frontend.wav, "16 kHz WAV input for the stub extractor");
  c_front->add_option("--logits", frontend.logits, "Existing .phlg input");
  c_front->add_option("--resample", frontend.resample_hz, "Output rate (Hz)");
  c_front->add_option("--out", frontend.out, "Output .phlg")->required();
  c_front->callback([&] { run_frontend(frontend); });

  RetargetArgs retarget;
  auto* c_ret = app.add_subcommand("retarget", "Fit dense human motion to blendshape coefficients");
  c_ret->add_option("--rig", retarget.rig, "Human rig")->required();
  c_ret->add_option("--dest", retarget.dest, "Rig whose name order the output uses");
  c_ret->add_option("--in", retarget.in, "Dense frames (.bin, DNSF)")->required();
  c_ret->add_option("--out", retarget.out, "Output motion (.lbsm)")->required();
  add_ik_options(c_ret, retarget.settings);
  c_ret->callback([&] { run_retarget(retarget); });

  TrainArgs train_args;
  auto* c_train = app.add_subcommand("train", "Train the speech-to-coefficient model");
  c_train->add_option("--rig", train_args.rig, "Human rig (frozen decoder)")->required();
  c_train->add_option("--data", train_args.data, "Corpus directory")->required();
  c_train->add_option("--out", train_args.out, "Checkpoint output")->required();
  c_train->add_option("--resume", train_args.resume, "Continue from a checkpoint");
  c_train->add_option("--history", train_args.history, "Write per-epoch losses as JSON");
  c_train->add_option("--epochs", train_args.config.epochs)->capture_default_str();
  c_train->add_option("--lr", train_args.config.learning_rate)->capture_default_str();
  c_train->add_option("--wd", train_args.config.weight_decay)->capture_default_str();
  c_train->add_option("--batch", train_args.config.batch_size)->capture_default_str();
  c_train->add_option("--dropout", train_args.config.dropout_rate)->capture_default_str();
  c_train->add_option("--wm", train_args.config.mouth_weight, "Mouth term weight")->capture_default_str();
  c_train->add_option("--seed", train_args.config.seed)->capture_default_str();
  c_train->add_option("--window", train_args.shape.window, "Logit window K")->capture_default_str();
  c_train->add_option("--hidden", train_args.shape.hidden, "Hidden width H")->capture_default_str();
  c_train->callback([&] { run_train(train_args); });

  SynthArgs synth;
  auto* c_synth = app.add_subcommand(
      "synth", "Drive the robot from logits; output lags input by K/2 frames plus the filter delay");
  add_pipeline_options(c_synth, synth.pipeline);
  c_synth->add_option("--logits", synth.logits, "Input .phlg")->required();
  c_synth->add_option("--out", synth.out, "Servo byte stream output")->required();
  c_synth->add_option("--motion", synth.motion, "Also write robot coefficients (.lbsm)");
  c_synth->add_option("--report", synth.report, "Run report JSON (default stdout)");
  c_synth->add_option("--mode", synth.mode)->check(CLI::IsMember({"offline", "streaming"}))->capture_default_str();
  c_synth->callback([&] { run_synth(synth); });

  SimulateArgs simulate;
  auto* c_sim = app.add_subcommand("simulate", "Track a robot motion through IK and report errors");
  c_sim->add_option("--rig", simulate.rig, "Robot rig")->required();
  c_sim->add_option("--config", simulate.config, "Actuator config")->required();
  c_sim->add_option("--in", simulate.in, "Robot-order motion (.lbsm)")->required();
  c_sim->add_option("--out", simulate.out, "Report JSON (default stdout)");
  c_sim->add_option("--histograms", simulate.histograms, "Directory for per-region histogram CSVs");
  c_sim->add_option("--bins", simulate.bins)->capture_default_str();
  add_ik_options(c_sim, simulate.settings);
  c_sim->callback([&] { run_simulate(simulate); });

  SmoothArgs smooth;
  auto* c_smooth = app.add_subcommand("smooth", "Causal Butterworth smoothing of a motion");
  c_smooth->add_option("--in", smooth.in)->required();
  c_smooth->add_option("--out", smooth.out)->required();
  c_smooth->add_option("--cutoff", smooth.spec.cutoff_hz)->capture_default_str();
  c_smooth->add_option("--order", smooth.spec.order)->capture_default_str();
  c_smooth->callback([&] { run_smooth(smooth); });

  BenchArgs bench_args;
  auto* c_bench = app.add_subcommand("bench", "Measure model and full-tick throughput");
  add_pipeline_options(c_bench, bench_args.pipeline);
  c_bench->add_option("--frames", bench_args.frames)->capture_default_str();
  c_bench->add_option("--seed", bench_args.seed)->capture_default_str();
  c_bench->add_option("--out", bench_args.out, "Report JSON (default stdout)");
  c_bench->callback([&] { run_bench(bench_args); });

  ExportArgs export_args;
  auto* c_obj = app.add_subcommand("export-obj", "Write the neutral or a skinned motion as OBJ");
  c_obj->add_option("--rig", export_args.rig)->required();
  c_obj->add_option("--motion", export_args.motion, "Motion to skin (default: neutral only)");
  c_obj->add_option("--out", export_args.out)->required();
  c_obj->callback([&] { run_export(export_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
