// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include "fixtures.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"

#include "roboface/dataset.hpp"
#include "roboface/pipeline.hpp"
#include "roboface/retarget.hpp"
#include "roboface/smoothing.hpp"
#include "roboface/trainer.hpp"

#include "json.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>

using namespace roboface;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  std::string failures;

  void require(bool ok, const std::string& what) {
    if (ok) return;
    failures += (failures.empty() ? "" : "; ") + what;
    pass = false;
  }
};

double max_abs(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

double relative(const Eigen::VectorXd& got, const Eigen::VectorXd& want) {
  const double scale = max_abs(want);
  return max_abs(got - want) / (scale > 0.0 ? scale : 1.0);
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

// Tolerances and limits.
constexpr double kLinearityTol = 1e-9;
constexpr double kLbsSeconds = 5.0;
constexpr double kRoundTripTol = 1e-6;
constexpr double kGridTol = 2e-3;
constexpr double kRetargetSeconds = 60.0;
constexpr double kGradTol = 1e-4;
constexpr double kGradSeconds = 30.0;
constexpr double kLossTol = 1e-12;
constexpr double kOverfitFactor = 1000.0;
constexpr double kTrainSeconds = 120.0;
constexpr double kCutoffDb = -3.01;
constexpr double kCutoffTolDb = 0.01;
constexpr double kStopbandDb = -25.0;
// Rounding allowance for the monotonicity scan; the passband is flat to 1e-17.
constexpr double kMonotoneSlack = 1e-15;
constexpr double kIkTol = 1e-6;
constexpr double kMedianTolMm = 1e-3;
constexpr double kBudgetMs = 40.0;

void lbs_suite(Outcome& o) {
  const LbsRig& ref = fixtures::reference().face.rig;
  o.require(apply_skinning(ref, BlendCoefficients::zeros(51)).positions == ref.mesh.positions,
            "zero pose is not the neutral bitwise");

  std::mt19937_64 rng(1);
  double worst_lin = 0.0, worst_sup = 0.0, worst_oracle = 0.0;
  std::unique_ptr<LbsRig> rig;
  for (int c = 0; c < 1000; ++c) {
    if (c % 100 == 0) rig = std::make_unique<LbsRig>(fixtures::random_rig(200, 51, 1000 + c));
    const BlendCoefficients a(fixtures::random_theta(51, rng)), b(fixtures::random_theta(51, rng));
    const double alpha = uniform(rng, -3.0, 3.0);
    const Eigen::VectorXd da = vertex_delta(*rig, a), db = vertex_delta(*rig, b);
    worst_lin = std::max(worst_lin, relative(vertex_delta(*rig, BlendCoefficients(alpha * a.values)), alpha * da));
    worst_sup = std::max(worst_sup, relative(vertex_delta(*rig, BlendCoefficients(a.values + b.values)), da + db));
    if (c % 100 == 0) {
      std::vector<std::vector<double>> fields;
      for (const auto& f : rig->basis.displacements) fields.push_back(to_std(f));
      const auto want = oracle::skin(to_std(rig->mesh.positions), fields, to_std(a.values));
      const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(want.data(), static_cast<Eigen::Index>(want.size()));
      worst_oracle = std::max(worst_oracle, relative(apply_skinning(*rig, a).positions, w));
    }
  }
  o.detail << "linearity " << worst_lin << ", superposition " << worst_sup << ", oracle " << worst_oracle;
  o.require(worst_lin <= kLinearityTol, "linearity");
  o.require(worst_sup <= kLinearityTol, "superposition");
  o.require(worst_oracle <= kLinearityTol, "oracle agreement");
}

void retarget_round_trip(Outcome& o) {
  const LbsRig& ref = fixtures::reference().face.rig;
  const BasisProjector projector(ref);
  std::mt19937_64 rng(2);
  double worst = 0.0;
  for (int c = 0; c < 100; ++c) {
    const BlendCoefficients theta0(fixtures::random_theta(51, rng, 0.02, 0.98));
    const Projection p = projector.project(apply_skinning(ref, theta0).positions, {});
    worst = std::max(worst, max_abs(p.theta.values - theta0.values));
  }
  o.detail << "reference rig worst " << worst;
  o.require(worst <= kRoundTripTol, "round trip on the reference rig");

  double grid_worst = 0.0;
  for (std::size_t b = 1; b <= 3; ++b) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const LbsRig rig = fixtures::random_rig(5, b, 70 + 10 * b + seed);
      std::mt19937_64 trng(seed + 500);
      Eigen::VectorXd theta(static_cast<Eigen::Index>(b));
      for (auto& t : theta) t = uniform(trng, -0.6, 1.6);
      Eigen::VectorXd target = rig.mesh.positions + rig.basis.as_matrix() * theta;
      for (auto& x : target) x += 0.3 * standard_normal(trng);
      const Eigen::MatrixXd a = rig.basis.as_matrix();
      auto objective = [&](const auto& x) {
        Eigen::VectorXd v(static_cast<Eigen::Index>(b));
        for (std::size_t k = 0; k < b; ++k) v[static_cast<Eigen::Index>(k)] = x[k];
        return (rig.mesh.positions + a * v - target).squaredNorm();
      };
      const Projection p = project_to_basis(FaceMesh{target, {}}, rig);
      std::vector<double> best;
      if (b == 1) {
        const std::function<double(const std::array<double, 1>&)> f = objective;
        const auto g = oracle::grid_search<1>(f, 100000);
        best.assign(g.begin(), g.end());
      } else if (b == 2) {
        const std::function<double(const std::array<double, 2>&)> f = objective;
        const auto g = oracle::grid_search<2>(f, 1000);
        best.assign(g.begin(), g.end());
      } else {
        const std::function<double(const std::array<double, 3>&)> f = objective;
        const auto g = oracle::refine_grid_search<3>(f, oracle::grid_search<3>(f, 50), 0.01, 1e-3);
        best.assign(g.begin(), g.end());
      }
      for (std::size_t k = 0; k < b; ++k) {
        grid_worst = std::max(grid_worst, std::abs(p.theta.values[static_cast<Eigen::Index>(k)] - best[k]));
      }
    }
  }
  o.detail << ", grid worst " << grid_worst;
  o.require(grid_worst <= kGridTol, "grid-search agreement for B <= 3");
}

void gradient_check(Outcome& o) {
  double worst = 0.0;
  std::size_t checked = 0;
  std::string where;
  for (std::uint64_t seed : {18u, 20u, 22u}) {
    const gradcheck::TinyNet net = gradcheck::tiny_net(seed);
    std::mt19937_64 rng(seed + 1);
    const Eigen::VectorXd mask = sample_dropout_mask(2 * net.shape.hidden, 0.25, rng);
    for (const auto& r : {gradcheck::check(net, {}, 1.0), gradcheck::check(net, mask, 2.5)}) {
      checked += r.checked;
      if (r.worst > worst) {
        worst = r.worst;
        where = r.worst_name;
      }
    }
  }
  o.detail << checked << " entries, worst " << worst << " at " << where;
  o.require(checked > 0, "no gradient entries checked");
  o.require(worst <= kGradTol, "relative gradient error");
}

void loss_oracle(Outcome& o) {
  std::mt19937_64 rng(4);
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t v = 5 + rng() % 200;
    const Eigen::VectorXd y = fixtures::random_theta(3 * v, rng, -20.0, 20.0);
    const Eigen::VectorXd p = fixtures::random_theta(3 * v, rng, -20.0, 20.0);
    std::vector<std::uint32_t> mask;
    for (std::uint32_t i = 0; i < v; ++i) {
      if (uniform01(rng) < 0.3) mask.push_back(i);
    }
    const double wm = trial % 5 == 0 ? 1.0 : uniform(rng, 0.0, 4.0);
    const double got = vertex_loss(p, y, mask, wm);
    const double want = oracle::vertex_loss(to_std(p), to_std(y), mask, wm);
    worst = std::max(worst, std::abs(got - want) / std::abs(want));
  }
  Eigen::VectorXd pred = Eigen::VectorXd::Zero(9), target = Eigen::VectorXd::Zero(9);
  target[3] = 1.0;
  const double unit_mouth = vertex_loss(pred, target, {1}, 1.0);
  o.detail << "worst relative " << worst << ", unit mouth error loss " << unit_mouth;
  o.require(worst <= kLossTol, "loss against the reference");
  o.require(unit_mouth == 2.0, "unit mouth error with w_m = 1 must give 2");
}

void training_smoke(Outcome& o) {
  const ProceduralFace& human = fixtures::human();
  CorpusConfig cc;
  cc.sequences = 1;
  cc.seconds = 1.0;
  cc.val_every = 0;
  cc.styles = 2;
  const Corpus corpus = generate_corpus(human.rig, cc);
  const auto samples = make_samples(corpus.train, 8);
  const TrainingSample sample = samples.at(10);
  const std::vector<TrainingSample> set(128, sample);
  NetShape shape;
  shape.styles = 2;
  const ModelParams init = ModelParams::initialized(shape, 0);
  const HumanDecoder decoder(human.rig);
  TrainConfig config;
  o.require(config.epochs == 200, "epoch count");

  const double before = evaluate_loss(init, decoder, {sample}, config.mouth_weight);
  const TrainResult a = train(init, human.rig, set, {}, config);
  const double after = evaluate_loss(a.params, decoder, {sample}, config.mouth_weight);
  const TrainResult b = train(init, human.rig, set, {}, config);
  bool same_curve = a.history.size() == b.history.size();
  for (std::size_t e = 0; same_curve && e < a.history.size(); ++e) {
    same_curve = a.history[e].train_loss == b.history[e].train_loss;
  }
  o.detail << "loss " << before << " -> " << after << " (" << before / after << "x) over "
           << a.history.size() << " epochs";
  o.require(a.history.size() == 200, "200 epochs");
  o.require(before / after >= kOverfitFactor, "1000x loss reduction");
  o.require(same_curve && a.params.values() == b.params.values(), "bitwise reproducible loss curve");
}

void filter_spec(Outcome& o) {
  const BiquadCascade c = design(FilterSpec{});
  const double dc = c.magnitude_db(0.0), cutoff = c.magnitude_db(7.0), nyquist = c.magnitude_db(12.5);
  o.detail << "|H(0)| " << dc << " dB, |H(7)| " << cutoff << " dB, |H(12.5)| " << nyquist << " dB";
  o.require(std::abs(dc) <= 1e-9, "0 dB at DC");
  o.require(std::abs(cutoff - kCutoffDb) <= kCutoffTolDb, "-3.01 dB at the cutoff");
  o.require(nyquist <= kStopbandDb, "stopband at Nyquist");
  double prev = c.magnitude(0.0);
  bool monotone = true;
  for (double f = 0.05; f <= 12.5 + 1e-9; f += 0.05) {
    monotone = monotone && c.magnitude(f) <= prev * (1.0 + kMonotoneSlack);
    prev = c.magnitude(f);
  }
  o.require(monotone, "monotone magnitude");
  bool constant = true;
  for (double v : {0.0, 0.25, 1.0 / 3.0, 0.7, 1.0}) {
    MotionSequence m;
    m.frames.assign(200, BlendCoefficients(Eigen::VectorXd::Constant(51, v)));
    for (const auto& f : filter_sequence(c, m).frames) constant = constant && (f.values.array() == v).all();
  }
  o.require(constant, "constant input passes unchanged");
}

void ik_round_trip(Outcome& o) {
  const KinematicsModel model(fixtures::reference().config, fixtures::reference().face.rig);
  std::mt19937_64 rng(7);
  double worst = 0.0;
  for (int c = 0; c < 50; ++c) {
    ActuatorState u0 = model.rest_state();
    for (auto ch : model.ik_channels()) u0.u[static_cast<Eigen::Index>(ch)] = uniform(rng, 0.05, 0.95);
    worst = std::max(worst, max_abs(model.solve(model.forward(u0).positions).state.u - u0.u));
  }
  o.detail << "interior worst " << worst;
  o.require(worst <= kIkTol, "interior recovery");

  ActuatorState u0 = model.rest_state();
  for (auto ch : model.ik_channels()) u0.u[static_cast<Eigen::Index>(ch)] = uniform(rng, 0.2, 0.8);
  const Eigen::VectorXd neutral = model.rig().mesh.positions;
  const IkResult far = model.solve(neutral + 10.0 * (model.forward(u0).positions - neutral));
  int saturated = 0;
  for (auto ch : model.ik_channels()) {
    const double v = far.state.u[static_cast<Eigen::Index>(ch)];
    saturated += (v == 0.0 || v == 1.0) ? 1 : 0;
  }
  o.detail << ", unreachable residual " << far.residual << " with " << saturated << " channels at a bound";
  o.require(far.residual > 0.0 && saturated > 0, "unreachable target saturates");

  const fixtures::ToyRig toy = fixtures::toy_rig();
  const KinematicsModel toy_model(toy.config, toy.rig, {}, false);
  MotionSequence ref;
  for (int f = 0; f < 25; ++f) ref.frames.push_back(BlendCoefficients(fixtures::random_theta(2, rng)));
  const TrackingReport report = evaluate_tracking(toy_model, ref);
  std::array<std::vector<double>, kRegionCount> errors;
  for (const auto& frame : ref.frames) {
    const Eigen::VectorXd target = apply_skinning(toy.rig, frame).positions;
    const std::function<double(const std::array<double, 2>&)> f = [&](const std::array<double, 2>& u) {
      return (fixtures::toy_forward(toy, u) - target).squaredNorm();
    };
    const auto u = oracle::refine_grid_search<2>(f, oracle::grid_search<2>(f, 20), 0.005, 5e-8);
    const Eigen::VectorXd achieved = fixtures::toy_forward(toy, u);
    for (std::size_t r = 0; r < kRegionCount; ++r) {
      double sum = 0.0;
      for (auto v : toy.rig.landmark_groups[r].indices) sum += (achieved.segment<3>(3 * v) - target.segment<3>(3 * v)).norm();
      errors[r].push_back(sum / static_cast<double>(toy.rig.landmark_groups[r].indices.size()));
    }
  }
  double median_worst = 0.0;
  for (std::size_t r = 0; r < kRegionCount; ++r) {
    std::sort(errors[r].begin(), errors[r].end());
    median_worst = std::max(median_worst, std::abs(report.regions[r].second.median_mm - errors[r][12]));
  }
  o.detail << ", toy median worst " << median_worst << " mm";
  o.require(median_worst <= kMedianTolMm, "toy medians against the grid oracle");
}

struct PipelineSetup {
  ModelParams model = ModelParams::initialized(NetShape{}, 5);
  KinematicsModel kinematics{fixtures::reference().config, fixtures::reference().face.rig};
  std::vector<std::string> names = fixtures::human().rig.basis.names;

  Orchestrator orchestrator() const { return Orchestrator(model, names, kinematics, PipelineConfig{}); }
};

void end_to_end(Outcome& o) {
  const PipelineSetup setup;
  std::mt19937_64 rng(8);
  PhonemeLogitStream random;
  for (int f = 0; f < 490; ++f) random.frames.push_back(fixtures::random_theta(kPhonemeClasses, rng, -4.0, 4.0));
  std::vector<float> pcm(16000 * 4);
  for (std::size_t i = 0; i < pcm.size(); ++i) {
    const double t = static_cast<double>(i) / 16000.0;
    pcm[i] = static_cast<float>(0.4 * std::sin(2.0 * std::numbers::pi * (220.0 + 180.0 * std::sin(2.0 * t)) * t));
  }
  std::size_t bytes = 0;
  for (const PhonemeLogitStream& logits : {random, stub_extractor(pcm)}) {
    Orchestrator a = setup.orchestrator(), b = setup.orchestrator();
    LoopbackSink sa, sb;
    (void)run_offline(a, logits, sa);
    (void)run_streaming(b, logits, sb);
    o.require(!sa.bytes().empty() && sa.bytes() == sb.bytes(), "offline and streaming bytes differ");
    bytes += sa.bytes().size();
  }
  o.detail << bytes << " servo bytes identical";

  std::vector<std::uint8_t> zero{0xFA, 0x00, 0x00, 0x1F};
  zero.resize(66, 0x00);
  zero.push_back(0xE7);
  const std::vector<std::uint8_t> mixed{0xFA, 0x02, 0x01, 0x02, 0xDC, 0x05, 0x0B, 0x0A, 0x0B};
  o.require(encode_frame(ServoFrame{0, std::vector<std::uint16_t>(31, 0)}) == zero, "zero golden frame");
  o.require(encode_frame(ServoFrame{0x0102, {1500, 0x0A0B}}) == mixed, "field-order golden frame");
  o.require(decode_frame(zero) == ServoFrame{0, std::vector<std::uint16_t>(31, 0)}, "golden frame decode");
}

void realtime_budget(Outcome& o) {
  const PipelineSetup setup;
  Orchestrator orch = setup.orchestrator();
  const BenchReport r = bench(orch, setup.model, 500, 9);
  o.detail << "tick p50 " << r.tick.p50_ms << " ms, p99 " << r.tick.p99_ms << " ms (" << r.tick_fps
           << " fps); model-only " << r.model_fps << " fps, p99 " << r.model.p99_ms << " ms";
  o.require(r.tick.p99_ms < kBudgetMs, "tick p99 within 40 ms");
}

void tracking_schema(Outcome& o) {
  const KinematicsModel model(fixtures::reference().config, fixtures::reference().face.rig);
  MotionSequence zero;
  zero.frames.assign(10, BlendCoefficients::zeros(51));
  const TrackingReport z = evaluate_tracking(model, zero);
  MotionSequence moving;
  std::mt19937_64 rng(10);
  for (int f = 0; f < 10; ++f) moving.frames.push_back(BlendCoefficients(fixtures::random_theta(51, rng, 0.0, 0.6)));
  const auto j = nlohmann::json::parse(evaluate_tracking(model, moving).to_json());
  const std::vector<std::string> regions{"eye", "brow", "nose", "cheek", "mouth", "jaw"};
  o.require(z.regions.size() == regions.size() && j.size() == regions.size(), "six regions");
  for (std::size_t r = 0; r < regions.size() && r < z.regions.size(); ++r) {
    o.require(z.regions[r].first == regions[r], "region order");
    const RegionStats& s = z.regions[r].second;
    o.require(s.median_mm == 0.0 && s.q1_mm == 0.0 && s.q3_mm == 0.0, "zero reference gives zero statistics");
    o.require(j.contains(regions[r]), "region " + regions[r] + " missing from JSON");
    if (!j.contains(regions[r])) continue;
    for (const char* key : {"median_mm", "q1_mm", "q3_mm"}) {
      o.require(j[regions[r]].contains(key), std::string("statistic ") + key);
    }
    if (j[regions[r]].contains("q3_mm")) {
      o.require(j[regions[r]]["q1_mm"] <= j[regions[r]]["median_mm"] &&
                    j[regions[r]]["median_mm"] <= j[regions[r]]["q3_mm"],
                "quartile order");
    }
  }
  o.detail << "regions";
  for (const auto& r : regions) o.detail << " " << r << "=" << j[r]["median_mm"].get<double>();
  o.detail << " mm";
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;  // 0 when the criterion sets no runtime bound
  std::function<void(Outcome&)> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "LBS identity and linearity", kLbsSeconds, lbs_suite},
      {2, "retargeting round trip", kRetargetSeconds, retarget_round_trip},
      {3, "gradient correctness", kGradSeconds, gradient_check},
      {4, "loss oracle", 0.0, loss_oracle},
      {5, "training smoke test", kTrainSeconds, training_smoke},
      {6, "filter spec", 0.0, filter_spec},
      {7, "IK round trip", 0.0, ik_round_trip},
      {8, "end-to-end determinism", 0.0, end_to_end},
      {9, "real-time budget", 0.0, realtime_budget},
      {10, "tracking report schema", 0.0, tracking_schema},
  };
  // The reference and human rigs are shared; build them outside the timers.
  (void)fixtures::reference();
  (void)fixtures::human();

  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.limit_s > 0.0) {
      std::ostringstream limit;
      limit << "runtime " << seconds << " s over " << c.limit_s << " s";
      o.require(seconds < c.limit_s, limit.str());
    }
    std::string detail = o.detail.str();
    if (!o.pass) detail += (detail.empty() ? "failed: " : "; failed: ") + o.failures;
    std::printf("%s criterion %d (%s): %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, detail.c_str(), seconds);
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
