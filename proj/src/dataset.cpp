#include "roboface/dataset.hpp"

#include "roboface/random.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

namespace roboface {

namespace {

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

}  // namespace

MotionSequence random_trajectory(std::size_t blendshapes, std::size_t frames, double fps,
                                 std::mt19937_64& rng) {
  if (!(fps > 0.0)) throw std::invalid_argument("fps must be positive");
  MotionSequence seq;
  seq.fps = fps;
  seq.frames.assign(frames, BlendCoefficients::zeros(blendshapes));
  const double duration = static_cast<double>(frames) / fps;
  for (std::size_t b = 0; b < blendshapes; ++b) {
    const double activity = uniform01(rng) < 0.3 ? 0.15 : uniform(rng, 0.4, 1.0);
    std::vector<double> key_t{0.0};
    std::vector<double> key_v{activity * uniform01(rng)};
    while (key_t.back() < duration) {
      key_t.push_back(key_t.back() + uniform(rng, 0.2, 0.5));
      key_v.push_back(activity * uniform01(rng));
    }
    std::size_t seg = 0;
    for (std::size_t f = 0; f < frames; ++f) {
      const double t = static_cast<double>(f) / fps;
      while (key_t[seg + 1] < t) ++seg;
      const double a = (t - key_t[seg]) / (key_t[seg + 1] - key_t[seg]);
      seq.frames[f].values[static_cast<Eigen::Index>(b)] =
          key_v[seg] + (key_v[seg + 1] - key_v[seg]) * smoothstep(a);
    }
  }
  return seq;
}

Corpus generate_corpus(const LbsRig& human_rig, const CorpusConfig& config) {
  if (config.sequences < 1 || config.styles < 1 || !(config.seconds > 0.0) || !(config.fps > 0.0)) {
    throw std::invalid_argument("corpus config must have positive sizes");
  }
  const HumanDecoder decoder(human_rig);
  const auto b_count = human_rig.blendshape_count();
  const auto bi = static_cast<Eigen::Index>(b_count);
  std::mt19937_64 rng(config.seed);

  Eigen::MatrixXd mixing(kPhonemeClasses - 1, bi);
  for (Eigen::Index i = 0; i < mixing.size(); ++i) mixing.data()[i] = 2.0 * standard_normal(rng);
  Eigen::MatrixXd style_gain(bi, config.styles);
  for (Eigen::Index i = 0; i < style_gain.size(); ++i) style_gain.data()[i] = uniform(rng, 0.5, 1.3);

  const std::size_t jaw = human_rig.basis.index_of("jawOpen");
  const auto frames = static_cast<std::size_t>(std::llround(config.seconds * config.fps));
  const auto logit_frames =
      static_cast<std::size_t>(std::llround(config.seconds * kExtractorRateHz));

  Corpus corpus;
  corpus.styles = config.styles;
  for (int s = 0; s < config.sequences; ++s) {
    SpeechSequence seq;
    seq.name = "seq_" + std::to_string(1000 + s).substr(1);
    seq.style_id = s % config.styles;
    const MotionSequence base = random_trajectory(b_count, frames, config.fps, rng);

    seq.targets.fps = config.fps;
    seq.targets.vertex_count = human_rig.vertex_count();
    for (const auto& f : base.frames) {
      const Eigen::VectorXd styled =
          f.values.cwiseProduct(style_gain.col(seq.style_id)).cwiseMin(1.0).cwiseMax(0.0);
      seq.targets.frames.push_back(decoder.decode(styled));
    }

    seq.logits.rate_hz = kExtractorRateHz;
    seq.logits.class_count = kPhonemeClasses;
    for (std::size_t j = 0; j < logit_frames; ++j) {
      const double pos = static_cast<double>(j) * config.fps / kExtractorRateHz;
      const auto lo = std::min(static_cast<std::size_t>(pos), frames - 1);
      const auto hi = std::min(lo + 1, frames - 1);
      const double w = std::min(pos - static_cast<double>(lo), 1.0);
      const Eigen::VectorXd theta =
          base.frames[lo].values + w * (base.frames[hi].values - base.frames[lo].values);
      Eigen::VectorXd logit(kPhonemeClasses);
      logit.tail(kPhonemeClasses - 1) = mixing * theta;
      for (Eigen::Index c = 1; c < kPhonemeClasses; ++c) logit[c] += 0.05 * standard_normal(rng);
      logit[kBlankClass] = jaw < b_count ? 2.0 - 4.0 * theta[static_cast<Eigen::Index>(jaw)] : 0.0;
      seq.logits.frames.push_back(std::move(logit));
    }

    const bool to_val = config.val_every > 0 && (s + 1) % config.val_every == 0;
    (to_val ? corpus.val : corpus.train).push_back(std::move(seq));
  }
  return corpus;
}

std::vector<TrainingSample> make_samples(const SpeechSequence& seq, int window) {
  const PhonemeLogitStream resampled = resample(seq.logits, seq.targets.fps);
  const auto windows = make_windows(resampled, window);
  const std::size_t n = std::min(windows.size(), seq.targets.frames.size());
  std::vector<TrainingSample> out;
  out.reserve(n);
  for (std::size_t t = 0; t < n; ++t) {
    out.push_back(TrainingSample{windows[t], seq.style_id, seq.targets.frames[t]});
  }
  return out;
}

std::vector<TrainingSample> make_samples(const std::vector<SpeechSequence>& seqs, int window) {
  std::vector<TrainingSample> out;
  for (const auto& s : seqs) {
    auto part = make_samples(s, window);
    out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  return out;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["styles"] = corpus.styles;
  manifest["sequences"] = nlohmann::json::array();
  auto emit = [&](const SpeechSequence& s, const char* split) {
    save_logits(s.logits, dir / (s.name + ".phlg"));
    save_dense(s.targets, dir / (s.name + ".dnsf"));
    manifest["sequences"].push_back({{"name", s.name},
                                     {"style", s.style_id},
                                     {"split", split},
                                     {"logits", s.name + ".phlg"},
                                     {"targets", s.name + ".dnsf"}});
  };
  for (const auto& s : corpus.train) emit(s, "train");
  for (const auto& s : corpus.val) emit(s, "val");
  std::ofstream out(dir / "manifest.json");
  if (!out) throw std::runtime_error("cannot write " + (dir / "manifest.json").string());
  out << manifest.dump(2) << '\n';
}

Corpus load_corpus(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw std::runtime_error("missing " + (dir / "manifest.json").string());
  const nlohmann::json manifest = nlohmann::json::parse(in);
  Corpus corpus;
  corpus.styles = manifest.at("styles").get<int>();
  for (const auto& entry : manifest.at("sequences")) {
    SpeechSequence s;
    s.name = entry.at("name").get<std::string>();
    s.style_id = entry.at("style").get<int>();
    s.logits = load_logits(dir / entry.at("logits").get<std::string>());
    s.targets = load_dense(dir / entry.at("targets").get<std::string>());
    const auto split = entry.value("split", std::string("train"));
    if (split != "train" && split != "val") throw std::runtime_error("unknown split '" + split + "'");
    (split == "val" ? corpus.val : corpus.train).push_back(std::move(s));
  }
  return corpus;
}

MotionSequence synth_augment_blinks(const MotionSequence& seq, double rate_hz,
                                    std::uint64_t seed,
                                    const std::vector<std::size_t>& channels) {
  if (!(rate_hz >= 0.0)) throw std::invalid_argument("blink rate must be >= 0");
  if (!(seq.fps > 0.0)) throw std::invalid_argument("fps must be positive");
  MotionSequence out = seq;
  if (rate_hz == 0.0 || seq.frames.empty()) return out;
  for (auto c : channels) {
    if (c >= seq.blendshape_count()) throw std::out_of_range("blink channel out of range");
  }

  constexpr double kDuration = 0.2;
  std::mt19937_64 rng(seed);
  const double length = static_cast<double>(seq.frames.size()) / seq.fps;
  double t = 0.0;
  while (true) {
    t += -std::log(1.0 - uniform01(rng)) / rate_hz;
    if (t >= length) break;
    const auto centre = static_cast<long long>(std::llround(t * seq.fps));
    const auto reach = static_cast<long long>(std::ceil(0.5 * kDuration * seq.fps));
    for (long long f = centre - reach; f <= centre + reach; ++f) {
      if (f < 0 || f >= static_cast<long long>(seq.frames.size())) continue;
      const double dt = static_cast<double>(f - centre) / seq.fps;
      if (std::abs(dt) >= 0.5 * kDuration) continue;
      const double w = 0.5 * (1.0 + std::cos(2.0 * std::numbers::pi * dt / kDuration));
      for (auto c : channels) {
        double& v = out.frames[static_cast<std::size_t>(f)].values[static_cast<Eigen::Index>(c)];
        v = std::max(v, w);
      }
    }
  }
  return out;
}

MotionSequence synth_augment_blinks(const MotionSequence& seq, double rate_hz,
                                    std::uint64_t seed) {
  const auto& names = arkit_blendshape_names();
  std::vector<std::size_t> channels;
  for (const char* n : {"eyeBlinkLeft", "eyeBlinkRight"}) {
    channels.push_back(static_cast<std::size_t>(
        std::find(names.begin(), names.end(), n) - names.begin()));
  }
  return synth_augment_blinks(seq, rate_hz, seed, channels);
}

}  // namespace roboface
