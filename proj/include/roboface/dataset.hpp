#pragma once

#include "roboface/formats.hpp"
#include "roboface/frontend.hpp"
#include "roboface/motion_net.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace roboface {

/// One utterance: extractor-rate logits paired with dense target frames.
struct SpeechSequence {
  std::string name;
  int style_id = 0;
  PhonemeLogitStream logits;
  DenseFrames targets;
};

struct Corpus {
  int styles = 10;
  std::vector<SpeechSequence> train;
  std::vector<SpeechSequence> val;
};

struct CorpusConfig {
  int sequences = 24;
  double seconds = 4.0;
  double fps = 25.0;
  int styles = 10;
  /// Every k-th sequence goes to the validation split (0 disables it).
  int val_every = 8;
  std::uint64_t seed = 0;
};

/// Smooth coefficient trajectories in [0, 1]: per channel, random keyframes
/// every 0.2-0.5 s joined by smoothstep segments, with a random per-channel
/// activity level so some channels stay near zero.
MotionSequence random_trajectory(std::size_t blendshapes, std::size_t frames, double fps,
                                 std::mt19937_64& rng);

/// Synthetic training corpus. Each style scales coefficients by its own fixed
/// per-channel gains before rendering through the human rig; logits are a
/// fixed random linear image of the unscaled coefficients plus noise, so the
/// style id carries information the logits do not.
Corpus generate_corpus(const LbsRig& human_rig, const CorpusConfig& config);

/// Resamples the logits to the target rate and pairs window t with frame t.
std::vector<TrainingSample> make_samples(const SpeechSequence& seq, int window);
std::vector<TrainingSample> make_samples(const std::vector<SpeechSequence>& seqs, int window);

/// Directory layout: manifest.json plus <name>.phlg and <name>.dnsf per sequence.
void save_corpus(const Corpus& corpus, const std::filesystem::path& dir);
Corpus load_corpus(const std::filesystem::path& dir);

/// Adds eyelid blinks at Poisson arrival times (rate_hz per second). Each
/// blink is a 200 ms raised-cosine pulse centred on a frame, peaking at 1.0,
/// merged into `channels` by taking the maximum. Other channels are untouched.
MotionSequence synth_augment_blinks(const MotionSequence& seq, double rate_hz,
                                    std::uint64_t seed,
                                    const std::vector<std::size_t>& channels);
/// Same, on the ARKit eyeBlinkLeft/eyeBlinkRight channels.
MotionSequence synth_augment_blinks(const MotionSequence& seq, double rate_hz,
                                    std::uint64_t seed);

}  // namespace roboface
