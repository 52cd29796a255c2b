#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

namespace roboface {

inline constexpr int kPhonemeClasses = 392;
inline constexpr double kExtractorRateHz = 49.0;
inline constexpr int kBlankClass = 0;

/// Time-ordered phoneme logit frames.
struct PhonemeLogitStream {
  double rate_hz = kExtractorRateHz;
  int class_count = kPhonemeClasses;
  std::vector<Eigen::VectorXd> frames;

  std::size_t size() const { return frames.size(); }
  void validate() const;
};

/// K consecutive logit frames around one output timestamp; column k is frame k.
struct LogitWindow {
  Eigen::MatrixXd frames;  // class_count x K

  int length() const { return static_cast<int>(frames.cols()); }
  int class_count() const { return static_cast<int>(frames.rows()); }
};

/// Linear interpolation per channel at output times j / target_hz. The output
/// has round(N * target_hz / rate_hz) frames (at least one); positions past
/// the last source frame clamp to it.
PhonemeLogitStream resample(const PhonemeLogitStream& stream, double target_hz);

/// One window per frame, covering frames [t - K/2, t + K/2) with edge frames
/// replicated. K must be a power of two.
std::vector<LogitWindow> make_windows(const PhonemeLogitStream& stream, int window);

bool is_power_of_two(int k);

/// Incremental counterpart of resample(); emits exactly the frames resample()
/// produces, in order, as soon as their source frames are available.
class StreamingResampler {
 public:
  using Sink = std::function<void(const Eigen::VectorXd&)>;

  StreamingResampler(double source_hz, double target_hz);
  void push(const Eigen::VectorXd& frame, const Sink& sink);
  /// Flushes the tail; the stream must have received at least one frame.
  void finish(const Sink& sink);

 private:
  bool emit_ready(bool final, const Sink& sink);

  double source_hz_;
  double target_hz_;
  std::deque<Eigen::VectorXd> buffer_;
  std::size_t buffer_base_ = 0;  // source index of buffer_.front()
  std::size_t received_ = 0;
  std::size_t next_output_ = 0;
};

/// Incremental counterpart of make_windows().
class StreamingWindower {
 public:
  using Sink = std::function<void(const LogitWindow&)>;

  explicit StreamingWindower(int window);
  void push(const Eigen::VectorXd& frame, const Sink& sink);
  void finish(const Sink& sink);

  int window() const { return window_; }

 private:
  void emit(std::size_t t, std::size_t last_index, const Sink& sink);

  int window_;
  std::deque<Eigen::VectorXd> buffer_;
  std::size_t buffer_base_ = 0;
  std::size_t received_ = 0;
  std::size_t next_output_ = 0;
};

/// Stand-in for the pretrained phoneme extractor: 25 ms Hann frames every
/// 20 ms of 16 kHz audio, 391 triangular band log-energies in classes 1..391
/// and a fixed blank logit in class 0 that dominates on silence.
class StubExtractor {
 public:
  static constexpr int kSampleRate = 16000;
  static constexpr int kFrameLength = 400;
  static constexpr int kHop = 320;
  static constexpr int kFftBins = 257;  // 512-point spectrum, DC..Nyquist
  static constexpr double kEnergyFloor = 1e-10;
  static constexpr double kBlankMargin = 4.0;

  StubExtractor();
  PhonemeLogitStream extract(std::span<const float> pcm) const;

  /// Triangular weight of spectrum bin `bin` in band `band` (band in 1..391).
  static double band_weight(int band, int bin);
  static std::size_t frame_count(std::size_t samples);

 private:
  Eigen::MatrixXd cos_table_;  // kFftBins x kFrameLength, window applied
  Eigen::MatrixXd sin_table_;
  Eigen::MatrixXd band_matrix_;  // (classes - 1) x kFftBins
};

PhonemeLogitStream stub_extractor(std::span<const float> pcm);

// ".phlg": "PHLG", u32 version=1, f32 rate_hz, u32 class_count, u32 frame_count, frames f32.
std::vector<std::uint8_t> encode_logits(const PhonemeLogitStream& stream);
PhonemeLogitStream decode_logits(std::span<const std::uint8_t> bytes);
void save_logits(const PhonemeLogitStream& stream, const std::filesystem::path& path);
PhonemeLogitStream load_logits(const std::filesystem::path& path);

/// Mono 16-bit PCM WAV reader; multi-channel input is averaged to mono.
struct WavAudio {
  int sample_rate = 0;
  std::vector<float> samples;
};
WavAudio read_wav(const std::filesystem::path& path);
void write_wav(const std::filesystem::path& path, const WavAudio& audio);

}  // namespace roboface
