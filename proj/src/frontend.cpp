#include "roboface/frontend.hpp"

#include "roboface/binary_io.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace roboface {

namespace {

double source_position(std::size_t j, double source_hz, double target_hz) {
  return static_cast<double>(j) * source_hz / target_hz;
}

std::size_t output_count(std::size_t n, double source_hz, double target_hz) {
  if (n == 0) return 0;
  const auto m = static_cast<std::size_t>(std::llround(static_cast<double>(n) * target_hz / source_hz));
  return std::max<std::size_t>(1, m);
}

Eigen::VectorXd lerp(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double f) {
  if (f == 0.0) return a;
  return a + f * (b - a);
}

}  // namespace

void PhonemeLogitStream::validate() const {
  if (!(rate_hz > 0.0) || !std::isfinite(rate_hz)) {
    throw std::invalid_argument("logit stream rate must be positive");
  }
  if (class_count <= 0) throw std::invalid_argument("logit stream needs at least one class");
  for (const auto& f : frames) {
    if (f.size() != class_count) throw std::invalid_argument("logit frame has wrong class count");
  }
}

bool is_power_of_two(int k) { return k > 0 && (k & (k - 1)) == 0; }

PhonemeLogitStream resample(const PhonemeLogitStream& stream, double target_hz) {
  stream.validate();
  if (stream.frames.empty()) throw std::invalid_argument("cannot resample an empty logit stream");
  if (!(target_hz > 0.0)) throw std::invalid_argument("target rate must be positive");

  const std::size_t n = stream.frames.size();
  PhonemeLogitStream out;
  out.rate_hz = target_hz;
  out.class_count = stream.class_count;
  const std::size_t m = output_count(n, stream.rate_hz, target_hz);
  out.frames.reserve(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double p = source_position(j, stream.rate_hz, target_hz);
    const auto i0 = static_cast<std::size_t>(std::floor(p));
    if (i0 >= n - 1) {
      out.frames.push_back(stream.frames[n - 1]);
    } else {
      out.frames.push_back(lerp(stream.frames[i0], stream.frames[i0 + 1], p - static_cast<double>(i0)));
    }
  }
  return out;
}

std::vector<LogitWindow> make_windows(const PhonemeLogitStream& stream, int window) {
  if (!is_power_of_two(window)) throw std::invalid_argument("window length must be a power of two");
  stream.validate();
  const auto n = static_cast<std::ptrdiff_t>(stream.frames.size());
  std::vector<LogitWindow> out;
  out.reserve(stream.frames.size());
  for (std::ptrdiff_t t = 0; t < n; ++t) {
    LogitWindow w;
    w.frames.resize(stream.class_count, window);
    for (int k = 0; k < window; ++k) {
      const std::ptrdiff_t src = std::clamp<std::ptrdiff_t>(t - window / 2 + k, 0, n - 1);
      w.frames.col(k) = stream.frames[static_cast<std::size_t>(src)];
    }
    out.push_back(std::move(w));
  }
  return out;
}

StreamingResampler::StreamingResampler(double source_hz, double target_hz)
    : source_hz_(source_hz), target_hz_(target_hz) {
  if (!(source_hz > 0.0) || !(target_hz > 0.0)) {
    throw std::invalid_argument("resampler rates must be positive");
  }
}

void StreamingResampler::push(const Eigen::VectorXd& frame, const Sink& sink) {
  buffer_.push_back(frame);
  ++received_;
  emit_ready(false, sink);
}

void StreamingResampler::finish(const Sink& sink) {
  if (received_ == 0) throw std::invalid_argument("cannot resample an empty logit stream");
  emit_ready(true, sink);
}

bool StreamingResampler::emit_ready(bool final, const Sink& sink) {
  const std::size_t limit = output_count(received_, source_hz_, target_hz_);
  bool emitted = false;
  while (next_output_ < limit) {
    const double p = source_position(next_output_, source_hz_, target_hz_);
    const auto i0 = static_cast<std::size_t>(std::floor(p));
    if (!final && i0 + 1 >= received_) break;
    if (i0 >= received_ - 1) {
      sink(buffer_.back());
    } else {
      sink(lerp(buffer_[i0 - buffer_base_], buffer_[i0 + 1 - buffer_base_],
                p - static_cast<double>(i0)));
    }
    emitted = true;
    ++next_output_;
    const auto next_i0 = static_cast<std::size_t>(
        std::floor(source_position(next_output_, source_hz_, target_hz_)));
    while (buffer_.size() > 1 && buffer_base_ < next_i0) {
      buffer_.pop_front();
      ++buffer_base_;
    }
  }
  return emitted;
}

StreamingWindower::StreamingWindower(int window) : window_(window) {
  if (!is_power_of_two(window)) throw std::invalid_argument("window length must be a power of two");
}

void StreamingWindower::emit(std::size_t t, std::size_t last_index, const Sink& sink) {
  LogitWindow w;
  w.frames.resize(buffer_.front().size(), window_);
  for (int k = 0; k < window_; ++k) {
    const auto want = static_cast<std::ptrdiff_t>(t) - window_ / 2 + k;
    const auto src = static_cast<std::size_t>(
        std::clamp<std::ptrdiff_t>(want, 0, static_cast<std::ptrdiff_t>(last_index)));
    w.frames.col(k) = buffer_[src - buffer_base_];
  }
  sink(w);
}

void StreamingWindower::push(const Eigen::VectorXd& frame, const Sink& sink) {
  buffer_.push_back(frame);
  ++received_;
  const std::size_t half = static_cast<std::size_t>(window_ / 2);
  // Window t reads frames up to t + K/2 - 1 (t itself when K == 1).
  while (next_output_ + std::max<std::size_t>(half, 1) <= received_) {
    emit(next_output_, received_ - 1, sink);
    ++next_output_;
    const std::size_t keep_from = next_output_ > half ? next_output_ - half : 0;
    while (buffer_base_ < keep_from && buffer_.size() > 1) {
      buffer_.pop_front();
      ++buffer_base_;
    }
  }
}

void StreamingWindower::finish(const Sink& sink) {
  if (received_ == 0) throw std::invalid_argument("cannot window an empty logit stream");
  while (next_output_ < received_) {
    emit(next_output_, received_ - 1, sink);
    ++next_output_;
  }
}

StubExtractor::StubExtractor()
    : cos_table_(kFftBins, kFrameLength),
      sin_table_(kFftBins, kFrameLength),
      band_matrix_(kPhonemeClasses - 1, kFftBins) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  for (int n = 0; n < kFrameLength; ++n) {
    const double hann = 0.5 - 0.5 * std::cos(two_pi * n / kFrameLength);
    for (int k = 0; k < kFftBins; ++k) {
      const double phase = two_pi * static_cast<double>((k * n) % 512) / 512.0;
      cos_table_(k, n) = hann * std::cos(phase);
      sin_table_(k, n) = hann * std::sin(phase);
    }
  }
  for (int band = 1; band < kPhonemeClasses; ++band) {
    for (int bin = 0; bin < kFftBins; ++bin) band_matrix_(band - 1, bin) = band_weight(band, bin);
  }
}

double StubExtractor::band_weight(int band, int bin) {
  const double spacing = static_cast<double>(kFftBins - 1) / kPhonemeClasses;
  const double center = band * spacing;
  const double half_width = 2.0 * spacing;
  return std::max(0.0, 1.0 - std::abs(bin - center) / half_width);
}

std::size_t StubExtractor::frame_count(std::size_t samples) {
  if (samples == 0) return 0;
  if (samples < static_cast<std::size_t>(kFrameLength)) return 1;
  return (samples - kFrameLength) / kHop + 1;
}

PhonemeLogitStream StubExtractor::extract(std::span<const float> pcm) const {
  if (pcm.empty()) throw std::invalid_argument("cannot extract logits from empty audio");
  PhonemeLogitStream out;
  out.rate_hz = kExtractorRateHz;
  out.class_count = kPhonemeClasses;
  const std::size_t frames = frame_count(pcm.size());
  out.frames.reserve(frames);
  const double blank = std::log(kEnergyFloor) + kBlankMargin;
  Eigen::VectorXd chunk(kFrameLength);
  for (std::size_t f = 0; f < frames; ++f) {
    const std::size_t start = f * kHop;
    for (int n = 0; n < kFrameLength; ++n) {
      const std::size_t i = start + static_cast<std::size_t>(n);
      chunk[n] = i < pcm.size() ? static_cast<double>(pcm[i]) : 0.0;
    }
    const Eigen::VectorXd re = cos_table_ * chunk;
    const Eigen::VectorXd im = sin_table_ * chunk;
    const Eigen::VectorXd power = re.array().square() + im.array().square();
    const Eigen::VectorXd energy = band_matrix_ * power;

    Eigen::VectorXd logits(kPhonemeClasses);
    logits[kBlankClass] = blank;
    logits.tail(kPhonemeClasses - 1) = (energy.array() + kEnergyFloor).log();
    out.frames.push_back(std::move(logits));
  }
  return out;
}

PhonemeLogitStream stub_extractor(std::span<const float> pcm) {
  static const StubExtractor extractor;
  return extractor.extract(pcm);
}

std::vector<std::uint8_t> encode_logits(const PhonemeLogitStream& stream) {
  stream.validate();
  ByteWriter w;
  w.magic("PHLG");
  w.u32(1);
  w.f32(static_cast<float>(stream.rate_hz));
  w.u32(static_cast<std::uint32_t>(stream.class_count));
  w.u32(static_cast<std::uint32_t>(stream.frames.size()));
  for (const auto& f : stream.frames) {
    for (Eigen::Index i = 0; i < f.size(); ++i) w.f32(static_cast<float>(f[i]));
  }
  return w.take();
}

PhonemeLogitStream decode_logits(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic("PHLG");
  if (r.u32() != 1) throw FormatError("phlg: unsupported version");
  PhonemeLogitStream s;
  s.rate_hz = r.f32();
  s.class_count = static_cast<int>(r.u32());
  const std::size_t n = r.u32();
  if (s.class_count <= 0 || n * static_cast<std::size_t>(s.class_count) > r.remaining() / 4) {
    throw FormatError("phlg: truncated payload");
  }
  s.frames.resize(n);
  for (auto& f : s.frames) {
    f.resize(s.class_count);
    for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = r.f32();
  }
  if (!r.at_end()) throw FormatError("phlg: trailing bytes");
  s.validate();
  return s;
}

void save_logits(const PhonemeLogitStream& stream, const std::filesystem::path& path) {
  write_file_bytes(path, encode_logits(stream));
}

PhonemeLogitStream load_logits(const std::filesystem::path& path) {
  return decode_logits(read_file_bytes(path));
}

WavAudio read_wav(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  ByteReader r(bytes);
  r.expect_magic("RIFF");
  r.u32();
  r.expect_magic("WAVE");
  int format = 0, channels = 0, bits = 0;
  WavAudio audio;
  bool have_fmt = false;
  while (!r.at_end()) {
    if (r.remaining() < 8) break;
    std::string id(4, '\0');
    for (auto& c : id) c = static_cast<char>(r.u8());
    const std::uint32_t size = r.u32();
    if (size > r.remaining()) throw FormatError("wav: chunk exceeds file size");
    if (id == "fmt ") {
      format = r.u16();
      channels = r.u16();
      audio.sample_rate = static_cast<int>(r.u32());
      r.u32();
      r.u16();
      bits = r.u16();
      for (std::uint32_t i = 16; i < size; ++i) r.u8();
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt || channels <= 0) throw FormatError("wav: data chunk before fmt chunk");
      const bool pcm16 = format == 1 && bits == 16;
      const bool float32 = format == 3 && bits == 32;
      if (!pcm16 && !float32) throw FormatError("wav: only 16-bit PCM and 32-bit float supported");
      const std::size_t frame_bytes = static_cast<std::size_t>(channels) * (bits / 8);
      const std::size_t count = size / frame_bytes;
      audio.samples.resize(count);
      for (std::size_t i = 0; i < count; ++i) {
        double acc = 0.0;
        for (int c = 0; c < channels; ++c) {
          acc += pcm16 ? static_cast<std::int16_t>(r.u16()) / 32768.0 : r.f32();
        }
        audio.samples[i] = static_cast<float>(acc / channels);
      }
      for (std::size_t i = count * frame_bytes; i < size; ++i) r.u8();
    } else {
      for (std::uint32_t i = 0; i < size; ++i) r.u8();
    }
    if ((size & 1u) && !r.at_end()) r.u8();
  }
  if (!have_fmt) throw FormatError("wav: missing fmt chunk");
  return audio;
}

void write_wav(const std::filesystem::path& path, const WavAudio& audio) {
  ByteWriter w;
  const auto data_bytes = static_cast<std::uint32_t>(audio.samples.size() * 2);
  w.magic("RIFF");
  w.u32(36 + data_bytes);
  w.magic("WAVE");
  w.magic("fmt ");
  w.u32(16);
  w.u16(1);
  w.u16(1);
  w.u32(static_cast<std::uint32_t>(audio.sample_rate));
  w.u32(static_cast<std::uint32_t>(audio.sample_rate * 2));
  w.u16(2);
  w.u16(16);
  w.magic("data");
  w.u32(data_bytes);
  for (float s : audio.samples) {
    const double clamped = std::clamp(static_cast<double>(s), -1.0, 32767.0 / 32768.0);
    w.u16(static_cast<std::uint16_t>(static_cast<std::int16_t>(std::lround(clamped * 32768.0))));
  }
  write_file_bytes(path, w.bytes());
}

}  // namespace roboface
