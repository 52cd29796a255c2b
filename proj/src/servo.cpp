#include "roboface/servo.hpp"

#include "roboface/binary_io.hpp"

#include <algorithm>
#include <cmath>

namespace roboface {

std::size_t encoded_frame_size(std::size_t channels) { return 4 + 2 * channels + 1; }

std::vector<std::uint8_t> encode_frame(const ServoFrame& frame) {
  if (frame.pulses.size() > 255) throw std::invalid_argument("a servo frame holds at most 255 channels");
  std::vector<std::uint8_t> out;
  out.reserve(encoded_frame_size(frame.pulses.size()));
  out.push_back(kServoSync);
  out.push_back(static_cast<std::uint8_t>(frame.counter & 0xFF));
  out.push_back(static_cast<std::uint8_t>(frame.counter >> 8));
  out.push_back(static_cast<std::uint8_t>(frame.pulses.size()));
  for (auto p : frame.pulses) {
    out.push_back(static_cast<std::uint8_t>(p & 0xFF));
    out.push_back(static_cast<std::uint8_t>(p >> 8));
  }
  unsigned sum = 0;
  for (auto b : out) sum += b;
  out.push_back(static_cast<std::uint8_t>((256 - (sum & 0xFF)) & 0xFF));
  return out;
}

ServoFrame decode_frame(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 5) throw FormatError("servo frame too short");
  if (bytes[0] != kServoSync) throw FormatError("servo frame has a bad sync byte");
  const std::size_t channels = bytes[3];
  if (bytes.size() != encoded_frame_size(channels)) {
    throw FormatError("servo frame length does not match its channel count");
  }
  unsigned sum = 0;
  for (auto b : bytes) sum += b;
  if ((sum & 0xFF) != 0) throw FormatError("servo frame checksum mismatch");
  ServoFrame f;
  f.counter = static_cast<std::uint16_t>(bytes[1] | (bytes[2] << 8));
  f.pulses.resize(channels);
  for (std::size_t i = 0; i < channels; ++i) {
    f.pulses[i] = static_cast<std::uint16_t>(bytes[4 + 2 * i] | (bytes[5 + 2 * i] << 8));
  }
  return f;
}

std::vector<ServoFrame> decode_frames(std::span<const std::uint8_t> bytes) {
  std::vector<ServoFrame> out;
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    if (bytes.size() - pos < 4) throw FormatError("truncated servo frame");
    const std::size_t len = encoded_frame_size(bytes[pos + 3]);
    if (bytes.size() - pos < len) throw FormatError("truncated servo frame");
    out.push_back(decode_frame(bytes.subspan(pos, len)));
    pos += len;
  }
  return out;
}

std::uint16_t pulse_for(const ActuatorChannel& channel, double u) {
  const double t = std::clamp(u, 0.0, 1.0);
  const double p = channel.pulse_at_zero_us + t * (channel.pulse_at_one_us - channel.pulse_at_zero_us);
  return static_cast<std::uint16_t>(std::llround(p));
}

ServoFrame make_frame(const RigConfig& config, const ActuatorState& state, std::uint16_t counter) {
  if (state.u.size() != static_cast<Eigen::Index>(config.channel_count())) {
    throw std::invalid_argument("actuator state does not match the channel count");
  }
  ServoFrame f;
  f.counter = counter;
  f.pulses.reserve(config.channel_count());
  for (std::size_t c = 0; c < config.channel_count(); ++c) {
    f.pulses.push_back(pulse_for(config.channels[c], state.u[static_cast<Eigen::Index>(c)]));
  }
  return f;
}

bool pulses_in_range(const RigConfig& config, const ServoFrame& frame) {
  if (frame.pulses.size() != config.channel_count()) return false;
  for (std::size_t c = 0; c < frame.pulses.size(); ++c) {
    const auto& ch = config.channels[c];
    const double lo = std::min(ch.pulse_at_zero_us, ch.pulse_at_one_us);
    const double hi = std::max(ch.pulse_at_zero_us, ch.pulse_at_one_us);
    if (frame.pulses[c] < std::floor(lo) || frame.pulses[c] > std::ceil(hi)) return false;
  }
  return true;
}

FileSink::FileSink(const std::filesystem::path& path) : out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
}

void FileSink::write(std::span<const std::uint8_t> bytes) {
  out_.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out_) throw std::runtime_error("servo stream write failed");
}

void FileSink::flush() { out_.flush(); }

void LoopbackSink::write(std::span<const std::uint8_t> bytes) {
  std::lock_guard lock(mutex_);
  bytes_.insert(bytes_.end(), bytes.begin(), bytes.end());
}

std::vector<std::uint8_t> LoopbackSink::bytes() const {
  std::lock_guard lock(mutex_);
  return bytes_;
}

std::vector<ServoFrame> LoopbackSink::frames() const { return decode_frames(bytes()); }

}  // namespace roboface
