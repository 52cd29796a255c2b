#pragma once

#include "roboface/rig_sim.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <span>
#include <vector>

namespace roboface {

inline constexpr std::uint8_t kServoSync = 0xFA;

/// One command packet: 0xFA, u16 counter, u8 channel count, u16 pulses (us),
/// u8 checksum chosen so every byte of the frame sums to 0 mod 256.
struct ServoFrame {
  std::uint16_t counter = 0;
  std::vector<std::uint16_t> pulses;

  bool operator==(const ServoFrame&) const = default;
};

std::size_t encoded_frame_size(std::size_t channels);
std::vector<std::uint8_t> encode_frame(const ServoFrame& frame);
/// Throws FormatError on bad sync, length or checksum.
ServoFrame decode_frame(std::span<const std::uint8_t> bytes);
/// Splits a concatenation of frames.
std::vector<ServoFrame> decode_frames(std::span<const std::uint8_t> bytes);

/// Pulse width for a normalized value, rounded to the nearest microsecond.
std::uint16_t pulse_for(const ActuatorChannel& channel, double u);
ServoFrame make_frame(const RigConfig& config, const ActuatorState& state, std::uint16_t counter);
/// True when every pulse lies within its channel's calibration range.
bool pulses_in_range(const RigConfig& config, const ServoFrame& frame);

/// Destination for encoded frames (serial port stand-in).
class ByteSink {
 public:
  virtual ~ByteSink() = default;
  virtual void write(std::span<const std::uint8_t> bytes) = 0;
  virtual void flush() {}
};

class FileSink : public ByteSink {
 public:
  explicit FileSink(const std::filesystem::path& path);
  void write(std::span<const std::uint8_t> bytes) override;
  void flush() override;

 private:
  std::ofstream out_;
};

/// Keeps everything written, for tests and in-process consumers.
class LoopbackSink : public ByteSink {
 public:
  void write(std::span<const std::uint8_t> bytes) override;
  std::vector<std::uint8_t> bytes() const;
  std::vector<ServoFrame> frames() const;

 private:
  mutable std::mutex mutex_;
  std::vector<std::uint8_t> bytes_;
};

}  // namespace roboface
