#pragma once

#include "roboface/lbs.hpp"

#include <complex>
#include <memory>
#include <vector>

namespace roboface {

struct FilterSpec {
  int order = 5;
  double cutoff_hz = 7.0;
  double sample_hz = 25.0;

  void validate() const;
};

/// y[n] = b0 x[n] + b1 x[n-1] + b2 x[n-2] - a1 y[n-1] - a2 y[n-2]; first-order
/// sections have b2 = a2 = 0.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0, a1 = 0.0, a2 = 0.0;
};

class BiquadCascade {
 public:
  BiquadCascade() = default;
  BiquadCascade(std::vector<Biquad> sections, double sample_hz)
      : sections_(std::move(sections)), sample_hz_(sample_hz) {}

  const std::vector<Biquad>& sections() const { return sections_; }
  double sample_hz() const { return sample_hz_; }

  std::complex<double> response(double freq_hz) const;
  double magnitude(double freq_hz) const { return std::abs(response(freq_hz)); }
  double magnitude_db(double freq_hz) const;
  /// Group delay in samples.
  double group_delay(double freq_hz) const;
  /// Roots of every section's denominator.
  std::vector<std::complex<double>> poles() const;

 private:
  std::vector<Biquad> sections_;
  double sample_hz_ = 25.0;
};

/// Digital Butterworth low-pass: analog prototype poles at the pre-warped
/// cutoff, bilinear transform, conjugate pairs into second-order sections (a
/// first-order section for odd orders), each scaled to unity gain at DC.
BiquadCascade design(const FilterSpec& spec);

/// One causal filter channel in transposed direct form II. The first input
/// x0 is treated as the infinite past: the cascade filters x - x0 from rest
/// and adds x0 back, so a constant input passes through unchanged.
class ChannelFilter {
 public:
  explicit ChannelFilter(const BiquadCascade* cascade);
  double step(double x);
  void reset();

 private:
  const BiquadCascade* cascade_;
  std::vector<double> z1_, z2_;
  double offset_ = 0.0;
  bool primed_ = false;
};

/// Independent channel filters over a coefficient vector, output clamped to [0, 1].
class SequenceFilter {
 public:
  SequenceFilter(BiquadCascade cascade, std::size_t channels);
  BlendCoefficients step(const BlendCoefficients& frame);
  const BiquadCascade& cascade() const { return *cascade_; }

 private:
  std::unique_ptr<BiquadCascade> cascade_;
  std::vector<ChannelFilter> channels_;
};

/// Causal per-channel filtering; seq.fps must equal the cascade's sample rate.
MotionSequence filter_sequence(const BiquadCascade& cascade, const MotionSequence& seq);

}  // namespace roboface
