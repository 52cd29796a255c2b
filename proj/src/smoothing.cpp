#include "roboface/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace roboface {

using cd = std::complex<double>;

void FilterSpec::validate() const {
  if (order < 1) throw std::invalid_argument("filter order must be >= 1");
  if (!(sample_hz > 0.0)) throw std::invalid_argument("sample rate must be positive");
  if (!(cutoff_hz > 0.0 && cutoff_hz < 0.5 * sample_hz)) {
    throw std::invalid_argument("cutoff must lie strictly between 0 and the Nyquist frequency");
  }
}

BiquadCascade design(const FilterSpec& spec) {
  spec.validate();
  const double fs2 = 2.0 * spec.sample_hz;
  const double wc = fs2 * std::tan(std::numbers::pi * spec.cutoff_hz / spec.sample_hz);
  const int n = spec.order;
  auto bilinear = [fs2](cd s) { return (fs2 + s) / (fs2 - s); };

  std::vector<Biquad> sections;
  for (int k = 0; k < n / 2; ++k) {
    const double angle = std::numbers::pi * (2.0 * k + n + 1) / (2.0 * n);
    const cd z = bilinear(wc * std::polar(1.0, angle));
    Biquad q;
    q.a1 = -2.0 * z.real();
    q.a2 = std::norm(z);
    const double gain = (1.0 + q.a1 + q.a2) / 4.0;
    q.b0 = gain;
    q.b1 = 2.0 * gain;
    q.b2 = gain;
    sections.push_back(q);
  }
  if (n % 2 == 1) {
    const double z = bilinear(cd(-wc, 0.0)).real();
    Biquad q;
    q.a1 = -z;
    const double gain = (1.0 + q.a1) / 2.0;
    q.b0 = gain;
    q.b1 = gain;
    sections.push_back(q);
  }
  return BiquadCascade(std::move(sections), spec.sample_hz);
}

std::complex<double> BiquadCascade::response(double freq_hz) const {
  const cd zi = std::polar(1.0, -2.0 * std::numbers::pi * freq_hz / sample_hz_);  // z^-1
  cd h(1.0, 0.0);
  for (const auto& s : sections_) {
    h *= (s.b0 + zi * (s.b1 + zi * s.b2)) / (1.0 + zi * (s.a1 + zi * s.a2));
  }
  return h;
}

double BiquadCascade::magnitude_db(double freq_hz) const {
  return 20.0 * std::log10(magnitude(freq_hz));
}

double BiquadCascade::group_delay(double freq_hz) const {
  // -d(phase)/d(omega) by a central difference, in samples.
  const double w = 2.0 * std::numbers::pi * freq_hz / sample_hz_;
  const double h = 1e-5;
  const double to_hz = sample_hz_ / (2.0 * std::numbers::pi);
  const cd ratio = response((w + h) * to_hz) / response((w - h) * to_hz);
  return -std::arg(ratio) / (2.0 * h);
}

std::vector<std::complex<double>> BiquadCascade::poles() const {
  std::vector<cd> out;
  for (const auto& s : sections_) {
    if (s.a2 == 0.0) {
      out.emplace_back(-s.a1, 0.0);
      continue;
    }
    const cd disc = std::sqrt(cd(s.a1 * s.a1 - 4.0 * s.a2, 0.0));
    out.push_back((-s.a1 + disc) / 2.0);
    out.push_back((-s.a1 - disc) / 2.0);
  }
  return out;
}

ChannelFilter::ChannelFilter(const BiquadCascade* cascade) : cascade_(cascade) { reset(); }

void ChannelFilter::reset() {
  z1_.assign(cascade_->sections().size(), 0.0);
  z2_.assign(cascade_->sections().size(), 0.0);
  primed_ = false;
  offset_ = 0.0;
}

double ChannelFilter::step(double x) {
  if (!primed_) {
    offset_ = x;
    primed_ = true;
  }
  double v = x - offset_;
  const auto& sections = cascade_->sections();
  for (std::size_t i = 0; i < sections.size(); ++i) {
    const auto& s = sections[i];
    const double y = s.b0 * v + z1_[i];
    z1_[i] = s.b1 * v - s.a1 * y + z2_[i];
    z2_[i] = s.b2 * v - s.a2 * y;
    v = y;
  }
  return v + offset_;
}

SequenceFilter::SequenceFilter(BiquadCascade cascade, std::size_t channels)
    : cascade_(std::make_unique<BiquadCascade>(std::move(cascade))) {
  channels_.reserve(channels);
  for (std::size_t c = 0; c < channels; ++c) channels_.emplace_back(cascade_.get());
}

BlendCoefficients SequenceFilter::step(const BlendCoefficients& frame) {
  if (frame.size() != channels_.size()) {
    throw std::invalid_argument("frame width does not match the filter channel count");
  }
  BlendCoefficients out = frame;
  for (std::size_t c = 0; c < channels_.size(); ++c) {
    const auto i = static_cast<Eigen::Index>(c);
    out.values[i] = std::clamp(channels_[c].step(frame.values[i]), 0.0, 1.0);
  }
  return out;
}

MotionSequence filter_sequence(const BiquadCascade& cascade, const MotionSequence& seq) {
  if (std::abs(seq.fps - cascade.sample_hz()) > 1e-9 * cascade.sample_hz()) {
    throw std::invalid_argument("sequence fps " + std::to_string(seq.fps) +
                                " differs from the filter rate " +
                                std::to_string(cascade.sample_hz()));
  }
  MotionSequence out;
  out.fps = seq.fps;
  SequenceFilter filter(cascade, seq.blendshape_count());
  out.frames.reserve(seq.frames.size());
  for (const auto& f : seq.frames) out.frames.push_back(filter.step(f));
  return out;
}

}  // namespace roboface
