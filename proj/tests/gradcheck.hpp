#pragma once

#include "fixtures.hpp"

#include "roboface/motion_net.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gradcheck {

struct TinyNet {
  roboface::NetShape shape;
  roboface::LbsRig rig;
  roboface::ModelParams params;
  roboface::TrainingSample sample;
};

/// H=4, B=3, V=5, K=4 with every parameter drawn at random so no gradient
/// entry is structurally zero. The 0.3 scale keeps the output sigmoid away
/// from saturation, where central differences drown in roundoff.
inline TinyNet tiny_net(std::uint64_t seed) {
  roboface::NetShape shape{4, 4, 2, 3, 6};
  TinyNet net{shape, fixtures::random_rig(5, 3, seed), roboface::ModelParams(shape), {}};
  std::mt19937_64 rng(seed + 1);
  for (auto& v : net.params.values()) v = 0.3 * roboface::standard_normal(rng);
  net.sample.window.frames.resize(shape.classes, shape.window);
  for (Eigen::Index i = 0; i < net.sample.window.frames.size(); ++i) {
    net.sample.window.frames.data()[i] = roboface::uniform(rng, -2.0, 2.0);
  }
  net.sample.style_id = 1;
  net.sample.target_vertices = net.rig.mesh.positions;
  for (auto& x : net.sample.target_vertices) x += roboface::uniform(rng, -2.0, 2.0);
  return net;
}

struct Report {
  double worst = 0.0;
  std::string worst_name;
  std::size_t checked = 0;
};

/// Relative error |a - n| / max(|a|, |n|) per parameter against central
/// differences with step h; entries where both are below `floor` are skipped.
inline Report check(const TinyNet& net, const Eigen::VectorXd& dropout_mask, double mouth_weight,
                    double h = 1e-4, double floor = 1e-10) {
  const roboface::HumanDecoder decoder(net.rig);
  const auto analytic = roboface::backward(net.params, decoder, net.sample, mouth_weight, dropout_mask);
  auto loss_at = [&](const roboface::ModelParams& p) {
    const auto t = roboface::trace_forward(p, net.sample.window, net.sample.style_id, dropout_mask);
    return roboface::vertex_loss(decoder.decode(t.theta), net.sample.target_vertices, decoder.mouth_mask(),
                                 mouth_weight);
  };
  Report r;
  roboface::ModelParams probe = net.params;
  for (const auto* slot : net.params.layout().slots()) {
    for (Eigen::Index i = 0; i < slot->size(); ++i) {
      const Eigen::Index k = slot->offset + i;
      const double x = probe.values()[k];
      probe.values()[k] = x + h;
      const double up = loss_at(probe);
      probe.values()[k] = x - h;
      const double down = loss_at(probe);
      probe.values()[k] = x;
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic.gradient[k];
      const double scale = std::max(std::abs(a), std::abs(numeric));
      if (scale < floor) continue;
      ++r.checked;
      const double err = std::abs(a - numeric) / scale;
      if (err > r.worst) {
        r.worst = err;
        r.worst_name = slot->name + "[" + std::to_string(i) + "]";
      }
    }
  }
  return r;
}

}  // namespace gradcheck
