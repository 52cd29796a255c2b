#include "roboface/trainer.hpp"

#include "roboface/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace roboface {

void TrainConfig::validate() const {
  auto open_unit = [](double v) { return v > 0.0 && v < 1.0; };
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (!(weight_decay >= 0.0 && weight_decay < 1.0)) {
    throw std::invalid_argument("weight decay must be in [0, 1)");
  }
  if (!open_unit(beta1) || !open_unit(beta2)) throw std::invalid_argument("betas must be in (0, 1)");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw std::invalid_argument("dropout rate must be in [0, 1)");
  }
  if (!(mouth_weight >= 0.0)) throw std::invalid_argument("mouth weight must be >= 0");
}

void adamw_step(Eigen::VectorXd& params, const Eigen::VectorXd& gradient, AdamState& state,
                const TrainConfig& config) {
  if (state.m.size() != params.size()) state.m = Eigen::VectorXd::Zero(params.size());
  if (state.v.size() != params.size()) state.v = Eigen::VectorXd::Zero(params.size());
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  state.m = config.beta1 * state.m + (1.0 - config.beta1) * gradient;
  state.v = config.beta2 * state.v + (1.0 - config.beta2) * gradient.cwiseAbs2();
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    params[i] -= config.learning_rate *
                 (mhat / (std::sqrt(vhat) + config.epsilon) + config.weight_decay * params[i]);
  }
}

double evaluate_loss(const ModelParams& params, const HumanDecoder& decoder,
                     const std::vector<TrainingSample>& samples, double mouth_weight) {
  if (samples.empty()) throw std::invalid_argument("no samples to evaluate");
  double total = 0.0;
  for (const auto& s : samples) {
    const auto t = trace_forward(params, s.window, s.style_id);
    total += vertex_loss(decoder.decode(t.theta), s.target_vertices, decoder.mouth_mask(),
                         mouth_weight);
  }
  return total / static_cast<double>(samples.size());
}

namespace {

void check_samples(const std::vector<TrainingSample>& samples, const NetShape& shape,
                   const HumanDecoder& decoder, const char* what) {
  for (const auto& s : samples) {
    if (s.style_id < 0 || s.style_id >= shape.styles) {
      throw std::out_of_range(std::string(what) + " sample has an invalid style id");
    }
    if (static_cast<std::size_t>(s.target_vertices.size()) != 3 * decoder.vertex_count()) {
      throw std::invalid_argument(std::string(what) + " sample target does not match the rig");
    }
  }
}

}  // namespace

TrainResult train(const ModelParams& init, const LbsRig& human_rig,
                  const std::vector<TrainingSample>& train_set,
                  const std::vector<TrainingSample>& val_set, const TrainConfig& config,
                  const AdamState* resume, const EpochCallback& on_epoch) {
  config.validate();
  if (train_set.empty()) throw std::invalid_argument("training set is empty");
  if (init.shape().blendshapes != static_cast<int>(human_rig.blendshape_count())) {
    throw std::invalid_argument("model output count does not match the human rig");
  }
  const HumanDecoder decoder(human_rig);
  check_samples(train_set, init.shape(), decoder, "training");
  check_samples(val_set, init.shape(), decoder, "validation");

  TrainResult result{init, {}, {}};
  const Eigen::Index p = init.values().size();
  if (resume && resume->m.size() == p && resume->v.size() == p) {
    result.adam = *resume;
  } else {
    result.adam = AdamState{Eigen::VectorXd::Zero(p), Eigen::VectorXd::Zero(p), 0};
  }

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const Eigen::Index mask_size = 2 * init.shape().hidden;
  const unsigned workers = std::max(1u, config.workers);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle_range(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;

    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      const std::size_t n = end - start;

      std::vector<Eigen::VectorXd> masks(n);
      if (config.dropout_rate > 0.0) {
        for (auto& m : masks) m = sample_dropout_mask(mask_size, config.dropout_rate, rng);
      }

      std::vector<LossAndGradient> parts(n);
      auto work = [&](std::size_t first, std::size_t last) {
        for (std::size_t i = first; i < last; ++i) {
          parts[i] = backward(result.params, decoder, train_set[order[start + i]],
                              config.mouth_weight, masks[i]);
        }
      };
      const unsigned used = static_cast<unsigned>(std::min<std::size_t>(workers, n));
      if (used <= 1) {
        work(0, n);
      } else {
        std::vector<std::thread> threads;
        for (unsigned w = 0; w < used; ++w) {
          threads.emplace_back(work, n * w / used, n * (w + 1) / used);
        }
        for (auto& t : threads) t.join();
      }

      Eigen::VectorXd gradient = Eigen::VectorXd::Zero(p);
      for (const auto& part : parts) {
        gradient += part.gradient;
        epoch_loss += part.loss;
      }
      gradient /= static_cast<double>(n);
      adamw_step(result.params.values(), gradient, result.adam, config);
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = epoch_loss / static_cast<double>(train_set.size());
    if (!val_set.empty()) {
      stats.val_loss = evaluate_loss(result.params, decoder, val_set, config.mouth_weight);
    }
    result.history.push_back(stats);
    if (on_epoch) on_epoch(stats);
  }
  return result;
}

}  // namespace roboface
