#pragma once

#include "roboface/frontend.hpp"
#include "roboface/lbs.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace roboface {

/// Network dimensions: window K, hidden width H, style count N, output B and
/// logit classes. The fusion stack has log2(K) residual blocks.
struct NetShape {
  int window = 8;
  int hidden = 64;
  int styles = 10;
  int blendshapes = 51;
  int classes = kPhonemeClasses;

  int block_count() const;
  void validate() const;
  bool operator==(const NetShape&) const = default;
};

/// One named tensor inside the flat parameter vector. Each tap of a tensor is
/// a column-major rows x cols matrix; convolution weights have three taps.
struct TensorSlot {
  std::string name;
  Eigen::Index offset = 0;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  Eigen::Index taps = 1;

  Eigen::Index size() const { return rows * cols * taps; }
};

struct BlockSlots {
  TensorSlot conv1_weight, conv1_bias, conv2_weight, conv2_bias, shortcut_weight;
};

/// Tensor layout for a shape, in checkpoint order: per block (conv1 weight,
/// conv1 bias, conv2 weight, conv2 bias, shortcut weight), then the style
/// table (H x N, one column per style), head1 weight/bias, head2 weight/bias.
struct ParamLayout {
  std::vector<BlockSlots> blocks;
  TensorSlot style_table, head1_weight, head1_bias, head2_weight, head2_bias;
  Eigen::Index total = 0;

  explicit ParamLayout(const NetShape& shape);
  std::vector<const TensorSlot*> slots() const;
};

/// Trainable weights of the speech-to-coefficient model, stored flat.
class ModelParams {
 public:
  explicit ModelParams(const NetShape& shape);

  /// Fan-in scaled uniform weights, zero biases and a zero style table.
  static ModelParams initialized(const NetShape& shape, std::uint64_t seed);

  const NetShape& shape() const { return shape_; }
  const ParamLayout& layout() const { return layout_; }
  Eigen::VectorXd& values() { return values_; }
  const Eigen::VectorXd& values() const { return values_; }

  Eigen::Map<Eigen::MatrixXd> matrix(const TensorSlot& slot, Eigen::Index tap = 0);
  Eigen::Map<const Eigen::MatrixXd> matrix(const TensorSlot& slot, Eigen::Index tap = 0) const;

  bool all_finite() const { return values_.allFinite(); }

 private:
  NetShape shape_;
  ParamLayout layout_;
  Eigen::VectorXd values_;
};

enum class Mode { Train, Eval };

/// Intermediate values of one forward pass, kept for backpropagation.
struct ForwardTrace {
  struct Block {
    Eigen::MatrixXd input;     // C_in x L
    Eigen::MatrixXd pre1;      // H x L/2, before ReLU
    Eigen::MatrixXd act1;      // H x L/2
    Eigen::MatrixXd output;    // H x L/2
  };
  std::vector<Block> blocks;
  int style_id = 0;
  Eigen::VectorXd fused;       // speech embedding + style embedding
  Eigen::VectorXd head_pre;    // 2H
  Eigen::VectorXd dropout_mask;  // 2H, already scaled by 1/(1-p); empty in eval mode
  Eigen::VectorXd head_act;    // 2H after ReLU and dropout
  Eigen::VectorXd logits;      // B
  Eigen::VectorXd theta;       // B
};

/// Inverted-dropout mask: each entry is 0 with probability `rate`, else 1/(1-rate).
Eigen::VectorXd sample_dropout_mask(Eigen::Index size, double rate, std::mt19937_64& rng);

/// Forward pass; `dropout_mask` empty means eval mode.
ForwardTrace trace_forward(const ModelParams& params, const LogitWindow& window, int style_id,
                           const Eigen::VectorXd& dropout_mask = {});

/// theta in (0,1)^B. Train mode draws a dropout mask from `rng` (required).
BlendCoefficients forward(const ModelParams& params, const LogitWindow& window, int style_id,
                          Mode mode = Mode::Eval, std::mt19937_64* rng = nullptr,
                          double dropout_rate = 0.1);

/// Single-precision copy of a model for inference.
class FloatModel {
 public:
  explicit FloatModel(const ModelParams& params);
  Eigen::VectorXf forward(const LogitWindow& window, int style_id) const;

 private:
  NetShape shape_;
  ParamLayout layout_;
  Eigen::VectorXf values_;
};

/// Frozen linear map from coefficients to vertex positions: a fully connected
/// layer with the rig's displacement fields as weights and zero bias, followed
/// by adding the neutral face.
class HumanDecoder {
 public:
  explicit HumanDecoder(const LbsRig& rig);

  Eigen::VectorXd decode(const Eigen::VectorXd& theta) const;
  /// d loss / d theta from d loss / d vertices; the weights receive nothing.
  Eigen::VectorXd backprop(const Eigen::VectorXd& vertex_gradient) const;

  const Eigen::MatrixXd& weights() const { return weights_; }
  const Eigen::VectorXd& neutral() const { return neutral_; }
  const std::vector<std::uint32_t>& mouth_mask() const { return mouth_mask_; }
  std::size_t vertex_count() const { return static_cast<std::size_t>(neutral_.size()) / 3; }

 private:
  Eigen::MatrixXd weights_;  // 3V x B
  Eigen::VectorXd neutral_;
  std::vector<std::uint32_t> mouth_mask_;
};

Eigen::VectorXd human_decode(const LbsRig& rig, const BlendCoefficients& theta);

/// Sum of squared coordinate errors over the face plus `mouth_weight` times
/// the same sum over the coordinates of the mouth-mask vertices.
double vertex_loss(const Eigen::VectorXd& predicted, const Eigen::VectorXd& target,
                   const std::vector<std::uint32_t>& mouth_mask, double mouth_weight);
Eigen::VectorXd vertex_loss_gradient(const Eigen::VectorXd& predicted,
                                     const Eigen::VectorXd& target,
                                     const std::vector<std::uint32_t>& mouth_mask,
                                     double mouth_weight);

struct TrainingSample {
  LogitWindow window;
  int style_id = 0;
  Eigen::VectorXd target_vertices;  // 3V
};

struct LossAndGradient {
  double loss = 0.0;
  Eigen::VectorXd gradient;  // same layout as ModelParams::values()
};

/// Exact gradient of the vertex loss through decoder, head, style table and
/// fusion stack. `dropout_mask` must be the mask the forward pass used.
LossAndGradient backward(const ModelParams& params, const HumanDecoder& decoder,
                         const TrainingSample& sample, double mouth_weight,
                         const Eigen::VectorXd& dropout_mask = {});

/// First and second Adam moments plus the step count.
struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  std::uint64_t step = 0;
};

// ".mnet": "MNET", u32 version=1, u32 K, H, N, B, class_count, parameters f64
// in layout order, then optionally "ADAM", u64 step, m f64[P], v f64[P].
std::vector<std::uint8_t> encode_checkpoint(const ModelParams& params,
                                            const AdamState* adam = nullptr);
ModelParams decode_checkpoint(std::span<const std::uint8_t> bytes,
                              std::optional<AdamState>* adam = nullptr);
void save_checkpoint(const ModelParams& params, const std::filesystem::path& path,
                     const AdamState* adam = nullptr);
ModelParams load_checkpoint(const std::filesystem::path& path,
                            std::optional<AdamState>* adam = nullptr);

}  // namespace roboface
