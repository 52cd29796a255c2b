#include "roboface/motion_net.hpp"

#include "roboface/binary_io.hpp"
#include "roboface/random.hpp"

#include <cmath>
#include <stdexcept>

namespace roboface {

namespace {

template <class T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <class T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

template <class T>
Eigen::Map<const Mat<T>> view(const Vec<T>& values, const TensorSlot& s, Eigen::Index tap = 0) {
  return {values.data() + s.offset + tap * s.rows * s.cols, s.rows, s.cols};
}

Eigen::Map<Eigen::MatrixXd> view_mut(Eigen::VectorXd& values, const TensorSlot& s,
                                     Eigen::Index tap = 0) {
  return {values.data() + s.offset + tap * s.rows * s.cols, s.rows, s.cols};
}

Eigen::Index strided_length(Eigen::Index length) { return (length - 1) / 2 + 1; }

// conv(k=3, s=2, pad 1) -> bias -> ReLU -> conv(k=3, s=1, pad 1) -> bias,
// plus a 1x1 stride-2 projection of the input.
template <class T>
void block_forward(const Vec<T>& p, const BlockSlots& s, const Mat<T>& x, Mat<T>& pre1,
                   Mat<T>& act1, Mat<T>& out) {
  const Eigen::Index length = x.cols();
  const Eigen::Index out_length = strided_length(length);
  const Eigen::Index h = s.conv1_bias.rows;

  const auto b1 = view<T>(p, s.conv1_bias);
  pre1.resize(h, out_length);
  for (Eigen::Index j = 0; j < out_length; ++j) {
    pre1.col(j) = b1;
    for (Eigen::Index k = 0; k < 3; ++k) {
      const Eigen::Index src = 2 * j + k - 1;
      if (src >= 0 && src < length) pre1.col(j).noalias() += view<T>(p, s.conv1_weight, k) * x.col(src);
    }
  }
  act1 = pre1.cwiseMax(T(0));

  const auto b2 = view<T>(p, s.conv2_bias);
  const auto shortcut = view<T>(p, s.shortcut_weight);
  out.resize(h, out_length);
  for (Eigen::Index j = 0; j < out_length; ++j) {
    out.col(j) = b2;
    for (Eigen::Index k = 0; k < 3; ++k) {
      const Eigen::Index src = j + k - 1;
      if (src >= 0 && src < out_length) out.col(j).noalias() += view<T>(p, s.conv2_weight, k) * act1.col(src);
    }
    out.col(j).noalias() += shortcut * x.col(2 * j);
  }
}

template <class T>
Vec<T> sigmoid(const Vec<T>& x) {
  return (T(1) + (-x.array()).exp()).inverse().matrix();
}

template <class T>
Vec<T> head_forward(const NetShape& shape, const ParamLayout& layout, const Vec<T>& p,
                    const Mat<T>& window, int style_id) {
  Mat<T> x = window;
  Mat<T> pre1, act1, out;
  for (const auto& b : layout.blocks) {
    block_forward<T>(p, b, x, pre1, act1, out);
    x = out;
  }
  (void)shape;
  const Vec<T> fused = x.col(0) + view<T>(p, layout.style_table).col(style_id);
  Vec<T> hidden = view<T>(p, layout.head1_weight) * fused + view<T>(p, layout.head1_bias);
  hidden = hidden.cwiseMax(T(0));
  const Vec<T> logits = view<T>(p, layout.head2_weight) * hidden + view<T>(p, layout.head2_bias);
  return sigmoid<T>(logits);
}

void check_inputs(const NetShape& shape, const LogitWindow& window, int style_id) {
  if (style_id < 0 || style_id >= shape.styles) {
    throw std::out_of_range("style id " + std::to_string(style_id) + " outside [0, " +
                            std::to_string(shape.styles) + ")");
  }
  if (window.length() != shape.window || window.class_count() != shape.classes) {
    throw std::invalid_argument("logit window shape does not match the model");
  }
}

}  // namespace

int NetShape::block_count() const {
  int m = 0;
  for (int k = window; k > 1; k >>= 1) ++m;
  return m;
}

void NetShape::validate() const {
  if (!is_power_of_two(window) || window < 2) {
    throw std::invalid_argument("window must be a power of two >= 2");
  }
  if (hidden < 1 || styles < 1 || blendshapes < 1 || classes < 1) {
    throw std::invalid_argument("network dimensions must be positive");
  }
}

ParamLayout::ParamLayout(const NetShape& shape) {
  shape.validate();
  auto add = [this](std::string name, Eigen::Index rows, Eigen::Index cols, Eigen::Index taps = 1) {
    TensorSlot s{std::move(name), total, rows, cols, taps};
    total += s.size();
    return s;
  };
  const Eigen::Index h = shape.hidden;
  Eigen::Index in = shape.classes;
  for (int m = 0; m < shape.block_count(); ++m) {
    const std::string prefix = "fusion." + std::to_string(m) + ".";
    BlockSlots b;
    b.conv1_weight = add(prefix + "conv1.weight", h, in, 3);
    b.conv1_bias = add(prefix + "conv1.bias", h, 1);
    b.conv2_weight = add(prefix + "conv2.weight", h, h, 3);
    b.conv2_bias = add(prefix + "conv2.bias", h, 1);
    b.shortcut_weight = add(prefix + "shortcut.weight", h, in);
    blocks.push_back(std::move(b));
    in = h;
  }
  style_table = add("style.table", h, shape.styles);
  head1_weight = add("head1.weight", 2 * h, h);
  head1_bias = add("head1.bias", 2 * h, 1);
  head2_weight = add("head2.weight", shape.blendshapes, 2 * h);
  head2_bias = add("head2.bias", shape.blendshapes, 1);
}

std::vector<const TensorSlot*> ParamLayout::slots() const {
  std::vector<const TensorSlot*> out;
  for (const auto& b : blocks) {
    out.insert(out.end(), {&b.conv1_weight, &b.conv1_bias, &b.conv2_weight, &b.conv2_bias,
                           &b.shortcut_weight});
  }
  out.insert(out.end(), {&style_table, &head1_weight, &head1_bias, &head2_weight, &head2_bias});
  return out;
}

ModelParams::ModelParams(const NetShape& shape)
    : shape_(shape), layout_(shape), values_(Eigen::VectorXd::Zero(layout_.total)) {}

ModelParams ModelParams::initialized(const NetShape& shape, std::uint64_t seed) {
  ModelParams p(shape);
  std::mt19937_64 rng(seed);
  auto fill = [&](const TensorSlot& s, double fan_in) {
    const double bound = 1.0 / std::sqrt(fan_in);
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      p.values_[s.offset + i] = uniform(rng, -bound, bound);
    }
  };
  for (const auto& b : p.layout_.blocks) {
    fill(b.conv1_weight, static_cast<double>(b.conv1_weight.cols * 3));
    fill(b.conv2_weight, static_cast<double>(b.conv2_weight.cols * 3));
    fill(b.shortcut_weight, static_cast<double>(b.shortcut_weight.cols));
  }
  fill(p.layout_.head1_weight, static_cast<double>(p.layout_.head1_weight.cols));
  fill(p.layout_.head2_weight, static_cast<double>(p.layout_.head2_weight.cols));
  return p;
}

Eigen::Map<Eigen::MatrixXd> ModelParams::matrix(const TensorSlot& slot, Eigen::Index tap) {
  return view_mut(values_, slot, tap);
}

Eigen::Map<const Eigen::MatrixXd> ModelParams::matrix(const TensorSlot& slot, Eigen::Index tap) const {
  return view<double>(values_, slot, tap);
}

Eigen::VectorXd sample_dropout_mask(Eigen::Index size, double rate, std::mt19937_64& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw std::invalid_argument("dropout rate must be in [0, 1)");
  Eigen::VectorXd mask(size);
  const double keep_scale = 1.0 / (1.0 - rate);
  for (Eigen::Index i = 0; i < size; ++i) mask[i] = uniform01(rng) < rate ? 0.0 : keep_scale;
  return mask;
}

ForwardTrace trace_forward(const ModelParams& params, const LogitWindow& window, int style_id,
                           const Eigen::VectorXd& dropout_mask) {
  const auto& shape = params.shape();
  const auto& layout = params.layout();
  check_inputs(shape, window, style_id);
  if (dropout_mask.size() != 0 && dropout_mask.size() != 2 * shape.hidden) {
    throw std::invalid_argument("dropout mask has the wrong length");
  }

  ForwardTrace t;
  t.style_id = style_id;
  t.blocks.resize(layout.blocks.size());
  Eigen::MatrixXd x = window.frames;
  for (std::size_t m = 0; m < layout.blocks.size(); ++m) {
    auto& b = t.blocks[m];
    b.input = std::move(x);
    block_forward<double>(params.values(), layout.blocks[m], b.input, b.pre1, b.act1, b.output);
    x = b.output;
  }
  t.fused = x.col(0) + params.matrix(layout.style_table).col(style_id);
  t.head_pre = params.matrix(layout.head1_weight) * t.fused + params.matrix(layout.head1_bias);
  t.head_act = t.head_pre.cwiseMax(0.0);
  if (dropout_mask.size() != 0) {
    t.dropout_mask = dropout_mask;
    t.head_act = t.head_act.cwiseProduct(dropout_mask);
  }
  t.logits = params.matrix(layout.head2_weight) * t.head_act + params.matrix(layout.head2_bias);
  t.theta = sigmoid<double>(t.logits);
  return t;
}

BlendCoefficients forward(const ModelParams& params, const LogitWindow& window, int style_id,
                          Mode mode, std::mt19937_64* rng, double dropout_rate) {
  Eigen::VectorXd mask;
  if (mode == Mode::Train) {
    if (!rng) throw std::invalid_argument("train-mode forward needs a random source");
    mask = sample_dropout_mask(2 * params.shape().hidden, dropout_rate, *rng);
  }
  return BlendCoefficients(trace_forward(params, window, style_id, mask).theta);
}

FloatModel::FloatModel(const ModelParams& params)
    : shape_(params.shape()), layout_(params.shape()), values_(params.values().cast<float>()) {}

Eigen::VectorXf FloatModel::forward(const LogitWindow& window, int style_id) const {
  check_inputs(shape_, window, style_id);
  return head_forward<float>(shape_, layout_, values_, window.frames.cast<float>(), style_id);
}

HumanDecoder::HumanDecoder(const LbsRig& rig)
    : weights_(rig.basis.as_matrix()), neutral_(rig.mesh.positions), mouth_mask_(rig.mouth_mask) {
  if (auto issues = validate_rig(rig); !issues.empty()) {
    throw std::invalid_argument("decoder rig is invalid: " + issues.front());
  }
}

Eigen::VectorXd HumanDecoder::decode(const Eigen::VectorXd& theta) const {
  if (theta.size() != weights_.cols()) {
    throw std::invalid_argument("decoder input does not match the blendshape count");
  }
  Eigen::VectorXd out = neutral_;
  out.noalias() += weights_ * theta;
  return out;
}

Eigen::VectorXd HumanDecoder::backprop(const Eigen::VectorXd& vertex_gradient) const {
  if (vertex_gradient.size() != weights_.rows()) {
    throw std::invalid_argument("decoder gradient does not match the vertex count");
  }
  return weights_.transpose() * vertex_gradient;
}

Eigen::VectorXd human_decode(const LbsRig& rig, const BlendCoefficients& theta) {
  return HumanDecoder(rig).decode(theta.values);
}

namespace {

void check_loss_inputs(const Eigen::VectorXd& predicted, const Eigen::VectorXd& target,
                       const std::vector<std::uint32_t>& mouth_mask) {
  if (predicted.size() != target.size() || predicted.size() % 3 != 0) {
    throw std::invalid_argument("loss inputs differ in length");
  }
  const auto vertices = static_cast<std::uint32_t>(predicted.size() / 3);
  for (auto j : mouth_mask) {
    if (j >= vertices) throw std::out_of_range("mouth mask index out of range");
  }
}

}  // namespace

double vertex_loss(const Eigen::VectorXd& predicted, const Eigen::VectorXd& target,
                   const std::vector<std::uint32_t>& mouth_mask, double mouth_weight) {
  check_loss_inputs(predicted, target, mouth_mask);
  double mouth = 0.0;
  for (auto j : mouth_mask) {
    mouth += (target.segment<3>(3 * j) - predicted.segment<3>(3 * j)).squaredNorm();
  }
  return (target - predicted).squaredNorm() + mouth_weight * mouth;
}

Eigen::VectorXd vertex_loss_gradient(const Eigen::VectorXd& predicted,
                                     const Eigen::VectorXd& target,
                                     const std::vector<std::uint32_t>& mouth_mask,
                                     double mouth_weight) {
  check_loss_inputs(predicted, target, mouth_mask);
  Eigen::VectorXd g = 2.0 * (predicted - target);
  for (auto j : mouth_mask) {
    g.segment<3>(3 * j) += 2.0 * mouth_weight * (predicted - target).segment<3>(3 * j);
  }
  return g;
}

LossAndGradient backward(const ModelParams& params, const HumanDecoder& decoder,
                         const TrainingSample& sample, double mouth_weight,
                         const Eigen::VectorXd& dropout_mask) {
  const auto& layout = params.layout();
  const ForwardTrace t = trace_forward(params, sample.window, sample.style_id, dropout_mask);
  const Eigen::VectorXd predicted = decoder.decode(t.theta);

  LossAndGradient out;
  out.loss = vertex_loss(predicted, sample.target_vertices, decoder.mouth_mask(), mouth_weight);
  out.gradient = Eigen::VectorXd::Zero(layout.total);
  Eigen::VectorXd& g = out.gradient;

  const Eigen::VectorXd d_vertices =
      vertex_loss_gradient(predicted, sample.target_vertices, decoder.mouth_mask(), mouth_weight);
  const Eigen::VectorXd d_theta = decoder.backprop(d_vertices);
  const Eigen::VectorXd d_logits =
      d_theta.cwiseProduct(t.theta).cwiseProduct((1.0 - t.theta.array()).matrix());

  view_mut(g, layout.head2_weight).noalias() = d_logits * t.head_act.transpose();
  view_mut(g, layout.head2_bias) = d_logits;
  Eigen::VectorXd d_hidden = params.matrix(layout.head2_weight).transpose() * d_logits;
  if (t.dropout_mask.size() != 0) d_hidden = d_hidden.cwiseProduct(t.dropout_mask);
  const Eigen::VectorXd d_head_pre =
      (t.head_pre.array() > 0.0).select(d_hidden.array(), 0.0).matrix();
  view_mut(g, layout.head1_weight).noalias() = d_head_pre * t.fused.transpose();
  view_mut(g, layout.head1_bias) = d_head_pre;
  const Eigen::VectorXd d_fused = params.matrix(layout.head1_weight).transpose() * d_head_pre;
  view_mut(g, layout.style_table).col(t.style_id) = d_fused;

  Eigen::MatrixXd d_out = d_fused;  // H x 1
  for (std::size_t mi = layout.blocks.size(); mi-- > 0;) {
    const auto& s = layout.blocks[mi];
    const auto& b = t.blocks[mi];
    const Eigen::Index length = b.input.cols();
    const Eigen::Index out_length = b.output.cols();
    const bool need_input_grad = mi > 0;
    Eigen::MatrixXd d_input;
    if (need_input_grad) d_input = Eigen::MatrixXd::Zero(b.input.rows(), length);

    view_mut(g, s.conv2_bias) = d_out.rowwise().sum();
    Eigen::MatrixXd d_act1 = Eigen::MatrixXd::Zero(b.act1.rows(), out_length);
    const auto shortcut = params.matrix(s.shortcut_weight);
    for (Eigen::Index j = 0; j < out_length; ++j) {
      for (Eigen::Index k = 0; k < 3; ++k) {
        const Eigen::Index src = j + k - 1;
        if (src < 0 || src >= out_length) continue;
        view_mut(g, s.conv2_weight, k).noalias() += d_out.col(j) * b.act1.col(src).transpose();
        d_act1.col(src).noalias() += params.matrix(s.conv2_weight, k).transpose() * d_out.col(j);
      }
      view_mut(g, s.shortcut_weight).noalias() += d_out.col(j) * b.input.col(2 * j).transpose();
      if (need_input_grad) d_input.col(2 * j).noalias() += shortcut.transpose() * d_out.col(j);
    }

    const Eigen::MatrixXd d_pre1 = (b.pre1.array() > 0.0).select(d_act1.array(), 0.0).matrix();
    view_mut(g, s.conv1_bias) = d_pre1.rowwise().sum();
    for (Eigen::Index j = 0; j < out_length; ++j) {
      for (Eigen::Index k = 0; k < 3; ++k) {
        const Eigen::Index src = 2 * j + k - 1;
        if (src < 0 || src >= length) continue;
        view_mut(g, s.conv1_weight, k).noalias() += d_pre1.col(j) * b.input.col(src).transpose();
        if (need_input_grad) {
          d_input.col(src).noalias() += params.matrix(s.conv1_weight, k).transpose() * d_pre1.col(j);
        }
      }
    }
    d_out = std::move(d_input);
  }
  return out;
}

std::vector<std::uint8_t> encode_checkpoint(const ModelParams& params, const AdamState* adam) {
  const auto& s = params.shape();
  ByteWriter w;
  w.magic("MNET");
  w.u32(1);
  for (int v : {s.window, s.hidden, s.styles, s.blendshapes, s.classes}) {
    w.u32(static_cast<std::uint32_t>(v));
  }
  for (Eigen::Index i = 0; i < params.values().size(); ++i) w.f64(params.values()[i]);
  if (adam) {
    if (adam->m.size() != params.values().size() || adam->v.size() != params.values().size()) {
      throw FormatError("Adam moments do not match the parameter count");
    }
    w.magic("ADAM");
    w.u64(adam->step);
    for (Eigen::Index i = 0; i < adam->m.size(); ++i) w.f64(adam->m[i]);
    for (Eigen::Index i = 0; i < adam->v.size(); ++i) w.f64(adam->v[i]);
  }
  return w.take();
}

ModelParams decode_checkpoint(std::span<const std::uint8_t> bytes, std::optional<AdamState>* adam) {
  ByteReader r(bytes);
  r.expect_magic("MNET");
  if (r.u32() != 1) throw FormatError("mnet: unsupported version");
  NetShape s;
  s.window = static_cast<int>(r.u32());
  s.hidden = static_cast<int>(r.u32());
  s.styles = static_cast<int>(r.u32());
  s.blendshapes = static_cast<int>(r.u32());
  s.classes = static_cast<int>(r.u32());
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("mnet: ") + e.what());
  }
  ModelParams params(s);
  const auto total = static_cast<std::size_t>(params.values().size());
  if (total > r.remaining() / 8) throw FormatError("mnet: truncated parameters");
  for (Eigen::Index i = 0; i < params.values().size(); ++i) params.values()[i] = r.f64();
  if (adam) adam->reset();
  if (!r.at_end()) {
    r.expect_magic("ADAM");
    AdamState st;
    st.step = r.u64();
    if (2 * total > r.remaining() / 8) throw FormatError("mnet: truncated Adam moments");
    st.m.resize(params.values().size());
    st.v.resize(params.values().size());
    for (Eigen::Index i = 0; i < st.m.size(); ++i) st.m[i] = r.f64();
    for (Eigen::Index i = 0; i < st.v.size(); ++i) st.v[i] = r.f64();
    if (!r.at_end()) throw FormatError("mnet: trailing bytes");
    if (adam) *adam = std::move(st);
  }
  if (!params.all_finite()) throw FormatError("mnet: non-finite parameters");
  return params;
}

void save_checkpoint(const ModelParams& params, const std::filesystem::path& path,
                     const AdamState* adam) {
  write_file_bytes(path, encode_checkpoint(params, adam));
}

ModelParams load_checkpoint(const std::filesystem::path& path, std::optional<AdamState>* adam) {
  return decode_checkpoint(read_file_bytes(path), adam);
}

}  // namespace roboface
