#include "tightcert/network.hpp"

#include <cmath>
#include <string>

namespace tightcert {

namespace {

std::string layer_name(std::size_t t) { return "layer " + std::to_string(t); }

// Vectorized activations for batch evaluation; agree with act_eval to a few
// ulps.
void apply_activation(ActivationKind kind, Eigen::MatrixXd& z) {
  switch (kind) {
    case ActivationKind::Sigmoid:
      z = (1.0 + (-z.array()).exp()).inverse().matrix();
      break;
    case ActivationKind::Tanh:
      z = z.array().tanh().matrix();
      break;
    case ActivationKind::Arctan:
      z = z.unaryExpr([](double v) { return std::atan(v); });
      break;
    case ActivationKind::ReLU:
      z = z.cwiseMax(0.0);
      break;
    case ActivationKind::Identity:
      break;
  }
}

}  // namespace

std::array<Index, 3> ConvOp::out_shape() const {
  const Index oh = (in_shape[1] + 2 * padding[0] - kernel_shape[2]) / stride[0] + 1;
  const Index ow = (in_shape[2] + 2 * padding[1] - kernel_shape[3]) / stride[1] + 1;
  return {kernel_shape[0], oh, ow};
}

Index ConvOp::output_size() const {
  const auto s = out_shape();
  return s[0] * s[1] * s[2];
}

void ConvOp::validate() const {
  for (Index v : kernel_shape)
    detail::require(v > 0, "conv: kernel dimensions must be positive");
  for (Index v : in_shape) detail::require(v > 0, "conv: input dimensions must be positive");
  detail::require(stride[0] > 0 && stride[1] > 0, "conv: stride must be positive");
  detail::require(padding[0] >= 0 && padding[1] >= 0, "conv: padding must be nonnegative");
  detail::require(kernel_shape[1] == in_shape[0], "conv: kernel in_ch != input channels");
  detail::require(static_cast<Index>(kernels.size()) ==
                      kernel_shape[0] * kernel_shape[1] * kernel_shape[2] * kernel_shape[3],
                  "conv: kernel data length != product of kernel shape");
  detail::require(bias.size() == kernel_shape[0], "conv: bias length != out_ch");
  detail::require(in_shape[1] + 2 * padding[0] >= kernel_shape[2] &&
                      in_shape[2] + 2 * padding[1] >= kernel_shape[3],
                  "conv: kernel larger than padded input");
}

AffineOp conv_to_affine(const ConvOp& conv) {
  conv.validate();
  const auto [oc, oh, ow] = conv.out_shape();
  const auto [ic, ih, iw] = conv.in_shape;
  const Index kh = conv.kernel_shape[2], kw = conv.kernel_shape[3];
  AffineOp out{Matrix::Zero(oc * oh * ow, ic * ih * iw), Vector(oc * oh * ow)};
  for (Index o = 0; o < oc; ++o) {
    for (Index y = 0; y < oh; ++y) {
      for (Index x = 0; x < ow; ++x) {
        const Index row = (o * oh + y) * ow + x;
        out.b[row] = conv.bias[o];
        for (Index i = 0; i < ic; ++i) {
          for (Index ky = 0; ky < kh; ++ky) {
            const Index iy = y * conv.stride[0] - conv.padding[0] + ky;
            if (iy < 0 || iy >= ih) continue;
            for (Index kx = 0; kx < kw; ++kx) {
              const Index ix = x * conv.stride[1] - conv.padding[1] + kx;
              if (ix < 0 || ix >= iw) continue;
              out.W(row, (i * ih + iy) * iw + ix) += conv.kernel(o, i, ky, kx);
            }
          }
        }
      }
    }
  }
  return out;
}

Index Layer::input_size() const {
  if (const auto* a = std::get_if<AffineOp>(&op)) return a->W.cols();
  return std::get<ConvOp>(op).input_size();
}

Index Layer::output_size() const {
  if (const auto* a = std::get_if<AffineOp>(&op)) return a->W.rows();
  return std::get<ConvOp>(op).output_size();
}

Network::Network(Index input_dim, Index num_labels, std::vector<Layer> layers)
    : input_dim_(input_dim), num_labels_(num_labels), layers_(std::move(layers)) {
  if (input_dim_ <= 0) throw StructuralError("network: input_dim must be positive");
  if (num_labels_ <= 0) throw StructuralError("network: num_labels must be positive");
  if (layers_.empty()) throw StructuralError("network: no layers");
  Index width = input_dim_;
  lowered_.reserve(layers_.size());
  for (std::size_t t = 0; t < layers_.size(); ++t) {
    const Layer& layer = layers_[t];
    if (const auto* a = std::get_if<AffineOp>(&layer.op)) {
      if (a->W.rows() != a->b.size()) {
        throw StructuralError(layer_name(t) + ": weight rows " + std::to_string(a->W.rows()) +
                              " != bias length " + std::to_string(a->b.size()));
      }
      lowered_.push_back(*a);
    } else {
      try {
        lowered_.push_back(conv_to_affine(std::get<ConvOp>(layer.op)));
      } catch (const StructuralError& e) {
        throw StructuralError(layer_name(t) + ": " + e.what());
      }
    }
    if (lowered_.back().W.cols() != width) {
      throw StructuralError(layer_name(t) + ": expects " +
                            std::to_string(lowered_.back().W.cols()) + " inputs but receives " +
                            std::to_string(width));
    }
    width = lowered_.back().W.rows();
  }
  if (width != num_labels_) {
    throw StructuralError("network: last layer has " + std::to_string(width) +
                          " outputs, expected num_labels = " + std::to_string(num_labels_));
  }
  if (layers_.back().activation != ActivationKind::Identity) {
    throw StructuralError("network: output layer activation must be identity");
  }
}

Vector Network::forward(const Vector& x) const {
  if (x.size() != input_dim_) {
    throw StructuralError("forward: input length " + std::to_string(x.size()) +
                          " != input_dim " + std::to_string(input_dim_));
  }
  Vector h = x;
  for (std::size_t t = 0; t < lowered_.size(); ++t) {
    Vector z = lowered_[t].W * h + lowered_[t].b;
    const ActivationKind kind = layers_[t].activation;
    if (kind != ActivationKind::Identity)
      for (Index i = 0; i < z.size(); ++i) z[i] = act_eval(kind, z[i]);
    h = std::move(z);
  }
  return h;
}

Eigen::MatrixXd Network::forward_batch(const Eigen::MatrixXd& X) const {
  if (X.rows() != input_dim_) throw StructuralError("forward_batch: input rows != input_dim");
  Eigen::MatrixXd h = X;
  for (std::size_t t = 0; t < lowered_.size(); ++t) {
    Eigen::MatrixXd z = lowered_[t].W * h;
    z.colwise() += lowered_[t].b;
    apply_activation(layers_[t].activation, z);
    h = std::move(z);
  }
  return h;
}

std::vector<Vector> Network::pre_activations(const Vector& x) const {
  if (x.size() != input_dim_) throw StructuralError("pre_activations: input length != input_dim");
  std::vector<Vector> out;
  out.reserve(lowered_.size());
  Vector h = x;
  for (std::size_t t = 0; t < lowered_.size(); ++t) {
    out.push_back(lowered_[t].W * h + lowered_[t].b);
    h = out.back();
    const ActivationKind kind = layers_[t].activation;
    for (Index i = 0; i < h.size(); ++i) h[i] = act_eval(kind, h[i]);
  }
  return out;
}

Index predict_label(const Vector& scores) {
  if (scores.size() == 0) throw StructuralError("predict_label: empty score vector");
  Index best = 0;
  for (Index i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = i;
  return best;
}

Index predict_label(const Network& net, const Vector& x) { return predict_label(net.forward(x)); }

MonotonicityReport check_monotonic_conditions(const Network& net) {
  MonotonicityReport r;
  const auto& ops = net.lowered();
  const Matrix& w1 = ops.front().W;
  r.condition1_ok = true;
  r.column_signs.assign(static_cast<std::size_t>(w1.cols()), 0);
  for (Index j = 0; j < w1.cols(); ++j) {
    const bool any_pos = (w1.col(j).array() > 0).any();
    const bool any_neg = (w1.col(j).array() < 0).any();
    if (any_pos && any_neg) r.condition1_ok = false;
    r.column_signs[static_cast<std::size_t>(j)] = any_pos == any_neg ? 0 : (any_pos ? 1 : -1);
  }
  r.condition2_ok = true;
  for (std::size_t t = 1; t < ops.size(); ++t)
    if ((ops[t].W.array() < 0).any()) r.condition2_ok = false;
  r.qualifies = r.condition1_ok && r.condition2_ok;
  return r;
}

Network build_margin_network(const Network& net, Index s0, Index s) {
  const Index n = net.num_labels();
  if (s0 < 0 || s0 >= n || s < 0 || s >= n) {
    throw DomainError("build_margin_network: label out of range [0, " + std::to_string(n) + ")");
  }
  if (s0 == s) throw DomainError("build_margin_network: s0 and s must differ");
  std::vector<Layer> layers = net.layers();
  Matrix row = Matrix::Zero(1, n);
  row(0, s0) = 1.0;
  row(0, s) = -1.0;
  layers.push_back(Layer{AffineOp{row, Vector::Zero(1)}, ActivationKind::Identity});
  return Network(net.input_dim(), 1, std::move(layers));
}

Vector InputSpec::box_lo() const {
  Vector lo = x0.array() - eps;
  if (clip) lo = lo.cwiseMax(clip->first);
  return lo;
}

Vector InputSpec::box_hi() const {
  Vector hi = x0.array() + eps;
  if (clip) hi = hi.cwiseMin(clip->second);
  return hi;
}

void InputSpec::validate(const Network& net) const {
  if (x0.size() != net.input_dim()) {
    throw StructuralError("input spec: x0 length " + std::to_string(x0.size()) +
                          " != input_dim " + std::to_string(net.input_dim()));
  }
  if (!(eps >= 0)) throw DomainError("input spec: eps must be >= 0");
  if (clip && !(clip->first <= clip->second)) throw DomainError("input spec: empty clip box");
  if (clip && (box_lo().array() > box_hi().array()).any())
    throw DomainError("input spec: ball does not meet the clip box");
}

}  // namespace tightcert
