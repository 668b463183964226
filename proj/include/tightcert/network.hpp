#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "tightcert/activation.hpp"
#include "tightcert/linear_forms.hpp"

namespace tightcert {

struct AffineOp {
  Matrix W;
  Vector b;
};

/// 2-D convolution over a (channels, height, width) input flattened in
/// (c, y, x) order. Kernels are stored flat as (out_ch, in_ch, kh, kw).
struct ConvOp {
  std::vector<double> kernels;
  std::array<Index, 4> kernel_shape{};  // out_ch, in_ch, kh, kw
  Vector bias;
  std::array<Index, 2> stride{1, 1};
  std::array<Index, 2> padding{0, 0};
  std::array<Index, 3> in_shape{};  // ch, h, w

  std::array<Index, 3> out_shape() const;
  Index input_size() const { return in_shape[0] * in_shape[1] * in_shape[2]; }
  Index output_size() const;
  double kernel(Index o, Index i, Index ky, Index kx) const {
    const auto& s = kernel_shape;
    return kernels[static_cast<std::size_t>(((o * s[1] + i) * s[2] + ky) * s[3] + kx)];
  }
  /// Throws StructuralError if the declared shapes disagree.
  void validate() const;
};

/// Explicit matrix of a convolution; output row index = (c * oh + y) * ow + x.
AffineOp conv_to_affine(const ConvOp& conv);

struct Layer {
  std::variant<AffineOp, ConvOp> op;
  ActivationKind activation = ActivationKind::Identity;

  Index input_size() const;
  Index output_size() const;
  bool is_conv() const { return std::holds_alternative<ConvOp>(op); }
};

/// Feed-forward network: each layer is an affine map followed by its
/// activation; the last layer's activation is Identity. Immutable after
/// construction, so concurrent reads are safe.
class Network {
 public:
  Network() = default;
  /// Validates the shape chain; throws StructuralError naming the layer.
  Network(Index input_dim, Index num_labels, std::vector<Layer> layers);

  Index input_dim() const { return input_dim_; }
  Index num_labels() const { return num_labels_; }
  std::size_t num_layers() const { return layers_.size(); }
  const std::vector<Layer>& layers() const { return layers_; }
  const Layer& layer(std::size_t t) const { return layers_.at(t); }
  ActivationKind activation(std::size_t t) const { return layers_.at(t).activation; }

  /// Every layer as an explicit affine map (convolutions lowered).
  const std::vector<AffineOp>& lowered() const { return lowered_; }

  Vector forward(const Vector& x) const;
  /// Columns of X are inputs; returns one output column per input.
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& X) const;
  /// Pre-activation vector of every layer at x (the last entry is the output).
  std::vector<Vector> pre_activations(const Vector& x) const;

 private:
  Index input_dim_ = 0;
  Index num_labels_ = 0;
  std::vector<Layer> layers_;
  std::vector<AffineOp> lowered_;
};

/// Argmax with ties broken by the lowest index.
Index predict_label(const Vector& scores);
Index predict_label(const Network& net, const Vector& x);

struct MonotonicityReport {
  bool condition1_ok = false;  // nonzero entries of each first-layer column share a sign
  bool condition2_ok = false;  // every later weight is nonnegative
  bool qualifies = false;
  /// Per input coordinate: +1 / -1 for the sign of its first-layer column, 0
  /// for an all-zero or mixed column.
  std::vector<int> column_signs;
};

MonotonicityReport check_monotonic_conditions(const Network& net);

/// Network with an extra Identity layer computing f[s0] - f[s].
Network build_margin_network(const Network& net, Index s0, Index s);

/// l∞ ball around x0, optionally intersected with a global [lo, hi] box.
struct InputSpec {
  Vector x0;
  double eps = 0;
  std::optional<std::pair<double, double>> clip;

  Vector box_lo() const;
  Vector box_hi() const;
  void validate(const Network& net) const;
};

/// Samples of a labelled dataset, in file order.
struct Dataset {
  std::vector<Vector> inputs;
  std::vector<Index> labels;
  std::size_t size() const { return inputs.size(); }
};

Network load_network(const std::string& path);
Network parse_network(const std::string& text);
std::string network_to_json(const Network& net);
void save_network(const Network& net, const std::string& path);

/// One sample per line: label, then input_dim values; commas or whitespace
/// separate fields, blank lines and lines starting with '#' are skipped.
Dataset load_dataset(const std::string& path, Index input_dim);
Dataset parse_dataset(const std::string& text, Index input_dim);
void save_dataset(const Dataset& data, const std::string& path);

}  // namespace tightcert
