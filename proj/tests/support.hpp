#pragma once

// Independent reference implementations used as test oracles. They share no
// code with the library beyond the data types.

#include <cmath>
#include <random>
#include <vector>

#include "tightcert/network.hpp"

namespace ref {

using tightcert::ActivationKind;
using tightcert::Index;

inline long double act(ActivationKind kind, long double x) {
  switch (kind) {
    case ActivationKind::Sigmoid:
      return 1.0L / (1.0L + std::exp(-x));
    case ActivationKind::Tanh:
      return std::tanh(x);
    case ActivationKind::Arctan:
      return std::atan(x);
    case ActivationKind::ReLU:
      return x > 0 ? x : 0.0L;
    case ActivationKind::Identity:
      return x;
  }
  return x;
}

inline long double deriv(ActivationKind kind, long double x) {
  switch (kind) {
    case ActivationKind::Sigmoid: {
      // 1 - sigma cancels in the tails; use sigma(x) sigma(-x) instead.
      return act(kind, x) * act(kind, -x);
    }
    case ActivationKind::Tanh: {
      const long double c = std::cosh(x);
      return 1.0L / (c * c);
    }
    case ActivationKind::Arctan:
      return 1.0L / (1.0L + x * x);
    case ActivationKind::ReLU:
      return x >= 0 ? 1.0L : 0.0L;
    case ActivationKind::Identity:
      return 1.0L;
  }
  return 1.0L;
}

/// Straight-line evaluation: explicit loops over the layer list, convolutions
/// by sliding window, in long double.
inline std::vector<long double> conv_direct(const tightcert::ConvOp& c,
                                            const std::vector<long double>& in) {
  const auto [oc, ic, kh, kw] = c.kernel_shape;
  const Index ih = c.in_shape[1], iw = c.in_shape[2];
  const Index oh = (ih + 2 * c.padding[0] - kh) / c.stride[0] + 1;
  const Index ow = (iw + 2 * c.padding[1] - kw) / c.stride[1] + 1;
  std::vector<long double> out(static_cast<std::size_t>(oc * oh * ow));
  for (Index o = 0; o < oc; ++o)
    for (Index y = 0; y < oh; ++y)
      for (Index x = 0; x < ow; ++x) {
        long double acc = c.bias[o];
        for (Index i = 0; i < ic; ++i)
          for (Index dy = 0; dy < kh; ++dy)
            for (Index dx = 0; dx < kw; ++dx) {
              const Index yy = y * c.stride[0] + dy - c.padding[0];
              const Index xx = x * c.stride[1] + dx - c.padding[1];
              if (yy < 0 || yy >= ih || xx < 0 || xx >= iw) continue;
              const long double w =
                  c.kernels[static_cast<std::size_t>(((o * ic + i) * kh + dy) * kw + dx)];
              acc += w * in[static_cast<std::size_t>((i * ih + yy) * iw + xx)];
            }
        out[static_cast<std::size_t>((o * oh + y) * ow + x)] = acc;
      }
  return out;
}

inline std::vector<long double> forward(const tightcert::Network& net,
                                        const tightcert::Vector& x) {
  std::vector<long double> h(x.data(), x.data() + x.size());
  for (const auto& layer : net.layers()) {
    std::vector<long double> z;
    if (const auto* a = std::get_if<tightcert::AffineOp>(&layer.op)) {
      z.assign(static_cast<std::size_t>(a->W.rows()), 0.0L);
      for (Index i = 0; i < a->W.rows(); ++i) {
        long double acc = a->b[i];
        for (Index j = 0; j < a->W.cols(); ++j) acc += (long double)a->W(i, j) * h[j];
        z[static_cast<std::size_t>(i)] = acc;
      }
    } else {
      z = conv_direct(std::get<tightcert::ConvOp>(layer.op), h);
    }
    for (auto& v : z) v = act(layer.activation, v);
    h = std::move(z);
  }
  return h;
}

/// Uniform point in the box [x0 - eps, x0 + eps].
inline tightcert::Vector sample_ball(const tightcert::Vector& x0, double eps, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  tightcert::Vector x = x0;
  for (Index j = 0; j < x.size(); ++j) x[j] += eps * u(rng);
  return x;
}

}  // namespace ref
