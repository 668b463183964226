#pragma once

#include <cmath>
#include <string>
#include <string_view>

#include "tightcert/errors.hpp"

namespace tightcert {

enum class ActivationKind { Sigmoid, Tanh, Arctan, ReLU, Identity };

std::string_view to_string(ActivationKind kind);
ActivationKind parse_activation(std::string_view name);

/// Sigmoid, Tanh and Arctan: strictly increasing, convex on x < 0, concave on
/// x > 0, with an even derivative peaking at 0.
constexpr bool is_s_shaped(ActivationKind kind) {
  return kind == ActivationKind::Sigmoid || kind == ActivationKind::Tanh ||
         kind == ActivationKind::Arctan;
}

template <typename Scalar>
Scalar act_eval(ActivationKind kind, Scalar x) {
  using std::atan;
  using std::exp;
  using std::tanh;
  switch (kind) {
    case ActivationKind::Sigmoid:
      if (x >= 0) return Scalar(1) / (Scalar(1) + exp(-x));
      {
        const Scalar e = exp(x);
        return e / (Scalar(1) + e);
      }
    case ActivationKind::Tanh:
      return tanh(x);
    case ActivationKind::Arctan:
      return atan(x);
    case ActivationKind::ReLU:
      return x > 0 ? x : Scalar(0);
    case ActivationKind::Identity:
      return x;
  }
  return x;
}

/// First derivative. Sigmoid and Tanh use the exp(-|x|) forms so the tails
/// keep full relative precision. ReLU'(0) = 1.
template <typename Scalar>
Scalar act_deriv(ActivationKind kind, Scalar x) {
  using std::abs;
  using std::exp;
  switch (kind) {
    case ActivationKind::Sigmoid: {
      const Scalar e = exp(-abs(x));
      return e / ((Scalar(1) + e) * (Scalar(1) + e));
    }
    case ActivationKind::Tanh: {
      const Scalar e = exp(Scalar(-2) * abs(x));
      return Scalar(4) * e / ((Scalar(1) + e) * (Scalar(1) + e));
    }
    case ActivationKind::Arctan:
      return Scalar(1) / (Scalar(1) + x * x);
    case ActivationKind::ReLU:
      return x >= 0 ? Scalar(1) : Scalar(0);
    case ActivationKind::Identity:
      return Scalar(1);
  }
  return Scalar(1);
}

template <typename Scalar>
Scalar act_second_deriv(ActivationKind kind, Scalar x) {
  using std::tanh;
  switch (kind) {
    case ActivationKind::Sigmoid:
      // 1 - 2 sigma(x) = -tanh(x / 2)
      return -act_deriv(kind, x) * tanh(x / Scalar(2));
    case ActivationKind::Tanh:
      return Scalar(-2) * tanh(x) * act_deriv(kind, x);
    case ActivationKind::Arctan: {
      const Scalar d = Scalar(1) + x * x;
      return Scalar(-2) * x / (d * d);
    }
    case ActivationKind::ReLU:
    case ActivationKind::Identity:
      return Scalar(0);
  }
  return Scalar(0);
}

/// An antiderivative F with F' = act_eval; used for enclosed-area integrals.
template <typename Scalar>
Scalar act_antiderivative(ActivationKind kind, Scalar x) {
  using std::abs;
  using std::atan;
  using std::exp;
  using std::log;
  using std::log1p;
  switch (kind) {
    case ActivationKind::Sigmoid:  // softplus
      return (x > 0 ? x : Scalar(0)) + log1p(exp(-abs(x)));
    case ActivationKind::Tanh:  // log cosh
      return abs(x) + log1p(exp(Scalar(-2) * abs(x))) - log(Scalar(2));
    case ActivationKind::Arctan:
      return x * atan(x) - log1p(x * x) / Scalar(2);
    case ActivationKind::ReLU:
      return x > 0 ? x * x / Scalar(2) : Scalar(0);
    case ActivationKind::Identity:
      return x * x / Scalar(2);
  }
  return Scalar(0);
}

/// sup of the derivative (attained at 0 for the S-shaped kinds).
constexpr double peak_slope(ActivationKind kind) {
  return kind == ActivationKind::Sigmoid ? 0.25 : 1.0;
}

struct TangentSolution {
  double point = 0;
  double slope = 0;
  double intercept = 0;
};

/// Tangent line of the activation at abscissa d.
inline TangentSolution tangent_at(ActivationKind kind, double d) {
  const double slope = act_deriv(kind, d);
  return {d, slope, act_eval(kind, d) - d * slope};
}

enum class Branch { Left, Right };

/// Which end of the final bisection bracket a root solve reports.
enum class RootSide { Lower, Upper, Midpoint };

inline constexpr int kBisectionIterations = 50;
inline constexpr double kBisectionTolerance = 1e-12;

/// Tangent point d on the requested side of 0 with act_deriv(d) = target_slope.
TangentSolution tangent_with_slope(ActivationKind kind, double target_slope, Branch branch);

/// Tangent point d in [a, b] whose tangent line passes through
/// (anchor, act_eval(anchor)).
TangentSolution tangent_through_point(ActivationKind kind, double anchor, double a, double b,
                                      RootSide side = RootSide::Midpoint);

}  // namespace tightcert
