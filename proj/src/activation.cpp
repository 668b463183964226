#include "tightcert/activation.hpp"

#include <cmath>
#include <string>

namespace tightcert {

std::string_view to_string(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::Sigmoid:
      return "sigmoid";
    case ActivationKind::Tanh:
      return "tanh";
    case ActivationKind::Arctan:
      return "arctan";
    case ActivationKind::ReLU:
      return "relu";
    case ActivationKind::Identity:
      return "identity";
  }
  return "identity";
}

ActivationKind parse_activation(std::string_view name) {
  if (name == "sigmoid") return ActivationKind::Sigmoid;
  if (name == "tanh") return ActivationKind::Tanh;
  if (name == "arctan" || name == "atan") return ActivationKind::Arctan;
  if (name == "relu") return ActivationKind::ReLU;
  if (name == "identity" || name == "linear" || name == "none") return ActivationKind::Identity;
  throw ParseError("unknown activation '" + std::string(name) + "'");
}

namespace {

void require_s_shaped(ActivationKind kind, const char* op) {
  if (!is_s_shaped(kind)) {
    throw DomainError(std::string(op) + ": activation '" + std::string(to_string(kind)) +
                      "' is not S-shaped");
  }
}

// Right-branch inverse of the derivative: d >= 0 with act_deriv(d) = k.
double inverse_slope_right(ActivationKind kind, double k) {
  if (kind == ActivationKind::Sigmoid) {
    // sigma (1 - sigma) = k  =>  d = log((1 + s) / (1 - s)), s = sqrt(1 - 4k)
    const double s = std::sqrt(std::max(0.0, 1.0 - 4.0 * k));
    if (s < 0.5) return 2.0 * std::atanh(s);
    return std::log((1.0 + s) * (1.0 + s) / (4.0 * k));
  }
  // act_deriv is strictly decreasing on [0, inf); bracket then bisect.
  double hi = 1.0;
  while (act_deriv(kind, hi) >= k) {
    hi *= 2.0;
    if (!std::isfinite(hi)) throw NoSolutionError("tangent_with_slope: slope below representable range");
  }
  double lo = hi > 1.0 ? hi / 2.0 : 0.0;
  for (int it = 0; it < kBisectionIterations && hi - lo > kBisectionTolerance; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (act_deriv(kind, mid) >= k)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TangentSolution tangent_with_slope(ActivationKind kind, double target_slope, Branch branch) {
  require_s_shaped(kind, "tangent_with_slope");
  if (!(target_slope > 0)) throw DomainError("tangent_with_slope: slope must be positive");
  const double peak = peak_slope(kind);
  if (target_slope > peak * (1.0 + 1e-12)) {
    throw NoSolutionError("tangent_with_slope: slope " + std::to_string(target_slope) +
                          " exceeds the derivative's maximum");
  }
  const double right = target_slope >= peak ? 0.0 : inverse_slope_right(kind, target_slope);
  return tangent_at(kind, branch == Branch::Right ? right : -right);
}

TangentSolution tangent_through_point(ActivationKind kind, double anchor, double a, double b,
                                      RootSide side) {
  require_s_shaped(kind, "tangent_through_point");
  if (!(a < b)) throw DomainError("tangent_through_point: empty search interval");
  const double target = act_eval(kind, anchor);
  auto residual = [&](double d) {
    return act_eval(kind, d) + act_deriv(kind, d) * (anchor - d) - target;
  };
  double ra = residual(a);
  const double rb = residual(b);
  if (ra == 0) return tangent_at(kind, a);
  if (rb == 0) return tangent_at(kind, b);
  if ((ra > 0) == (rb > 0)) {
    throw NoSolutionError("tangent_through_point: no tangent through anchor " +
                          std::to_string(anchor) + " in [" + std::to_string(a) + ", " +
                          std::to_string(b) + "]");
  }
  double lo = a, hi = b;
  for (int it = 0; it < kBisectionIterations && hi - lo > kBisectionTolerance; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double rm = residual(mid);
    if (rm == 0) {
      lo = hi = mid;
      break;
    }
    if ((rm > 0) == (ra > 0)) {
      lo = mid;
      ra = rm;
    } else {
      hi = mid;
    }
  }
  switch (side) {
    case RootSide::Lower:
      return tangent_at(kind, lo);
    case RootSide::Upper:
      return tangent_at(kind, hi);
    case RootSide::Midpoint:
      break;
  }
  return tangent_at(kind, 0.5 * (lo + hi));
}

}  // namespace tightcert
