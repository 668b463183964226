#include "tightcert/approximation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace tightcert {

std::string_view to_string(CaseKind c) {
  switch (c) {
    case CaseKind::Case1:
      return "case1";
    case CaseKind::Case2:
      return "case2";
    case CaseKind::Case3:
      return "case3";
    case CaseKind::Degenerate:
      return "degenerate";
  }
  return "degenerate";
}

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::NeWise:
      return "newise";
    case Strategy::MinArea:
      return "minarea";
    case Strategy::Parallel:
      return "parallel";
    case Strategy::Taylor:
      return "taylor";
  }
  return "newise";
}

namespace {

void check_interval(double l, double u, const char* op) {
  if (!(l <= u)) {
    throw DomainError(std::string(op) + ": lower end " + std::to_string(l) +
                      " exceeds upper end " + std::to_string(u));
  }
}

// act(u) - act(l) without cancellation in the saturated tails.
double act_difference(ActivationKind kind, double l, double u) {
  double diff = std::numeric_limits<double>::quiet_NaN();
  switch (kind) {
    case ActivationKind::Sigmoid:
      diff = std::sinh(0.5 * (u - l)) / (2.0 * std::cosh(0.5 * u) * std::cosh(0.5 * l));
      break;
    case ActivationKind::Tanh:
      diff = std::sinh(u - l) / (std::cosh(u) * std::cosh(l));
      break;
    case ActivationKind::Arctan:
      if (1.0 + u * l > 0) diff = std::atan((u - l) / (1.0 + u * l));
      break;
    case ActivationKind::ReLU:
    case ActivationKind::Identity:
      break;
  }
  if (!std::isfinite(diff)) diff = act_eval(kind, u) - act_eval(kind, l);
  return diff;
}

LinearBoundPair tangent_pair(ActivationKind kind, double d) {
  const TangentSolution t = tangent_at(kind, d);
  return {t.slope, t.intercept, t.slope, t.intercept, false};
}

LinearBoundPair identity_bounds() { return {1.0, 0.0, 1.0, 0.0, false}; }

// Area between the tangent at d and the activation over [l, u], signed so
// that it is nonnegative for a sound bound on the given side.
double tangent_area(ActivationKind kind, double l, double u, double d, bool upper) {
  const double m = 0.5 * (l + u);
  const double line_integral = (u - l) * (act_eval(kind, d) + act_deriv(kind, d) * (m - d));
  const double curve_integral = act_antiderivative(kind, u) - act_antiderivative(kind, l);
  return upper ? line_integral - curve_integral : curve_integral - line_integral;
}

// Tangent point inside `range` minimizing the enclosed area. The midpoint is
// the unconstrained minimizer; otherwise golden-section search over the range.
double min_area_cutoff(ActivationKind kind, double l, double u, const CutoffRange& range,
                       bool upper) {
  const double m = 0.5 * (l + u);
  if (range.contains(m)) return m;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = range.lo, b = range.hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = tangent_area(kind, l, u, c, upper);
  double fd = tangent_area(kind, l, u, d, upper);
  for (int it = 0; it < 200 && b - a > 1e-12; ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = tangent_area(kind, l, u, c, upper);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = tangent_area(kind, l, u, d, upper);
    }
  }
  return range.clamp(0.5 * (a + b));
}

}  // namespace

double chord_slope(ActivationKind kind, double l, double u) {
  check_interval(l, u, "chord_slope");
  if (u == l) return act_deriv(kind, l);
  return act_difference(kind, l, u) / (u - l);
}

CaseKind classify_case(ActivationKind kind, double l, double u) {
  check_interval(l, u, "classify_case");
  if (!is_s_shaped(kind)) {
    throw DomainError("classify_case: activation '" + std::string(to_string(kind)) +
                      "' is not S-shaped");
  }
  if (u - l <= kDegenerateWidth) return CaseKind::Degenerate;
  const double k = chord_slope(kind, l, u);
  if (k <= act_deriv(kind, u)) return CaseKind::Case1;
  if (k <= act_deriv(kind, l)) return CaseKind::Case2;
  return CaseKind::Case3;
}

std::optional<CutoffRange> upper_tangent_range(ActivationKind kind, double l, double u) {
  check_interval(l, u, "upper_tangent_range");
  if (!is_s_shaped(kind) || u - l <= kDegenerateWidth || u <= 0) return std::nullopt;
  if (l >= 0) return CutoffRange{l, u};
  if (classify_case(kind, l, u) == CaseKind::Case1) return std::nullopt;
  try {
    const double z = tangent_through_point(kind, l, 0.0, u, RootSide::Upper).point;
    return CutoffRange{z, u};
  } catch (const NoSolutionError&) {
    return CutoffRange{u, u};
  }
}

std::optional<CutoffRange> lower_tangent_range(ActivationKind kind, double l, double u) {
  check_interval(l, u, "lower_tangent_range");
  if (!is_s_shaped(kind) || u - l <= kDegenerateWidth || l >= 0) return std::nullopt;
  if (u <= 0) return CutoffRange{l, u};
  if (act_deriv(kind, l) > chord_slope(kind, l, u)) return std::nullopt;
  try {
    const double z = tangent_through_point(kind, u, l, 0.0, RootSide::Lower).point;
    return CutoffRange{l, z};
  } catch (const NoSolutionError&) {
    return CutoffRange{l, l};
  }
}

LinearBoundPair relu_bounds(double l, double u) {
  check_interval(l, u, "relu_bounds");
  if (l >= 0) return identity_bounds();
  if (u <= 0) return {0.0, 0.0, 0.0, 0.0, false};
  const double slope = u / (u - l);
  return {slope, -slope * l, 0.0, 0.0, false};
}

LinearBoundPair newise_bounds(ActivationKind kind, double l, double u) {
  check_interval(l, u, "newise_bounds");
  if (kind == ActivationKind::ReLU) return relu_bounds(l, u);
  if (kind == ActivationKind::Identity) return identity_bounds();

  const CaseKind c = classify_case(kind, l, u);
  if (c == CaseKind::Degenerate) return tangent_pair(kind, l);

  const double k = chord_slope(kind, l, u);
  const TangentSolution at_l = tangent_at(kind, l);
  const TangentSolution at_u = tangent_at(kind, u);
  switch (c) {
    case CaseKind::Case1:  // chord above, tangent at l below
      return {k, act_eval(kind, l) - k * l, at_l.slope, at_l.intercept, false};
    case CaseKind::Case2:  // tangent at u above, chord below
      return {at_u.slope, at_u.intercept, k, act_eval(kind, u) - k * u, false};
    case CaseKind::Case3:
    case CaseKind::Degenerate:
      break;
  }
  return {at_u.slope, at_u.intercept, at_l.slope, at_l.intercept, false};
}

LinearBoundPair minimal_area_bounds(ActivationKind kind, double l, double u) {
  check_interval(l, u, "minimal_area_bounds");
  if (kind == ActivationKind::ReLU) return relu_bounds(l, u);
  if (kind == ActivationKind::Identity) return identity_bounds();

  const CaseKind c = classify_case(kind, l, u);
  if (c == CaseKind::Degenerate) return tangent_pair(kind, l);

  LinearBoundPair pair = newise_bounds(kind, l, u);
  const auto up = upper_tangent_range(kind, l, u);
  const auto lo = lower_tangent_range(kind, l, u);
  if (c != CaseKind::Case1) {
    if (!up) return LinearBoundPair{pair.alpha_u, pair.beta_u, pair.alpha_l, pair.beta_l, true};
    const TangentSolution t = tangent_at(kind, min_area_cutoff(kind, l, u, *up, true));
    pair.alpha_u = t.slope;
    pair.beta_u = t.intercept;
  }
  if (c != CaseKind::Case2) {
    if (!lo) return LinearBoundPair{pair.alpha_u, pair.beta_u, pair.alpha_l, pair.beta_l, true};
    const TangentSolution t = tangent_at(kind, min_area_cutoff(kind, l, u, *lo, false));
    pair.alpha_l = t.slope;
    pair.beta_l = t.intercept;
  }
  return pair;
}

LinearBoundPair parallel_tangent_bounds(ActivationKind kind, double l, double u) {
  check_interval(l, u, "parallel_tangent_bounds");
  if (kind == ActivationKind::ReLU) return relu_bounds(l, u);
  if (kind == ActivationKind::Identity) return identity_bounds();

  const CaseKind c = classify_case(kind, l, u);
  if (c == CaseKind::Degenerate) return tangent_pair(kind, l);

  LinearBoundPair pair = newise_bounds(kind, l, u);
  const double k = chord_slope(kind, l, u);
  if (c == CaseKind::Case3 || !(k > 0) || !std::isfinite(k)) {
    pair.fallback = true;
    return pair;
  }
  // The chord stays on its sound side; the opposite line is the tangent with
  // the chord's slope, shifted to the extremum of act(x) - k x over [l, u].
  const double k_eff = std::min(k, peak_slope(kind));
  auto offset = [&](double x) { return act_eval(kind, x) - k * x; };
  if (c == CaseKind::Case1) {
    const double d = tangent_with_slope(kind, k_eff, Branch::Left).point;
    pair.alpha_l = k;
    pair.beta_l = std::min({offset(d), offset(l), offset(u)});
  } else {
    const double d = tangent_with_slope(kind, k_eff, Branch::Right).point;
    pair.alpha_u = k;
    pair.beta_u = std::max({offset(d), offset(l), offset(u)});
  }
  return pair;
}

LinearBoundPair taylor_midpoint_bounds(ActivationKind kind, double l, double u) {
  check_interval(l, u, "taylor_midpoint_bounds");
  if (kind == ActivationKind::ReLU) return relu_bounds(l, u);
  if (kind == ActivationKind::Identity) return identity_bounds();
  if (u - l <= kDegenerateWidth) return tangent_pair(kind, l);

  const double m = 0.5 * (l + u);
  const double slope = act_deriv(kind, m);
  auto offset = [&](double x) { return act_eval(kind, x) - slope * x; };
  // act(x) - slope x is stationary where act'(x) = act'(m): at m and, since the
  // derivative is even, at -m.
  double hi = std::max({offset(l), offset(u), offset(m)});
  double lo = std::min({offset(l), offset(u), offset(m)});
  if (l <= -m && -m <= u) {
    hi = std::max(hi, offset(-m));
    lo = std::min(lo, offset(-m));
  }
  return {slope, hi, slope, lo, false};
}

LinearBoundPair approximate(Strategy strategy, ActivationKind kind, double l, double u) {
  switch (strategy) {
    case Strategy::NeWise:
      return newise_bounds(kind, l, u);
    case Strategy::MinArea:
      return minimal_area_bounds(kind, l, u);
    case Strategy::Parallel:
      return parallel_tangent_bounds(kind, l, u);
    case Strategy::Taylor:
      return taylor_midpoint_bounds(kind, l, u);
  }
  return newise_bounds(kind, l, u);
}

double validate_soundness(const LinearBoundPair& pair, ActivationKind kind, double l, double u,
                          std::size_t grid_points) {
  check_interval(l, u, "validate_soundness");
  if (grid_points < 2) throw DomainError("validate_soundness: need at least 2 grid points");
  double worst = -std::numeric_limits<double>::infinity();
  const double step = (u - l) / static_cast<double>(grid_points - 1);
  for (std::size_t i = 0; i < grid_points; ++i) {
    const double x = i + 1 == grid_points ? u : l + step * static_cast<double>(i);
    const double y = act_eval(kind, x);
    worst = std::max({worst, y - pair.upper(x), pair.lower(x) - y});
  }
  return worst;
}

EnclosedArea enclosed_area(const LinearBoundPair& pair, ActivationKind kind, double l,
                           double u) {
  check_interval(l, u, "enclosed_area");
  const double curve = act_antiderivative(kind, u) - act_antiderivative(kind, l);
  const double half_sq = 0.5 * (u * u - l * l);
  return {pair.alpha_u * half_sq + pair.beta_u * (u - l) - curve,
          curve - (pair.alpha_l * half_sq + pair.beta_l * (u - l))};
}

}  // namespace tightcert
