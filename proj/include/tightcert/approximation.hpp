#pragma once

#include <cstddef>
#include <optional>
#include <string_view>

#include "tightcert/activation.hpp"

namespace tightcert {

/// Upper line alpha_u x + beta_u and lower line alpha_l x + beta_l enclosing
/// an activation on an interval.
struct LinearBoundPair {
  double alpha_u = 0;
  double beta_u = 0;
  double alpha_l = 0;
  double beta_l = 0;
  /// Set when a strategy could not apply its own rule and used the
  /// endpoint-tangent pair instead.
  bool fallback = false;

  double upper(double x) const { return alpha_u * x + beta_u; }
  double lower(double x) const { return alpha_l * x + beta_l; }
};

enum class CaseKind { Case1, Case2, Case3, Degenerate };

enum class Strategy { NeWise, MinArea, Parallel, Taylor };

std::string_view to_string(CaseKind c);
std::string_view to_string(Strategy s);

/// Intervals no wider than this are treated as a single point.
inline constexpr double kDegenerateWidth = 1e-9;

/// Slope of the chord through (l, act(l)) and (u, act(u)).
double chord_slope(ActivationKind kind, double l, double u);

/// Case 1: chord is an upper bound (k <= act'(u)); Case 2: chord is a lower
/// bound (k <= act'(l)); Case 3: neither.
CaseKind classify_case(ActivationKind kind, double l, double u);

struct CutoffRange {
  double lo = 0;
  double hi = 0;
  bool contains(double d) const { return lo <= d && d <= hi; }
  double clamp(double d) const { return d < lo ? lo : (d > hi ? hi : d); }
};

/// Tangent points d in [l, u] whose tangent line is a sound upper bound on
/// [l, u]; empty when no such tangent exists (Case 1 intervals).
std::optional<CutoffRange> upper_tangent_range(ActivationKind kind, double l, double u);
/// Tangent points whose tangent line is a sound lower bound on [l, u].
std::optional<CutoffRange> lower_tangent_range(ActivationKind kind, double l, double u);

LinearBoundPair newise_bounds(ActivationKind kind, double l, double u);
LinearBoundPair minimal_area_bounds(ActivationKind kind, double l, double u);
LinearBoundPair parallel_tangent_bounds(ActivationKind kind, double l, double u);
LinearBoundPair taylor_midpoint_bounds(ActivationKind kind, double l, double u);
LinearBoundPair relu_bounds(double l, double u);

/// Dispatch by strategy; ReLU and Identity have strategy-independent bounds.
LinearBoundPair approximate(Strategy strategy, ActivationKind kind, double l, double u);

/// Largest violation max(act(x) - upper(x), lower(x) - act(x)) over a uniform
/// grid on [l, u]; <= 0 means sound on the grid.
double validate_soundness(const LinearBoundPair& pair, ActivationKind kind, double l, double u,
                          std::size_t grid_points);

struct EnclosedArea {
  double upper = 0;  ///< integral of upper(x) - act(x)
  double lower = 0;  ///< integral of act(x) - lower(x)
};

EnclosedArea enclosed_area(const LinearBoundPair& pair, ActivationKind kind, double l, double u);

}  // namespace tightcert
