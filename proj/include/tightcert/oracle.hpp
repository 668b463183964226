#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>

#include "tightcert/network.hpp"

namespace tightcert {

struct Counterexample {
  Vector x;
  Index predicted = 0;
  Index original = 0;
  double distance = 0;  // l∞ distance to x0
};

struct FalsifyOptions {
  std::size_t budget = 100000;
  std::uint64_t seed = 0;
  std::optional<std::pair<double, double>> clip;
};

/// Searches the ball around x0 for a point whose predicted label differs:
/// all corners when the input has at most 12 dimensions, finite-difference
/// gradient-sign corners for every competitor label, then random corners
/// and interior points until the budget of forward evaluations runs out.
std::optional<Counterexample> falsify(const Network& net, const Vector& x0, double eps,
                                      const FalsifyOptions& options = {});

/// Min and max of every output over a uniform grid with `resolution` points
/// per input dimension (input_dim <= 3, resolution <= 2001).
std::pair<Vector, Vector> exhaustive_output_range(const Network& net, const InputSpec& spec,
                                                  std::size_t resolution);

struct EmpiricalRadius {
  /// Largest radius tested with no counterexample found.
  double radius = 0;
  /// Smallest radius at which a counterexample was found, if any.
  std::optional<double> falsified_at;
  /// No counterexample even at the ceiling: `radius` is the ceiling.
  bool ceiling_reached = false;
};

struct RadiusSearch {
  double eps_hi = 1.0;
  int max_iter = 30;
  double tol = 1e-6;
};

EmpiricalRadius empirical_radius(const Network& net, const Vector& x0,
                                 const RadiusSearch& search = {},
                                 const FalsifyOptions& options = {});

}  // namespace tightcert
