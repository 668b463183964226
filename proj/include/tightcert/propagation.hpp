#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "tightcert/approximation.hpp"
#include "tightcert/network.hpp"

namespace tightcert {

/// Input-to-layer linear forms: A_L x + B_L <= phi(x) <= A_U x + B_U on the
/// input region.
struct SymbolicBounds {
  Matrix A_L;
  Vector B_L;
  Matrix A_U;
  Vector B_U;

  AffineForm lower() const { return {A_L, B_L}; }
  AffineForm upper() const { return {A_U, B_U}; }
};

/// Concrete pre-activation interval of one layer.
struct LayerInterval {
  Vector l;
  Vector u;
};
using IntervalTrace = std::vector<LayerInterval>;

struct PropagationResult {
  SymbolicBounds output;
  /// One entry per layer, the output layer included.
  IntervalTrace trace;
  /// Relaxation used at each neuron of every layer except the output layer.
  std::vector<std::vector<LinearBoundPair>> pairs;
  /// Populated only when PropagateOptions::keep_forms is set.
  std::vector<SymbolicBounds> layer_forms;
  std::size_t fallback_count = 0;
};

/// Chooses the relaxation for neuron `index` of layer `layer` given its
/// pre-activation interval.
using PairProvider = std::function<LinearBoundPair(std::size_t layer, Index index,
                                                   ActivationKind kind, double l, double u)>;

struct PropagateOptions {
  bool keep_forms = false;
};

PropagationResult propagate(const Network& net, const InputSpec& spec, Strategy strategy,
                            const PropagateOptions& options = {});
PropagationResult propagate(const Network& net, const InputSpec& spec,
                            const PairProvider& provider, const PropagateOptions& options = {});

/// Lower/upper extremes of a form's rows over the input region of `spec`.
Vector region_min(const AffineForm& form, const InputSpec& spec);
Vector region_max(const AffineForm& form, const InputSpec& spec);

/// (lo, hi) with lo[s] = min of the lower output form, hi[s] = max of the upper.
std::pair<Vector, Vector> concrete_output_range(const PropagationResult& result,
                                                const InputSpec& spec);

/// Interval-width and endpoint ratios of trace `a` relative to trace `b`.
/// A ratio whose denominator has magnitude <= 1e-12 is left empty.
struct TraceMetric {
  std::size_t layer = 0;
  Index index = 0;
  std::optional<double> red;    // ((u - l) - (u' - l')) / (u' - l')
  std::optional<double> blue;   // (l - l') / l'
  std::optional<double> green;  // (u - u') / u'
};

std::vector<TraceMetric> compare_traces(const IntervalTrace& a, const IntervalTrace& b);

/// "layer,index,l,u" rows with full precision.
void write_trace(std::ostream& out, const IntervalTrace& trace);

}  // namespace tightcert
