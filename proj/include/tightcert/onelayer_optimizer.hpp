#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tightcert/approximation.hpp"
#include "tightcert/network.hpp"

namespace tightcert {

/// A one-hidden-layer S-shaped network together with an input region, with
/// the hidden pre-activation intervals already computed.
struct OneLayerProblem {
  Matrix W1;
  Vector b1;
  Matrix W2;
  Vector b2;
  ActivationKind kind = ActivationKind::Sigmoid;
  InputSpec spec;
  Vector box_lo;
  Vector box_hi;
  Vector l;  // hidden pre-activation bounds
  Vector u;

  Index hidden() const { return W1.rows(); }
  Index outputs() const { return W2.rows(); }

  /// Throws StructuralError unless `net` has exactly one hidden layer, and
  /// DomainError unless that layer's activation is S-shaped.
  static OneLayerProblem build(const Network& net, const InputSpec& spec);
};

/// Which bound of a neuron is fixed rather than a tangent at a free cut-off:
/// the chord (Upper for chord-above intervals, Lower for chord-below), or
/// Both for degenerate intervals.
enum class FixedSide { None, Upper, Lower, Both };

struct NeuronParam {
  Index neuron = 0;
  std::optional<CutoffRange> lower_range;
  std::optional<CutoffRange> upper_range;
  double lower_cutoff = 0;  // meaningful only when lower_range is set
  double upper_cutoff = 0;  // meaningful only when upper_range is set
  FixedSide fixed_side = FixedSide::None;
  LinearBoundPair fixed;  // lines used on the fixed side(s)
};

struct OptimizerConfig {
  int rounds = 50;
  double step_size = 0.05;
  int restarts = 3;
  /// Also start from each constant-time strategy's bounds.
  bool warm_starts = true;
  std::uint64_t seed = 0;
};

/// Ranges and fixed sides per neuron, with cut-offs drawn uniformly from
/// their ranges.
std::vector<NeuronParam> init_params(const OneLayerProblem& problem, std::uint64_t seed);

/// Bound lines of one neuron at its current cut-offs.
LinearBoundPair neuron_lines(const OneLayerProblem& problem, const NeuronParam& param);

/// Sound lower bound of c . f(x) over the region when every hidden neuron is
/// relaxed by `lines`: neurons with a positive output weight use their lower
/// line, the others their upper line. An upper bound of c . f is
/// -objective_lower(-c).
double objective_lower(const OneLayerProblem& problem, const std::vector<LinearBoundPair>& lines,
                       const Vector& c);
double objective_lower(const OneLayerProblem& problem, const std::vector<NeuronParam>& params,
                       const Vector& c);

/// Derivative of objective_lower with respect to each neuron's relevant
/// cut-off (the lower one where (c^T W2)_r > 0, the upper one where < 0);
/// zero where that side is fixed.
Vector objective_gradient(const OneLayerProblem& problem, const std::vector<NeuronParam>& params,
                          const Vector& c);

struct FunctionalResult {
  double value = 0;
  /// Per-neuron lines achieving `value`.
  std::vector<LinearBoundPair> lines;
  /// Objective after every accepted step of the run that produced `value`.
  std::vector<double> history;
};

/// Best lower bound of c . f found by projected gradient ascent over the
/// cut-offs from random and warm starts.
FunctionalResult optimize_functional(const OneLayerProblem& problem, const Vector& c,
                                     const OptimizerConfig& config);

struct OneLayerResult {
  Index label = 0;
  double lower_s0 = 0;
  /// Upper bound of every output; entry s0 is unused.
  Vector upper;
  /// lower_s0 - upper[s], +inf at s0.
  Vector margins;
  double margin_lo = 0;
  std::optional<Index> failing_label;
  /// Lower lines from the label's run, upper lines from the binding
  /// competitor's run, newise lines on sides neither run uses.
  std::vector<LinearBoundPair> neuron_pairs;
};

OneLayerResult optimize(const Network& net, const InputSpec& spec, Index s0,
                        const OptimizerConfig& config);

}  // namespace tightcert
