#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tightcert/approximation.hpp"
#include "tightcert/network.hpp"
#include "tightcert/onelayer_optimizer.hpp"

namespace tightcert {

/// A constant-time relaxation strategy, or the one-hidden-layer optimizer.
enum class Method { NeWise, MinArea, Parallel, Taylor, Alg1 };

std::string_view to_string(Method m);
Method parse_method(std::string_view name);
std::optional<Strategy> as_strategy(Method m);

enum class Verdict { Robust, Unknown };
std::string_view to_string(Verdict v);

/// How the margin f[s0] - f[s] is bounded from one propagation.
/// PerOutput: min of the s0 lower form minus max of the s upper form.
/// Joint: min over the region of (lower form s0 - upper form s), the same
/// as propagating the network extended by the row e_s0 - e_s.
enum class MarginMode { PerOutput, Joint };

struct VerifyOptions {
  MarginMode margin = MarginMode::PerOutput;
  std::optional<std::pair<double, double>> clip;
  OptimizerConfig alg1;
};

struct VerifyOutcome {
  Verdict status = Verdict::Unknown;
  Index label = 0;
  /// First competitor whose margin bound is not positive.
  std::optional<Index> failing_label;
  /// Smallest margin bound over competitors (+inf for a single-label net).
  double margin_lo = 0;
  /// Margin bound per label, +inf at the predicted label.
  Vector margins;
};

/// Robust iff every competitor's margin bound is strictly positive.
VerifyOutcome verify_at_epsilon(const Network& net, const Vector& x0, double eps, Method method,
                                const VerifyOptions& options = {});

struct SearchParams {
  double eps_lo = 0;
  double eps_hi = 1.0;
  int max_iter = 20;
  /// Stop once eps_hi - eps_lo <= tol * eps_hi.
  double tol = 1e-4;
};

struct Probe {
  double eps = 0;
  Verdict verdict = Verdict::Unknown;
};

struct CertifiedBound {
  double epsilon = 0;
  int iterations = 0;
  Method method = Method::NeWise;
  double wall_time = 0;
  Index label = 0;
  /// True when the ceiling eps_hi itself verified.
  bool hit_ceiling = false;
  std::vector<Probe> probes;
};

/// Largest radius found by bisection that verifies Robust. Throws
/// MisclassifiedError if eps_lo itself does not verify.
CertifiedBound certified_lower_bound(const Network& net, const Vector& x0, Method method,
                                     const SearchParams& search = {},
                                     const VerifyOptions& options = {});

struct InputRecord {
  std::size_t index = 0;
  Index label = 0;
  Index predicted = 0;
  std::optional<CertifiedBound> bound;
  std::string error;  // set when certification threw
};

struct BatchReport {
  Method method = Method::NeWise;
  std::vector<InputRecord> records;
  /// Over inputs with a bound; population standard deviation.
  double mean = 0;
  double std_dev = 0;
  double mean_time = 0;
  std::size_t certified = 0;
  std::size_t skipped_misclassified = 0;
  std::size_t failed = 0;
};

/// Runs fn(i) for i in [0, n) on up to `workers` threads.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

BatchReport batch_certify(const Network& net, const Dataset& data, Method method,
                          const SearchParams& search = {}, const VerifyOptions& options = {},
                          std::size_t workers = 1);

/// Summary statistics recomputed from the records.
void summarize(BatchReport& report);

/// 100 (eps_new - eps_base) / eps_base.
double improvement_percent(double eps_new, double eps_base);
/// Round to 2 decimals, halves away from zero.
double round_half_up_2(double value);

}  // namespace tightcert
