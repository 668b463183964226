#include "tightcert/certification.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>

#include "tightcert/propagation.hpp"

namespace tightcert {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::NeWise:
      return "newise";
    case Method::MinArea:
      return "minarea";
    case Method::Parallel:
      return "parallel";
    case Method::Taylor:
      return "taylor";
    case Method::Alg1:
      return "alg1";
  }
  return "newise";
}

Method parse_method(std::string_view name) {
  if (name == "newise") return Method::NeWise;
  if (name == "minarea") return Method::MinArea;
  if (name == "parallel") return Method::Parallel;
  if (name == "taylor") return Method::Taylor;
  if (name == "alg1") return Method::Alg1;
  throw ParseError("unknown strategy '" + std::string(name) + "'");
}

std::optional<Strategy> as_strategy(Method m) {
  switch (m) {
    case Method::NeWise:
      return Strategy::NeWise;
    case Method::MinArea:
      return Strategy::MinArea;
    case Method::Parallel:
      return Strategy::Parallel;
    case Method::Taylor:
      return Strategy::Taylor;
    case Method::Alg1:
      break;
  }
  return std::nullopt;
}

std::string_view to_string(Verdict v) { return v == Verdict::Robust ? "robust" : "unknown"; }

VerifyOutcome verify_at_epsilon(const Network& net, const Vector& x0, double eps, Method method,
                                const VerifyOptions& options) {
  const InputSpec spec{x0, eps, options.clip};
  spec.validate(net);
  VerifyOutcome out;
  out.label = predict_label(net, x0);
  const Index m = net.num_labels();
  out.margins = Vector::Constant(m, std::numeric_limits<double>::infinity());

  if (method == Method::Alg1) {
    const OneLayerResult r = optimize(net, spec, out.label, options.alg1);
    out.margins = r.margins;
  } else {
    const PropagationResult res = propagate(net, spec, *as_strategy(method));
    const Index s0 = out.label;
    if (options.margin == MarginMode::PerOutput) {
      const auto [lo, hi] = concrete_output_range(res, spec);
      for (Index s = 0; s < m; ++s)
        if (s != s0) out.margins[s] = lo[s0] - hi[s];
    } else {
      AffineForm diff{Matrix(m, net.input_dim()), Vector(m)};
      for (Index s = 0; s < m; ++s) {
        diff.A.row(s) = res.output.A_L.row(s0) - res.output.A_U.row(s);
        diff.B[s] = res.output.B_L[s0] - res.output.B_U[s];
      }
      const Vector lo = region_min(diff, spec);
      for (Index s = 0; s < m; ++s)
        if (s != s0) out.margins[s] = lo[s];
    }
  }

  out.margin_lo = std::numeric_limits<double>::infinity();
  for (Index s = 0; s < m; ++s) {
    if (s == out.label) continue;
    out.margin_lo = std::min(out.margin_lo, out.margins[s]);
    if (!(out.margins[s] > 0) && !out.failing_label) out.failing_label = s;
  }
  out.status = out.failing_label ? Verdict::Unknown : Verdict::Robust;
  return out;
}

CertifiedBound certified_lower_bound(const Network& net, const Vector& x0, Method method,
                                     const SearchParams& search, const VerifyOptions& options) {
  if (!(search.eps_lo >= 0) || !(search.eps_hi > search.eps_lo))
    throw DomainError("binary search: need 0 <= eps_lo < eps_hi");
  if (search.max_iter < 0 || !(search.tol >= 0))
    throw DomainError("binary search: max_iter and tol must be nonnegative");
  const auto start = std::chrono::steady_clock::now();
  CertifiedBound b;
  b.method = method;
  auto check = [&](double eps) {
    const VerifyOutcome o = verify_at_epsilon(net, x0, eps, method, options);
    b.label = o.label;
    b.probes.push_back({eps, o.status});
    return o.status;
  };

  double lo = search.eps_lo, hi = search.eps_hi;
  if (check(lo) != Verdict::Robust) {
    throw MisclassifiedError("input is not verified at eps = " + std::to_string(lo) +
                             " (misclassified or tied scores)");
  }
  if (check(hi) == Verdict::Robust) {
    b.epsilon = hi;
    b.hit_ceiling = true;
  } else {
    while (b.iterations < search.max_iter && hi - lo > search.tol * hi) {
      const double mid = 0.5 * (lo + hi);
      ++b.iterations;
      if (check(mid) == Verdict::Robust)
        lo = mid;
      else
        hi = mid;
    }
    b.epsilon = lo;
  }
  b.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return b;
}

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        fn(i);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const std::size_t count = std::min(workers, n);
  for (std::size_t w = 0; w < count; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

void summarize(BatchReport& report) {
  report.certified = report.skipped_misclassified = report.failed = 0;
  double sum = 0, time = 0;
  for (const InputRecord& r : report.records) {
    if (r.bound) {
      ++report.certified;
      sum += r.bound->epsilon;
      time += r.bound->wall_time;
    } else if (r.predicted != r.label) {
      ++report.skipped_misclassified;
    } else {
      ++report.failed;
    }
  }
  report.mean = report.std_dev = report.mean_time = 0;
  if (report.certified == 0) return;
  const double n = static_cast<double>(report.certified);
  report.mean = sum / n;
  report.mean_time = time / n;
  double sq = 0;
  for (const InputRecord& r : report.records)
    if (r.bound) sq += (r.bound->epsilon - report.mean) * (r.bound->epsilon - report.mean);
  report.std_dev = std::sqrt(sq / n);
}

BatchReport batch_certify(const Network& net, const Dataset& data, Method method,
                          const SearchParams& search, const VerifyOptions& options,
                          std::size_t workers) {
  BatchReport report;
  report.method = method;
  report.records.resize(data.size());
  parallel_for(data.size(), workers, [&](std::size_t i) {
    InputRecord& rec = report.records[i];
    rec.index = i;
    rec.label = data.labels[i];
    try {
      rec.predicted = predict_label(net, data.inputs[i]);
      if (rec.predicted != rec.label) return;
      rec.bound = certified_lower_bound(net, data.inputs[i], method, search, options);
    } catch (const std::exception& e) {
      rec.bound.reset();
      rec.error = e.what();
    }
  });
  summarize(report);
  return report;
}

double improvement_percent(double eps_new, double eps_base) {
  if (eps_base == 0) throw DomainError("improvement_percent: baseline bound is zero");
  return 100.0 * (eps_new - eps_base) / eps_base;
}

double round_half_up_2(double value) {
  // Nudge by a few ulps so values like 28.165 stored as 28.16499... still
  // round up.
  const double scaled = value * 100.0;
  const double nudged = scaled + std::copysign(1e-9 * std::max(1.0, std::abs(scaled)), scaled);
  return std::copysign(std::floor(std::abs(nudged) + 0.5), nudged) / 100.0;
}

}  // namespace tightcert
