#include "tightcert/propagation.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

namespace tightcert {

namespace {

std::string neuron_name(std::size_t layer, Index index) {
  return "layer " + std::to_string(layer) + " neuron " + std::to_string(index);
}

LinearBoundPair checked_pair(const PairProvider& provider, std::size_t t, Index r,
                             ActivationKind kind, double l, double u) {
  LinearBoundPair p;
  try {
    p = provider(t, r, kind, l, u);
  } catch (const DomainError& e) {
    throw DomainError(neuron_name(t, r) + ": " + e.what());
  } catch (const NoSolutionError& e) {
    throw NoSolutionError(neuron_name(t, r) + ": " + e.what());
  }
  if (!(p.alpha_l >= 0) || !(p.alpha_u >= 0)) {
    throw DomainError(neuron_name(t, r) + ": relaxation slopes must be nonnegative");
  }
  if (!std::isfinite(p.beta_l) || !std::isfinite(p.beta_u) || !std::isfinite(p.alpha_l) ||
      !std::isfinite(p.alpha_u)) {
    throw DomainError(neuron_name(t, r) + ": non-finite relaxation");
  }
  return p;
}

}  // namespace

Vector region_min(const AffineForm& form, const InputSpec& spec) {
  if (spec.clip) return box_extreme_rows(form, spec.box_lo(), spec.box_hi(), Extreme::Min);
  return linf_extreme_rows(form, spec.x0, spec.eps, Extreme::Min);
}

Vector region_max(const AffineForm& form, const InputSpec& spec) {
  if (spec.clip) return box_extreme_rows(form, spec.box_lo(), spec.box_hi(), Extreme::Max);
  return linf_extreme_rows(form, spec.x0, spec.eps, Extreme::Max);
}

PropagationResult propagate(const Network& net, const InputSpec& spec, Strategy strategy,
                            const PropagateOptions& options) {
  return propagate(
      net, spec,
      [strategy](std::size_t, Index, ActivationKind kind, double l, double u) {
        return approximate(strategy, kind, l, u);
      },
      options);
}

PropagationResult propagate(const Network& net, const InputSpec& spec,
                            const PairProvider& provider, const PropagateOptions& options) {
  spec.validate(net);
  const auto& ops = net.lowered();
  PropagationResult res;
  res.trace.reserve(ops.size());
  res.pairs.reserve(ops.size() - 1);

  // Base case: the first layer is exactly affine in the input.
  SymbolicBounds cur{ops[0].W, ops[0].b, ops[0].W, ops[0].b};
  for (std::size_t t = 0;; ++t) {
    LayerInterval iv{region_min(cur.lower(), spec), region_max(cur.upper(), spec)};
    // Lower and upper forms can coincide up to rounding; keep l <= u.
    for (Index r = 0; r < iv.l.size(); ++r)
      if (iv.l[r] > iv.u[r]) std::swap(iv.l[r], iv.u[r]);
    res.trace.push_back(iv);
    if (options.keep_forms) res.layer_forms.push_back(cur);
    if (t + 1 == ops.size()) break;

    const ActivationKind kind = net.activation(t);
    const Index n = iv.l.size();
    Vector alpha_l(n), beta_l(n), alpha_u(n), beta_u(n);
    std::vector<LinearBoundPair> pairs(static_cast<std::size_t>(n));
    for (Index r = 0; r < n; ++r) {
      const LinearBoundPair p = checked_pair(provider, t, r, kind, iv.l[r], iv.u[r]);
      if (p.fallback) ++res.fallback_count;
      alpha_l[r] = p.alpha_l;
      beta_l[r] = p.beta_l;
      alpha_u[r] = p.alpha_u;
      beta_u[r] = p.beta_u;
      pairs[static_cast<std::size_t>(r)] = p;
    }
    res.pairs.push_back(std::move(pairs));

    // Post-activation forms, then the next affine map with the sign split:
    // positive weights take the same-side form, negative weights the other.
    const Matrix post_al = alpha_l.asDiagonal() * cur.A_L;
    const Matrix post_au = alpha_u.asDiagonal() * cur.A_U;
    const Vector post_bl = alpha_l.cwiseProduct(cur.B_L) + beta_l;
    const Vector post_bu = alpha_u.cwiseProduct(cur.B_U) + beta_u;
    const auto [wp, wn] = split_pos_neg(ops[t + 1].W);
    SymbolicBounds next;
    next.A_L = wp * post_al + wn * post_au;
    next.B_L = wp * post_bl + wn * post_bu + ops[t + 1].b;
    next.A_U = wp * post_au + wn * post_al;
    next.B_U = wp * post_bu + wn * post_bl + ops[t + 1].b;
    cur = std::move(next);
  }
  res.output = std::move(cur);
  return res;
}

std::pair<Vector, Vector> concrete_output_range(const PropagationResult& result,
                                                const InputSpec& spec) {
  return {region_min(result.output.lower(), spec), region_max(result.output.upper(), spec)};
}

std::vector<TraceMetric> compare_traces(const IntervalTrace& a, const IntervalTrace& b) {
  if (a.size() != b.size()) throw StructuralError("compare_traces: layer counts differ");
  constexpr double kTiny = 1e-12;
  auto ratio = [](double num, double den) -> std::optional<double> {
    if (std::abs(den) <= kTiny) return std::nullopt;
    return num / den;
  };
  std::vector<TraceMetric> out;
  for (std::size_t t = 0; t < a.size(); ++t) {
    if (a[t].l.size() != b[t].l.size())
      throw StructuralError("compare_traces: layer " + std::to_string(t) + " widths differ");
    for (Index r = 0; r < a[t].l.size(); ++r) {
      const double l = a[t].l[r], u = a[t].u[r], lp = b[t].l[r], up = b[t].u[r];
      out.push_back({t, r, ratio((u - l) - (up - lp), up - lp), ratio(l - lp, lp),
                     ratio(u - up, up)});
    }
  }
  return out;
}

void write_trace(std::ostream& out, const IntervalTrace& trace) {
  out << "layer,index,l,u\n";
  char buf[96];
  for (std::size_t t = 0; t < trace.size(); ++t) {
    for (Index r = 0; r < trace[t].l.size(); ++r) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g", trace[t].l[r], trace[t].u[r]);
      out << t << ',' << r << ',' << buf << '\n';
    }
  }
}

}  // namespace tightcert
