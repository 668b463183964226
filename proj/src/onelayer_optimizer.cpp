#include "tightcert/onelayer_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "tightcert/propagation.hpp"

namespace tightcert {

namespace {

enum class Side { None, Lower, Upper };

// Which line of neuron r a functional with hidden weights v uses, and
// whether that line has a free cut-off.
Side relevant_side(double v_r) {
  if (v_r > 0) return Side::Lower;
  if (v_r < 0) return Side::Upper;
  return Side::None;
}

bool lower_free(const NeuronParam& p) {
  return p.lower_range && p.fixed_side != FixedSide::Lower && p.fixed_side != FixedSide::Both;
}

bool upper_free(const NeuronParam& p) {
  return p.upper_range && p.fixed_side != FixedSide::Upper && p.fixed_side != FixedSide::Both;
}

double* free_cutoff(NeuronParam& p, Side side) {
  if (side == Side::Lower && lower_free(p)) return &p.lower_cutoff;
  if (side == Side::Upper && upper_free(p)) return &p.upper_cutoff;
  return nullptr;
}

const CutoffRange& range_of(const NeuronParam& p, Side side) {
  return side == Side::Lower ? *p.lower_range : *p.upper_range;
}

Vector hidden_weights(const OneLayerProblem& problem, const Vector& c) {
  detail::require(c.size() == problem.outputs(), "objective: functional length != outputs");
  return problem.W2.transpose() * c;
}

// Assembled affine form A x + B of the relaxed functional.
struct Assembled {
  Eigen::RowVectorXd A;
  double B = 0;
};

Assembled assemble(const OneLayerProblem& problem, const std::vector<LinearBoundPair>& lines,
                   const Vector& c, const Vector& v) {
  detail::require(static_cast<Index>(lines.size()) == problem.hidden(),
                  "objective: one line pair per hidden neuron required");
  Vector coef(problem.hidden());
  double offset = c.dot(problem.b2);
  for (Index r = 0; r < problem.hidden(); ++r) {
    const LinearBoundPair& p = lines[static_cast<std::size_t>(r)];
    const bool lower = v[r] >= 0;
    coef[r] = v[r] * (lower ? p.alpha_l : p.alpha_u);
    offset += v[r] * (lower ? p.beta_l : p.beta_u);
  }
  return {coef.transpose() * problem.W1, coef.dot(problem.b1) + offset};
}

double region_min_row(const OneLayerProblem& problem, const Assembled& f) {
  const InputSpec& spec = problem.spec;
  if (spec.clip) {
    double acc = f.B;
    for (Index j = 0; j < f.A.size(); ++j)
      acc += f.A[j] * (f.A[j] > 0 ? problem.box_lo[j] : problem.box_hi[j]);
    return acc;
  }
  return linf_extreme(f.A.transpose(), f.B, spec.x0, spec.eps, Extreme::Min);
}

std::vector<LinearBoundPair> all_lines(const OneLayerProblem& problem,
                                       const std::vector<NeuronParam>& params) {
  std::vector<LinearBoundPair> lines;
  lines.reserve(params.size());
  for (const NeuronParam& p : params) lines.push_back(neuron_lines(problem, p));
  return lines;
}

struct Run {
  std::vector<NeuronParam> params;
  double value = 0;
  std::vector<double> history;
};

Run ascend(const OneLayerProblem& problem, std::vector<NeuronParam> params, const Vector& c,
           const OptimizerConfig& config) {
  const Vector v = hidden_weights(problem, c);
  Run run{std::move(params), 0, {}};
  run.value = objective_lower(problem, run.params, c);
  run.history.push_back(run.value);
  double step = config.step_size;
  for (int it = 0; it < config.rounds && step > 1e-12; ++it) {
    const Vector g = objective_gradient(problem, run.params, c);
    const double gmax = g.cwiseAbs().maxCoeff();
    if (!(gmax > 0) || !std::isfinite(gmax)) break;
    std::vector<NeuronParam> cand = run.params;
    for (Index r = 0; r < problem.hidden(); ++r) {
      const Side side = relevant_side(v[r]);
      auto& p = cand[static_cast<std::size_t>(r)];
      if (double* d = free_cutoff(p, side); d && g[r] != 0)
        *d = range_of(p, side).clamp(*d + step * g[r] / gmax);
    }
    const double value = objective_lower(problem, cand, c);
    if (value > run.value) {
      run.params = std::move(cand);
      run.value = value;
      run.history.push_back(value);
      step *= 2;
    } else {
      step /= 2;
    }
  }
  if (config.rounds <= 0) return run;
  // The optimum often sits on a range end; try snapping each cut-off there.
  for (Index r = 0; r < problem.hidden(); ++r) {
    const Side side = relevant_side(v[r]);
    auto& p = run.params[static_cast<std::size_t>(r)];
    double* d = free_cutoff(p, side);
    if (!d) continue;
    const CutoffRange range = range_of(p, side);
    for (double end : {range.lo, range.hi}) {
      const double saved = *d;
      *d = end;
      const double value = objective_lower(problem, run.params, c);
      if (value > run.value) {
        run.value = value;
        run.history.push_back(value);
      } else {
        *d = saved;
      }
    }
  }
  return run;
}

// Cut-offs whose tangent slopes match a given pair's slopes, clamped to the
// admissible ranges.
std::vector<NeuronParam> project_pairs(const OneLayerProblem& problem,
                                       std::vector<NeuronParam> params,
                                       const std::vector<LinearBoundPair>& pairs) {
  auto match = [&](double slope, Branch branch, const CutoffRange& range) {
    if (!(slope > 0)) return branch == Branch::Right ? range.hi : range.lo;
    try {
      return range.clamp(tangent_with_slope(problem.kind, slope, branch).point);
    } catch (const NoSolutionError&) {
      return range.clamp(0.0);
    }
  };
  for (std::size_t r = 0; r < params.size(); ++r) {
    NeuronParam& p = params[r];
    if (p.upper_range) p.upper_cutoff = match(pairs[r].alpha_u, Branch::Right, *p.upper_range);
    if (p.lower_range) p.lower_cutoff = match(pairs[r].alpha_l, Branch::Left, *p.lower_range);
  }
  return params;
}

}  // namespace

OneLayerProblem OneLayerProblem::build(const Network& net, const InputSpec& spec) {
  if (net.num_layers() != 2) {
    throw StructuralError("one-layer optimizer: network has " +
                          std::to_string(net.num_layers() - 1) + " hidden layers, expected 1");
  }
  const ActivationKind kind = net.activation(0);
  if (!is_s_shaped(kind)) {
    throw DomainError("one-layer optimizer: hidden activation '" + std::string(to_string(kind)) +
                      "' is not S-shaped");
  }
  spec.validate(net);
  OneLayerProblem p;
  p.W1 = net.lowered()[0].W;
  p.b1 = net.lowered()[0].b;
  p.W2 = net.lowered()[1].W;
  p.b2 = net.lowered()[1].b;
  p.kind = kind;
  p.spec = spec;
  p.box_lo = spec.box_lo();
  p.box_hi = spec.box_hi();
  const AffineForm first{p.W1, p.b1};
  p.l = region_min(first, spec);
  p.u = region_max(first, spec);
  return p;
}

std::vector<NeuronParam> init_params(const OneLayerProblem& problem, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto draw = [&](const CutoffRange& range) {
    if (!(range.hi > range.lo)) return range.lo;
    return std::uniform_real_distribution<double>(range.lo, range.hi)(rng);
  };
  std::vector<NeuronParam> params(static_cast<std::size_t>(problem.hidden()));
  for (Index r = 0; r < problem.hidden(); ++r) {
    NeuronParam& p = params[static_cast<std::size_t>(r)];
    const double l = problem.l[r], u = problem.u[r];
    p.neuron = r;
    p.fixed = newise_bounds(problem.kind, l, u);
    if (u - l <= kDegenerateWidth) {
      p.fixed_side = FixedSide::Both;
      continue;
    }
    p.upper_range = upper_tangent_range(problem.kind, l, u);
    p.lower_range = lower_tangent_range(problem.kind, l, u);
    if (!p.upper_range && !p.lower_range)
      p.fixed_side = FixedSide::Both;
    else if (!p.upper_range)
      p.fixed_side = FixedSide::Upper;
    else if (!p.lower_range)
      p.fixed_side = FixedSide::Lower;
    if (p.upper_range) p.upper_cutoff = draw(*p.upper_range);
    if (p.lower_range) p.lower_cutoff = draw(*p.lower_range);
  }
  return params;
}

LinearBoundPair neuron_lines(const OneLayerProblem& problem, const NeuronParam& param) {
  LinearBoundPair pair = param.fixed;
  if (upper_free(param)) {
    const TangentSolution t = tangent_at(problem.kind, param.upper_cutoff);
    pair.alpha_u = t.slope;
    pair.beta_u = t.intercept;
  }
  if (lower_free(param)) {
    const TangentSolution t = tangent_at(problem.kind, param.lower_cutoff);
    pair.alpha_l = t.slope;
    pair.beta_l = t.intercept;
  }
  pair.fallback = false;
  return pair;
}

double objective_lower(const OneLayerProblem& problem, const std::vector<LinearBoundPair>& lines,
                       const Vector& c) {
  const Vector v = hidden_weights(problem, c);
  return region_min_row(problem, assemble(problem, lines, c, v));
}

double objective_lower(const OneLayerProblem& problem, const std::vector<NeuronParam>& params,
                       const Vector& c) {
  return objective_lower(problem, all_lines(problem, params), c);
}

Vector objective_gradient(const OneLayerProblem& problem, const std::vector<NeuronParam>& params,
                          const Vector& c) {
  const Vector v = hidden_weights(problem, c);
  const Assembled f = assemble(problem, all_lines(problem, params), c, v);
  // Envelope argument: the gradient of the minimum is the gradient of the
  // form at a minimizing corner (center coordinate where the slope is 0).
  Vector x_star(f.A.size());
  for (Index j = 0; j < f.A.size(); ++j) {
    if (f.A[j] > 0)
      x_star[j] = problem.box_lo[j];
    else if (f.A[j] < 0)
      x_star[j] = problem.box_hi[j];
    else
      x_star[j] = problem.spec.clip ? 0.5 * (problem.box_lo[j] + problem.box_hi[j])
                                    : problem.spec.x0[j];
  }
  const Vector phi = problem.W1 * x_star + problem.b1;
  Vector g = Vector::Zero(problem.hidden());
  for (Index r = 0; r < problem.hidden(); ++r) {
    const NeuronParam& p = params[static_cast<std::size_t>(r)];
    const Side side = relevant_side(v[r]);
    double d = 0;
    if (side == Side::Lower && lower_free(p))
      d = p.lower_cutoff;
    else if (side == Side::Upper && upper_free(p))
      d = p.upper_cutoff;
    else
      continue;
    // alpha = act'(d), beta = act(d) - d act'(d):
    // d/dd [alpha phi + beta] = act''(d) (phi - d)
    g[r] = v[r] * act_second_deriv(problem.kind, d) * (phi[r] - d);
  }
  return g;
}

FunctionalResult optimize_functional(const OneLayerProblem& problem, const Vector& c,
                                     const OptimizerConfig& config) {
  FunctionalResult best;
  best.value = -std::numeric_limits<double>::infinity();
  // Many line choices can reach the same value (only a line's value at one
  // corner matters), so a later candidate must win by more than rounding.
  // Offering the newise lines first makes them the tie winner.
  bool have = false;
  auto improves = [&](double value) {
    const bool better = !have || value > best.value + 1e-12 * std::max(1.0, std::abs(best.value));
    have = have || better;
    return better;
  };
  auto offer_lines = [&](std::vector<LinearBoundPair> lines, double value) {
    if (improves(value)) {
      best.value = value;
      best.lines = std::move(lines);
      best.history = {value};
    }
  };
  auto offer_run = [&](Run run) {
    if (improves(run.value)) {
      best.value = run.value;
      best.lines = all_lines(problem, run.params);
      best.history = std::move(run.history);
    }
  };

  std::vector<std::vector<LinearBoundPair>> warm;
  if (config.warm_starts) {
    for (Strategy s : {Strategy::NeWise, Strategy::MinArea, Strategy::Parallel, Strategy::Taylor}) {
      std::vector<LinearBoundPair> pairs;
      pairs.reserve(static_cast<std::size_t>(problem.hidden()));
      for (Index r = 0; r < problem.hidden(); ++r)
        pairs.push_back(approximate(s, problem.kind, problem.l[r], problem.u[r]));
      // The strategy's own lines are a valid candidate as they stand.
      const double exact = objective_lower(problem, pairs, c);
      offer_lines(pairs, exact);
      warm.push_back(std::move(pairs));
    }
  }

  const int restarts = std::max(config.restarts, config.warm_starts ? 0 : 1);
  for (int i = 0; i < restarts; ++i)
    offer_run(ascend(problem, init_params(problem, config.seed + static_cast<std::uint64_t>(i)), c,
                     config));

  if (!warm.empty()) {
    const std::vector<NeuronParam> base = init_params(problem, config.seed);
    for (const auto& pairs : warm) offer_run(ascend(problem, project_pairs(problem, base, pairs), c, config));
  }
  return best;
}

OneLayerResult optimize(const Network& net, const InputSpec& spec, Index s0,
                        const OptimizerConfig& config) {
  const OneLayerProblem problem = OneLayerProblem::build(net, spec);
  const Index m = problem.outputs();
  if (s0 < 0 || s0 >= m) throw DomainError("optimize: label out of range");
  OneLayerResult res;
  res.label = s0;
  const FunctionalResult low = optimize_functional(problem, Vector::Unit(m, s0), config);
  res.lower_s0 = low.value;
  res.upper = Vector::Constant(m, std::numeric_limits<double>::quiet_NaN());
  res.margins = Vector::Constant(m, std::numeric_limits<double>::infinity());
  res.margin_lo = std::numeric_limits<double>::infinity();
  Index binding = -1;
  std::vector<LinearBoundPair> binding_upper;
  for (Index s = 0; s < m; ++s) {
    if (s == s0) continue;
    FunctionalResult up = optimize_functional(problem, -Vector::Unit(m, s), config);
    res.upper[s] = -up.value;
    res.margins[s] = res.lower_s0 - res.upper[s];
    if (binding < 0 || res.margins[s] < res.margin_lo) {
      res.margin_lo = res.margins[s];
      binding = s;
      binding_upper = std::move(up.lines);
    }
    if (!(res.margins[s] > 0) && !res.failing_label) res.failing_label = s;
  }

  res.neuron_pairs.reserve(static_cast<std::size_t>(problem.hidden()));
  for (Index r = 0; r < problem.hidden(); ++r) {
    const std::size_t i = static_cast<std::size_t>(r);
    LinearBoundPair pair = newise_bounds(problem.kind, problem.l[r], problem.u[r]);
    if (problem.W2(s0, r) > 0) {
      pair.alpha_l = low.lines[i].alpha_l;
      pair.beta_l = low.lines[i].beta_l;
    }
    // The run for -e_s uses upper lines where W2(s, r) > 0.
    if (binding >= 0 && problem.W2(binding, r) > 0) {
      pair.alpha_u = binding_upper[i].alpha_u;
      pair.beta_u = binding_upper[i].beta_u;
    }
    pair.fallback = false;
    res.neuron_pairs.push_back(pair);
  }
  return res;
}

}  // namespace tightcert
