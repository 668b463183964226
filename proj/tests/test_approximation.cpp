#include "doctest.h"

#include <random>

#include "support.hpp"
#include "tightcert/approximation.hpp"

using namespace tightcert;

namespace {

constexpr ActivationKind kSShaped[] = {ActivationKind::Sigmoid, ActivationKind::Tanh,
                                       ActivationKind::Arctan};
constexpr Strategy kStrategies[] = {Strategy::NeWise, Strategy::MinArea, Strategy::Parallel,
                                    Strategy::Taylor};

// Worst violation on a uniform grid, evaluated in long double.
double ref_violation(const LinearBoundPair& p, ActivationKind k, double l, double u, int n) {
  long double worst = -1e300L;
  for (int i = 0; i < n; ++i) {
    const long double x = l + (long double)(u - l) * i / (n - 1);
    const long double y = ref::act(k, x);
    worst = std::max({worst, y - (p.alpha_u * x + p.beta_u), (p.alpha_l * x + p.beta_l) - y});
  }
  return (double)worst;
}

long double ref_chord(ActivationKind k, double l, double u) {
  return (ref::act(k, u) - ref::act(k, l)) / ((long double)u - l);
}

std::pair<double, double> random_interval(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-20, 20);
  double a = u(rng), b = u(rng);
  if (a > b) std::swap(a, b);
  return {a, b};
}

}  // namespace

TEST_CASE("classify_case on reference intervals") {
  const auto k = ActivationKind::Sigmoid;
  // Oracle: compare long double slopes directly.
  const long double chord = ref_chord(k, -2, 2);
  CHECK(ref::deriv(k, 2) < chord);
  CHECK(ref::deriv(k, -2) < chord);
  CHECK(classify_case(k, -2, 2) == CaseKind::Case3);
  CHECK(ref::deriv(k, 0) > ref_chord(k, 0, 2));
  CHECK(ref_chord(k, 0, 2) > ref::deriv(k, 2));
  CHECK(classify_case(k, 0, 2) == CaseKind::Case2);
  CHECK(classify_case(k, -2, 0) == CaseKind::Case1);
  CHECK(classify_case(k, 1, 1 + 1e-10) == CaseKind::Degenerate);
  CHECK_THROWS_AS(classify_case(k, 1, 0), DomainError);
  CHECK_THROWS_AS(classify_case(ActivationKind::ReLU, -1, 1), DomainError);
}

TEST_CASE("classify_case agrees with long double slopes and never sees both derivatives above the chord") {
  std::mt19937_64 rng(21);
  for (ActivationKind k : kSShaped)
    for (int i = 0; i < 2000; ++i) {
      const auto [l, u] = random_interval(rng);
      if (u - l < 1e-6) continue;
      const long double chord = ref_chord(k, l, u);
      const long double dl = ref::deriv(k, l), du = ref::deriv(k, u);
      CHECK_FALSE((dl > chord * (1 + 1e-9L) && du > chord * (1 + 1e-9L)));
      const CaseKind c = classify_case(k, l, u);
      // Only check away from ties, where rounding may route either way.
      const long double tie = 1e-9L * chord;
      if (std::abs(du - chord) > tie && std::abs(dl - chord) > tie) {
        const CaseKind expect = chord < du   ? CaseKind::Case1
                                : chord < dl ? CaseKind::Case2
                                             : CaseKind::Case3;
        CHECK(c == expect);
      }
    }
}

TEST_CASE("newise_bounds case formulas") {
  const auto k = ActivationKind::Sigmoid;
  const double s2 = act_eval(k, 2.0), sm2 = act_eval(k, -2.0), d2 = act_deriv(k, 2.0);
  const LinearBoundPair c3 = newise_bounds(k, -2, 2);
  CHECK(c3.alpha_u == doctest::Approx(d2).epsilon(1e-15));
  CHECK(c3.alpha_l == doctest::Approx(d2).epsilon(1e-15));
  CHECK(c3.beta_u == doctest::Approx(s2 - 2 * d2).epsilon(1e-15));
  CHECK(c3.beta_l == doctest::Approx(sm2 + 2 * d2).epsilon(1e-15));

  const LinearBoundPair c2 = newise_bounds(k, 0, 2);
  const double chord = (double)ref_chord(k, 0, 2);
  CHECK(c2.alpha_l == doctest::Approx(chord).epsilon(1e-14));
  CHECK(c2.lower(2.0) == doctest::Approx(s2).epsilon(1e-15));
  CHECK(c2.alpha_u == doctest::Approx(d2).epsilon(1e-15));
  CHECK(c2.upper(2.0) == doctest::Approx(s2).epsilon(1e-15));

  const LinearBoundPair c1 = newise_bounds(k, -2, 0);
  CHECK(c1.alpha_u == doctest::Approx(chord).epsilon(1e-14));
  CHECK(c1.upper(-2.0) == doctest::Approx(sm2).epsilon(1e-15));
  CHECK(c1.alpha_l == doctest::Approx(d2).epsilon(1e-15));

  for (ActivationKind kind : kSShaped) {
    const LinearBoundPair d = newise_bounds(kind, 0.7, 0.7);
    CHECK(d.upper(0.7) == doctest::Approx(act_eval(kind, 0.7)));
    CHECK(d.lower(0.7) == doctest::Approx(act_eval(kind, 0.7)));
    CHECK(d.alpha_u == d.alpha_l);
  }
}

TEST_CASE("newise anchoring and per-neuron range exactness") {
  std::mt19937_64 rng(23);
  for (ActivationKind k : kSShaped)
    for (int i = 0; i < 2000; ++i) {
      const auto [l, u] = random_interval(rng);
      const LinearBoundPair p = newise_bounds(k, l, u);
      CHECK(std::abs(p.upper(u) - (double)ref::act(k, u)) <= 1e-12);
      CHECK(std::abs(p.lower(l) - (double)ref::act(k, l)) <= 1e-12);
    }
}

TEST_CASE("every strategy is sound on random intervals") {
  std::mt19937_64 rng(29);
  for (ActivationKind k : kSShaped)
    for (Strategy s : kStrategies)
      for (int i = 0; i < 100; ++i) {
        const auto [l, u] = random_interval(rng);
        const LinearBoundPair p = approximate(s, k, l, u);
        CHECK(validate_soundness(p, k, l, u, 2000) <= 1e-9);
        CHECK(ref_violation(p, k, l, u, 2000) <= 1e-9);
      }
}

TEST_CASE("odd symmetry of tanh and arctan bounds") {
  std::mt19937_64 rng(31);
  for (ActivationKind k : {ActivationKind::Tanh, ActivationKind::Arctan})
    for (Strategy s : kStrategies)
      for (int i = 0; i < 300; ++i) {
        const auto [l, u] = random_interval(rng);
        const LinearBoundPair p = approximate(s, k, l, u);
        const LinearBoundPair m = approximate(s, k, -u, -l);
        CHECK(std::abs(p.alpha_u - m.alpha_l) <= 1e-10);
        CHECK(std::abs(p.alpha_l - m.alpha_u) <= 1e-10);
        CHECK(std::abs(p.beta_u + m.beta_l) <= 1e-10);
        CHECK(std::abs(p.beta_l + m.beta_u) <= 1e-10);
      }
}

TEST_CASE("minimal_area_bounds") {
  const auto k = ActivationKind::Sigmoid;
  const LinearBoundPair up = minimal_area_bounds(k, 0, 2);
  const TangentSolution mid = tangent_at(k, 1.0);
  CHECK(up.alpha_u == doctest::Approx(mid.slope).epsilon(1e-14));
  CHECK(up.beta_u == doctest::Approx(mid.intercept).epsilon(1e-14));

  // Case 3 on [-2, 2]: parallel lines with slope near 0.204, offsets near
  // 0.527 / 0.472.
  const LinearBoundPair p = minimal_area_bounds(k, -2, 2);
  CHECK(std::abs(p.alpha_u - 0.204) <= 0.02);
  CHECK(std::abs(p.alpha_l - 0.204) <= 0.02);
  CHECK(std::abs(p.alpha_u - 0.204) <= 0.001);
  CHECK(std::abs(p.beta_u - 0.527) <= 0.001);
  CHECK(std::abs(p.beta_l - 0.472) <= 0.001);
  CHECK(validate_soundness(p, k, -2, 2, 10000) <= 1e-12);

  const LinearBoundPair d = minimal_area_bounds(k, 0.3, 0.3);
  CHECK(d.alpha_u == act_deriv(k, 0.3));
  CHECK(d.beta_u == d.beta_l);
}

TEST_CASE("minimal_area upper tangent minimizes area over its admissible range") {
  // Oracle: dense scan of tangent points across the admissible range.
  std::mt19937_64 rng(37);
  for (ActivationKind k : kSShaped)
    for (int i = 0; i < 40; ++i) {
      const auto [l, u] = random_interval(rng);
      const auto range = upper_tangent_range(k, l, u);
      if (!range || classify_case(k, l, u) == CaseKind::Case1) continue;
      const LinearBoundPair p = minimal_area_bounds(k, l, u);
      const double area = enclosed_area(p, k, l, u).upper;
      for (int j = 0; j <= 200; ++j) {
        const double d = range->lo + (range->hi - range->lo) * j / 200.0;
        const TangentSolution t = tangent_at(k, d);
        const LinearBoundPair q{t.slope, t.intercept, 0, 0, false};
        CHECK(area <= enclosed_area(q, k, l, u).upper + 1e-9 * (1 + std::abs(area)));
      }
    }
}

TEST_CASE("parallel_tangent_bounds") {
  const auto k = ActivationKind::Sigmoid;
  const double chord = (double)ref_chord(k, 0, 2);
  const LinearBoundPair p = parallel_tangent_bounds(k, 0, 2);
  CHECK(p.alpha_l == doctest::Approx(chord).epsilon(1e-14));
  CHECK(p.lower(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  const TangentSolution t = tangent_with_slope(k, p.alpha_l, Branch::Right);
  CHECK(p.alpha_u == doctest::Approx(chord).epsilon(1e-14));
  CHECK(p.beta_u == doctest::Approx(t.intercept).epsilon(1e-12));
  CHECK_FALSE(p.fallback);

  const LinearBoundPair m = parallel_tangent_bounds(k, -2, 0);
  CHECK(m.alpha_u == doctest::Approx(chord).epsilon(1e-14));
  CHECK(m.upper(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  // sigma(-x) = 1 - sigma(x): the mirrored lower offset is 1 - the upper one
  CHECK(m.beta_l == doctest::Approx(1 - p.beta_u).epsilon(1e-12));

  const LinearBoundPair f = parallel_tangent_bounds(k, -2, 2);
  CHECK(f.fallback);
  const LinearBoundPair nw = newise_bounds(k, -2, 2);
  CHECK(f.alpha_u == nw.alpha_u);
  CHECK(f.beta_l == nw.beta_l);

  const LinearBoundPair d = parallel_tangent_bounds(k, 1, 1);
  CHECK(d.upper(1.0) == doctest::Approx(act_eval(k, 1.0)));
}

TEST_CASE("taylor_midpoint_bounds") {
  for (ActivationKind k : kSShaped) {
    const LinearBoundPair d = taylor_midpoint_bounds(k, -0.4, -0.4);
    CHECK(d.beta_u == d.beta_l);
    CHECK(d.alpha_u == act_deriv(k, -0.4));
  }
  for (double a : {0.3, 1.0, 4.0}) {
    const LinearBoundPair p = taylor_midpoint_bounds(ActivationKind::Tanh, -a, a);
    CHECK(p.beta_u == doctest::Approx(-p.beta_l).epsilon(1e-14));
  }
  // Offsets against a dense grid of sigma(x) - sigma'(1) x on [0, 2].
  const auto k = ActivationKind::Sigmoid;
  const LinearBoundPair p = taylor_midpoint_bounds(k, 0, 2);
  const long double slope = ref::deriv(k, 1.0L);
  long double hi = -1e9L, lo = 1e9L;
  for (int i = 0; i <= 1000000; ++i) {
    const long double x = 2.0L * i / 1000000;
    const long double g = ref::act(k, x) - slope * x;
    hi = std::max(hi, g);
    lo = std::min(lo, g);
  }
  CHECK(std::abs(p.beta_u - (double)hi) <= 1e-8);
  CHECK(std::abs(p.beta_l - (double)lo) <= 1e-8);
}

TEST_CASE("relu_bounds") {
  const LinearBoundPair a = relu_bounds(1, 3);
  CHECK((a.alpha_u == 1 && a.alpha_l == 1 && a.beta_u == 0 && a.beta_l == 0));
  const LinearBoundPair z = relu_bounds(-3, -1);
  CHECK((z.alpha_u == 0 && z.alpha_l == 0 && z.beta_u == 0 && z.beta_l == 0));
  const LinearBoundPair s = relu_bounds(-1, 1);
  CHECK(s.alpha_u == 0.5);
  CHECK(s.beta_u == 0.5);
  CHECK(s.alpha_l == 0);
  CHECK(s.beta_l == 0);
  CHECK(validate_soundness(s, ActivationKind::ReLU, -1, 1, 1001) <= 0);
  // every strategy routes ReLU to these bounds
  for (Strategy st : kStrategies) CHECK(approximate(st, ActivationKind::ReLU, -1, 1).beta_u == 0.5);
}

TEST_CASE("validate_soundness") {
  const auto k = ActivationKind::Sigmoid;
  const LinearBoundPair p = newise_bounds(k, -2, 2);
  CHECK(validate_soundness(p, k, -2, 2, 10000) <= 1e-12);
  const LinearBoundPair flipped{p.alpha_l, p.beta_l, p.alpha_u, p.beta_u, false};
  CHECK(validate_soundness(flipped, k, -2, 2, 10000) > 0);
  CHECK(validate_soundness(LinearBoundPair{1, 0, 1, 0, false}, ActivationKind::ReLU, 1, 3, 100) ==
        0.0);
  CHECK_THROWS_AS(validate_soundness(p, k, -2, 2, 1), DomainError);
}

TEST_CASE("tangent ranges are sound at their ends and tight") {
  std::mt19937_64 rng(41);
  for (ActivationKind k : kSShaped)
    for (int i = 0; i < 300; ++i) {
      const auto [l, u] = random_interval(rng);
      if (u - l < 1e-3) continue;
      if (const auto r = upper_tangent_range(k, l, u)) {
        for (double d : {r->lo, r->hi, 0.5 * (r->lo + r->hi)}) {
          const TangentSolution t = tangent_at(k, d);
          const LinearBoundPair q{t.slope, t.intercept, -1e9, -1e18, false};
          CHECK(ref_violation(q, k, l, u, 2000) <= 1e-9);
        }
        // just left of the range the tangent cuts the curve at l
        if (l < 0 && r->lo - 1e-3 > 0) {
          const TangentSolution t = tangent_at(k, r->lo - 1e-3);
          CHECK(t.slope * l + t.intercept < act_eval(k, l));
        }
      }
      if (const auto r = lower_tangent_range(k, l, u)) {
        for (double d : {r->lo, r->hi, 0.5 * (r->lo + r->hi)}) {
          const TangentSolution t = tangent_at(k, d);
          const LinearBoundPair q{-1e9, 1e18, t.slope, t.intercept, false};
          CHECK(ref_violation(q, k, l, u, 2000) <= 1e-9);
        }
      }
    }
}

TEST_CASE("enclosed_area matches trapezoid integration") {
  const auto k = ActivationKind::Arctan;
  const LinearBoundPair p = newise_bounds(k, -1.5, 3.0);
  const EnclosedArea a = enclosed_area(p, k, -1.5, 3.0);
  long double up = 0, low = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const long double x0 = -1.5L + 4.5L * i / n, x1 = -1.5L + 4.5L * (i + 1) / n;
    auto gu = [&](long double x) { return p.alpha_u * x + p.beta_u - ref::act(k, x); };
    auto gl = [&](long double x) { return ref::act(k, x) - (p.alpha_l * x + p.beta_l); };
    up += (gu(x0) + gu(x1)) / 2 * (x1 - x0);
    low += (gl(x0) + gl(x1)) / 2 * (x1 - x0);
  }
  CHECK(a.upper == doctest::Approx((double)up).epsilon(1e-8));
  CHECK(a.lower == doctest::Approx((double)low).epsilon(1e-8));
  CHECK(a.upper >= 0);
  CHECK(a.lower >= 0);
}
