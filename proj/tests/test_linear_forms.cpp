#include "doctest.h"

#include <random>

#include "tightcert/linear_forms.hpp"

using namespace tightcert;

TEST_CASE("split_pos_neg separates signs") {
  Matrix m(2, 2);
  m << 1, -2, 0, 3;
  const auto [p, n] = split_pos_neg(m);
  Matrix ep(2, 2), en(2, 2);
  ep << 1, 0, 0, 3;
  en << 0, -2, 0, 0;
  CHECK(p == ep);
  CHECK(n == en);

  const auto [zp, zn] = split_pos_neg(Matrix::Zero(2, 2));
  CHECK(zp.isZero(0));
  CHECK(zn.isZero(0));

  Matrix single(1, 1);
  single << -5;
  const auto [sp, sn] = split_pos_neg(single);
  CHECK(sp(0, 0) == 0);
  CHECK(sn(0, 0) == -5);
}

TEST_CASE("split_pos_neg parts are signed and sum back exactly") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 50; ++trial) {
    Matrix m(5, 7);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
    const auto [p, n] = split_pos_neg(m);
    CHECK((p.array() >= 0).all());
    CHECK((n.array() <= 0).all());
    CHECK((p + n) == m);
  }
}

TEST_CASE("linf_extreme closed form") {
  Vector a(2), x0 = Vector::Zero(2);
  a << 1, -2;
  CHECK(linf_extreme(a, 3.0, x0, 1.0, Extreme::Min) == 0.0);
  CHECK(linf_extreme(a, 3.0, x0, 1.0, Extreme::Max) == 6.0);
  Vector x1(2);
  x1 << 0.3, -0.7;
  const double exact = a.dot(x1) + 3.0;
  CHECK(linf_extreme(a, 3.0, x1, 0.0, Extreme::Min) == exact);
  CHECK(linf_extreme(a, 3.0, x1, 0.0, Extreme::Max) == exact);
  CHECK_THROWS_AS(linf_extreme(a, 0.0, Vector::Zero(3), 1.0, Extreme::Min), StructuralError);
  CHECK_THROWS_AS(linf_extreme(a, 0.0, x0, -1.0, Extreme::Min), DomainError);
}

TEST_CASE("linf_extreme encloses sampled points and is attained at the sign corner") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 20; ++trial) {
    Vector a(6), x0(6);
    for (Index j = 0; j < 6; ++j) {
      a[j] = 3 * u(rng);
      x0[j] = u(rng);
    }
    const double b = u(rng), eps = 0.5 * (u(rng) + 1);
    const double lo = linf_extreme(a, b, x0, eps, Extreme::Min);
    const double hi = linf_extreme(a, b, x0, eps, Extreme::Max);
    const double scale = 1e-12 * (1 + std::abs(lo) + std::abs(hi));
    for (int k = 0; k < 1000; ++k) {
      Vector x = x0;
      for (Index j = 0; j < 6; ++j) x[j] += eps * u(rng);
      const double v = a.dot(x) + b;
      CHECK(lo <= v + scale);
      CHECK(v <= hi + scale);
    }
    const Vector corner = x0 - eps * a.array().sign().matrix();
    CHECK(a.dot(corner) + b == doctest::Approx(lo).epsilon(1e-12));
  }
}

TEST_CASE("affine_compose") {
  AffineForm inner{Matrix::Identity(2, 2), Vector::Zero(2)};
  Matrix w(1, 2);
  w << 1, -1;
  const AffineForm f = affine_compose(w, Vector(Vector::Zero(1)), inner);
  CHECK(f.A == w);
  CHECK(f.B(0) == 0);

  Matrix w2(1, 1), a(1, 1);
  w2 << 2;
  a << 3;
  Vector b1(1), b2(1);
  b1 << 1;
  b2 << 4;
  const AffineForm g = affine_compose(w2, b1, AffineForm{a, b2});
  CHECK(g.A(0, 0) == 6);
  CHECK(g.B(0) == 9);

  const AffineForm same = affine_compose(Matrix(Matrix::Identity(2, 2)), Vector(Vector::Zero(2)),
                                         AffineForm{w.transpose() * w, Vector::Ones(2)});
  CHECK(same.A == w.transpose() * w);
  CHECK(same.B == Vector::Ones(2));
  CHECK_THROWS_AS(affine_compose(w, Vector(Vector::Zero(1)), AffineForm{a, b2}), StructuralError);
}

TEST_CASE("affine_compose matches sequential evaluation") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  auto rnd = [&](Index r, Index c) {
    Matrix m(r, c);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
    return m;
  };
  const AffineForm inner{rnd(4, 3), rnd(4, 1)};
  const Matrix w = rnd(2, 4);
  const Vector b = rnd(2, 1);
  const AffineForm f = affine_compose(w, b, inner);
  for (int k = 0; k < 100; ++k) {
    const Vector x = rnd(3, 1);
    const Vector seq = w * inner(x) + b;
    CHECK((f(x) - seq).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("box_extreme_rows matches linf for an unclipped ball") {
  Matrix a(2, 3);
  a << 1, -2, 0.5, -1, 0, 3;
  Vector b(2), x0(3);
  b << 0.1, -0.2;
  x0 << 0.2, 0.4, -0.1;
  const AffineForm f{a, b};
  const Vector lo = x0.array() - 0.3, hi = x0.array() + 0.3;
  const Vector by_box = box_extreme_rows(f, lo, hi, Extreme::Min);
  const Vector by_ball = linf_extreme_rows(f, x0, 0.3, Extreme::Min);
  CHECK((by_box - by_ball).cwiseAbs().maxCoeff() <= 1e-12);
}
