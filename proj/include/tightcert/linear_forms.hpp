#pragma once

#include <Eigen/Dense>

#include <string>
#include <utility>

#include "tightcert/errors.hpp"

namespace tightcert {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = MatrixX<double>;
using Vector = VectorX<double>;
using Index = Eigen::Index;

/// A x + B, mapping the network input to some layer's pre-activations.
template <typename Scalar>
struct AffineFormT {
  MatrixX<Scalar> A;
  VectorX<Scalar> B;

  Index rows() const { return A.rows(); }
  Index cols() const { return A.cols(); }

  template <typename Derived>
  VectorX<Scalar> operator()(const Eigen::MatrixBase<Derived>& x) const {
    return A * x + B;
  }
};
using AffineForm = AffineFormT<double>;

enum class Extreme { Min, Max };

namespace detail {
inline void require(bool ok, const char* what) {
  if (!ok) throw StructuralError(what);
}
}  // namespace detail

/// Elementwise (max(M, 0), min(M, 0)); the two parts sum back to M exactly.
template <typename Derived>
std::pair<MatrixX<typename Derived::Scalar>, MatrixX<typename Derived::Scalar>> split_pos_neg(
    const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  return {m.cwiseMax(Scalar(0)), m.cwiseMin(Scalar(0))};
}

/// Closed-form extremum of a·x + b over the l∞ ball B(x0, eps).
template <typename DerivedA, typename DerivedX>
typename DerivedA::Scalar linf_extreme(const Eigen::MatrixBase<DerivedA>& a,
                                       typename DerivedA::Scalar b,
                                       const Eigen::MatrixBase<DerivedX>& x0,
                                       typename DerivedA::Scalar eps, Extreme dir) {
  detail::require(a.size() == x0.size(), "linf_extreme: coefficient/center length mismatch");
  if (eps < 0) throw DomainError("linf_extreme: negative radius");
  const auto center = a.dot(x0) + b;
  const auto spread = eps * a.cwiseAbs().sum();
  return dir == Extreme::Min ? center - spread : center + spread;
}

/// Row-wise linf_extreme for every row of a form.
template <typename Scalar, typename DerivedX>
VectorX<Scalar> linf_extreme_rows(const AffineFormT<Scalar>& form,
                                  const Eigen::MatrixBase<DerivedX>& x0, Scalar eps,
                                  Extreme dir) {
  detail::require(form.cols() == x0.size(), "linf_extreme_rows: form/center mismatch");
  if (eps < 0) throw DomainError("linf_extreme_rows: negative radius");
  VectorX<Scalar> center = form.A * x0 + form.B;
  VectorX<Scalar> spread = eps * form.A.cwiseAbs().rowwise().sum();
  return dir == Extreme::Min ? VectorX<Scalar>(center - spread) : VectorX<Scalar>(center + spread);
}

/// Extremum of each row over an axis-aligned box [lo, hi], evaluated at the
/// optimal corner.
template <typename Scalar>
VectorX<Scalar> box_extreme_rows(const AffineFormT<Scalar>& form, const VectorX<Scalar>& lo,
                                 const VectorX<Scalar>& hi, Extreme dir) {
  detail::require(form.cols() == lo.size() && lo.size() == hi.size(),
                  "box_extreme_rows: form/box mismatch");
  const auto [pos, neg] = split_pos_neg(form.A);
  if (dir == Extreme::Min) return pos * lo + neg * hi + form.B;
  return pos * hi + neg * lo + form.B;
}

/// (W · inner.A, W · inner.B + b).
template <typename Scalar>
AffineFormT<Scalar> affine_compose(const MatrixX<Scalar>& outer_w, const VectorX<Scalar>& outer_b,
                                   const AffineFormT<Scalar>& inner) {
  detail::require(outer_w.cols() == inner.rows(), "affine_compose: inner rows != outer cols");
  detail::require(outer_w.rows() == outer_b.size(), "affine_compose: outer bias length mismatch");
  return {outer_w * inner.A, outer_w * inner.B + outer_b};
}

}  // namespace tightcert
