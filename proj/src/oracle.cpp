#include "tightcert/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace tightcert {

namespace {

constexpr Index kBatch = 1024;

// Column index of the first point whose argmax differs from `label`, or -1.
Index first_flip(const Eigen::MatrixXd& scores, Index label) {
  for (Index c = 0; c < scores.cols(); ++c) {
    Index best = 0;
    for (Index i = 1; i < scores.rows(); ++i)
      if (scores(i, c) > scores(best, c)) best = i;
    if (best != label) return c;
  }
  return -1;
}

class Search {
 public:
  Search(const Network& net, const Vector& x0, const InputSpec& spec, std::size_t budget)
      : net_(net), x0_(x0), lo_(spec.box_lo()), hi_(spec.box_hi()), budget_(budget),
        label_(predict_label(net, x0)) {}

  std::size_t remaining() const { return budget_ - used_; }
  const Vector& lo() const { return lo_; }
  const Vector& hi() const { return hi_; }
  Index label() const { return label_; }

  /// Evaluates as many columns of X as the budget allows; returns a
  /// confirmed counterexample if one is among them.
  std::optional<Counterexample> try_points(const Eigen::MatrixXd& X) {
    const Index n = std::min<Index>(X.cols(), static_cast<Index>(remaining()));
    if (n <= 0) return std::nullopt;
    used_ += static_cast<std::size_t>(n);
    Eigen::MatrixXd scores = net_.forward_batch(X.leftCols(n));
    for (Index start = 0; start < n;) {
      const Index c = first_flip(scores.middleCols(start, n - start), label_);
      if (c < 0) break;
      const Vector x = X.col(start + c);
      // Confirm with the scalar path so reported points re-verify exactly.
      const Index predicted = predict_label(net_, x);
      if (predicted != label_)
        return Counterexample{x, predicted, label_, (x - x0_).cwiseAbs().maxCoeff()};
      start += c + 1;
    }
    return std::nullopt;
  }

  Eigen::MatrixXd scores(const Eigen::MatrixXd& X) {
    used_ += static_cast<std::size_t>(X.cols());
    return net_.forward_batch(X);
  }

 private:
  const Network& net_;
  Vector x0_;
  Vector lo_, hi_;
  std::size_t budget_;
  std::size_t used_ = 0;
  Index label_;
};

}  // namespace

std::optional<Counterexample> falsify(const Network& net, const Vector& x0, double eps,
                                      const FalsifyOptions& options) {
  const InputSpec spec{x0, eps, options.clip};
  spec.validate(net);
  Search search(net, x0, spec, options.budget);
  const Index n = net.input_dim();
  const Vector& lo = search.lo();
  const Vector& hi = search.hi();

  if (auto cex = search.try_points(x0)) return cex;
  if (eps == 0) return std::nullopt;

  // Every corner of a low-dimensional box.
  if (n <= 12) {
    const Index corners = Index(1) << n;
    for (Index first = 0; first < corners && search.remaining() > 0; first += kBatch) {
      const Index cols = std::min(kBatch, corners - first);
      Eigen::MatrixXd X(n, cols);
      for (Index c = 0; c < cols; ++c)
        for (Index j = 0; j < n; ++j) X(j, c) = ((first + c) >> j) & 1 ? hi[j] : lo[j];
      if (auto cex = search.try_points(X)) return cex;
    }
  }

  // One signed-gradient step on each margin f[label] - f[s], with the
  // gradient from central finite differences at x0.
  const Index m = net.num_labels();
  if (m > 1 && search.remaining() >= static_cast<std::size_t>(2 * n)) {
    constexpr double h = 1e-4;
    Eigen::MatrixXd probes(n, 2 * n);
    for (Index j = 0; j < n; ++j) {
      probes.col(2 * j) = x0;
      probes.col(2 * j + 1) = x0;
      probes(j, 2 * j) += h;
      probes(j, 2 * j + 1) -= h;
    }
    const Eigen::MatrixXd f = search.scores(probes);
    Eigen::MatrixXd X(n, m - 1);
    Index col = 0;
    for (Index s = 0; s < m; ++s) {
      if (s == search.label()) continue;
      for (Index j = 0; j < n; ++j) {
        const double g = (f(search.label(), 2 * j) - f(s, 2 * j)) -
                         (f(search.label(), 2 * j + 1) - f(s, 2 * j + 1));
        X(j, col) = g > 0 ? lo[j] : (g < 0 ? hi[j] : x0[j]);
      }
      ++col;
    }
    if (auto cex = search.try_points(X)) return cex;
  }

  // Random corners, with a tenth of the points drawn from the interior.
  // Once every corner has been tried, corners are replaced by boundary
  // points whose coordinates sit at a bound with probability 1/2.
  const bool corners_done = n <= 12;
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  while (search.remaining() > 0) {
    const Index cols = std::min<Index>(kBatch, static_cast<Index>(search.remaining()));
    Eigen::MatrixXd X(n, cols);
    for (Index c = 0; c < cols; ++c) {
      const bool interior = unit(rng) < 0.1;
      for (Index j = 0; j < n; ++j) {
        const double t = unit(rng);
        if (interior) {
          X(j, c) = lo[j] + t * (hi[j] - lo[j]);
        } else if (corners_done && t >= 0.5) {
          X(j, c) = lo[j] + unit(rng) * (hi[j] - lo[j]);
        } else {
          X(j, c) = (corners_done ? t < 0.25 : t < 0.5) ? lo[j] : hi[j];
        }
      }
    }
    if (auto cex = search.try_points(X)) return cex;
  }
  return std::nullopt;
}

std::pair<Vector, Vector> exhaustive_output_range(const Network& net, const InputSpec& spec,
                                                  std::size_t resolution) {
  spec.validate(net);
  const Index n = net.input_dim();
  if (n > 3) throw DomainError("exhaustive_output_range: input_dim must be <= 3");
  if (resolution < 1 || resolution > 2001)
    throw DomainError("exhaustive_output_range: resolution must be in [1, 2001]");
  const Vector lo = spec.box_lo(), hi = spec.box_hi();
  const Index res = static_cast<Index>(resolution);
  auto coord = [&](Index j, Index i) {
    if (res == 1) return 0.5 * (lo[j] + hi[j]);
    return i + 1 == res ? hi[j] : lo[j] + (hi[j] - lo[j]) * static_cast<double>(i) / (res - 1);
  };
  Index total = 1;
  for (Index j = 0; j < n; ++j) total *= res;

  Vector out_lo = Vector::Constant(net.num_labels(), std::numeric_limits<double>::infinity());
  Vector out_hi = -out_lo;
  constexpr Index kChunk = 8192;
  for (Index first = 0; first < total; first += kChunk) {
    const Index cols = std::min(kChunk, total - first);
    Eigen::MatrixXd X(n, cols);
    for (Index c = 0; c < cols; ++c) {
      Index k = first + c;
      for (Index j = 0; j < n; ++j) {
        X(j, c) = coord(j, k % res);
        k /= res;
      }
    }
    const Eigen::MatrixXd f = net.forward_batch(X);
    out_lo = out_lo.cwiseMin(f.rowwise().minCoeff());
    out_hi = out_hi.cwiseMax(f.rowwise().maxCoeff());
  }
  return {out_lo, out_hi};
}

EmpiricalRadius empirical_radius(const Network& net, const Vector& x0, const RadiusSearch& search,
                                 const FalsifyOptions& options) {
  if (!(search.eps_hi > 0)) throw DomainError("empirical_radius: eps_hi must be positive");
  EmpiricalRadius out;
  if (!falsify(net, x0, search.eps_hi, options)) {
    out.radius = search.eps_hi;
    out.ceiling_reached = true;
    return out;
  }
  double lo = 0, hi = search.eps_hi;
  for (int it = 0; it < search.max_iter && hi - lo > search.tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (falsify(net, x0, mid, options))
      hi = mid;
    else
      lo = mid;
  }
  out.radius = lo;
  out.falsified_at = hi;
  return out;
}

}  // namespace tightcert
