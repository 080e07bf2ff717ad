#include "sedg/interp.hpp"

#include <algorithm>
#include <stdexcept>

#include "sedg/lgl.hpp"

namespace sedg {

namespace {

void check_inside(std::span<const double> source, std::span<const double> target) {
  for (double t : target) {
    if (t < source.front() || t > source.back()) {
      throw std::invalid_argument("interpolation target outside the source interval");
    }
  }
}

}  // namespace

Eigen::MatrixXd interp_grid_to_grid(std::span<const double> source, std::span<const double> target,
                                    InterpMode mode) {
  check_inside(source, target);
  if (mode == InterpMode::kPolynomial) return lagrange_matrix(source, target);
  const auto n = static_cast<Eigen::Index>(source.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(target.size()), n);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const double t = target[r];
    auto it = std::upper_bound(source.begin(), source.end(), t);
    Eigen::Index j = std::clamp<Eigen::Index>(it - source.begin() - 1, 0, n - 2);
    if (t == source[j]) {
      m(r, j) = 1.0;
    } else if (t == source[j + 1]) {
      m(r, j + 1) = 1.0;
    } else {
      const double s = (t - source[j]) / (source[j + 1] - source[j]);
      m(r, j) = 1.0 - s;
      m(r, j + 1) = s;
    }
  }
  return m;
}

std::vector<double> interp_poly_to_linear(std::span<const double> nodes, std::span<const double> samples,
                                          std::span<const double> query_points) {
  if (nodes.size() != samples.size()) throw std::invalid_argument("interp_poly_to_linear: size mismatch");
  const Eigen::MatrixXd m = interp_grid_to_grid(nodes, query_points, InterpMode::kPiecewiseLinear);
  const Eigen::Map<const Eigen::VectorXd> s(samples.data(), static_cast<Eigen::Index>(samples.size()));
  const Eigen::VectorXd v = m * s;
  return {v.data(), v.data() + v.size()};
}

Eigen::MatrixXd composite_K(std::span<const double> lgl_nodes, std::span<const double> dyadic_nodes) {
  // The first factor (polynomial -> piecewise linear on the same nodes) is the identity on nodal values.
  return interp_grid_to_grid(lgl_nodes, dyadic_nodes, InterpMode::kPiecewiseLinear);
}

KroneckerOperator::KroneckerOperator(std::vector<Eigen::MatrixXd> factors) : factors_(std::move(factors)) {
  if (factors_.empty()) throw std::invalid_argument("KroneckerOperator needs at least one factor");
}

Eigen::Index KroneckerOperator::rows() const {
  Eigen::Index r = 1;
  for (const auto& f : factors_) r *= f.rows();
  return r;
}

Eigen::Index KroneckerOperator::cols() const {
  Eigen::Index c = 1;
  for (const auto& f : factors_) c *= f.cols();
  return c;
}

namespace {

// Applies mats[k] along mode k of a tensor with the given extents.
Eigen::VectorXd mode_sweep(const std::vector<Eigen::MatrixXd>& mats, bool transpose, const Eigen::VectorXd& x) {
  std::vector<Eigen::Index> ext;
  for (const auto& m : mats) ext.push_back(transpose ? m.rows() : m.cols());
  Eigen::Index total = 1;
  for (auto e : ext) total *= e;
  if (x.size() != total) throw std::invalid_argument("Kronecker apply: dimension mismatch");
  Eigen::VectorXd cur = x;
  for (std::size_t k = 0; k < mats.size(); ++k) {
    const Eigen::MatrixXd& m = mats[k];
    const Eigen::Index in = ext[k];
    const Eigen::Index out = transpose ? m.cols() : m.rows();
    Eigen::Index inner = 1, outer = 1;
    for (std::size_t l = 0; l < k; ++l) inner *= ext[l];
    for (std::size_t l = k + 1; l < ext.size(); ++l) outer *= ext[l];
    Eigen::VectorXd next(inner * out * outer);
    for (Eigen::Index o = 0; o < outer; ++o) {
      Eigen::Map<const Eigen::MatrixXd> src(cur.data() + o * inner * in, inner, in);
      Eigen::Map<Eigen::MatrixXd> dst(next.data() + o * inner * out, inner, out);
      if (transpose) {
        dst.noalias() = src * m;
      } else {
        dst.noalias() = src * m.transpose();
      }
    }
    ext[k] = out;
    cur = std::move(next);
  }
  return cur;
}

}  // namespace

Eigen::VectorXd KroneckerOperator::apply(const Eigen::VectorXd& x) const { return mode_sweep(factors_, false, x); }

Eigen::VectorXd KroneckerOperator::apply_transpose(const Eigen::VectorXd& x) const {
  return mode_sweep(factors_, true, x);
}

Eigen::MatrixXd KroneckerOperator::to_dense() const {
  Eigen::MatrixXd d = factors_[0];
  for (std::size_t k = 1; k < factors_.size(); ++k) {
    const Eigen::MatrixXd& f = factors_[k];
    Eigen::MatrixXd next(f.rows() * d.rows(), f.cols() * d.cols());
    for (Eigen::Index i = 0; i < f.rows(); ++i) {
      for (Eigen::Index j = 0; j < f.cols(); ++j) {
        next.block(i * d.rows(), j * d.cols(), d.rows(), d.cols()) = f(i, j) * d;
      }
    }
    d = std::move(next);
  }
  return d;
}

Eigen::VectorXd apply_kron2(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Eigen::VectorXd& x) {
  if (x.size() != a.cols() * b.cols()) throw std::invalid_argument("apply_kron2: dimension mismatch");
  Eigen::Map<const Eigen::MatrixXd> X(x.data(), a.cols(), b.cols());
  Eigen::VectorXd y(a.rows() * b.rows());
  Eigen::Map<Eigen::MatrixXd> Y(y.data(), a.rows(), b.rows());
  Y.noalias() = a * X * b.transpose();
  return y;
}

}  // namespace sedg
