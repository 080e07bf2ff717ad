#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace sedg {

enum class InterpMode { kPiecewiseLinear, kPolynomial };

// Maps nodal values on `source` to values at `target` by evaluating the source reconstruction.
Eigen::MatrixXd interp_grid_to_grid(std::span<const double> source, std::span<const double> target,
                                    InterpMode mode);

// Piecewise-linear reconstruction of nodal samples, evaluated at query points.
std::vector<double> interp_poly_to_linear(std::span<const double> nodes, std::span<const double> samples,
                                          std::span<const double> query_points);

// LGL nodal values -> piecewise-linear on the LGL cells -> samples at the dyadic nodes.
Eigen::MatrixXd composite_K(std::span<const double> lgl_nodes, std::span<const double> dyadic_nodes);

// Tensor-product operator; factor k acts on index k, index 0 varies fastest.
class KroneckerOperator {
 public:
  explicit KroneckerOperator(std::vector<Eigen::MatrixXd> factors);

  Eigen::Index rows() const;
  Eigen::Index cols() const;
  const std::vector<Eigen::MatrixXd>& factors() const { return factors_; }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd to_dense() const;

 private:
  std::vector<Eigen::MatrixXd> factors_;
};

// Y = A X B^T with X stored column-major as (n0 x n1); the 2D Kronecker action (B kron A) x.
Eigen::VectorXd apply_kron2(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Eigen::VectorXd& x);

}  // namespace sedg
