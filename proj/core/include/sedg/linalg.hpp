#pragma once

#include <memory>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

namespace sedg {

using SparseMatrix = Eigen::SparseMatrix<double>;

class LinearOperator {
 public:
  virtual ~LinearOperator() = default;
  virtual Eigen::Index size() const = 0;
  virtual Eigen::VectorXd apply(const Eigen::VectorXd& x) const = 0;
};

class MatrixOperator final : public LinearOperator {
 public:
  explicit MatrixOperator(SparseMatrix a) : a_(std::move(a)) {}
  Eigen::Index size() const override { return a_.rows(); }
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const override { return a_ * x; }
  const SparseMatrix& matrix() const { return a_; }

 private:
  SparseMatrix a_;
};

class IdentityOperator final : public LinearOperator {
 public:
  explicit IdentityOperator(Eigen::Index n) : n_(n) {}
  Eigen::Index size() const override { return n_; }
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const override { return x; }

 private:
  Eigen::Index n_;
};

class DiagonalInverse final : public LinearOperator {
 public:
  explicit DiagonalInverse(const Eigen::VectorXd& diagonal);
  Eigen::Index size() const override { return inv_.size(); }
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const override { return inv_.cwiseProduct(x); }

 private:
  Eigen::VectorXd inv_;
};

// Sparse LDL^T factorization of an SPD matrix.
class DirectSolver final : public LinearOperator {
 public:
  explicit DirectSolver(const SparseMatrix& a);
  Eigen::Index size() const override { return n_; }
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const override;

 private:
  Eigen::Index n_;
  std::shared_ptr<Eigen::SimplicialLDLT<SparseMatrix>> ldlt_;
};

}  // namespace sedg
