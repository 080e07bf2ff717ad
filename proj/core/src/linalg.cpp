#include "sedg/linalg.hpp"

namespace sedg {

DiagonalInverse::DiagonalInverse(const Eigen::VectorXd& diagonal) : inv_(diagonal.size()) {
  for (Eigen::Index i = 0; i < diagonal.size(); ++i) {
    if (!(diagonal(i) > 0.0)) throw std::runtime_error("non-positive diagonal entry");
    inv_(i) = 1.0 / diagonal(i);
  }
}

DirectSolver::DirectSolver(const SparseMatrix& a)
    : n_(a.rows()), ldlt_(std::make_shared<Eigen::SimplicialLDLT<SparseMatrix>>()) {
  ldlt_->compute(a);
  if (ldlt_->info() != Eigen::Success) throw std::runtime_error("sparse factorization failed");
}

Eigen::VectorXd DirectSolver::apply(const Eigen::VectorXd& x) const { return ldlt_->solve(x); }

}  // namespace sedg
