#pragma once

#include <cstdint>
#include <vector>

#include "sedg/linalg.hpp"

namespace sedg {

struct PcgResult {
  Eigen::VectorXd x;
  int iterations = 0;
  bool converged = false;
  // Relative preconditioned residual sqrt(r^T C r) / sqrt(b^T C b) per iteration.
  std::vector<double> residuals;
};

// Throws std::runtime_error on non-positive curvature.
PcgResult pcg(const LinearOperator& a, const LinearOperator& c, const Eigen::VectorXd& rhs, double tol, int max_it);

struct SpectrumEstimate {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double kappa = 0.0;
  double residual_min = 0.0;  // relative Ritz residuals of the extreme pairs
  double residual_max = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> kappa_history;
};

// Lanczos for C A in the C-inner product with full reorthogonalization.
SpectrumEstimate estimate_condition(const LinearOperator& a, const LinearOperator& c, double tol = 1e-4,
                                    int max_it = 400, std::uint64_t seed = 1);

}  // namespace sedg
