#include "sedg/krylov.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace sedg {

PcgResult pcg(const LinearOperator& a, const LinearOperator& c, const Eigen::VectorXd& rhs, double tol, int max_it) {
  PcgResult res;
  res.x = Eigen::VectorXd::Zero(rhs.size());
  Eigen::VectorXd r = rhs;
  Eigen::VectorXd z = c.apply(r);
  double rz = r.dot(z);
  const double rz0 = rz;
  if (rz0 == 0.0) {
    res.converged = true;
    return res;
  }
  Eigen::VectorXd d = z;
  for (int it = 1; it <= max_it; ++it) {
    const Eigen::VectorXd ad = a.apply(d);
    const double curvature = d.dot(ad);
    if (!(curvature > 0.0)) throw std::runtime_error("pcg: non-positive curvature");
    const double step = rz / curvature;
    res.x += step * d;
    r -= step * ad;
    z = c.apply(r);
    const double rz_new = r.dot(z);
    res.iterations = it;
    res.residuals.push_back(std::sqrt(std::abs(rz_new) / rz0));
    if (res.residuals.back() <= tol) {
      res.converged = true;
      break;
    }
    d = z + (rz_new / rz) * d;
    rz = rz_new;
  }
  return res;
}

namespace {

struct RitzPair {
  double value;
  double residual;
};

void ritz_extremes(const std::vector<double>& alpha, const std::vector<double>& beta, double beta_next,
                   RitzPair& lo, RitzPair& hi) {
  const Eigen::Index m = static_cast<Eigen::Index>(alpha.size());
  Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(alpha.data(), m);
  Eigen::VectorXd sub(std::max<Eigen::Index>(m - 1, 0));
  for (Eigen::Index i = 0; i + 1 < m; ++i) sub(i) = beta[i];
  if (m == 1) {
    lo = hi = {diag(0), std::abs(beta_next) / std::abs(diag(0))};
    return;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  const auto& ev = es.eigenvalues();
  const auto& vec = es.eigenvectors();
  lo = {ev(0), std::abs(beta_next * vec(m - 1, 0)) / std::abs(ev(0))};
  hi = {ev(m - 1), std::abs(beta_next * vec(m - 1, m - 1)) / std::abs(ev(m - 1))};
}

}  // namespace

SpectrumEstimate estimate_condition(const LinearOperator& a, const LinearOperator& c, double tol, int max_it,
                                    std::uint64_t seed) {
  const Eigen::Index n = a.size();
  if (c.size() != n) throw std::invalid_argument("estimate_condition: dimension mismatch");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  max_it = static_cast<int>(std::min<Eigen::Index>(max_it, n));

  for (int attempt = 0; attempt < 4; ++attempt) {
    SpectrumEstimate est;
    // t_j is C-orthonormal, u_j = C t_j.
    std::vector<Eigen::VectorXd> t, u;
    std::vector<double> alpha, beta;
    Eigen::VectorXd w(n);
    for (auto& v : w) v = dist(rng);
    Eigen::VectorXd cw = c.apply(w);
    double nrm = std::sqrt(w.dot(cw));
    t.push_back(w / nrm);
    u.push_back(cw / nrm);
    bool breakdown = false;
    for (int j = 0; j < max_it; ++j) {
      w = a.apply(u[j]);
      alpha.push_back(u[j].dot(w));
      w -= alpha[j] * t[j];
      if (j > 0) w -= beta[j - 1] * t[j - 1];
      for (int pass = 0; pass < 2; ++pass) {
        for (int i = 0; i <= j; ++i) w -= u[i].dot(w) * t[i];
      }
      cw = c.apply(w);
      const double b2 = w.dot(cw);
      if (!std::isfinite(b2)) {
        breakdown = true;
        break;
      }
      const double b = b2 > 0.0 ? std::sqrt(b2) : 0.0;
      const bool invariant = b <= 1e-13 * std::abs(alpha[j]);
      // The tridiagonal eigensolve is O(m^3); check sparsely once m is large.
      if (!invariant && j + 1 < n && j + 1 < max_it && j >= 30 && j % 5 != 0) {
        beta.push_back(b);
        t.push_back(w / b);
        u.push_back(cw / b);
        continue;
      }
      RitzPair lo{}, hi{};
      ritz_extremes(alpha, beta, b, lo, hi);
      est.iterations = j + 1;
      est.lambda_min = lo.value;
      est.lambda_max = hi.value;
      est.kappa = hi.value / lo.value;
      est.residual_min = lo.residual;
      est.residual_max = hi.residual;
      est.kappa_history.push_back(est.kappa);
      if ((lo.residual <= tol && hi.residual <= tol && j >= 4) || invariant || j + 1 == n) {
        // An invariant subspace makes the Ritz values exact.
        est.converged = true;
        break;
      }
      beta.push_back(b);
      t.push_back(w / b);
      u.push_back(cw / b);
    }
    if (breakdown) continue;
    if (!(est.lambda_min > 0.0)) throw std::runtime_error("estimate_condition: operator not positive definite");
    return est;
  }
  throw std::runtime_error("estimate_condition: repeated Lanczos breakdown");
}

}  // namespace sedg
