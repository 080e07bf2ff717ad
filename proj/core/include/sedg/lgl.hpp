#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace sedg {

struct Interval {
  double a = -1.0;
  double b = 1.0;

  Interval() = default;
  Interval(double a_, double b_);  // throws std::invalid_argument unless a < b

  double length() const { return b - a; }
  double map_from_reference(double xhat) const { return a + 0.5 * length() * (xhat + 1.0); }
  bool operator==(const Interval&) const = default;
};

// Legendre polynomial L_n and its derivative at x, by the three-term recurrence.
struct LegendreValue {
  double value;
  double derivative;
  double previous;  // L_{n-1}(x)
};
LegendreValue legendre(int n, double x);

// Legendre-Gauss-Lobatto rule of order p: p+1 nodes including both endpoints.
struct LglRule {
  int degree = 0;
  Interval interval;
  std::vector<double> nodes;
  std::vector<double> weights;

  int size() const { return degree + 1; }
  std::vector<double> cell_lengths() const;
};

LglRule build_lgl_rule(int p, Interval interval = {});

// Gauss-Legendre rule with n points; used as the dense reference quadrature.
struct GaussRule {
  Interval interval;
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussRule build_gauss_rule(int n, Interval interval = {});

double quadrature(const LglRule& rule, std::span<const double> samples);

std::vector<double> barycentric_weights(std::span<const double> nodes);

// Row r holds the Lagrange basis of `nodes` evaluated at targets[r].
Eigen::MatrixXd lagrange_matrix(std::span<const double> nodes, std::span<const double> targets);

// D(i, j) = l_j'(nodes[i]).
Eigen::MatrixXd differentiation_matrix(std::span<const double> nodes);

std::vector<double> interpolate_polynomial(const LglRule& rule, std::span<const double> samples,
                                           std::span<const double> query_points);

// Largest |v(e)| sqrt(H) / ((p+1) ||v||_{0,I}) over random v in P_p.
double check_trace_inequality(const LglRule& rule, int trials, std::uint64_t seed = 1);

}  // namespace sedg
