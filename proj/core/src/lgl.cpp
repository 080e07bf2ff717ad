#include "sedg/lgl.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace sedg {

namespace {

constexpr double kNewtonTol = 1e-14;
constexpr int kNewtonMaxIt = 100;

}  // namespace

Interval::Interval(double a_, double b_) : a(a_), b(b_) {
  if (!(a < b)) {
    throw std::invalid_argument("interval requires a < b");
  }
}

LegendreValue legendre(int n, double x) {
  if (n == 0) return {1.0, 0.0, 0.0};
  double prev = 1.0;
  double cur = x;
  for (int k = 2; k <= n; ++k) {
    const double next = ((2.0 * k - 1.0) * x * cur - (k - 1.0) * prev) / k;
    prev = cur;
    cur = next;
  }
  double deriv;
  if (std::abs(x) < 1.0) {
    deriv = n * (x * cur - prev) / (x * x - 1.0);
  } else {
    // L_n'(+-1) = (+-1)^{n+1} n(n+1)/2
    deriv = 0.5 * n * (n + 1.0) * ((x > 0.0 || n % 2 == 1) ? 1.0 : -1.0);
  }
  return {cur, deriv, prev};
}

std::vector<double> LglRule::cell_lengths() const {
  std::vector<double> h(degree);
  for (int j = 1; j <= degree; ++j) h[j - 1] = nodes[j] - nodes[j - 1];
  return h;
}

LglRule build_lgl_rule(int p, Interval interval) {
  if (p < 1) throw std::invalid_argument("LGL rule needs p >= 1");
  std::vector<double> x(p + 1);
  x[0] = -1.0;
  x[p] = 1.0;
  // Newton on q(x) = (1-x^2) L_p'(x) = p (L_{p-1} - x L_p), q'(x) = -p(p+1) L_p(x).
  for (int j = 1; j <= p / 2; ++j) {
    double xi = -std::cos(std::numbers::pi * j / p);
    for (int it = 0; it < kNewtonMaxIt; ++it) {
      const LegendreValue l = legendre(p, xi);
      const double step = (l.previous - xi * l.value) / ((p + 1.0) * l.value);
      xi += step;
      if (std::abs(step) < kNewtonTol) break;
    }
    x[j] = xi;
    x[p - j] = -xi;
  }
  if (p % 2 == 0) x[p / 2] = 0.0;

  std::vector<double> w(p + 1);
  for (int j = 0; j <= p; ++j) {
    const double lp = legendre(p, x[j]).value;
    w[j] = 2.0 / (p * (p + 1.0) * lp * lp);
  }
  for (int j = 0; j < (p + 1) / 2; ++j) w[p - j] = w[j];

  LglRule rule;
  rule.degree = p;
  rule.interval = interval;
  rule.nodes.resize(p + 1);
  rule.weights.resize(p + 1);
  const double half = 0.5 * interval.length();
  for (int j = 0; j <= p; ++j) {
    rule.nodes[j] = interval.map_from_reference(x[j]);
    rule.weights[j] = half * w[j];
  }
  rule.nodes[0] = interval.a;
  rule.nodes[p] = interval.b;
  return rule;
}

GaussRule build_gauss_rule(int n, Interval interval) {
  if (n < 1) throw std::invalid_argument("Gauss rule needs n >= 1");
  std::vector<double> x(n), w(n);
  for (int j = 0; j < (n + 1) / 2; ++j) {
    double xi = -std::cos(std::numbers::pi * (j + 0.75) / (n + 0.5));
    LegendreValue l{};
    for (int it = 0; it < kNewtonMaxIt; ++it) {
      l = legendre(n, xi);
      const double step = l.value / l.derivative;
      xi -= step;
      if (std::abs(step) < kNewtonTol) break;
    }
    l = legendre(n, xi);
    x[j] = xi;
    x[n - 1 - j] = -xi;
    w[j] = w[n - 1 - j] = 2.0 / ((1.0 - xi * xi) * l.derivative * l.derivative);
  }
  if (n % 2 == 1) x[n / 2] = 0.0;

  GaussRule rule;
  rule.interval = interval;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int j = 0; j < n; ++j) {
    rule.nodes[j] = interval.map_from_reference(x[j]);
    rule.weights[j] = 0.5 * interval.length() * w[j];
  }
  return rule;
}

double quadrature(const LglRule& rule, std::span<const double> samples) {
  if (samples.size() != rule.weights.size()) {
    throw std::invalid_argument("quadrature: sample count does not match rule");
  }
  double s = 0.0;
  for (std::size_t j = 0; j < samples.size(); ++j) s += samples[j] * rule.weights[j];
  return s;
}

std::vector<double> barycentric_weights(std::span<const double> nodes) {
  const std::size_t n = nodes.size();
  std::vector<double> lam(n, 1.0);
  // Scale by 4/H per factor to keep the products in range at high degree.
  const double scale = n > 1 ? 4.0 / (nodes.back() - nodes.front()) : 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) lam[i] *= scale * (nodes[i] - nodes[j]);
    }
    lam[i] = 1.0 / lam[i];
  }
  return lam;
}

Eigen::MatrixXd lagrange_matrix(std::span<const double> nodes, std::span<const double> targets) {
  const auto lam = barycentric_weights(nodes);
  const Eigen::Index n = static_cast<Eigen::Index>(nodes.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(targets.size()), n);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const double t = targets[r];
    Eigen::Index hit = -1;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (t == nodes[j]) {
        hit = j;
        break;
      }
    }
    if (hit >= 0) {
      m(r, hit) = 1.0;
      continue;
    }
    double denom = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double v = lam[j] / (t - nodes[j]);
      m(r, j) = v;
      denom += v;
    }
    m.row(r) /= denom;
  }
  return m;
}

Eigen::MatrixXd differentiation_matrix(std::span<const double> nodes) {
  const auto lam = barycentric_weights(nodes);
  const Eigen::Index n = static_cast<Eigen::Index>(nodes.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double diag = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      d(i, j) = lam[j] / lam[i] / (nodes[i] - nodes[j]);
      diag -= d(i, j);
    }
    d(i, i) = diag;
  }
  return d;
}

std::vector<double> interpolate_polynomial(const LglRule& rule, std::span<const double> samples,
                                           std::span<const double> query_points) {
  if (samples.size() != rule.nodes.size()) {
    throw std::invalid_argument("interpolate_polynomial: sample count does not match rule");
  }
  for (double q : query_points) {
    if (q < rule.interval.a || q > rule.interval.b) {
      throw std::invalid_argument("interpolate_polynomial: query point outside interval");
    }
  }
  const Eigen::MatrixXd m = lagrange_matrix(rule.nodes, query_points);
  const Eigen::Map<const Eigen::VectorXd> s(samples.data(), static_cast<Eigen::Index>(samples.size()));
  const Eigen::VectorXd v = m * s;
  return {v.data(), v.data() + v.size()};
}

double check_trace_inequality(const LglRule& rule, int trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("check_trace_inequality: trials >= 1");
  const int p = rule.degree;
  const GaussRule gauss = build_gauss_rule(p + 2, rule.interval);
  const Eigen::MatrixXd to_gauss = lagrange_matrix(rule.nodes, gauss.nodes);
  const Eigen::Map<const Eigen::VectorXd> gw(gauss.weights.data(), p + 2);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  const double h = rule.interval.length();
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    Eigen::VectorXd v(p + 1);
    for (auto& c : v) c = dist(rng);
    const Eigen::VectorXd g = to_gauss * v;
    const double norm = std::sqrt(gw.dot(g.cwiseProduct(g)));
    const double edge = std::max(std::abs(v(0)), std::abs(v(p)));
    worst = std::max(worst, edge * std::sqrt(h) / ((p + 1.0) * norm));
  }
  return worst;
}

}  // namespace sedg
