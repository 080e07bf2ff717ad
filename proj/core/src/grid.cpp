#include "sedg/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sedg {

OrderedGrid::OrderedGrid(std::vector<double> points) : points_(std::move(points)) {
  if (points_.size() < 2) throw std::invalid_argument("grid needs at least two points");
  for (std::size_t j = 1; j < points_.size(); ++j) {
    if (!(points_[j - 1] < points_[j])) throw std::invalid_argument("grid points must increase strictly");
  }
}

OrderedGrid lgl_grid(int p, Interval interval) { return OrderedGrid(build_lgl_rule(p, interval).nodes); }

DyadicPartition::DyadicPartition(Interval interval, std::vector<DyadicCell> cells)
    : interval_(interval), cells_(std::move(cells)) {
  if (cells_.empty()) throw std::invalid_argument("dyadic partition needs at least one cell");
  DyadicPoint expected{0, 0};
  for (const auto& c : cells_) {
    if (c.level < 0 || c.level > 60 || c.index < 0 || c.index >= (std::int64_t{1} << c.level)) {
      throw std::invalid_argument("invalid dyadic cell");
    }
    if (!(DyadicPoint{c.index, c.level} == expected)) {
      throw std::invalid_argument("dyadic cells must tile the interval left to right");
    }
    expected = DyadicPoint{c.index + 1, c.level};
  }
  if (!(expected == DyadicPoint{1, 0})) throw std::invalid_argument("dyadic cells must cover the interval");
}

double DyadicPartition::cell_left(const DyadicCell& c) const {
  return interval_.a + std::ldexp(static_cast<double>(c.index), -c.level) * interval_.length();
}

double DyadicPartition::cell_right(const DyadicCell& c) const {
  if (c.index + 1 == (std::int64_t{1} << c.level)) return interval_.b;
  return interval_.a + std::ldexp(static_cast<double>(c.index + 1), -c.level) * interval_.length();
}

double DyadicPartition::cell_length(const DyadicCell& c) const {
  return std::ldexp(interval_.length(), -c.level);
}

std::vector<DyadicPoint> DyadicPartition::breakpoints() const {
  std::vector<DyadicPoint> pts;
  pts.reserve(cells_.size() + 1);
  for (const auto& c : cells_) pts.push_back({c.index, c.level});
  pts.push_back({1, 0});
  for (auto& q : pts) {
    while (q.level > 0 && q.numerator % 2 == 0) {
      q.numerator /= 2;
      --q.level;
    }
    if (q.numerator == 0) q.level = 0;
  }
  return pts;
}

std::vector<double> DyadicPartition::breakpoint_values() const {
  std::vector<double> v;
  v.reserve(cells_.size() + 1);
  for (const auto& c : cells_) v.push_back(cell_left(c));
  v.push_back(interval_.b);
  return v;
}

double reference_length(const OrderedGrid& grid, double left, double right, ReferenceRule rule) {
  const auto& g = grid.points();
  // First grid cell whose right end exceeds `left`; overlap must have positive length.
  auto it = std::upper_bound(g.begin(), g.end(), left);
  std::size_t j = it == g.begin() ? 0 : static_cast<std::size_t>(it - g.begin()) - 1;
  double best = rule == ReferenceRule::kLargest ? 0.0 : INFINITY;
  for (; j + 1 < g.size() && g[j] < right; ++j) {
    if (!(std::min(g[j + 1], right) > std::max(g[j], left))) continue;
    const double h = g[j + 1] - g[j];
    best = rule == ReferenceRule::kLargest ? std::max(best, h) : std::min(best, h);
  }
  return best;
}

DyadicPartition dyadic_generate(const OrderedGrid& grid, const DyadicPartition& seed, double alpha,
                                ReferenceRule rule) {
  if (!(alpha > 0.0)) throw std::invalid_argument("dyadic_generate: alpha must be positive");
  std::vector<DyadicCell> cells = seed.cells();
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<DyadicCell> next;
    next.reserve(cells.size() * 2);
    for (const auto& c : cells) {
      const double l = seed.cell_left(c);
      const double r = seed.cell_right(c);
      if (r - l > alpha * reference_length(grid, l, r, rule)) {
        next.push_back({c.level + 1, 2 * c.index});
        next.push_back({c.level + 1, 2 * c.index + 1});
        changed = true;
      } else {
        next.push_back(c);
      }
    }
    cells = std::move(next);
  }
  return {seed.interval(), std::move(cells)};
}

NestedDyadicFamily::NestedDyadicFamily(double alpha, ReferenceRule rule, std::vector<DyadicPartition> partitions)
    : alpha_(alpha), rule_(rule), partitions_(std::move(partitions)) {}

const DyadicPartition& NestedDyadicFamily::at(int p) const {
  if (p < 1 || p > p_max()) throw std::out_of_range("dyadic family degree out of range");
  return partitions_[p - 1];
}

NestedDyadicFamily build_nested_family(int p_max, Interval interval, double alpha, ReferenceRule rule) {
  if (p_max < 1) throw std::invalid_argument("build_nested_family: p_max >= 1");
  std::vector<DyadicPartition> parts;
  parts.reserve(p_max);
  DyadicPartition prev = DyadicPartition::trivial(interval);
  for (int p = 1; p <= p_max; ++p) {
    prev = dyadic_generate(lgl_grid(p, interval), prev, alpha, rule);
    parts.push_back(prev);
  }
  return {alpha, rule, std::move(parts)};
}

LocalEquivalence check_local_equivalence(const OrderedGrid& g1, const OrderedGrid& g2) {
  const auto& a = g1.points();
  const auto& b = g2.points();
  double lo = INFINITY, hi = 0.0;
  std::size_t j = 0;
  for (std::size_t i = 0; i + 1 < a.size(); ++i) {
    while (j + 1 < b.size() && b[j + 1] <= a[i]) ++j;
    for (std::size_t l = j; l + 1 < b.size() && b[l] < a[i + 1]; ++l) {
      if (!(std::min(a[i + 1], b[l + 1]) > std::max(a[i], b[l]))) continue;
      const double r = (a[i + 1] - a[i]) / (b[l + 1] - b[l]);
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
  }
  return {lo, hi};
}

double check_quasiuniform(const OrderedGrid& grid) {
  double c = 1.0;
  for (int j = 0; j + 1 < grid.cells(); ++j) {
    const double r = grid.cell_length(j + 1) / grid.cell_length(j);
    c = std::max({c, r, 1.0 / r});
  }
  return c;
}

std::string dump_partition(const DyadicPartition& partition) {
  std::ostringstream out;
  for (const auto& q : partition.breakpoints()) out << q.numerator << ' ' << q.level << '\n';
  return out.str();
}

}  // namespace sedg
