#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sedg/lgl.hpp"

namespace sedg {

class OrderedGrid {
 public:
  OrderedGrid() = default;
  explicit OrderedGrid(std::vector<double> points);  // strictly increasing, >= 2 points

  const std::vector<double>& points() const { return points_; }
  Interval interval() const { return {points_.front(), points_.back()}; }
  int cells() const { return static_cast<int>(points_.size()) - 1; }
  double cell_length(int j) const { return points_[j + 1] - points_[j]; }

 private:
  std::vector<double> points_;
};

OrderedGrid lgl_grid(int p, Interval interval);

// Cell [a + k H / 2^level, a + (k+1) H / 2^level].
struct DyadicCell {
  int level = 0;
  std::int64_t index = 0;
  bool operator==(const DyadicCell&) const = default;
};

// Breakpoint a + numerator H / 2^level in lowest terms.
struct DyadicPoint {
  std::int64_t numerator = 0;
  int level = 0;
  auto operator<=>(const DyadicPoint& o) const {
    // Compare numerator / 2^level exactly.
    const int l = std::max(level, o.level);
    return (numerator << (l - level)) <=> (o.numerator << (l - o.level));
  }
  bool operator==(const DyadicPoint& o) const { return (*this <=> o) == 0; }
};

class DyadicPartition {
 public:
  DyadicPartition() = default;
  DyadicPartition(Interval interval, std::vector<DyadicCell> cells);

  static DyadicPartition trivial(Interval interval) { return {interval, {{0, 0}}}; }

  const Interval& interval() const { return interval_; }
  const std::vector<DyadicCell>& cells() const { return cells_; }
  int card() const { return static_cast<int>(cells_.size()); }

  double cell_left(const DyadicCell& c) const;
  double cell_right(const DyadicCell& c) const;
  double cell_length(const DyadicCell& c) const;

  std::vector<DyadicPoint> breakpoints() const;
  std::vector<double> breakpoint_values() const;
  OrderedGrid grid() const { return OrderedGrid(breakpoint_values()); }

  // Same breakpoints mapped onto another interval; exact for dyadic breakpoints.
  DyadicPartition mapped_to(Interval other) const { return {other, cells_}; }

 private:
  Interval interval_;
  std::vector<DyadicCell> cells_;
};

// Which grid interval Ibar(D, G) a cell is compared against.
enum class ReferenceRule { kLargest, kSmallest };

DyadicPartition dyadic_generate(const OrderedGrid& grid, const DyadicPartition& seed, double alpha,
                                ReferenceRule rule = ReferenceRule::kLargest);

// Length of the reference interval used by the stopping test for one cell.
double reference_length(const OrderedGrid& grid, double left, double right, ReferenceRule rule);

class NestedDyadicFamily {
 public:
  NestedDyadicFamily() = default;
  NestedDyadicFamily(double alpha, ReferenceRule rule, std::vector<DyadicPartition> partitions);

  double alpha() const { return alpha_; }
  ReferenceRule rule() const { return rule_; }
  int p_max() const { return static_cast<int>(partitions_.size()); }
  const DyadicPartition& at(int p) const;  // 1 <= p <= p_max

 private:
  double alpha_ = 1.0;
  ReferenceRule rule_ = ReferenceRule::kLargest;
  std::vector<DyadicPartition> partitions_;
};

NestedDyadicFamily build_nested_family(int p_max, Interval interval, double alpha,
                                       ReferenceRule rule = ReferenceRule::kLargest);

struct LocalEquivalence {
  double a_obs;
  double b_obs;
};
LocalEquivalence check_local_equivalence(const OrderedGrid& g1, const OrderedGrid& g2);

double check_quasiuniform(const OrderedGrid& grid);

// One "numerator level" pair per line, breakpoints left to right.
std::string dump_partition(const DyadicPartition& partition);

}  // namespace sedg
