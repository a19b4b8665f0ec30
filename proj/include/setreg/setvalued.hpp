#pragma once

#include <array>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "setreg/metric.hpp"

namespace setreg {

/// Dense row-major real matrix used to declare linear maps.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, std::vector<double> values);
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  double operator()(std::size_t r, std::size_t c) const {
    return data[r * cols + c];
  }
  Point apply(PointView x) const;
};

/// What to do when a sampled image falls off the target grid.
enum class OffGridPolicy { Reject, Drop };

/// A multifunction with finite graph Gr F between two grid spaces.
/// Immutable; rows (images) and columns (preimages) are indexed on build.
class MultiMap {
 public:
  using Pair = std::pair<std::size_t, std::size_t>;

  MultiMap(SpacePtr source, SpacePtr target, std::vector<Pair> graph);

  const GridSpace& source() const { return *source_; }
  const GridSpace& target() const { return *target_; }
  const SpacePtr& source_ptr() const { return source_; }
  const SpacePtr& target_ptr() const { return target_; }

  /// Sorted, duplicate-free graph pairs (source index, target index).
  const std::vector<Pair>& graph() const { return graph_; }
  std::span<const std::size_t> row(std::size_t x) const;
  std::span<const std::size_t> column(std::size_t y) const;
  bool contains(std::size_t x, std::size_t y) const;

  PointSet image_at(std::size_t x) const;
  PointSet preimage_at(std::size_t y) const;
  PointSet domain() const;
  PointSet range() const;

  bool operator==(const MultiMap& other) const;

 private:
  SpacePtr source_;
  SpacePtr target_;
  std::vector<Pair> graph_;
  std::vector<std::size_t> row_offsets_;
  std::vector<std::size_t> row_values_;
  std::vector<std::size_t> col_offsets_;
  std::vector<std::size_t> col_values_;
};

/// A multifunction of two grid variables, (first, second) -> target.
/// Serves both as the parametric map F(x, p) and the two-argument G(y, z).
class ParamMultiMap {
 public:
  using Triple = std::array<std::size_t, 3>;  // (first, second, target)

  ParamMultiMap(SpacePtr first, SpacePtr second, SpacePtr target,
                std::vector<Triple> graph);

  const GridSpace& first() const { return *first_; }
  const GridSpace& second() const { return *second_; }
  const GridSpace& target() const { return *target_; }
  const SpacePtr& first_ptr() const { return first_; }
  const SpacePtr& second_ptr() const { return second_; }
  const SpacePtr& target_ptr() const { return target_; }
  const std::vector<Triple>& graph() const { return graph_; }

  std::span<const std::size_t> image(std::size_t i, std::size_t j) const;
  bool contains(std::size_t i, std::size_t j, std::size_t k) const;

  /// F(., second = j) as a map on the first variable.
  MultiMap slice_second(std::size_t j) const;
  /// F(first = i, .) as a map on the second variable.
  MultiMap slice_first(std::size_t i) const;
  /// The same relation as a map on the product space first x second.
  MultiMap joint() const;
  const SpacePtr& joint_space() const { return joint_; }

  bool operator==(const ParamMultiMap& other) const;

 private:
  SpacePtr first_;
  SpacePtr second_;
  SpacePtr target_;
  SpacePtr joint_;
  std::vector<Triple> graph_;
  std::vector<std::size_t> offsets_;  // CSR over i * |second| + j
  std::vector<std::size_t> values_;
};

using BiMultiMap = ParamMultiMap;

PointSet image(const MultiMap& f, PointView x);
PointSet image_of_set(const MultiMap& f, const PointSet& a);
MultiMap inverse(const MultiMap& f);

/// H(x) = G(F1(x), F2(x)).
MultiMap compose_g(const MultiMap& f1, const MultiMap& f2, const BiMultiMap& g);

/// (F1 - F2)(x) = F1(x) - F2(x), snapped onto `result` (default: F1's target).
/// Throws OffGridError naming the first difference that misses the grid.
MultiMap difference(const MultiMap& f1, const MultiMap& f2,
                    SpacePtr result = nullptr);
/// H(x, p) = F1(x, p) - F2(x).
ParamMultiMap difference(const ParamMultiMap& f1, const MultiMap& f2,
                         SpacePtr result = nullptr);

/// The relation {((y, z), y - z)} restricted to a grid W.
BiMultiMap subtraction_relation(SpacePtr left, SpacePtr right, SpacePtr result);

MultiMap localize(const MultiMap& f, const PointSet& u, const PointSet& v);
MultiMap identity_map(SpacePtr space);

MultiMap from_linear(const Matrix& a, SpacePtr source, SpacePtr target,
                     OffGridPolicy policy = OffGridPolicy::Reject);

/// Single-valued sampling of fn over the source grid.
MultiMap from_function(SpacePtr source, SpacePtr target,
                       const std::function<Point(const Point&)>& fn,
                       OffGridPolicy policy = OffGridPolicy::Reject);
ParamMultiMap from_function(
    SpacePtr first, SpacePtr second, SpacePtr target,
    const std::function<Point(const Point&, const Point&)>& fn,
    OffGridPolicy policy = OffGridPolicy::Reject);

/// Explicit pair list; every point must lie on its grid.
MultiMap from_pairs(SpacePtr source, SpacePtr target,
                    const std::vector<std::pair<Point, Point>>& pairs);

MultiMap slice_param(const ParamMultiMap& f, PointView p);

}  // namespace setreg
