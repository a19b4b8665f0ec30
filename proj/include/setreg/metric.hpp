#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace setreg {

using Point = std::vector<double>;
using PointView = std::span<const double>;

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A query point or declaration does not lie on the grid it claims to.
class OffGridError : public Error {
 public:
  using Error::Error;
};

/// A theorem or operation precondition failed before any sweep ran.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

enum class Norm { Sum, Max, Euclidean };

std::string to_string(Norm norm);
Norm parse_norm(std::string_view name);

double vector_norm(PointView v, Norm norm);

/// Nonnegative extended real; +inf is carried as a flag, not a sentinel.
class ExtReal {
 public:
  constexpr ExtReal() = default;
  explicit ExtReal(double value);

  static constexpr ExtReal infinity() {
    ExtReal r;
    r.infinite_ = true;
    return r;
  }

  bool is_finite() const { return !infinite_; }
  bool is_infinite() const { return infinite_; }
  /// The value as a double (+inf for the infinite element).
  double value() const;

  /// Multiplication by a nonnegative finite factor; 0 * inf is 0.
  ExtReal scaled(double factor) const;

  auto operator<=>(const ExtReal&) const = default;
  bool operator==(const ExtReal&) const = default;

 private:
  bool infinite_ = false;
  double value_ = 0.0;
};

ExtReal min(ExtReal a, ExtReal b);
ExtReal max(ExtReal a, ExtReal b);
std::string to_string(const ExtReal& v);

/// One block of coordinates measured with a single norm. Product spaces
/// carry one block per factor and measure with the sum of block norms.
struct NormBlock {
  std::size_t dim = 0;
  Norm norm = Norm::Sum;
};

struct Axis {
  double lo = 0.0;
  double hi = 0.0;
  double step = 1.0;
};

/// A finite sample of a normed space. Points are stored explicitly so that
/// irregular samplings are first-class.
class GridSpace {
 public:
  GridSpace(std::string label, std::vector<Point> points, Norm norm);
  GridSpace(std::string label, std::vector<Point> points,
            std::vector<NormBlock> blocks);

  const std::string& label() const { return label_; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return points_.size(); }
  const Point& point(std::size_t i) const { return points_.at(i); }
  const std::vector<Point>& points() const { return points_; }
  const std::vector<NormBlock>& blocks() const { return blocks_; }
  bool is_product() const { return blocks_.size() > 1; }

  double norm(PointView v) const;
  double distance(PointView a, PointView b) const;

  /// Index of the grid point within `tol` (in this space's norm) of p.
  std::optional<std::size_t> find(PointView p, double tol = 1e-9) const;
  /// As find(), but throws OffGridError naming the point.
  std::size_t index_of(PointView p, double tol = 1e-9) const;

  /// Largest coordinate span over all axes (used for default radii).
  double extent() const;
  /// Smallest positive distance between two distinct grid points.
  double min_spacing() const;

  void check_dim(PointView p) const;

 private:
  std::vector<long long> key(PointView p) const;

  std::string label_;
  std::vector<Point> points_;
  std::vector<NormBlock> blocks_;
  std::size_t dim_ = 0;
  std::map<std::vector<long long>, std::size_t> lookup_;
};

using SpacePtr = std::shared_ptr<const GridSpace>;

SpacePtr make_space(std::string label, std::vector<Point> points, Norm norm);
/// Regular lattice: Cartesian product of the axes, row-major.
SpacePtr lattice_space(std::string label, const std::vector<Axis>& axes,
                       Norm norm);
/// One-dimensional regular grid lo, lo+step, ..., hi.
SpacePtr line_space(std::string label, double lo, double hi, double step,
                    Norm norm = Norm::Sum);

/// Cartesian product of the factor point lists (first factor outermost) with
/// the sum of the factor norms.
SpacePtr product_space(const std::vector<SpacePtr>& factors);

Point concat(PointView a, PointView b);

/// A subset of a grid space, stored as sorted unique point indices.
class PointSet {
 public:
  explicit PointSet(SpacePtr space);
  PointSet(SpacePtr space, std::vector<std::size_t> members);

  static PointSet full(SpacePtr space);

  const GridSpace& space() const { return *space_; }
  const SpacePtr& space_ptr() const { return space_; }
  const std::vector<std::size_t>& members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  bool contains(std::size_t index) const;
  bool contains_point(PointView p) const;
  std::vector<Point> points() const;

  PointSet united(const PointSet& other) const;
  PointSet intersected(const PointSet& other) const;
  bool is_subset_of(const PointSet& other) const;

  bool operator==(const PointSet& other) const;

 private:
  SpacePtr space_;
  std::vector<std::size_t> members_;
};

enum class BallKind { Open, Closed };

constexpr double kClosedBallSlack = 1e-12;
/// Points closer than this to the sphere count as on it (outside open balls).
constexpr double kOpenBallSlack = 1e-12;

/// d(x, A) in A's norm; +inf when A is empty.
ExtReal distance_point_set(PointView x, const PointSet& a);
/// inf over pairs of ||a - b||; +inf if either side is empty.
ExtReal distance_set_set(const PointSet& a, const PointSet& b);
/// Grid points within radius - 1e-12 (open) or radius + 1e-12 (closed).
PointSet ball(const SpacePtr& space, PointView center, double radius,
              BallKind kind = BallKind::Open);
/// max over a in A of d(a, B); zero iff A is a subset of B.
ExtReal inclusion_defect(const PointSet& a, const PointSet& b);

}  // namespace setreg
