#include "setreg/metric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace setreg {

namespace {

constexpr double kDuplicateTol = 1e-12;
constexpr double kKeyScale = 1e8;

std::string format_point(PointView p) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) os << ", ";
    os << p[i];
  }
  os << ')';
  return os.str();
}

// Snaps lo + i*step onto the nearest double of a 1e-12 decimal lattice so
// that 0.1-step grids hold 0.3 rather than 0.30000000000000004.
double lattice_coordinate(double lo, double step, std::size_t i) {
  const double raw = lo + static_cast<double>(i) * step;
  const double scaled = std::round(raw * 1e12);
  if (std::abs(scaled) < 9e15) return scaled / 1e12;
  return raw;
}

}  // namespace

std::string to_string(Norm norm) {
  switch (norm) {
    case Norm::Sum:
      return "sum";
    case Norm::Max:
      return "max";
    case Norm::Euclidean:
      return "euclidean";
  }
  return "sum";
}

Norm parse_norm(std::string_view name) {
  if (name == "sum" || name == "l1") return Norm::Sum;
  if (name == "max" || name == "linf") return Norm::Max;
  if (name == "euclidean" || name == "l2") return Norm::Euclidean;
  throw Error("unknown norm '" + std::string(name) +
              "' (expected sum, max or euclidean)");
}

double vector_norm(PointView v, Norm norm) {
  double acc = 0.0;
  switch (norm) {
    case Norm::Sum:
      for (double c : v) acc += std::abs(c);
      return acc;
    case Norm::Max:
      for (double c : v) acc = std::max(acc, std::abs(c));
      return acc;
    case Norm::Euclidean:
      for (double c : v) acc += c * c;
      return std::sqrt(acc);
  }
  return acc;
}

ExtReal::ExtReal(double value) : value_(value) {
  if (std::isnan(value) || value < 0.0) {
    throw Error("ExtReal requires a nonnegative value");
  }
  if (std::isinf(value)) {
    infinite_ = true;
    value_ = 0.0;
  }
}

double ExtReal::value() const {
  return infinite_ ? std::numeric_limits<double>::infinity() : value_;
}

ExtReal ExtReal::scaled(double factor) const {
  if (!(factor >= 0.0) || std::isinf(factor)) {
    throw Error("ExtReal::scaled requires a finite nonnegative factor");
  }
  if (infinite_) return factor == 0.0 ? ExtReal(0.0) : infinity();
  return ExtReal(value_ * factor);
}

ExtReal min(ExtReal a, ExtReal b) { return b < a ? b : a; }
ExtReal max(ExtReal a, ExtReal b) { return a < b ? b : a; }

std::string to_string(const ExtReal& v) {
  if (v.is_infinite()) return "inf";
  std::ostringstream os;
  os << v.value();
  return os.str();
}

// ---------------------------------------------------------------- GridSpace

GridSpace::GridSpace(std::string label, std::vector<Point> points, Norm norm)
    : GridSpace(std::move(label), std::move(points),
                std::vector<NormBlock>{}) {
  blocks_ = {NormBlock{dim_, norm}};
}

GridSpace::GridSpace(std::string label, std::vector<Point> points,
                     std::vector<NormBlock> blocks)
    : label_(std::move(label)),
      points_(std::move(points)),
      blocks_(std::move(blocks)) {
  if (points_.empty()) throw Error("grid space '" + label_ + "' has no points");
  dim_ = points_.front().size();
  if (dim_ == 0) throw DimensionError("grid space '" + label_ + "' is 0-dimensional");
  for (const auto& p : points_) {
    if (p.size() != dim_) {
      throw DimensionError("grid space '" + label_ +
                           "' mixes point dimensions");
    }
    for (double c : p) {
      if (!std::isfinite(c)) {
        throw Error("grid space '" + label_ + "' has a non-finite coordinate");
      }
    }
  }
  if (!blocks_.empty()) {
    std::size_t total = 0;
    for (const auto& b : blocks_) total += b.dim;
    if (total != dim_) {
      throw DimensionError("norm blocks of '" + label_ +
                           "' do not cover the point dimension");
    }
  }
  for (std::size_t i = 0; i < points_.size(); ++i) {
    auto [it, inserted] = lookup_.emplace(key(points_[i]), i);
    if (!inserted) {
      throw Error("grid space '" + label_ + "' has duplicate point " +
                  format_point(points_[i]));
    }
  }
  // Keys bucket at 1e-8; near-duplicates straddling a bucket edge are caught
  // by an exhaustive pass on desk-scale grids.
  if (points_.size() <= 4096) {
    for (std::size_t i = 0; i < points_.size(); ++i) {
      for (std::size_t j = i + 1; j < points_.size(); ++j) {
        double d = 0.0;
        for (std::size_t k = 0; k < dim_; ++k) {
          d = std::max(d, std::abs(points_[i][k] - points_[j][k]));
        }
        if (d <= kDuplicateTol) {
          throw Error("grid space '" + label_ + "' has duplicate point " +
                      format_point(points_[i]));
        }
      }
    }
  }
}

std::vector<long long> GridSpace::key(PointView p) const {
  std::vector<long long> k(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    k[i] = std::llround(p[i] * kKeyScale);
  }
  return k;
}

void GridSpace::check_dim(PointView p) const {
  if (p.size() != dim_) {
    throw DimensionError("point " + format_point(p) + " has dimension " +
                         std::to_string(p.size()) + ", space '" + label_ +
                         "' has dimension " + std::to_string(dim_));
  }
}

double GridSpace::norm(PointView v) const {
  check_dim(v);
  double acc = 0.0;
  std::size_t offset = 0;
  for (const auto& b : blocks_) {
    acc += vector_norm(v.subspan(offset, b.dim), b.norm);
    offset += b.dim;
  }
  return acc;
}

double GridSpace::distance(PointView a, PointView b) const {
  check_dim(a);
  check_dim(b);
  double acc = 0.0;
  std::size_t offset = 0;
  Point diff(dim_);
  for (std::size_t i = 0; i < dim_; ++i) diff[i] = a[i] - b[i];
  for (const auto& blk : blocks_) {
    acc += vector_norm(PointView(diff).subspan(offset, blk.dim), blk.norm);
    offset += blk.dim;
  }
  return acc;
}

std::optional<std::size_t> GridSpace::find(PointView p, double tol) const {
  check_dim(p);
  if (auto it = lookup_.find(key(p)); it != lookup_.end()) {
    if (distance(points_[it->second], p) <= tol) return it->second;
  }
  std::optional<std::size_t> best;
  double best_d = tol;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const double d = distance(points_[i], p);
    if (d <= best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

std::size_t GridSpace::index_of(PointView p, double tol) const {
  if (auto i = find(p, tol)) return *i;
  throw OffGridError("point " + format_point(p) + " is not on grid '" +
                     label_ + "'");
}

double GridSpace::extent() const {
  double ext = 0.0;
  for (std::size_t k = 0; k < dim_; ++k) {
    double lo = points_.front()[k], hi = lo;
    for (const auto& p : points_) {
      lo = std::min(lo, p[k]);
      hi = std::max(hi, p[k]);
    }
    ext = std::max(ext, hi - lo);
  }
  return ext;
}

double GridSpace::min_spacing() const {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points_.size(); ++i) {
    for (std::size_t j = i + 1; j < points_.size(); ++j) {
      best = std::min(best, distance(points_[i], points_[j]));
    }
  }
  return best;
}

SpacePtr make_space(std::string label, std::vector<Point> points, Norm norm) {
  return std::make_shared<const GridSpace>(std::move(label), std::move(points),
                                           norm);
}

SpacePtr lattice_space(std::string label, const std::vector<Axis>& axes,
                       Norm norm) {
  if (axes.empty()) throw Error("lattice '" + label + "' needs an axis");
  std::vector<std::vector<double>> coords;
  for (const auto& ax : axes) {
    if (!(ax.step > 0.0) || ax.hi < ax.lo) {
      throw Error("lattice '" + label + "' has an invalid axis");
    }
    const auto n = static_cast<std::size_t>(
        std::floor((ax.hi - ax.lo) / ax.step + 1e-9)) + 1;
    std::vector<double> c(n);
    for (std::size_t i = 0; i < n; ++i) c[i] = lattice_coordinate(ax.lo, ax.step, i);
    coords.push_back(std::move(c));
  }
  std::vector<Point> points{Point{}};
  for (const auto& c : coords) {
    std::vector<Point> next;
    next.reserve(points.size() * c.size());
    for (const auto& p : points) {
      for (double v : c) {
        Point q = p;
        q.push_back(v);
        next.push_back(std::move(q));
      }
    }
    points = std::move(next);
  }
  return make_space(std::move(label), std::move(points), norm);
}

SpacePtr line_space(std::string label, double lo, double hi, double step,
                    Norm norm) {
  return lattice_space(std::move(label), {Axis{lo, hi, step}}, norm);
}

Point concat(PointView a, PointView b) {
  Point out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

SpacePtr product_space(const std::vector<SpacePtr>& factors) {
  if (factors.size() < 2) {
    throw Error("product_space needs at least two factors");
  }
  std::string label;
  std::vector<NormBlock> blocks;
  std::vector<Point> points{Point{}};
  for (const auto& f : factors) {
    if (!f) throw Error("product_space got a null factor");
    if (!label.empty()) label += "x";
    label += f->label();
    blocks.insert(blocks.end(), f->blocks().begin(), f->blocks().end());
    std::vector<Point> next;
    next.reserve(points.size() * f->size());
    for (const auto& p : points) {
      for (const auto& q : f->points()) next.push_back(concat(p, q));
    }
    points = std::move(next);
  }
  return std::make_shared<const GridSpace>(std::move(label), std::move(points),
                                           std::move(blocks));
}

// ----------------------------------------------------------------- PointSet

PointSet::PointSet(SpacePtr space) : space_(std::move(space)) {
  if (!space_) throw Error("PointSet needs a space");
}

PointSet::PointSet(SpacePtr space, std::vector<std::size_t> members)
    : space_(std::move(space)), members_(std::move(members)) {
  if (!space_) throw Error("PointSet needs a space");
  std::sort(members_.begin(), members_.end());
  members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
  if (!members_.empty() && members_.back() >= space_->size()) {
    throw Error("PointSet member outside space '" + space_->label() + "'");
  }
}

PointSet PointSet::full(SpacePtr space) {
  std::vector<std::size_t> all(space->size());
  std::iota(all.begin(), all.end(), 0);
  return PointSet(std::move(space), std::move(all));
}

bool PointSet::contains(std::size_t index) const {
  return std::binary_search(members_.begin(), members_.end(), index);
}

bool PointSet::contains_point(PointView p) const {
  auto idx = space_->find(p);
  return idx && contains(*idx);
}

std::vector<Point> PointSet::points() const {
  std::vector<Point> out;
  out.reserve(members_.size());
  for (auto i : members_) out.push_back(space_->point(i));
  return out;
}

PointSet PointSet::united(const PointSet& other) const {
  if (other.space_ != space_) throw Error("union of sets from different spaces");
  std::vector<std::size_t> out;
  std::set_union(members_.begin(), members_.end(), other.members_.begin(),
                 other.members_.end(), std::back_inserter(out));
  return PointSet(space_, std::move(out));
}

PointSet PointSet::intersected(const PointSet& other) const {
  if (other.space_ != space_) {
    throw Error("intersection of sets from different spaces");
  }
  std::vector<std::size_t> out;
  std::set_intersection(members_.begin(), members_.end(),
                        other.members_.begin(), other.members_.end(),
                        std::back_inserter(out));
  return PointSet(space_, std::move(out));
}

bool PointSet::is_subset_of(const PointSet& other) const {
  if (other.space_ != space_) throw Error("subset test across spaces");
  return std::includes(other.members_.begin(), other.members_.end(),
                       members_.begin(), members_.end());
}

bool PointSet::operator==(const PointSet& other) const {
  return space_ == other.space_ && members_ == other.members_;
}

// --------------------------------------------------------------- operations

ExtReal distance_point_set(PointView x, const PointSet& a) {
  a.space().check_dim(x);
  ExtReal best = ExtReal::infinity();
  for (auto i : a.members()) {
    best = min(best, ExtReal(a.space().distance(x, a.space().point(i))));
  }
  return best;
}

ExtReal distance_set_set(const PointSet& a, const PointSet& b) {
  if (a.space().dim() != b.space().dim()) {
    throw DimensionError("distance_set_set across dimensions " +
                         std::to_string(a.space().dim()) + " and " +
                         std::to_string(b.space().dim()));
  }
  ExtReal best = ExtReal::infinity();
  for (auto i : a.members()) {
    best = min(best, distance_point_set(a.space().point(i), b));
  }
  return best;
}

PointSet ball(const SpacePtr& space, PointView center, double radius,
              BallKind kind) {
  if (!(radius > 0.0)) throw Error("ball radius must be positive");
  space->check_dim(center);
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < space->size(); ++i) {
    const double d = space->distance(space->point(i), center);
    const bool inside =
        kind == BallKind::Open ? d < radius - kOpenBallSlack : d <= radius + kClosedBallSlack;
    if (inside) members.push_back(i);
  }
  return PointSet(space, std::move(members));
}

ExtReal inclusion_defect(const PointSet& a, const PointSet& b) {
  if (a.space().dim() != b.space().dim()) {
    throw DimensionError("inclusion_defect across dimensions");
  }
  ExtReal worst(0.0);
  for (auto i : a.members()) {
    const auto& p = a.space().point(i);
    // Same-space members are compared by index first; distance otherwise.
    if (a.space_ptr() == b.space_ptr() && b.contains(i)) continue;
    worst = max(worst, distance_point_set(p, b));
  }
  return worst;
}

}  // namespace setreg
