#include "setreg/setvalued.hpp"

#include <algorithm>
#include <sstream>

namespace setreg {

namespace {

std::string describe(PointView p) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
  os << ')';
  return os.str();
}

template <class T>
void sort_unique(std::vector<T>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

// Compressed rows: offsets has n+1 entries.
void build_csr(std::size_t n,
               const std::vector<std::pair<std::size_t, std::size_t>>& edges,
               std::vector<std::size_t>& offsets,
               std::vector<std::size_t>& values) {
  offsets.assign(n + 1, 0);
  for (const auto& [a, b] : edges) ++offsets[a + 1];
  for (std::size_t i = 0; i < n; ++i) offsets[i + 1] += offsets[i];
  values.assign(edges.size(), 0);
  auto cursor = offsets;
  for (const auto& [a, b] : edges) values[cursor[a]++] = b;
  for (std::size_t i = 0; i < n; ++i) {
    std::sort(values.begin() + static_cast<long>(offsets[i]),
              values.begin() + static_cast<long>(offsets[i + 1]));
  }
}

std::optional<std::size_t> snap(const GridSpace& target, const Point& y,
                                OffGridPolicy policy, PointView x) {
  if (auto k = target.find(y)) return k;
  if (policy == OffGridPolicy::Drop) return std::nullopt;
  throw OffGridError("image " + describe(y) + " of " + describe(x) +
                     " is not on grid '" + target.label() + "'");
}

}  // namespace

// -------------------------------------------------------------------- Matrix

Matrix::Matrix(std::size_t r, std::size_t c, std::vector<double> values)
    : rows(r), cols(c), data(std::move(values)) {
  if (data.size() != rows * cols) throw Error("matrix data size mismatch");
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rs) {
  if (rs.empty() || rs.front().empty()) throw Error("matrix has no entries");
  Matrix m;
  m.rows = rs.size();
  m.cols = rs.front().size();
  for (const auto& r : rs) {
    if (r.size() != m.cols) throw Error("ragged matrix rows");
    m.data.insert(m.data.end(), r.begin(), r.end());
  }
  return m;
}

Point Matrix::apply(PointView x) const {
  if (x.size() != cols) {
    throw DimensionError("matrix with " + std::to_string(cols) +
                         " columns applied to a " + std::to_string(x.size()) +
                         "-vector");
  }
  Point y(rows, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) y[r] += (*this)(r, c) * x[c];
  }
  return y;
}

// ------------------------------------------------------------------ MultiMap

MultiMap::MultiMap(SpacePtr source, SpacePtr target, std::vector<Pair> graph)
    : source_(std::move(source)), target_(std::move(target)),
      graph_(std::move(graph)) {
  if (!source_ || !target_) throw Error("MultiMap needs source and target");
  sort_unique(graph_);
  for (const auto& [x, y] : graph_) {
    if (x >= source_->size() || y >= target_->size()) {
      throw Error("graph pair outside the declared grids");
    }
  }
  build_csr(source_->size(), graph_, row_offsets_, row_values_);
  std::vector<Pair> transposed;
  transposed.reserve(graph_.size());
  for (const auto& [x, y] : graph_) transposed.emplace_back(y, x);
  build_csr(target_->size(), transposed, col_offsets_, col_values_);
}

std::span<const std::size_t> MultiMap::row(std::size_t x) const {
  return {row_values_.data() + row_offsets_.at(x),
          row_offsets_.at(x + 1) - row_offsets_[x]};
}

std::span<const std::size_t> MultiMap::column(std::size_t y) const {
  return {col_values_.data() + col_offsets_.at(y),
          col_offsets_.at(y + 1) - col_offsets_[y]};
}

bool MultiMap::contains(std::size_t x, std::size_t y) const {
  auto r = row(x);
  return std::binary_search(r.begin(), r.end(), y);
}

PointSet MultiMap::image_at(std::size_t x) const {
  auto r = row(x);
  return PointSet(target_, {r.begin(), r.end()});
}

PointSet MultiMap::preimage_at(std::size_t y) const {
  auto c = column(y);
  return PointSet(source_, {c.begin(), c.end()});
}

PointSet MultiMap::domain() const {
  std::vector<std::size_t> d;
  for (std::size_t x = 0; x < source_->size(); ++x) {
    if (!row(x).empty()) d.push_back(x);
  }
  return PointSet(source_, std::move(d));
}

PointSet MultiMap::range() const {
  std::vector<std::size_t> r;
  for (std::size_t y = 0; y < target_->size(); ++y) {
    if (!column(y).empty()) r.push_back(y);
  }
  return PointSet(target_, std::move(r));
}

bool MultiMap::operator==(const MultiMap& other) const {
  return source_ == other.source_ && target_ == other.target_ &&
         graph_ == other.graph_;
}

// ------------------------------------------------------------- ParamMultiMap

ParamMultiMap::ParamMultiMap(SpacePtr first, SpacePtr second, SpacePtr target,
                             std::vector<Triple> graph)
    : first_(std::move(first)), second_(std::move(second)),
      target_(std::move(target)), graph_(std::move(graph)) {
  if (!first_ || !second_ || !target_) {
    throw Error("ParamMultiMap needs three spaces");
  }
  joint_ = product_space({first_, second_});
  sort_unique(graph_);
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  edges.reserve(graph_.size());
  for (const auto& t : graph_) {
    if (t[0] >= first_->size() || t[1] >= second_->size() ||
        t[2] >= target_->size()) {
      throw Error("graph triple outside the declared grids");
    }
    edges.emplace_back(t[0] * second_->size() + t[1], t[2]);
  }
  build_csr(first_->size() * second_->size(), edges, offsets_, values_);
}

std::span<const std::size_t> ParamMultiMap::image(std::size_t i,
                                                  std::size_t j) const {
  const std::size_t cell = i * second_->size() + j;
  return {values_.data() + offsets_.at(cell), offsets_.at(cell + 1) - offsets_[cell]};
}

bool ParamMultiMap::contains(std::size_t i, std::size_t j,
                             std::size_t k) const {
  auto r = image(i, j);
  return std::binary_search(r.begin(), r.end(), k);
}

MultiMap ParamMultiMap::slice_second(std::size_t j) const {
  std::vector<MultiMap::Pair> pairs;
  for (std::size_t i = 0; i < first_->size(); ++i) {
    for (auto k : image(i, j)) pairs.emplace_back(i, k);
  }
  return MultiMap(first_, target_, std::move(pairs));
}

MultiMap ParamMultiMap::slice_first(std::size_t i) const {
  std::vector<MultiMap::Pair> pairs;
  for (std::size_t j = 0; j < second_->size(); ++j) {
    for (auto k : image(i, j)) pairs.emplace_back(j, k);
  }
  return MultiMap(second_, target_, std::move(pairs));
}

MultiMap ParamMultiMap::joint() const {
  std::vector<MultiMap::Pair> pairs;
  pairs.reserve(graph_.size());
  for (const auto& t : graph_) {
    pairs.emplace_back(t[0] * second_->size() + t[1], t[2]);
  }
  return MultiMap(joint_, target_, std::move(pairs));
}

bool ParamMultiMap::operator==(const ParamMultiMap& other) const {
  return first_ == other.first_ && second_ == other.second_ &&
         target_ == other.target_ && graph_ == other.graph_;
}

// ---------------------------------------------------------------- operations

PointSet image(const MultiMap& f, PointView x) {
  return f.image_at(f.source().index_of(x));
}

PointSet image_of_set(const MultiMap& f, const PointSet& a) {
  if (a.space_ptr() != f.source_ptr()) {
    throw Error("image_of_set: set is not on the map's source grid");
  }
  std::vector<std::size_t> out;
  for (auto x : a.members()) {
    auto r = f.row(x);
    out.insert(out.end(), r.begin(), r.end());
  }
  return PointSet(f.target_ptr(), std::move(out));
}

MultiMap inverse(const MultiMap& f) {
  std::vector<MultiMap::Pair> pairs;
  pairs.reserve(f.graph().size());
  for (const auto& [x, y] : f.graph()) pairs.emplace_back(y, x);
  return MultiMap(f.target_ptr(), f.source_ptr(), std::move(pairs));
}

MultiMap compose_g(const MultiMap& f1, const MultiMap& f2,
                   const BiMultiMap& g) {
  if (f1.source_ptr() != f2.source_ptr()) {
    throw Error("compose_g: F1 and F2 must share a source grid");
  }
  if (g.first_ptr() != f1.target_ptr() || g.second_ptr() != f2.target_ptr()) {
    throw Error("compose_g: G must act on F1's and F2's target grids");
  }
  std::vector<MultiMap::Pair> pairs;
  for (std::size_t x = 0; x < f1.source().size(); ++x) {
    for (auto y : f1.row(x)) {
      for (auto z : f2.row(x)) {
        for (auto w : g.image(y, z)) pairs.emplace_back(x, w);
      }
    }
  }
  return MultiMap(f1.source_ptr(), g.target_ptr(), std::move(pairs));
}

MultiMap difference(const MultiMap& f1, const MultiMap& f2, SpacePtr result) {
  if (f1.source_ptr() != f2.source_ptr()) {
    throw Error("difference: F1 and F2 must share a source grid");
  }
  if (f1.target().dim() != f2.target().dim()) {
    throw DimensionError("difference: targets live in different dimensions");
  }
  if (!result) result = f1.target_ptr();
  if (result->dim() != f1.target().dim()) {
    throw DimensionError("difference: result grid has the wrong dimension");
  }
  std::vector<MultiMap::Pair> pairs;
  const std::size_t dim = result->dim();
  Point diff(dim);
  for (std::size_t x = 0; x < f1.source().size(); ++x) {
    for (auto y : f1.row(x)) {
      for (auto z : f2.row(x)) {
        const auto& a = f1.target().point(y);
        const auto& b = f2.target().point(z);
        for (std::size_t k = 0; k < dim; ++k) diff[k] = a[k] - b[k];
        auto w = result->find(diff);
        if (!w) {
          throw OffGridError("difference " + describe(a) + " - " +
                             describe(b) + " is not on grid '" +
                             result->label() + "'");
        }
        pairs.emplace_back(x, *w);
      }
    }
  }
  return MultiMap(f1.source_ptr(), std::move(result), std::move(pairs));
}

ParamMultiMap difference(const ParamMultiMap& f1, const MultiMap& f2,
                         SpacePtr result) {
  if (f1.first_ptr() != f2.source_ptr()) {
    throw Error("difference: F1(., p) and F2 must share the x grid");
  }
  if (!result) result = f1.target_ptr();
  if (result->dim() != f1.target().dim() || f2.target().dim() != result->dim()) {
    throw DimensionError("difference: target dimensions disagree");
  }
  std::vector<ParamMultiMap::Triple> triples;
  Point diff(result->dim());
  for (const auto& t : f1.graph()) {
    for (auto z : f2.row(t[0])) {
      const auto& a = f1.target().point(t[2]);
      const auto& b = f2.target().point(z);
      for (std::size_t k = 0; k < diff.size(); ++k) diff[k] = a[k] - b[k];
      auto w = result->find(diff);
      if (!w) {
        throw OffGridError("difference " + describe(a) + " - " + describe(b) +
                           " is not on grid '" + result->label() + "'");
      }
      triples.push_back({t[0], t[1], *w});
    }
  }
  return ParamMultiMap(f1.first_ptr(), f1.second_ptr(), std::move(result),
                       std::move(triples));
}

BiMultiMap subtraction_relation(SpacePtr left, SpacePtr right,
                                SpacePtr result) {
  return from_function(
      std::move(left), std::move(right), std::move(result),
      [](const Point& y, const Point& z) {
        if (y.size() != z.size()) throw DimensionError("y - z dimension mismatch");
        Point w(y.size());
        for (std::size_t k = 0; k < w.size(); ++k) w[k] = y[k] - z[k];
        return w;
      },
      OffGridPolicy::Drop);
}

MultiMap localize(const MultiMap& f, const PointSet& u, const PointSet& v) {
  if (u.space_ptr() != f.source_ptr() || v.space_ptr() != f.target_ptr()) {
    throw Error("localize: neighborhoods must live on the map's grids");
  }
  std::vector<MultiMap::Pair> pairs;
  for (const auto& [x, y] : f.graph()) {
    if (u.contains(x) && v.contains(y)) pairs.emplace_back(x, y);
  }
  return MultiMap(f.source_ptr(), f.target_ptr(), std::move(pairs));
}

MultiMap identity_map(SpacePtr space) {
  std::vector<MultiMap::Pair> pairs;
  for (std::size_t i = 0; i < space->size(); ++i) pairs.emplace_back(i, i);
  return MultiMap(space, space, std::move(pairs));
}

MultiMap from_linear(const Matrix& a, SpacePtr source, SpacePtr target,
                     OffGridPolicy policy) {
  if (a.cols != source->dim() || a.rows != target->dim()) {
    throw DimensionError("matrix is " + std::to_string(a.rows) + "x" +
                         std::to_string(a.cols) + " but the grids are " +
                         std::to_string(source->dim()) + "-d -> " +
                         std::to_string(target->dim()) + "-d");
  }
  return from_function(
      std::move(source), std::move(target),
      [&a](const Point& x) { return a.apply(x); }, policy);
}

MultiMap from_function(SpacePtr source, SpacePtr target,
                       const std::function<Point(const Point&)>& fn,
                       OffGridPolicy policy) {
  std::vector<MultiMap::Pair> pairs;
  for (std::size_t i = 0; i < source->size(); ++i) {
    const auto& x = source->point(i);
    const Point y = fn(x);
    target->check_dim(y);
    if (auto k = snap(*target, y, policy, x)) pairs.emplace_back(i, *k);
  }
  return MultiMap(std::move(source), std::move(target), std::move(pairs));
}

ParamMultiMap from_function(
    SpacePtr first, SpacePtr second, SpacePtr target,
    const std::function<Point(const Point&, const Point&)>& fn,
    OffGridPolicy policy) {
  std::vector<ParamMultiMap::Triple> triples;
  for (std::size_t i = 0; i < first->size(); ++i) {
    for (std::size_t j = 0; j < second->size(); ++j) {
      const Point y = fn(first->point(i), second->point(j));
      target->check_dim(y);
      const Point xp = concat(first->point(i), second->point(j));
      if (auto k = snap(*target, y, policy, xp)) triples.push_back({i, j, *k});
    }
  }
  return ParamMultiMap(std::move(first), std::move(second), std::move(target),
                       std::move(triples));
}

MultiMap from_pairs(SpacePtr source, SpacePtr target,
                    const std::vector<std::pair<Point, Point>>& pairs) {
  std::vector<MultiMap::Pair> idx;
  idx.reserve(pairs.size());
  for (const auto& [x, y] : pairs) {
    idx.emplace_back(source->index_of(x), target->index_of(y));
  }
  return MultiMap(std::move(source), std::move(target), std::move(idx));
}

MultiMap slice_param(const ParamMultiMap& f, PointView p) {
  return f.slice_second(f.second().index_of(p));
}

}  // namespace setreg
