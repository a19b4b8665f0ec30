#include "setreg/moduli.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "setreg/parallel.hpp"

namespace setreg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLipSlack = 1e-12;
constexpr std::size_t kNone = static_cast<std::size_t>(-1);

// One quantified inequality of a definition.
// Sup kinds: L is admissible iff L * coef <= lhs + 1e-12 (lhs is the gap to
// the nearest target point outside the image, coef is rho).
// Inf kinds: L is admissible iff lhs <= L * coef + 1e-12.
struct Constraint {
  ExtReal lhs;
  ExtReal coef;
  std::size_t a = kNone;      // x
  std::size_t b = kNone;      // y
  std::size_t c = kNone;      // u, or the openness target point
  std::size_t slice = kNone;  // index into the family's slice list
  double rho = 0.0;
};

bool admissible(Direction dir, const Constraint& k, double l) {
  if (dir == Direction::Sup) {
    if (k.lhs.is_infinite()) return true;
    return l * k.coef.value() <= k.lhs.value() + kOpenBallSlack;
  }
  if (k.coef.is_infinite()) return true;
  if (k.lhs.is_infinite()) return false;
  return k.lhs.value() <= l * k.coef.value() + kLipSlack;
}

// The maps a sweep runs over: F itself, or the slices F_p for p in W
// (or F_x for x in U when the parameter is the moving variable).
struct Family {
  std::vector<MultiMap> slices;
  std::vector<std::size_t> fixed;  // index of the frozen variable per slice
  bool param = false;
  bool swapped = false;  // slices are p -> F(x, p)
  SpacePtr frozen_space;
};

enum class Shape { Open, Lip, Reg, PointOpen, PointCalm, PointHemi };

Shape shape_of(ModulusKind kind) {
  switch (kind) {
    case ModulusKind::Lop:
    case ModulusKind::LopX:
    case ModulusKind::LopP:
      return Shape::Open;
    case ModulusKind::Lip:
    case ModulusKind::LipX:
    case ModulusKind::LipP:
      return Shape::Lip;
    case ModulusKind::Reg:
    case ModulusKind::RegX:
      return Shape::Reg;
    case ModulusKind::Plop:
      return Shape::PointOpen;
    case ModulusKind::Psdclm:
      return Shape::PointCalm;
    case ModulusKind::Hemreg:
      return Shape::PointHemi;
  }
  return Shape::Open;
}

ExtReal dist_to_row(const GridSpace& space, PointView p,
                    std::span<const std::size_t> members) {
  double best = kInf;
  for (auto m : members) best = std::min(best, space.distance(p, space.point(m)));
  return best == kInf ? ExtReal::infinity() : ExtReal(best);
}

std::vector<std::size_t> ball_members(const SpacePtr& space, PointView c,
                                      double r) {
  return ball(space, c, r, BallKind::Open).members();
}

// Constraints of one slice; `moving` lies in the slice's source grid and
// `ref_y` in its target grid. The outer loop over moving-ball members runs
// in parallel and is flattened in index order.
std::vector<Constraint> slice_constraints(Shape shape, const MultiMap& g,
                                          std::size_t slice, std::size_t ref_x,
                                          std::size_t ref_y,
                                          const NeighborhoodConfig& cfg,
                                          double radius_src, double radius_tgt) {
  const GridSpace& xs = g.source();
  const GridSpace& ys = g.target();
  std::vector<std::size_t> u_set;
  std::vector<char> in_v(ys.size(), 0);
  if (shape == Shape::PointOpen) {
    u_set = {ref_x};
  } else {
    u_set = ball_members(g.source_ptr(), xs.point(ref_x), radius_src);
  }
  for (auto y : ball_members(g.target_ptr(), ys.point(ref_y), radius_tgt)) {
    in_v[y] = 1;
  }
  if (shape == Shape::PointOpen) {
    std::fill(in_v.begin(), in_v.end(), 0);
    in_v[ref_y] = 1;
  }

  std::vector<std::vector<Constraint>> parts(u_set.size());
  parallel::for_each_index(u_set.size(), [&](std::size_t i) {
    const std::size_t x = u_set[i];
    auto& out = parts[i];
    switch (shape) {
      case Shape::Open:
      case Shape::PointOpen: {
        std::vector<std::size_t> ys_here;
        for (auto y : g.row(x)) {
          if (in_v[y]) ys_here.push_back(y);
        }
        if (ys_here.empty()) break;
        std::vector<char> img(ys.size(), 0);
        for (double rho : cfg.rho_grid) {
          std::fill(img.begin(), img.end(), 0);
          for (auto s : ball_members(g.source_ptr(), xs.point(x), rho)) {
            for (auto t : g.row(s)) img[t] = 1;
          }
          for (auto y : ys_here) {
            Constraint k;
            double gap = kInf;
            for (std::size_t t = 0; t < ys.size(); ++t) {
              if (img[t]) continue;
              double d = ys.distance(ys.point(t), ys.point(y));
              if (d < gap) {
                gap = d;
                k.c = t;
              }
            }
            k.lhs = gap == kInf ? ExtReal::infinity() : ExtReal(gap);
            k.coef = ExtReal(rho);
            k.a = x;
            k.b = y;
            k.slice = slice;
            k.rho = rho;
            out.push_back(k);
          }
        }
        break;
      }
      case Shape::Lip: {
        for (auto y : g.row(x)) {
          if (!in_v[y]) continue;
          for (auto u : u_set) {
            Constraint k;
            k.lhs = dist_to_row(ys, ys.point(y), g.row(u));
            k.coef = ExtReal(xs.distance(xs.point(x), xs.point(u)));
            k.a = x;
            k.b = y;
            k.c = u;
            k.slice = slice;
            out.push_back(k);
          }
        }
        break;
      }
      case Shape::Reg: {
        for (std::size_t y = 0; y < ys.size(); ++y) {
          if (!in_v[y]) continue;
          Constraint k;
          k.lhs = dist_to_row(xs, xs.point(x), g.column(y));
          k.coef = dist_to_row(ys, ys.point(y), g.row(x));
          k.a = x;
          k.b = y;
          k.slice = slice;
          out.push_back(k);
        }
        break;
      }
      case Shape::PointCalm: {
        Constraint k;
        k.lhs = dist_to_row(ys, ys.point(ref_y), g.row(x));
        k.coef = ExtReal(xs.distance(xs.point(x), xs.point(ref_x)));
        k.a = x;
        k.b = ref_y;
        k.slice = slice;
        out.push_back(k);
        break;
      }
      case Shape::PointHemi:
        break;
    }
  });

  std::vector<Constraint> all;
  for (auto& p : parts) all.insert(all.end(), p.begin(), p.end());

  if (shape == Shape::PointHemi) {
    for (std::size_t y = 0; y < ys.size(); ++y) {
      if (!in_v[y]) continue;
      Constraint k;
      k.lhs = dist_to_row(xs, xs.point(ref_x), g.column(y));
      k.coef = ExtReal(ys.distance(ys.point(y), ys.point(ref_y)));
      k.a = ref_x;
      k.b = y;
      k.slice = slice;
      all.push_back(k);
    }
  }
  return all;
}

struct Sweep {
  Family family;
  std::size_t ref_x = 0;  // in the slices' source grid
  std::size_t ref_y = 0;
  double radius_src = 0.0;
  double radius_tgt = 0.0;
};

Witness materialize(const Sweep& sw, Shape shape, const Constraint& k) {
  const MultiMap& g = sw.family.slices[k.slice];
  const GridSpace& xs = g.source();
  const GridSpace& ys = g.target();
  Witness w;
  w.lhs = k.lhs;
  w.coef = k.coef;
  Point moving = xs.point(k.a);
  w.y = ys.point(k.b);
  std::optional<Point> other;
  switch (shape) {
    case Shape::Open:
    case Shape::PointOpen:
      w.rho = k.rho;
      if (k.c != kNone) w.target = ys.point(k.c);
      break;
    case Shape::Lip:
      other = xs.point(k.c);
      break;
    case Shape::PointCalm:
      other = moving;
      moving = xs.point(sw.ref_x);
      break;
    case Shape::PointHemi:
      w.target = ys.point(sw.ref_y);
      break;
    case Shape::Reg:
      break;
  }
  if (sw.family.swapped) {
    w.x = sw.family.frozen_space->point(sw.family.fixed[k.slice]);
    w.p = moving;
    w.q = other;
    return w;
  }
  w.x = moving;
  w.u = other;
  if (sw.family.param) {
    w.p = sw.family.frozen_space->point(sw.family.fixed[k.slice]);
  }
  return w;
}

ModulusReport run(ModulusKind kind, const Sweep& sw,
                  const NeighborhoodConfig& cfg, const EstimateOptions& opt) {
  const Shape shape = shape_of(kind);
  const Direction dir = direction_of(kind);
  std::vector<Constraint> cs;
  for (std::size_t s = 0; s < sw.family.slices.size(); ++s) {
    auto part = slice_constraints(shape, sw.family.slices[s], s, sw.ref_x,
                                  sw.ref_y, cfg, sw.radius_src, sw.radius_tgt);
    cs.insert(cs.end(), part.begin(), part.end());
  }

  ModulusReport rep;
  rep.kind = kind;
  rep.config = cfg;
  rep.resolution = opt.resolution;
  rep.checked = cs.size();

  auto first_violation = [&](double l) {
    return parallel::find_first(cs.size(), [&](std::size_t i) {
      return !admissible(dir, cs[i], l);
    });
  };
  auto attach = [&](std::size_t i) { rep.witness = materialize(sw, shape, cs[i]); };

  if (dir == Direction::Sup) {
    double cap = 0.0;
    bool bounded = false;
    for (const auto& k : cs) {
      if (k.lhs.is_finite()) {
        const double r = (k.lhs.value() + kOpenBallSlack) / k.coef.value();
        cap = bounded ? std::min(cap, r) : r;
        bounded = true;
      }
    }
    if (!bounded) {
      rep.lo = rep.hi = ExtReal::infinity();
      rep.notes.push_back("every finite constant is feasible");
      return rep;
    }
    double lo = 0.0, hi = 1.0;
    while (hi <= cap) hi *= 2.0;
    while (hi - lo > opt.resolution && rep.iterations < opt.max_iterations) {
      const double mid = 0.5 * (lo + hi);
      ++rep.iterations;
      if (!first_violation(mid)) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    rep.lo = ExtReal(lo);
    rep.hi = ExtReal(hi);
    if (auto i = first_violation(hi)) attach(*i);
    return rep;
  }

  // Inf direction.
  for (std::size_t i = 0; i < cs.size(); ++i) {
    const auto& k = cs[i];
    const bool never = k.coef.is_finite() &&
                       (k.lhs.is_infinite() ||
                        (k.coef.value() == 0.0 && k.lhs.value() > kLipSlack));
    if (never) {
      rep.lo = rep.hi = ExtReal::infinity();
      attach(i);
      rep.notes.push_back("no finite constant is feasible");
      return rep;
    }
  }
  if (!first_violation(0.0)) {
    rep.lo = rep.hi = ExtReal(0.0);
    return rep;
  }
  double need = 0.0;
  for (const auto& k : cs) {
    if (k.coef.is_finite() && k.coef.value() > 0.0) {
      need = std::max(need, k.lhs.value() / k.coef.value());
    }
  }
  double lo = 0.0, hi = 1.0;
  while (hi <= need) hi *= 2.0;
  while (hi - lo > opt.resolution && rep.iterations < opt.max_iterations) {
    const double mid = 0.5 * (lo + hi);
    ++rep.iterations;
    if (!first_violation(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  rep.lo = ExtReal(lo);
  rep.hi = ExtReal(hi);
  if (auto i = first_violation(lo)) attach(*i);
  return rep;
}

void require_on_graph(const MultiMap& f, std::size_t x, std::size_t y) {
  if (!f.contains(x, y)) {
    throw PreconditionError("reference pair is not on the graph of the map");
  }
}

Sweep plain_sweep(const MultiMap& f, PointView x, PointView y,
                  const NeighborhoodConfig& cfg) {
  cfg.validate();
  Sweep sw;
  sw.ref_x = f.source().index_of(x);
  sw.ref_y = f.target().index_of(y);
  require_on_graph(f, sw.ref_x, sw.ref_y);
  sw.family.slices.push_back(f);
  sw.family.fixed.push_back(0);
  sw.radius_src = cfg.radius_u;
  sw.radius_tgt = cfg.radius_v;
  return sw;
}

bool is_partial(ModulusKind k) {
  return k == ModulusKind::LopX || k == ModulusKind::LopP ||
         k == ModulusKind::LipX || k == ModulusKind::LipP ||
         k == ModulusKind::RegX;
}

bool moves_param(ModulusKind k) {
  return k == ModulusKind::LopP || k == ModulusKind::LipP;
}

Sweep partial_sweep(const ParamMultiMap& f, ModulusKind which, PointView x,
                    PointView p, PointView y, const NeighborhoodConfig& cfg) {
  cfg.validate();
  if (!is_partial(which)) throw Error("not a partial modulus kind");
  if (!cfg.radius_w) throw Error("partial moduli need radius_w");
  const std::size_t xi = f.first().index_of(x);
  const std::size_t pi = f.second().index_of(p);
  const std::size_t yi = f.target().index_of(y);
  if (!f.contains(xi, pi, yi)) {
    throw PreconditionError("reference triple is not on the graph of the map");
  }
  Sweep sw;
  sw.family.param = true;
  sw.ref_y = yi;
  sw.radius_tgt = cfg.radius_v;
  if (moves_param(which)) {
    sw.family.swapped = true;
    sw.family.frozen_space = f.first_ptr();
    sw.ref_x = pi;
    sw.radius_src = *cfg.radius_w;
    const PointSet us = ball(f.first_ptr(), x, cfg.radius_u);
    for (auto i : us.members()) {
      sw.family.slices.push_back(f.slice_first(i));
      sw.family.fixed.push_back(i);
    }
  } else {
    sw.ref_x = xi;
    sw.radius_src = cfg.radius_u;
    sw.family.frozen_space = f.second_ptr();
    const PointSet ws = ball(f.second_ptr(), p, *cfg.radius_w);
    for (auto j : ws.members()) {
      sw.family.slices.push_back(f.slice_second(j));
      sw.family.fixed.push_back(j);
    }
  }
  return sw;
}

// ------------------------------------------------------------ definitional

bool openness_holds(const MultiMap& g, PointView x, PointView y, double rho,
                    double l) {
  const PointSet img =
      image_of_set(g, ball(g.source_ptr(), x, rho, BallKind::Open));
  if (l <= 0.0) return true;
  const PointSet want = ball(g.target_ptr(), y, rho * l, BallKind::Open);
  return want.is_subset_of(img);
}

bool lipschitz_holds(ExtReal lhs, ExtReal coef, double l) {
  if (coef.is_infinite()) return true;
  if (lhs.is_infinite()) return false;
  return lhs.value() <= l * coef.value() + kLipSlack;
}

bool definitional(Shape shape, const MultiMap& g, PointView x, PointView y,
                  const NeighborhoodConfig& cfg, double radius_src,
                  double radius_tgt, double l) {
  const SpacePtr& xs = g.source_ptr();
  const SpacePtr& ys = g.target_ptr();
  const PointSet u = ball(xs, x, radius_src);
  const PointSet v = ball(ys, y, radius_tgt);
  const MultiMap inv = inverse(g);
  switch (shape) {
    case Shape::PointOpen:
      for (double rho : cfg.rho_grid) {
        if (!openness_holds(g, x, y, rho, l)) return false;
      }
      return true;
    case Shape::Open:
      for (const auto& xp : u.points()) {
        const PointSet fx = image(g, xp).intersected(v);
        for (const auto& yp : fx.points()) {
          for (double rho : cfg.rho_grid) {
            if (!openness_holds(g, xp, yp, rho, l)) return false;
          }
        }
      }
      return true;
    case Shape::Lip:
      for (const auto& xp : u.points()) {
        const PointSet fx = image(g, xp).intersected(v);
        for (const auto& up : u.points()) {
          const PointSet fu = image(g, up);
          const ExtReal coef(xs->distance(xp, up));
          for (const auto& yp : fx.points()) {
            if (!lipschitz_holds(distance_point_set(yp, fu), coef, l)) {
              return false;
            }
          }
        }
      }
      return true;
    case Shape::Reg:
      for (const auto& xp : u.points()) {
        const PointSet fx = image(g, xp);
        for (const auto& yp : v.points()) {
          if (!lipschitz_holds(distance_point_set(xp, image(inv, yp)),
                               distance_point_set(yp, fx), l)) {
            return false;
          }
        }
      }
      return true;
    case Shape::PointCalm:
      for (const auto& xp : u.points()) {
        if (!lipschitz_holds(distance_point_set(y, image(g, xp)),
                             ExtReal(xs->distance(xp, x)), l)) {
          return false;
        }
      }
      return true;
    case Shape::PointHemi:
      for (const auto& yp : v.points()) {
        if (!lipschitz_holds(distance_point_set(x, image(inv, yp)),
                             ExtReal(ys->distance(yp, y)), l)) {
          return false;
        }
      }
      return true;
  }
  return false;
}

bool refutes(Shape shape, const MultiMap& g, const Witness& w, double l) {
  switch (shape) {
    case Shape::Open:
    case Shape::PointOpen: {
      if (!w.rho || !w.target) return false;
      const PointSet img =
          image_of_set(g, ball(g.source_ptr(), w.x, *w.rho, BallKind::Open));
      if (img.contains_point(*w.target)) return false;
      return g.target().distance(*w.target, w.y) < *w.rho * l - kOpenBallSlack;
    }
    case Shape::Lip:
    case Shape::PointCalm: {
      if (!w.u) return false;
      const ExtReal lhs = distance_point_set(w.y, image(g, *w.u));
      return !lipschitz_holds(lhs, ExtReal(g.source().distance(w.x, *w.u)), l);
    }
    case Shape::Reg: {
      const ExtReal lhs = distance_point_set(w.x, image(inverse(g), w.y));
      const ExtReal coef = distance_point_set(w.y, image(g, w.x));
      return !lipschitz_holds(lhs, coef, l);
    }
    case Shape::PointHemi: {
      if (!w.target) return false;
      const ExtReal lhs = distance_point_set(w.x, image(inverse(g), w.y));
      return !lipschitz_holds(lhs, ExtReal(g.target().distance(w.y, *w.target)),
                              l);
    }
  }
  return false;
}

std::pair<double, double> as_interval(const ModulusReport& r) {
  return {r.lo.value(), r.hi.value()};
}

std::pair<double, double> reciprocal(const ModulusReport& r) {
  auto inv = [](double v) {
    if (v == 0.0) return kInf;
    if (v == kInf) return 0.0;
    return 1.0 / v;
  };
  return {inv(r.hi.value()), inv(r.lo.value())};
}

EquivalenceReport agree(bool around, std::vector<ModulusReport> reps,
                        double resolution) {
  EquivalenceReport out;
  out.around = around;
  out.tolerance = 2.0 * resolution;
  out.intervals = {reciprocal(reps[0]), as_interval(reps[1]),
                   as_interval(reps[2])};
  double lo = 0.0, hi = kInf;
  for (const auto& [a, b] : out.intervals) {
    lo = std::max(lo, a);
    hi = std::min(hi, b);
  }
  out.agree = lo == kInf ? hi == kInf : lo <= hi + out.tolerance;
  out.reports = std::move(reps);
  return out;
}

}  // namespace

// ------------------------------------------------------------------ config

void NeighborhoodConfig::validate() const {
  if (!(radius_u > 0.0) || !(radius_v > 0.0)) {
    throw Error("neighborhood radii must be positive");
  }
  if (radius_w && !(*radius_w > 0.0)) throw Error("radius_w must be positive");
  if (!(epsilon > 0.0)) throw Error("epsilon must be positive");
  if (rho_grid.empty()) throw Error("rho_grid must be nonempty");
  for (std::size_t i = 0; i < rho_grid.size(); ++i) {
    if (!(rho_grid[i] > 0.0)) throw Error("rho values must be positive");
    if (i > 0 && !(rho_grid[i] > rho_grid[i - 1])) {
      throw Error("rho_grid must be strictly increasing");
    }
  }
  if (rho_grid.back() > epsilon + 1e-12) {
    throw Error("rho_grid exceeds epsilon");
  }
}

NeighborhoodConfig NeighborhoodConfig::mirrored() const {
  NeighborhoodConfig m = *this;
  std::swap(m.radius_u, m.radius_v);
  return m;
}

NeighborhoodConfig NeighborhoodConfig::defaults(const GridSpace& x,
                                                const GridSpace& y,
                                                const GridSpace* p) {
  auto quarter = [](const GridSpace& s) {
    const double e = s.extent();
    return e > 0.0 ? e / 4.0 : 1.0;
  };
  NeighborhoodConfig c;
  c.radius_u = quarter(x);
  c.radius_v = quarter(y);
  if (p) c.radius_w = quarter(*p);
  c.epsilon = c.radius_u / 2.0;
  c.rho_grid = geometric_rho_grid(c.epsilon);
  return c;
}

std::vector<double> geometric_rho_grid(double epsilon, std::size_t count) {
  std::vector<double> g(count);
  double r = epsilon;
  for (std::size_t i = 0; i < count; ++i) {
    g[count - 1 - i] = r;
    r /= 2.0;
  }
  return g;
}

// ------------------------------------------------------------------- kinds

std::string to_string(ModulusKind kind) {
  switch (kind) {
    case ModulusKind::Lop: return "lop";
    case ModulusKind::Lip: return "lip";
    case ModulusKind::Reg: return "reg";
    case ModulusKind::Plop: return "plop";
    case ModulusKind::Psdclm: return "psdclm";
    case ModulusKind::Hemreg: return "hemreg";
    case ModulusKind::LopX: return "lop_x_uniform";
    case ModulusKind::LopP: return "lop_p_uniform";
    case ModulusKind::LipX: return "lip_x_uniform";
    case ModulusKind::LipP: return "lip_p_uniform";
    case ModulusKind::RegX: return "reg_x_uniform";
  }
  return "?";
}

ModulusKind parse_modulus_kind(const std::string& name) {
  static const std::pair<const char*, ModulusKind> table[] = {
      {"lop", ModulusKind::Lop},       {"lip", ModulusKind::Lip},
      {"reg", ModulusKind::Reg},       {"plop", ModulusKind::Plop},
      {"psdclm", ModulusKind::Psdclm}, {"hemreg", ModulusKind::Hemreg},
      {"lop_x", ModulusKind::LopX},    {"lop_p", ModulusKind::LopP},
      {"lip_x", ModulusKind::LipX},    {"lip_p", ModulusKind::LipP},
      {"reg_x", ModulusKind::RegX},
  };
  for (const auto& [n, k] : table) {
    if (name == n || name == to_string(k)) return k;
  }
  throw Error("unknown modulus kind '" + name + "'");
}

Direction direction_of(ModulusKind kind) {
  switch (kind) {
    case ModulusKind::Lop:
    case ModulusKind::Plop:
    case ModulusKind::LopX:
    case ModulusKind::LopP:
      return Direction::Sup;
    default:
      return Direction::Inf;
  }
}

bool ModulusReport::contains(double value, double tol) const {
  return lo.value() - tol <= value && value <= hi.value() + tol;
}

double ModulusReport::width() const {
  if (lo == hi) return 0.0;
  return hi.value() - lo.value();
}

// -------------------------------------------------------------- estimators

ModulusReport estimate(ModulusKind kind, const MultiMap& f, PointView x,
                       PointView y, const NeighborhoodConfig& cfg,
                       const EstimateOptions& opt) {
  if (is_partial(kind)) throw Error("use estimate_partial for partial kinds");
  const Sweep sw = plain_sweep(f, x, y, cfg);
  ModulusReport rep = run(kind, sw, cfg, opt);
  rep.ref_x.assign(x.begin(), x.end());
  rep.ref_y.assign(y.begin(), y.end());
  return rep;
}

ModulusReport estimate_lop_around(const MultiMap& f, PointView x, PointView y,
                                  const NeighborhoodConfig& cfg,
                                  const EstimateOptions& opt) {
  return estimate(ModulusKind::Lop, f, x, y, cfg, opt);
}
ModulusReport estimate_lip_around(const MultiMap& f, PointView x, PointView y,
                                  const NeighborhoodConfig& cfg,
                                  const EstimateOptions& opt) {
  return estimate(ModulusKind::Lip, f, x, y, cfg, opt);
}
ModulusReport estimate_reg_around(const MultiMap& f, PointView x, PointView y,
                                  const NeighborhoodConfig& cfg,
                                  const EstimateOptions& opt) {
  return estimate(ModulusKind::Reg, f, x, y, cfg, opt);
}
ModulusReport estimate_plop_at(const MultiMap& f, PointView x, PointView y,
                               const NeighborhoodConfig& cfg,
                               const EstimateOptions& opt) {
  return estimate(ModulusKind::Plop, f, x, y, cfg, opt);
}
ModulusReport estimate_psdclm_at(const MultiMap& f, PointView x, PointView y,
                                 const NeighborhoodConfig& cfg,
                                 const EstimateOptions& opt) {
  return estimate(ModulusKind::Psdclm, f, x, y, cfg, opt);
}
ModulusReport estimate_hemreg_at(const MultiMap& f, PointView x, PointView y,
                                 const NeighborhoodConfig& cfg,
                                 const EstimateOptions& opt) {
  return estimate(ModulusKind::Hemreg, f, x, y, cfg, opt);
}

ModulusReport estimate_partial(const ParamMultiMap& f, ModulusKind which,
                               PointView x, PointView p, PointView y,
                               const NeighborhoodConfig& cfg,
                               const EstimateOptions& opt) {
  const Sweep sw = partial_sweep(f, which, x, p, y, cfg);
  ModulusReport rep = run(which, sw, cfg, opt);
  rep.ref_x.assign(x.begin(), x.end());
  rep.ref_y.assign(y.begin(), y.end());
  rep.ref_p = Point(p.begin(), p.end());
  return rep;
}

bool constant_feasible(ModulusKind kind, const MultiMap& f, PointView x,
                       PointView y, const NeighborhoodConfig& cfg, double l) {
  if (is_partial(kind)) throw Error("use the parametric overload");
  cfg.validate();
  return definitional(shape_of(kind), f, x, y, cfg, cfg.radius_u, cfg.radius_v,
                      l);
}

bool constant_feasible(const ParamMultiMap& f, ModulusKind which, PointView x,
                       PointView p, PointView y, const NeighborhoodConfig& cfg,
                       double l) {
  const Sweep sw = partial_sweep(f, which, x, p, y, cfg);
  const Shape shape = shape_of(which);
  for (const auto& g : sw.family.slices) {
    PointView src = sw.family.swapped ? p : x;
    if (!definitional(shape, g, src, y, cfg, sw.radius_src, sw.radius_tgt, l)) {
      return false;
    }
  }
  return true;
}

bool witness_refutes(const ModulusReport& report, const MultiMap& f, double l) {
  if (!report.witness) return false;
  return refutes(shape_of(report.kind), f, *report.witness, l);
}

bool witness_refutes(const ModulusReport& report, const ParamMultiMap& f,
                     double l) {
  if (!report.witness) return false;
  const Witness& w = *report.witness;
  const Shape shape = shape_of(report.kind);
  if (moves_param(report.kind)) {
    if (!w.p) return false;
    Witness local = w;
    local.x = *w.p;
    local.u = w.q;
    return refutes(shape, f.slice_first(f.first().index_of(w.x)), local, l);
  }
  if (!w.p) return false;
  return refutes(shape, slice_param(f, *w.p), w, l);
}

// ------------------------------------------------------------- equivalence

EquivalenceReport check_equivalence_around(const MultiMap& f, PointView x,
                                           PointView y,
                                           const NeighborhoodConfig& cfg,
                                           const EstimateOptions& opt) {
  const MultiMap inv = inverse(f);
  std::vector<ModulusReport> reps;
  reps.push_back(estimate_lop_around(f, x, y, cfg, opt));
  reps.push_back(estimate_lip_around(inv, y, x, cfg.mirrored(), opt));
  reps.push_back(estimate_reg_around(f, x, y, cfg, opt));
  return agree(true, std::move(reps), opt.resolution);
}

EquivalenceReport check_equivalence_at(const MultiMap& f, PointView x,
                                       PointView y,
                                       const NeighborhoodConfig& cfg,
                                       const EstimateOptions& opt) {
  const MultiMap inv = inverse(f);
  std::vector<ModulusReport> reps;
  reps.push_back(estimate_plop_at(f, x, y, cfg, opt));
  reps.push_back(estimate_psdclm_at(inv, y, x, cfg.mirrored(), opt));
  reps.push_back(estimate_hemreg_at(f, x, y, cfg, opt));
  return agree(false, std::move(reps), opt.resolution);
}

// ------------------------------------------------------------------ linear

LinearModuli linear_operator_moduli(const Matrix& a) {
  if (a.rows == 0 || a.cols == 0) throw Error("empty matrix");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(a.rows),
                    static_cast<Eigen::Index>(a.cols));
  for (std::size_t r = 0; r < a.rows; ++r) {
    for (std::size_t c = 0; c < a.cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = a(r, c);
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  LinearModuli out;
  out.rows = a.rows;
  out.cols = a.cols;
  out.singular_values.assign(sv.data(), sv.data() + sv.size());
  out.surjective = a.rows <= a.cols &&
                   out.singular_values[a.rows - 1] > 1e-10;
  if (out.surjective) {
    const double smin = out.singular_values[a.rows - 1];
    out.lop = ExtReal(smin);
    out.reg = ExtReal(1.0 / smin);
  } else {
    out.lop = ExtReal(0.0);
    out.reg = ExtReal::infinity();
  }
  return out;
}

}  // namespace setreg
