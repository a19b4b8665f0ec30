#include "setreg/implicit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "setreg/parallel.hpp"

namespace setreg {

namespace {

std::string fmt_point(const Point& p) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (std::size_t i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
  os << ')';
  return os.str();
}

bool in_open_ball(const GridSpace& s, PointView c, PointView p, double r) {
  return s.distance(c, p) < r - kOpenBallSlack;
}

bool in_closed_ball(const GridSpace& s, PointView c, PointView p, double r) {
  return s.distance(c, p) <= r + kClosedBallSlack;
}

Point zero_of(const GridSpace& s) { return Point(s.dim(), 0.0); }

void check_instance(const ImplicitInstance& inst) {
  if (!(inst.c > 0.0)) throw PreconditionError("c must be positive");
  if (!(inst.gamma > 0.0)) throw PreconditionError("gamma must be positive");
  if (!(inst.alpha > 0.0) || !(inst.beta > 0.0)) {
    throw PreconditionError("alpha and beta must be positive");
  }
  const auto xi = inst.h.first().index_of(inst.x_bar);
  const auto pi = inst.h.second().index_of(inst.p_bar);
  const auto zero = inst.h.target().find(zero_of(inst.h.target()));
  if (!zero) throw OffGridError("0 is not on the target grid of H");
  if (!inst.h.contains(xi, pi, *zero)) {
    throw PreconditionError("(x̄, p̄, 0) is not on the graph of H");
  }
}

NeighborhoodConfig hypothesis_config(const ImplicitInstance& inst) {
  NeighborhoodConfig c = inst.config;
  if (!c.radius_w) c.radius_w = inst.beta;
  return c;
}

NeighborhoodConfig solution_config(const ImplicitInstance& inst) {
  if (inst.solution_config) return *inst.solution_config;
  NeighborhoodConfig c;
  c.radius_u = inst.beta;
  c.radius_v = inst.alpha;
  c.epsilon = inst.beta;
  c.rho_grid = {inst.beta};
  return c;
}

HypothesisResult partial_check(std::string name, const ParamMultiMap& h,
                               ModulusKind kind, PointView a, PointView b,
                               PointView w, const NeighborhoodConfig& cfg,
                               double claimed, const EstimateOptions& opt) {
  auto r = estimate_partial(h, kind, a, b, w, cfg, opt);
  return validate_constant(std::move(name), r, claimed, [&](double l) {
    return constant_feasible(h, kind, a, b, w, cfg, l);
  });
}

HypothesisResult rate_hypothesis(const ImplicitInstance& inst, ImplicitSide side,
                                 const EstimateOptions& opt) {
  const Point zero = zero_of(inst.h.target());
  const bool in_x = side == ImplicitSide::XSp;
  return partial_check(in_x ? "H_open_in_x_c" : "H_open_in_p_c", inst.h,
                       in_x ? ModulusKind::LopX : ModulusKind::LopP, inst.x_bar,
                       inst.p_bar, zero, hypothesis_config(inst), inst.c, opt);
}

EstimateRow estimate_row(const ImplicitInstance& inst, const MultiMap& s,
                         ImplicitSide side, std::size_t xi, std::size_t pi) {
  const auto& h = inst.h;
  EstimateRow row;
  row.x = h.first().point(xi);
  row.p = h.second().point(pi);
  if (side == ImplicitSide::XSp) {
    row.lhs = distance_point_set(row.x, s.image_at(pi));
  } else {
    row.lhs = distance_point_set(row.p, s.preimage_at(xi));
  }
  const auto img = h.image(xi, pi);
  const PointSet values(h.target_ptr(), {img.begin(), img.end()});
  const Point zero = zero_of(h.target());
  const PointSet capped = values.intersected(ball(h.target_ptr(), zero, inst.gamma));
  row.rhs = distance_point_set(zero, capped).scaled(1.0 / inst.c);
  if (row.rhs.is_infinite()) {
    row.holds = true;
  } else {
    row.holds = row.lhs.is_finite() &&
                row.lhs.value() <= row.rhs.value() + kClosedBallSlack;
    if (row.rhs.value() > 0.0 && row.lhs.is_finite()) {
      row.ratio = row.lhs.value() / row.rhs.value();
    }
  }
  return row;
}

ImplicitEstimateReport run_estimate(
    const ImplicitInstance& inst, ImplicitSide side,
    const std::vector<std::pair<std::size_t, std::size_t>>& points,
    const EstimateOptions& opt, bool fail_fast) {
  ImplicitEstimateReport rep;
  rep.side = side;
  rep.c = inst.c;
  rep.hypothesis = rate_hypothesis(inst, side, opt);
  if (!rep.hypothesis.passed) {
    rep.status = Status::Fail;
    return rep;
  }
  const MultiMap s = implicit_map(inst.h);
  std::vector<EstimateRow> rows(points.size());
  parallel::for_each_index(points.size(), [&](std::size_t i) {
    rows[i] = estimate_row(inst, s, side, points[i].first, points[i].second);
  });
  for (auto& r : rows) {
    const bool ok = r.holds;
    rep.rows.push_back(std::move(r));
    if (!ok) {
      ++rep.violations;
      if (fail_fast) break;
    }
  }
  rep.status = rep.violations == 0 ? Status::Pass : Status::Fail;
  return rep;
}

ImplicitEstimateReport verify_single(const ImplicitInstance& inst,
                                     ImplicitSide side, PointView x,
                                     PointView p, const EstimateOptions& opt) {
  check_instance(inst);
  if (!in_open_ball(inst.h.first(), inst.x_bar, x, inst.alpha)) {
    throw PreconditionError("x is outside B(x̄, alpha)");
  }
  if (!in_open_ball(inst.h.second(), inst.p_bar, p, inst.beta)) {
    throw PreconditionError("p is outside B(p̄, beta)");
  }
  const auto xi = inst.h.first().index_of(x);
  const auto pi = inst.h.second().index_of(p);
  return run_estimate(inst, side, {{xi, pi}}, opt, false);
}

SolutionBound solution_bound(const ImplicitInstance& inst, bool lip,
                             double lip_h, const EstimateOptions& opt) {
  check_instance(inst);
  if (!std::isfinite(lip_h) || lip_h < 0.0) {
    throw PreconditionError("the partial Lipschitz constant must be finite and nonnegative");
  }
  SolutionBound b;
  b.name = lip ? "lip_S" : "reg_S";
  const Point zero = zero_of(inst.h.target());
  const auto cfg = hypothesis_config(inst);
  b.hypotheses.push_back(
      rate_hypothesis(inst, lip ? ImplicitSide::XSp : ImplicitSide::PSx, opt));
  b.hypotheses.push_back(partial_check(
      lip ? "H_lipschitz_in_p" : "H_lipschitz_in_x", inst.h,
      lip ? ModulusKind::LipP : ModulusKind::LipX, inst.x_bar, inst.p_bar, zero,
      cfg, lip_h, opt));
  b.bound = lip_h / inst.c;
  const MultiMap s = implicit_map(inst.h);
  const auto scfg = solution_config(inst);
  b.companion = lip ? estimate_lip_around(s, inst.p_bar, inst.x_bar, scfg, opt)
                    : estimate_reg_around(s, inst.p_bar, inst.x_bar, scfg, opt);
  b.companion_ok = b.companion.lo.is_finite() &&
                   b.companion.lo.value() <= b.bound + 2.0 * opt.resolution;
  const bool hyp = std::all_of(b.hypotheses.begin(), b.hypotheses.end(),
                               [](const HypothesisResult& h) { return h.passed; });
  b.status = hyp && b.companion_ok ? Status::Pass : Status::Fail;
  return b;
}

void check_gamma_instance(const GammaInstance& inst) {
  if (!(inst.C > 0.0)) throw PreconditionError("C must be positive");
  if (!std::isfinite(inst.D) || inst.D < 0.0) {
    throw PreconditionError("D must be finite and nonnegative");
  }
  if (!(inst.gamma > 0.0)) throw PreconditionError("gamma must be positive");
  if (!(inst.delta > 0.0)) throw PreconditionError("delta must be positive");
  const auto yi = inst.g.first().index_of(inst.y_bar);
  const auto zi = inst.g.second().index_of(inst.z_bar);
  const auto wi = inst.g.target().index_of(inst.w_bar);
  if (!inst.g.contains(yi, zi, wi)) {
    throw PreconditionError("(ȳ, z̄, w̄) is not on the graph of G");
  }
}

PointSet gamma_at(const BiMultiMap& g, std::size_t zi, std::size_t wi) {
  std::vector<std::size_t> ys;
  for (std::size_t y = 0; y < g.first().size(); ++y) {
    if (g.contains(y, zi, wi)) ys.push_back(y);
  }
  return PointSet(g.first_ptr(), std::move(ys));
}

GammaCheck gamma_check(const GammaInstance& inst, std::size_t zi,
                       std::size_t wi, std::size_t zj, std::size_t wj) {
  const auto& g = inst.g;
  GammaCheck c;
  c.z = g.second().point(zi);
  c.w = g.target().point(wi);
  c.z2 = g.second().point(zj);
  c.w2 = g.target().point(wj);
  c.radius = (1.0 + inst.delta) / inst.C *
             (inst.D * g.second().distance(c.z, c.z2) + g.target().distance(c.w, c.w2));
  const PointSet left = gamma_at(g, zi, wi).intersected(
      ball(g.first_ptr(), inst.y_bar, inst.gamma, BallKind::Closed));
  const PointSet right = gamma_at(g, zj, wj);
  c.defect = ExtReal(0.0);
  for (auto y : left.members()) {
    const Point& yp = g.first().point(y);
    const ExtReal d = distance_point_set(yp, right);
    if (d.is_infinite()) {
      c.defect = ExtReal::infinity();
    } else if (d.value() > c.radius + kClosedBallSlack) {
      c.defect = max(c.defect, ExtReal(d.value() - c.radius));
    } else {
      continue;
    }
    if (!c.missing) c.missing = yp;
  }
  return c;
}

}  // namespace

MultiMap implicit_map(const ParamMultiMap& h) {
  const auto zero = h.target().find(zero_of(h.target()));
  if (!zero) throw OffGridError("0 is not on the target grid of H");
  std::vector<MultiMap::Pair> pairs;
  for (const auto& t : h.graph()) {
    if (t[2] == *zero) pairs.push_back({t[1], t[0]});
  }
  return MultiMap(h.second_ptr(), h.first_ptr(), std::move(pairs));
}

std::string to_string(ImplicitSide side) {
  return side == ImplicitSide::XSp ? "xSp" : "pSx";
}

ImplicitEstimateReport verify_xSp_estimate(const ImplicitInstance& inst,
                                           PointView x, PointView p,
                                           const EstimateOptions& opt) {
  return verify_single(inst, ImplicitSide::XSp, x, p, opt);
}

ImplicitEstimateReport verify_pSx_estimate(const ImplicitInstance& inst,
                                           PointView x, PointView p,
                                           const EstimateOptions& opt) {
  return verify_single(inst, ImplicitSide::PSx, x, p, opt);
}

ImplicitEstimateReport sweep_estimate(const ImplicitInstance& inst,
                                      ImplicitSide side,
                                      const EstimateOptions& opt,
                                      bool fail_fast) {
  check_instance(inst);
  const PointSet xs = ball(inst.h.first_ptr(), inst.x_bar, inst.alpha);
  const PointSet ps = ball(inst.h.second_ptr(), inst.p_bar, inst.beta);
  std::vector<std::pair<std::size_t, std::size_t>> points;
  for (auto x : xs.members()) {
    for (auto p : ps.members()) points.push_back({x, p});
  }
  return run_estimate(inst, side, points, opt, fail_fast);
}

SolutionBound bound_lip_S(const ImplicitInstance& inst, double lip_p_h,
                          const EstimateOptions& opt) {
  return solution_bound(inst, true, lip_p_h, opt);
}

SolutionBound bound_reg_S(const ImplicitInstance& inst, double lip_x_h,
                          const EstimateOptions& opt) {
  return solution_bound(inst, false, lip_x_h, opt);
}

PointSet gamma_map(const GammaInstance& inst, PointView z, PointView w) {
  return gamma_at(inst.g, inst.g.second().index_of(z), inst.g.target().index_of(w));
}

GammaCheck verify_gamma_lipschitz(const GammaInstance& inst, PointView z,
                                  PointView w, PointView z2, PointView w2) {
  check_gamma_instance(inst);
  const auto& g = inst.g;
  for (PointView q : {z, z2}) {
    if (!in_closed_ball(g.second(), inst.z_bar, q, inst.gamma)) {
      throw PreconditionError("z is outside D(z̄, gamma)");
    }
  }
  for (PointView q : {w, w2}) {
    if (!in_closed_ball(g.target(), inst.w_bar, q, inst.gamma)) {
      throw PreconditionError("w is outside D(w̄, gamma)");
    }
  }
  return gamma_check(inst, g.second().index_of(z), g.target().index_of(w),
                     g.second().index_of(z2), g.target().index_of(w2));
}

GammaReport verify_gamma_lemma(const GammaInstance& inst,
                               const EstimateOptions& opt, bool fail_fast) {
  check_gamma_instance(inst);
  const auto& g = inst.g;
  NeighborhoodConfig cfg = inst.config;
  if (!cfg.radius_w) cfg.radius_w = cfg.radius_u;

  GammaReport rep;
  rep.delta = inst.delta;
  rep.hypotheses.push_back(partial_check("G_lipschitz_in_z_D", g, ModulusKind::LipP,
                                         inst.y_bar, inst.z_bar, inst.w_bar, cfg,
                                         inst.D, opt));
  rep.hypotheses.push_back(partial_check("G_open_in_y_C", g, ModulusKind::LopX,
                                         inst.y_bar, inst.z_bar, inst.w_bar, cfg,
                                         inst.C, opt));
  const bool hyp = std::all_of(rep.hypotheses.begin(), rep.hypotheses.end(),
                               [](const HypothesisResult& h) { return h.passed; });
  if (!hyp) {
    rep.status = Status::Fail;
    return rep;
  }

  const PointSet zs = ball(g.second_ptr(), inst.z_bar, inst.gamma, BallKind::Closed);
  const PointSet ws = ball(g.target_ptr(), inst.w_bar, inst.gamma, BallKind::Closed);
  std::vector<std::pair<std::size_t, std::size_t>> box;
  for (auto z : zs.members()) {
    for (auto w : ws.members()) box.push_back({z, w});
  }
  const std::size_t n = box.size();

  // Intermediate claim, swept over y in B(ȳ, radius_u) and pairs of the box.
  const PointSet ys = ball(g.first_ptr(), inst.y_bar, cfg.radius_u);
  const std::vector<std::size_t> yv = ys.members();
  const Point zero = zero_of(g.target());
  std::vector<std::optional<std::string>> bad(yv.size());
  parallel::for_each_index(yv.size(), [&](std::size_t k) {
    const std::size_t y = yv[k];
    for (std::size_t a = 0; a < n && !bad[k]; ++a) {
      const auto [zi, wi] = box[a];
      const Point& w = g.target().point(wi);
      for (auto v : g.image(y, zi)) {
        Point shifted = g.target().point(v);
        for (std::size_t d = 0; d < shifted.size(); ++d) shifted[d] -= w[d];
        if (!in_open_ball(g.target(), zero, shifted, cfg.radius_v)) continue;
        for (std::size_t b = 0; b < n && !bad[k]; ++b) {
          const auto [zj, wj] = box[b];
          const Point& w2 = g.target().point(wj);
          const double bound =
              inst.D * g.second().distance(g.second().point(zi), g.second().point(zj)) +
              g.target().distance(w, w2);
          Point moved = shifted;
          for (std::size_t d = 0; d < moved.size(); ++d) moved[d] += w2[d];
          double best = std::numeric_limits<double>::infinity();
          for (auto v2 : g.image(y, zj)) {
            best = std::min(best, g.target().distance(moved, g.target().point(v2)));
          }
          if (!(best <= bound + kClosedBallSlack)) {
            std::ostringstream os;
            os << "y=" << fmt_point(g.first().point(y))
               << " z=" << fmt_point(g.second().point(zi)) << " w=" << fmt_point(w)
               << " z'=" << fmt_point(g.second().point(zj)) << " w'=" << fmt_point(w2);
            bad[k] = os.str();
          }
        }
      }
    }
  });
  rep.intermediate_checked = yv.size() * n * n;
  rep.intermediate_holds = true;
  for (auto& b : bad) {
    if (b) {
      rep.intermediate_holds = false;
      rep.intermediate_counterexample = b;
      break;
    }
  }

  std::vector<GammaCheck> checks(n * n);
  parallel::for_each_index(n * n, [&](std::size_t i) {
    const auto [zi, wi] = box[i / n];
    const auto [zj, wj] = box[i % n];
    checks[i] = gamma_check(inst, zi, wi, zj, wj);
  });
  for (auto& c : checks) {
    const bool ok = c.defect == ExtReal(0.0);
    rep.checks.push_back(std::move(c));
    if (!ok) {
      ++rep.violations;
      if (fail_fast) break;
    }
  }
  rep.status = rep.violations == 0 && rep.intermediate_holds ? Status::Pass
                                                             : Status::Fail;
  return rep;
}

}  // namespace setreg
