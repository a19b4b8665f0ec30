#include "setreg/coincidence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "setreg/parallel.hpp"

namespace setreg {

namespace {

bool rows_meet(const MultiMap& f1, const MultiMap& f2, std::size_t x) {
  const bool shared = f1.target_ptr() == f2.target_ptr();
  for (auto y : f1.row(x)) {
    if (shared) {
      if (f2.contains(x, y)) return true;
      continue;
    }
    const auto j = f2.target().find(f1.target().point(y));
    if (j && f2.contains(x, *j)) return true;
  }
  return false;
}

void check_instance(const CoincidenceInstance& inst) {
  if (inst.f1.source_ptr() != inst.f2.source_ptr()) {
    throw PreconditionError("F1 and F2 must share the source grid");
  }
  if (!(inst.l > 0.0) || !(inst.m > 0.0)) throw PreconditionError("l and m must be positive");
  if (!(inst.l * inst.m < 1.0)) throw PreconditionError("lm must be below 1");
  if (!(inst.alpha > 0.0) || !(inst.beta > 0.0)) {
    throw PreconditionError("alpha and beta must be positive");
  }
  const auto xi = inst.f1.source().index_of(inst.x_bar);
  if (!inst.f1.contains(xi, inst.f1.target().index_of(inst.y_bar)) ||
      !inst.f2.contains(xi, inst.f2.target().index_of(inst.y_bar))) {
    throw PreconditionError("(x̄, ȳ) must lie on Gr F1 and Gr F2");
  }
}

std::vector<HypothesisResult> hypotheses(const CoincidenceInstance& inst,
                                         const EstimateOptions& opt) {
  std::vector<HypothesisResult> out;
  const auto& cfg = inst.config;
  auto reg = estimate_reg_around(inst.f1, inst.x_bar, inst.y_bar, cfg, opt);
  out.push_back(validate_constant("F1_regular_l", reg, inst.l, [&](double v) {
    return constant_feasible(ModulusKind::Reg, inst.f1, inst.x_bar, inst.y_bar, cfg, v);
  }));
  auto lip = estimate_lip_around(inst.f2, inst.x_bar, inst.y_bar, cfg, opt);
  out.push_back(validate_constant("F2_lipschitz_like_m", lip, inst.m, [&](double v) {
    return constant_feasible(ModulusKind::Lip, inst.f2, inst.x_bar, inst.y_bar, cfg, v);
  }));
  return out;
}

struct Context {
  const CoincidenceInstance& inst;
  double factor;
  PointSet fix;
  std::optional<MultiMap> diff;
};

ExtReal diffix_rhs(const Context& c, std::size_t x) {
  const auto& f1 = c.inst.f1;
  const PointSet capped =
      f1.image_at(x).intersected(ball(f1.target_ptr(), c.inst.y_bar, c.inst.beta));
  return distance_set_set(capped, c.inst.f2.image_at(x)).scaled(c.factor);
}

ExtReal difference_rhs(const Context& c, std::size_t x) {
  const MultiMap& d = *c.diff;
  const Point zero(d.target().dim(), 0.0);
  const PointSet capped = d.image_at(x).intersected(ball(d.target_ptr(), zero, c.inst.beta));
  return distance_point_set(zero, capped).scaled(c.factor);
}

FixpRow make_row(const Context& c, FixpVariant v, std::size_t x) {
  FixpRow r;
  r.x = c.inst.f1.source().point(x);
  r.lhs = distance_point_set(r.x, c.fix);
  if (v == FixpVariant::Diffix) {
    r.rhs = diffix_rhs(c, x);
  } else {
    r.rhs = difference_rhs(c, x);
    r.rhs_diffix = diffix_rhs(c, x);
  }
  if (r.rhs.is_infinite()) {
    r.holds = true;
  } else {
    r.holds = r.lhs.is_finite() && r.lhs.value() <= r.rhs.value() + kClosedBallSlack;
    if (r.rhs.value() > 0.0 && r.lhs.is_finite()) r.ratio = r.lhs.value() / r.rhs.value();
  }
  return r;
}

FixpReport run(const CoincidenceInstance& inst, FixpVariant v,
               const std::vector<std::size_t>& xs, const EstimateOptions& opt,
               bool fail_fast) {
  check_instance(inst);
  FixpReport rep;
  rep.variant = v;
  rep.factor = 1.0 / (1.0 / inst.l - inst.m);
  rep.hypotheses = hypotheses(inst, opt);
  rep.proof = proof_constraints(inst.l, inst.m, inst.alpha, inst.beta, inst.config.epsilon);
  double least = std::numeric_limits<double>::infinity();
  for (const auto& p : rep.proof) {
    if (p.rhs - p.lhs < least) {
      least = p.rhs - p.lhs;
      rep.binding = p.name;
    }
  }
  const bool hyp = std::all_of(rep.hypotheses.begin(), rep.hypotheses.end(),
                               [](const HypothesisResult& h) { return h.passed; });
  if (!hyp) {
    rep.status = Status::Fail;
    return rep;
  }
  Context c{inst, rep.factor, fix_set(inst.f1, inst.f2), std::nullopt};
  rep.fix = c.fix.points();
  if (v == FixpVariant::Difference) {
    c.diff = difference(inst.f1, inst.f2, inst.diff);
    const Point zero(c.diff->target().dim(), 0.0);
    if (!c.diff->target().find(zero)) throw OffGridError("0 is not on the difference grid");
  }
  std::vector<FixpRow> rows(xs.size());
  parallel::for_each_index(xs.size(), [&](std::size_t i) { rows[i] = make_row(c, v, xs[i]); });
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

FixpReport single(const CoincidenceInstance& inst, FixpVariant v, PointView x,
                  const EstimateOptions& opt) {
  const auto& s = inst.f1.source();
  if (!(s.distance(x, inst.x_bar) < inst.alpha - kOpenBallSlack)) {
    throw PreconditionError("x is outside B(x̄, alpha)");
  }
  return run(inst, v, {s.index_of(x)}, opt, false);
}

}  // namespace

PointSet fix_set(const MultiMap& f1, const MultiMap& f2) {
  if (f1.source_ptr() != f2.source_ptr()) {
    throw PreconditionError("F1 and F2 must share the source grid");
  }
  if (f1.target().dim() != f2.target().dim()) {
    throw DimensionError("F1 and F2 must map into the same ambient space");
  }
  std::vector<std::size_t> out;
  for (std::size_t x = 0; x < f1.source().size(); ++x) {
    if (rows_meet(f1, f2, x)) out.push_back(x);
  }
  return PointSet(f1.source_ptr(), std::move(out));
}

MultiMap parametric_fix(const ParamMultiMap& f1, const MultiMap& f2) {
  if (f1.first_ptr() != f2.source_ptr()) {
    throw PreconditionError("F1 and F2 must share the source grid");
  }
  std::vector<MultiMap::Pair> pairs;
  for (std::size_t p = 0; p < f1.second().size(); ++p) {
    const PointSet fix = fix_set(f1.slice_second(p), f2);
    for (auto x : fix.members()) pairs.push_back({p, x});
  }
  return MultiMap(f1.second_ptr(), f1.first_ptr(), std::move(pairs));
}

std::vector<ProofConstraint> proof_constraints(double l, double m, double alpha,
                                               double beta, double epsilon) {
  const double k = 1.0 / (1.0 / l - m);
  auto c = [](std::string name, double lhs, double rhs) {
    return ProofConstraint{std::move(name), lhs, rhs, lhs < rhs};
  };
  return {c("alpha < m", alpha, m), c("alpha < epsilon", alpha, epsilon),
          c("m alpha < beta", m * alpha, beta), c("3 beta < epsilon", 3 * beta, epsilon),
          c("2 (1/l - m)^-1 beta < epsilon", 2 * k * beta, epsilon)};
}

ProofRadii proof_radii(double l, double m, double epsilon) {
  if (!(l > 0.0) || !(m > 0.0) || !(l * m < 1.0) || !(epsilon > 0.0)) {
    throw PreconditionError("need l, m, epsilon positive and lm < 1");
  }
  const double k = 1.0 / (1.0 / l - m);
  ProofRadii r;
  const double b3 = epsilon / 3.0, bk = epsilon / (2.0 * k);
  r.beta = 0.5 * std::min(b3, bk);
  r.binding_beta = b3 <= bk ? "3 beta < epsilon" : "2 (1/l - m)^-1 beta < epsilon";
  const double am = m, ae = epsilon, ab = r.beta / m;
  r.alpha = 0.5 * std::min({am, ae, ab});
  if (am <= ae && am <= ab) {
    r.binding_alpha = "alpha < m";
  } else if (ae <= ab) {
    r.binding_alpha = "alpha < epsilon";
  } else {
    r.binding_alpha = "m alpha < beta";
  }
  return r;
}

std::string to_string(FixpVariant v) {
  return v == FixpVariant::Diffix ? "diffix" : "difference";
}

FixpReport verify_fixp_bound(const CoincidenceInstance& inst, PointView x,
                             const EstimateOptions& opt) {
  return single(inst, FixpVariant::Diffix, x, opt);
}

FixpReport verify_fixp_bound_alt(const CoincidenceInstance& inst, PointView x,
                                 const EstimateOptions& opt) {
  return single(inst, FixpVariant::Difference, x, opt);
}

FixpReport sweep_fixp_bound(const CoincidenceInstance& inst, FixpVariant v,
                            const EstimateOptions& opt, bool fail_fast) {
  check_instance(inst);
  const PointSet xs = ball(inst.f1.source_ptr(), inst.x_bar, inst.alpha);
  return run(inst, v, xs.members(), opt, fail_fast);
}

}  // namespace setreg
