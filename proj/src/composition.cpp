#include "setreg/composition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "setreg/parallel.hpp"

namespace setreg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double need(const std::optional<double>& v, const char* name) {
  if (!v) throw PreconditionError(std::string("constant ") + name + " is required");
  if (!std::isfinite(*v) || *v < 0.0) {
    throw PreconditionError(std::string("constant ") + name +
                            " must be finite and nonnegative");
  }
  return *v;
}

double need_positive(const std::optional<double>& v, const char* name) {
  const double x = need(v, name);
  if (!(x > 0.0)) {
    throw PreconditionError(std::string("constant ") + name + " must be positive");
  }
  return x;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

NeighborhoodConfig with_w(const NeighborhoodConfig& cfg) {
  NeighborhoodConfig c = cfg;
  if (!c.radius_w) c.radius_w = c.radius_u;
  return c;
}

// One inclusion B(w, rate * rho) ⊂ H(B(x, rho)) to check.
struct Check {
  const char* label;
  std::size_t x;
  std::size_t w;
  std::vector<Point> via;
  double rho;
  double rate;
  bool symmetric = false;
};

struct Outcome {
  ExtReal defect;
  std::optional<std::size_t> missing;
  double gap = kInf;
};

Outcome evaluate(const MultiMap& h, const Check& c) {
  const PointSet src = ball(h.source_ptr(), h.source().point(c.x), c.rho);
  const PointSet img = image_of_set(h, src);
  const Point& w = h.target().point(c.w);
  const PointSet want = ball(h.target_ptr(), w, c.rate * c.rho);
  Outcome out;
  out.defect = inclusion_defect(want, img);
  for (auto t : want.members()) {
    if (!img.contains(t)) {
      out.missing = t;
      break;
    }
  }
  const auto& members = img.members();
  std::size_t cursor = 0;
  for (std::size_t t = 0; t < h.target().size(); ++t) {
    while (cursor < members.size() && members[cursor] < t) ++cursor;
    if (cursor < members.size() && members[cursor] == t) continue;
    out.gap = std::min(out.gap, h.target().distance(h.target().point(t), w));
  }
  return out;
}

// Evaluates checks in parallel and folds them in order.
void sweep(const MultiMap& h, const std::vector<Check>& checks,
           CompositionCertificate& cert, bool fail_fast) {
  std::vector<Outcome> out(checks.size());
  parallel::for_each_index(checks.size(),
                           [&](std::size_t i) { out[i] = evaluate(h, checks[i]); });
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const Check& c = checks[i];
    ConclusionResult r;
    r.conclusion = c.label;
    r.x = h.source().point(c.x);
    r.w = h.target().point(c.w);
    r.via = c.via;
    r.rho = c.rho;
    r.defect = out[i].defect;
    if (out[i].missing) r.missing = h.target().point(*out[i].missing);
    const ExtReal observed =
        out[i].gap == kInf ? ExtReal::infinity() : ExtReal(out[i].gap / c.rho);
    if (c.symmetric) {
      cert.symmetric_observed_rate =
          min(cert.symmetric_observed_rate.value_or(ExtReal::infinity()), observed);
    } else {
      cert.observed_rate = min(cert.observed_rate, observed);
    }
    const bool bad = r.defect != ExtReal(0.0);
    cert.conclusions.push_back(r);
    if (bad && !cert.failure) cert.failure = r;
    if (bad && fail_fast) break;
  }
}

void finish(CompositionCertificate& cert) {
  bool ok = true;
  for (const auto& h : cert.hypotheses) {
    if (!h.passed) {
      ok = false;
      if (!cert.failed_hypothesis) cert.failed_hypothesis = h.name;
    }
  }
  if (cert.failure) ok = false;
  cert.status = ok ? Status::Pass : Status::Fail;
  cert.slack = cert.observed_rate.is_infinite()
                   ? kInf
                   : cert.observed_rate.value() - cert.rate;
}

bool hypotheses_ok(const CompositionCertificate& cert) {
  return std::all_of(cert.hypotheses.begin(), cert.hypotheses.end(),
                     [](const HypothesisResult& h) { return h.passed; });
}

std::vector<double> rhos_up_to(const std::vector<double>& grid, double bound) {
  std::vector<double> out;
  for (double r : grid) {
    if (r <= bound + 1e-12) out.push_back(r);
  }
  return out;
}

HypothesisResult closed_graphs() {
  HypothesisResult h;
  h.name = "closed_graphs";
  h.passed = true;
  h.note = "finite graphs are closed";
  return h;
}

HypothesisResult plain_hypothesis(std::string name, const MultiMap& f,
                                PointView x, PointView y,
                                const NeighborhoodConfig& cfg, double claimed,
                                ModulusKind kind, const EstimateOptions& opt) {
  auto r = estimate(kind, f, x, y, cfg, opt);
  return validate_constant(std::move(name), r, claimed, [&](double l) {
    return constant_feasible(kind, f, x, y, cfg, l);
  });
}

HypothesisResult partial_hypothesis(std::string name, const BiMultiMap& g,
                                    ModulusKind kind, PointView a, PointView b,
                                    PointView w, const NeighborhoodConfig& cfg,
                                    double claimed, const EstimateOptions& opt) {
  auto r = estimate_partial(g, kind, a, b, w, cfg, opt);
  return validate_constant(std::move(name), r, claimed, [&](double l) {
    return constant_feasible(g, kind, a, b, w, cfg, l);
  });
}

// Disjointness of G(x, y) over y, for x in the given set.
std::optional<std::array<std::size_t, 3>> cond_violation(const BiMultiMap& g,
                                                         const PointSet& xs) {
  for (auto x : xs.members()) {
    std::map<std::size_t, std::size_t> owner;
    for (std::size_t y = 0; y < g.second().size(); ++y) {
      for (auto z : g.image(x, y)) {
        auto [it, fresh] = owner.emplace(z, y);
        if (!fresh && it->second != y) return std::array{x, it->second, y};
      }
    }
  }
  return std::nullopt;
}

// Checks at every point of Gr h inside the two open balls.
std::vector<Check> graph_checks(const MultiMap& h, PointView xc, double rx,
                                PointView wc, double rw,
                                const std::vector<double>& rhos, double rate,
                                const char* label, bool symmetric = false) {
  const PointSet xs = ball(h.source_ptr(), xc, rx);
  const PointSet ws = ball(h.target_ptr(), wc, rw);
  std::vector<Check> out;
  for (auto x : xs.members()) {
    for (auto w : h.row(x)) {
      if (!ws.contains(w)) continue;
      for (double rho : rhos) out.push_back({label, x, w, {}, rho, rate, symmetric});
    }
  }
  return out;
}

void check_same_grid(const SpacePtr& a, const SpacePtr& b, const char* what) {
  if (a != b) throw PreconditionError(std::string(what));
}

}  // namespace

std::string to_string(Theorem t) {
  switch (t) {
    case Theorem::OpComp: return "op_comp";
    case Theorem::PartA: return "op_comp_part_A";
    case Theorem::PartB: return "op_comp_part_B";
    case Theorem::MainConst: return "main_const";
    case Theorem::LyusternikGraves: return "lyusternik_graves";
  }
  return "?";
}

std::string to_string(Status s) { return s == Status::Pass ? "PASS" : "FAIL"; }

HypothesisResult validate_constant(std::string name, const ModulusReport& r,
                                   double claimed,
                                   const std::function<bool(double)>& feasible) {
  HypothesisResult h;
  h.name = std::move(name);
  h.claimed = claimed;
  h.report = r;
  const ExtReal c(claimed);
  if (r.direction() == Direction::Sup) {
    if (c <= r.lo) {
      h.passed = true;
    } else if (c >= r.hi) {
      h.passed = false;
    } else {
      h.passed = feasible(claimed);
      h.note = "decided by direct check inside the bracket";
    }
  } else {
    if (c >= r.hi) {
      h.passed = true;
    } else if (c <= r.lo) {
      h.passed = false;
    } else {
      h.passed = feasible(claimed);
      h.note = "decided by direct check inside the bracket";
    }
  }
  if (!h.passed && h.note.empty()) {
    h.note = "claimed " + fmt(claimed) + " outside bracket [" + to_string(r.lo) +
             ", " + to_string(r.hi) + "]";
  }
  return h;
}

// ----------------------------------------------------------------- op_comp

namespace {

double check_op_comp(const MultiMap& f1, const MultiMap& f2, const BiMultiMap& g,
                     const OpCompAnchor& a, const RateConstants& k) {
  const double L = need_positive(k.L, "L");
  const double M = need_positive(k.M, "M");
  const double C = need_positive(k.C, "C");
  const double D = need(k.D, "D");
  const double rate = L * C - M * D;
  if (!(rate > 0.0)) {
    throw PreconditionError("LC - MD = " + fmt(rate) + " is not positive");
  }
  check_same_grid(f1.source_ptr(), f2.source_ptr(), "F1 and F2 must share X");
  check_same_grid(g.first_ptr(), f1.target_ptr(), "G's first grid must be F1's target");
  check_same_grid(g.second_ptr(), f2.target_ptr(), "G's second grid must be F2's target");
  const std::size_t xi = f1.source().index_of(a.x);
  const std::size_t yi = f1.target().index_of(a.y);
  const std::size_t zi = f2.target().index_of(a.z);
  const std::size_t wi = g.target().index_of(a.w);
  if (!f1.contains(xi, yi)) throw PreconditionError("(x, y) is not on Gr F1");
  if (!f2.contains(xi, zi)) throw PreconditionError("(x, z) is not on Gr F2");
  if (!g.contains(yi, zi, wi)) throw PreconditionError("((y, z), w) is not on Gr G");
  return rate;
}

}  // namespace

std::vector<HypothesisResult> op_comp_hypotheses(const MultiMap& f1,
                                                 const MultiMap& f2,
                                                 const BiMultiMap& g,
                                                 const OpCompAnchor& a,
                                                 const RateConstants& k,
                                                 const NeighborhoodConfig& cfg_in,
                                                 const EstimateOptions& eo) {
  const NeighborhoodConfig cfg = with_w(cfg_in);
  cfg.validate();
  check_op_comp(f1, f2, g, a, k);
  std::vector<HypothesisResult> out;
  out.push_back(closed_graphs());
  out.push_back(plain_hypothesis("F1_open_L", f1, a.x, a.y, cfg, *k.L, ModulusKind::Lop, eo));
  out.push_back(
      plain_hypothesis("F2_lipschitz_like_M", f2, a.x, a.z, cfg, *k.M, ModulusKind::Lip, eo));
  out.push_back(partial_hypothesis("G_open_in_y_C", g, ModulusKind::LopX, a.y, a.z, a.w,
                                   cfg, *k.C, eo));
  out.push_back(partial_hypothesis("G_lipschitz_in_z_D", g, ModulusKind::LipP, a.y, a.z,
                                   a.w, cfg, *k.D, eo));
  return out;
}

CompositionCertificate certify_op_comp(const MultiMap& f1, const MultiMap& f2,
                                       const BiMultiMap& g,
                                       const OpCompAnchor& a,
                                       const RateConstants& k,
                                       const NeighborhoodConfig& cfg_in,
                                       const CertifyOptions& opt) {
  const NeighborhoodConfig cfg = with_w(cfg_in);
  cfg.validate();
  CompositionCertificate cert;
  cert.theorem = Theorem::OpComp;
  cert.constants = k;
  cert.rate = check_op_comp(f1, f2, g, a, k);
  const double L = *k.L, M = *k.M, C = *k.C, D = *k.D;
  const std::size_t xi = f1.source().index_of(a.x);
  const std::size_t wi = g.target().index_of(a.w);

  const double eps = cfg.epsilon;
  const auto rhos_at = rhos_up_to(cfg.rho_grid, eps);
  const auto rhos_around = rhos_up_to(cfg.rho_grid, eps / 2.0);
  if (rhos_around.empty()) {
    throw PreconditionError("rho_grid has no value at most epsilon/2");
  }

  cert.hypotheses = op_comp_hypotheses(f1, f2, g, a, k, cfg, opt.estimate);

  cert.epsilon_used = eps;
  const double alpha = std::min(cfg.radius_u, cfg.radius_v);
  const double S = L * C + M * D;
  cert.epsilon_formula = std::min(
      {alpha, alpha / L, alpha / M, alpha / S, alpha / (2 * L), alpha / (2 * M),
       alpha / (2 * S)});
  cert.notes.push_back("epsilon formula evaluated with alpha = beta = gamma = "
                       "min(radius_u, radius_v)");

  if (!hypotheses_ok(cert)) {
    finish(cert);
    return cert;
  }

  const MultiMap h = compose_g(f1, f2, g);
  std::vector<Check> checks;
  for (double rho : rhos_at) checks.push_back({"at_reference", xi, wi, {}, rho, cert.rate});

  const double half = eps / 2.0;
  const PointSet xs = ball(f1.source_ptr(), a.x, half);
  const PointSet ys = ball(f1.target_ptr(), a.y, half);
  const PointSet zs = ball(f2.target_ptr(), a.z, half);
  const PointSet ws = ball(g.target_ptr(), a.w, half);
  std::map<std::pair<std::size_t, std::size_t>, std::vector<Point>> anchors;
  for (auto x : xs.members()) {
    for (auto y : f1.row(x)) {
      if (!ys.contains(y)) continue;
      for (auto z : f2.row(x)) {
        if (!zs.contains(z)) continue;
        for (auto w : g.image(y, z)) {
          if (!ws.contains(w)) continue;
          anchors.emplace(std::pair{x, w},
                          std::vector<Point>{f1.target().point(y), f2.target().point(z)});
        }
      }
    }
  }
  for (const auto& [xw, via] : anchors) {
    for (double rho : rhos_around) {
      checks.push_back({"around", xw.first, xw.second, via, rho, cert.rate});
    }
  }
  sweep(h, checks, cert, opt.fail_fast);
  finish(cert);
  return cert;
}

// ------------------------------------------------------------------ part A

namespace {

struct PartSetup {
  std::size_t xi, yi, zi;
  MultiMap phi;
};

PartSetup part_setup(const MultiMap& f, const BiMultiMap& g, const PartAnchor& a) {
  check_same_grid(g.first_ptr(), f.source_ptr(), "G's first grid must be F's source");
  check_same_grid(g.second_ptr(), f.target_ptr(), "G's second grid must be F's target");
  const std::size_t xi = f.source().index_of(a.x);
  const std::size_t yi = f.target().index_of(a.y);
  const std::size_t zi = g.target().index_of(a.z);
  if (!f.contains(xi, yi)) throw PreconditionError("(x, y) is not on Gr F");
  if (!g.contains(xi, yi, zi)) throw PreconditionError("((x, y), z) is not on Gr G");
  return {xi, yi, zi, compose_g(identity_map(f.source_ptr()), f, g)};
}

std::vector<Check> incidence_checks(const MultiMap& f, const BiMultiMap& g,
                                    const PartAnchor& a, double eps,
                                    const std::vector<double>& rhos,
                                    double rate) {
  const PointSet xs = ball(f.source_ptr(), a.x, eps);
  const PointSet ys = ball(f.target_ptr(), a.y, eps);
  const PointSet zs = ball(g.target_ptr(), a.z, eps);
  std::map<std::pair<std::size_t, std::size_t>, std::vector<Point>> anchors;
  for (auto x : xs.members()) {
    for (auto y : f.row(x)) {
      if (!ys.contains(y)) continue;
      for (auto z : g.image(x, y)) {
        if (zs.contains(z)) anchors.emplace(std::pair{x, z}, std::vector<Point>{f.target().point(y)});
      }
    }
  }
  std::vector<Check> out;
  for (const auto& [xz, via] : anchors) {
    for (double rho : rhos) out.push_back({"around", xz.first, xz.second, via, rho, rate});
  }
  return out;
}

}  // namespace

CompositionCertificate certify_part_A(const MultiMap& f, const BiMultiMap& g,
                                      const PartAnchor& a,
                                      const RateConstants& k,
                                      const NeighborhoodConfig& cfg_in,
                                      bool check_cond,
                                      const CertifyOptions& opt) {
  const NeighborhoodConfig cfg = with_w(cfg_in);
  cfg.validate();
  const double L = need_positive(k.L, "L");
  const double C = need_positive(k.C, "C");
  const double D = need(k.D, "D");
  CompositionCertificate cert;
  cert.theorem = Theorem::PartA;
  cert.constants = k;
  cert.rate = L * C - D;
  if (!(cert.rate > 0.0)) {
    throw PreconditionError("LC - D = " + fmt(cert.rate) + " is not positive");
  }
  const PartSetup s = part_setup(f, g, a);
  const double eps = cfg.epsilon;
  cert.epsilon_used = eps;
  const auto& eo = opt.estimate;
  cert.hypotheses.push_back(closed_graphs());
  cert.hypotheses.push_back(partial_hypothesis("G_lipschitz_in_x_D", g,
                                               ModulusKind::LipX, a.x, a.y, a.z,
                                               cfg, D, eo));
  cert.hypotheses.push_back(partial_hypothesis("G_open_in_y_C", g, ModulusKind::LopP,
                                               a.x, a.y, a.z, cfg, C, eo));
  cert.hypotheses.push_back(
      plain_hypothesis("F_open_L", f, a.x, a.y, cfg, L, ModulusKind::Lop, eo));
  if (!hypotheses_ok(cert)) {
    finish(cert);
    return cert;
  }

  const auto rhos = rhos_up_to(cfg.rho_grid, eps);
  auto checks = incidence_checks(f, g, a, eps, rhos, cert.rate);

  if (check_cond) {
    const PointSet xs = ball(f.source_ptr(), a.x, eps);
    if (auto v = cond_violation(g, xs)) {
      std::ostringstream os;
      os << "disjointness fails at x index " << (*v)[0] << " for y indices "
         << (*v)[1] << " and " << (*v)[2]
         << "; downgraded to the incidence-quantified conclusion";
      cert.notes.push_back(os.str());
    } else {
      const double eps2 = std::min(eps, C * eps / (D + 1.0));
      const auto rhos2 = rhos_up_to(cfg.rho_grid, eps2);
      cert.notes.push_back("disjointness holds; graph conclusion swept with epsilon' = " +
                           fmt(eps2));
      if (rhos2.empty()) {
        cert.notes.push_back("no rho at most epsilon'; graph conclusion not swept");
      }
      auto more = graph_checks(s.phi, a.x, eps2, a.z, eps2, rhos2, cert.rate, "graph");
      checks.insert(checks.end(), more.begin(), more.end());
    }
  }
  sweep(s.phi, checks, cert, opt.fail_fast);
  finish(cert);
  return cert;
}

// ------------------------------------------------------------------ part B

CompositionCertificate certify_part_B(const MultiMap& f, const BiMultiMap& g,
                                      const PartAnchor& a,
                                      const RateConstants& k,
                                      const NeighborhoodConfig& cfg_in,
                                      bool singleton_check,
                                      const CertifyOptions& opt) {
  const NeighborhoodConfig cfg = with_w(cfg_in);
  cfg.validate();
  const double M = need_positive(k.M, "M");
  const double C = need_positive(k.C, "C");
  const double D = need(k.D, "D");
  CompositionCertificate cert;
  cert.theorem = Theorem::PartB;
  cert.constants = k;
  cert.rate = C - M * D;
  if (!(cert.rate > 0.0)) {
    throw PreconditionError("C - MD = " + fmt(cert.rate) + " is not positive");
  }
  const PartSetup s = part_setup(f, g, a);
  const double eps = cfg.epsilon;
  cert.epsilon_used = eps;
  const auto& eo = opt.estimate;
  cert.hypotheses.push_back(closed_graphs());
  cert.hypotheses.push_back(partial_hypothesis("G_open_in_x_C", g, ModulusKind::LopX,
                                               a.x, a.y, a.z, cfg, C, eo));
  cert.hypotheses.push_back(partial_hypothesis("G_lipschitz_in_y_D", g,
                                               ModulusKind::LipP, a.x, a.y, a.z,
                                               cfg, D, eo));
  cert.hypotheses.push_back(
      plain_hypothesis("F_lipschitz_like_M", f, a.x, a.y, cfg, M, ModulusKind::Lip, eo));
  if (!hypotheses_ok(cert)) {
    finish(cert);
    return cert;
  }

  const auto rhos = rhos_up_to(cfg.rho_grid, eps);
  auto checks = incidence_checks(f, g, a, eps, rhos, cert.rate);

  if (singleton_check) {
    std::string why;
    if (f.row(s.xi).size() != 1) why = "F(x) is not a singleton";
    if (why.empty()) {
      const PointSet xs = ball(f.source_ptr(), a.x, eps);
      for (auto x : xs.members()) {
        for (auto u : xs.members()) {
          const double bound =
              M * f.source().distance(f.source().point(x), f.source().point(u)) + 1e-12;
          for (auto y : f.row(x)) {
            const ExtReal d = distance_point_set(f.target().point(y), f.image_at(u));
            if (d.is_infinite() || d.value() > bound) {
              why = "F is not M-Lipschitz on B(x, epsilon)";
              break;
            }
          }
          if (!why.empty()) break;
        }
        if (!why.empty()) break;
      }
    }
    if (!why.empty()) {
      cert.notes.push_back(why + "; downgraded to the incidence-quantified conclusion");
    } else {
      const double eps2 = std::min(eps, eps / M);
      const auto rhos2 = rhos_up_to(cfg.rho_grid, eps2);
      cert.notes.push_back("singleton and Lipschitz checks hold; graph conclusion swept "
                           "with epsilon' = " + fmt(eps2));
      auto more = graph_checks(s.phi, a.x, eps2, a.z, eps2, rhos2, cert.rate, "graph");
      checks.insert(checks.end(), more.begin(), more.end());
    }
  }
  sweep(s.phi, checks, cert, opt.fail_fast);
  finish(cert);
  return cert;
}

// -------------------------------------------------------------- main_const

CompositionCertificate certify_main_const(const MultiMap& f1,
                                          const MultiMap& f2,
                                          const MainConstAnchor& a,
                                          const RateConstants& k,
                                          const NeighborhoodConfig& cfg,
                                          SpacePtr diff,
                                          const CertifyOptions& opt) {
  cfg.validate();
  const double l = need_positive(k.l, "l");
  const double m = need_positive(k.m, "m");
  if (!(l * m < 1.0)) throw PreconditionError("lm = " + fmt(l * m) + " is not below 1");
  CompositionCertificate cert;
  cert.theorem = Theorem::MainConst;
  cert.constants = k;
  cert.rate = 1.0 / l - m;
  check_same_grid(f1.source_ptr(), f2.source_ptr(), "F1 and F2 must share X");
  const std::size_t xi = f1.source().index_of(a.x);
  const std::size_t y1 = f1.target().index_of(a.y1);
  const std::size_t y2 = f2.target().index_of(a.y2);
  if (!f1.contains(xi, y1)) throw PreconditionError("(x, y1) is not on Gr F1");
  if (!f2.contains(xi, y2)) throw PreconditionError("(x, y2) is not on Gr F2");

  const double eps = cfg.epsilon;
  cert.epsilon_used = eps;
  {
    const double L = 1.0 / l, S = L + m;
    const double alpha = std::min(cfg.radius_u, cfg.radius_v);
    cert.epsilon_formula = std::min({alpha, alpha / L, alpha / m, alpha / S,
                                     alpha / (2 * L), alpha / (2 * m), alpha / (2 * S)});
  }
  const auto& eo = opt.estimate;
  cert.hypotheses.push_back(closed_graphs());
  cert.hypotheses.push_back(
      plain_hypothesis("F1_regular_l", f1, a.x, a.y1, cfg, l, ModulusKind::Reg, eo));
  cert.hypotheses.push_back(
      plain_hypothesis("F2_lipschitz_like_m", f2, a.x, a.y2, cfg, m, ModulusKind::Lip, eo));
  if (!hypotheses_ok(cert)) {
    finish(cert);
    return cert;
  }

  const MultiMap kmap = difference(f1, f2, diff);
  const auto rhos = rhos_up_to(cfg.rho_grid, eps);
  const PointSet xs = ball(f1.source_ptr(), a.x, eps);
  const PointSet ys = ball(f1.target_ptr(), a.y1, eps);
  const PointSet zs = ball(f2.target_ptr(), a.y2, eps);
  std::map<std::pair<std::size_t, std::size_t>, std::vector<Point>> anchors;
  Point d(kmap.target().dim());
  for (auto x : xs.members()) {
    for (auto y : f1.row(x)) {
      if (!ys.contains(y)) continue;
      for (auto z : f2.row(x)) {
        if (!zs.contains(z)) continue;
        const auto& py = f1.target().point(y);
        const auto& pz = f2.target().point(z);
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = py[i] - pz[i];
        anchors.emplace(std::pair{x, kmap.target().index_of(d)},
                        std::vector<Point>{py, pz});
      }
    }
  }
  std::vector<Check> checks;
  for (const auto& [xw, via] : anchors) {
    for (double rho : rhos) checks.push_back({"around", xw.first, xw.second, via, rho, cert.rate});
  }
  sweep(kmap, checks, cert, opt.fail_fast);
  finish(cert);
  return cert;
}

// -------------------------------------------------------- Lyusternik-Graves

namespace {

HypothesisResult every_point_open(std::string name, const MultiMap& f,
                                  const NeighborhoodConfig& cfg, double claimed,
                                  const EstimateOptions& eo) {
  std::optional<HypothesisResult> worst;
  for (const auto& [x, y] : f.graph()) {
    const Point& px = f.source().point(x);
    const Point& py = f.target().point(y);
    auto r = estimate_plop_at(f, px, py, cfg, eo);
    auto h = validate_constant(name, r, claimed, [&](double l) {
      return constant_feasible(ModulusKind::Plop, f, px, py, cfg, l);
    });
    if (!h.passed) {
      h.note = "fails at a graph point; " + h.note;
      return h;
    }
    if (!worst || r.lo < worst->report->lo) worst = h;
  }
  if (!worst) {
    HypothesisResult h;
    h.name = std::move(name);
    h.claimed = claimed;
    h.passed = true;
    h.note = "empty graph";
    return h;
  }
  worst->note = "weakest graph point reported";
  return *worst;
}

}  // namespace

CompositionCertificate certify_lyusternik_graves(
    const MultiMap& f, const MultiMap& g, const RateConstants& k,
    const NeighborhoodConfig& cfg, bool symmetric, SpacePtr diff,
    SpacePtr diff_symmetric, const CertifyOptions& opt) {
  cfg.validate();
  const double L = need_positive(k.L, "L");
  const double M = need_positive(k.M, "M");
  if (!(L * M > 1.0)) throw PreconditionError("LM = " + fmt(L * M) + " is not above 1");
  check_same_grid(g.source_ptr(), f.target_ptr(), "G must map F's target");
  check_same_grid(g.target_ptr(), f.source_ptr(), "G must map into F's source");
  CompositionCertificate cert;
  cert.theorem = Theorem::LyusternikGraves;
  cert.constants = k;
  cert.rate = L - 1.0 / M;
  cert.epsilon_used = cfg.epsilon;

  const MultiMap ginv = inverse(g);
  const MultiMap kmap = difference(f, ginv, diff);
  if (kmap.graph().empty()) throw PreconditionError("Dom(F - G^-1) is empty on the grid");

  const auto& eo = opt.estimate;
  cert.hypotheses.push_back(closed_graphs());
  cert.hypotheses.push_back(every_point_open("F_open_at_every_point_L", f, cfg, L, eo));
  cert.hypotheses.push_back(every_point_open("G_open_at_every_point_M", g, cfg, M, eo));
  if (!hypotheses_ok(cert)) {
    finish(cert);
    return cert;
  }

  std::vector<Check> checks;
  for (const auto& [x, w] : kmap.graph()) {
    for (double rho : cfg.rho_grid) checks.push_back({"graph", x, w, {}, rho, cert.rate});
  }
  sweep(kmap, checks, cert, opt.fail_fast);

  if (symmetric) {
    cert.symmetric_rate = M - 1.0 / L;
    const MultiMap ksym = difference(g, inverse(f), diff_symmetric);
    std::vector<Check> sym;
    for (const auto& [y, v] : ksym.graph()) {
      for (double rho : cfg.rho_grid) {
        sym.push_back({"graph_symmetric", y, v, {}, rho, *cert.symmetric_rate, true});
      }
    }
    sweep(ksym, sym, cert, opt.fail_fast);
  }
  finish(cert);
  return cert;
}

}  // namespace setreg
