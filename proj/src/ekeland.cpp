#include "setreg/ekeland.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "setreg/parallel.hpp"

namespace setreg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTol = 1e-12;

}  // namespace

PerturbationNorm grid_norm(SpacePtr space, double scale) {
  std::ostringstream os;
  os << scale << " * " << to_string(space->blocks().front().norm);
  return {os.str(), [space, scale](PointView a, PointView b) {
            return scale * space->distance(a, b);
          }};
}

double ScaledMaxNorm::operator()(PointView a, PointView b) const {
  const double lc = L * C, md = M * D;
  std::size_t off = 0;
  auto next = [&](const SpacePtr& s) {
    const double d = s->distance(a.subspan(off, s->dim()), b.subspan(off, s->dim()));
    off += s->dim();
    return d;
  };
  const double dp = next(x);
  const double dq = next(y);
  const double dr = next(z);
  const double ds = next(w);
  double m = std::max(dp, dq / L);
  m = std::max(m, M > 0.0 ? dr / M : (dr > 0.0 ? kInf : 0.0));
  m = std::max(m, ds / (lc + md));
  return tau * (lc - md) * m;
}

PerturbationNorm ScaledMaxNorm::handle() const {
  std::ostringstream os;
  os.precision(17);
  os << "scaled_max(tau=" << tau << ", L=" << L << ", M=" << M << ", C=" << C
     << ", D=" << D << ")";
  const ScaledMaxNorm self = *this;
  return {os.str(), [self](PointView a, PointView b) { return self(a, b); }};
}

EkelandPoint ekeland_point(const std::vector<Point>& domain,
                           const std::vector<double>& h, PointView reference,
                           const PerturbationNorm& norm) {
  if (domain.empty()) throw PreconditionError("EVP domain is empty");
  if (h.size() != domain.size()) throw DimensionError("h must have one value per domain point");
  for (double v : h) {
    if (!std::isfinite(v) || v < 0.0) {
      throw PreconditionError("h must be finite and nonnegative on the domain");
    }
  }
  std::optional<std::size_t> ref;
  for (std::size_t i = 0; i < domain.size() && !ref; ++i) {
    if (std::equal(domain[i].begin(), domain[i].end(), reference.begin(), reference.end())) {
      ref = i;
    }
  }
  if (!ref) throw PreconditionError("reference is not in the EVP domain");

  // Lexicographic rank for tie-breaking.
  std::vector<std::size_t> order(domain.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return domain[a] < domain[b]; });
  std::vector<std::size_t> rank(domain.size());
  for (std::size_t r = 0; r < order.size(); ++r) rank[order[r]] = r;

  EkelandPoint out;
  out.reference = Point(reference.begin(), reference.end());
  out.norm = norm.name;
  std::size_t cur = *ref;
  out.trace.push_back({domain[cur], h[cur]});
  std::vector<char> improving(domain.size());
  while (true) {
    parallel::for_each_index(domain.size(), [&](std::size_t i) {
      improving[i] = h[i] + norm.distance(domain[cur], domain[i]) < h[cur] - kTol;
    });
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < domain.size(); ++i) {
      if (!improving[i]) continue;
      if (!best || h[i] < h[*best] || (h[i] == h[*best] && rank[i] < rank[*best])) best = i;
    }
    if (!best) break;
    cur = *best;
    ++out.iterations;
    out.trace.push_back({domain[cur], h[cur]});
  }
  out.point = domain[cur];
  out.value = h[cur];

  out.ek1 = h[cur] <= h[*ref] - norm.distance(domain[cur], domain[*ref]) + kTol;
  std::vector<char> ok(domain.size());
  parallel::for_each_index(domain.size(), [&](std::size_t i) {
    ok[i] = h[cur] <= h[i] + norm.distance(domain[cur], domain[i]) + kTol;
  });
  out.ek2 = std::all_of(ok.begin(), ok.end(), [](char c) { return c != 0; });
  return out;
}

std::string to_string(SolveOutcome o) {
  return o == SolveOutcome::Success ? "SUCCESS" : "DISCRETIZATION_GAP";
}

SolveResult solve_inclusion(const MultiMap& f1, const MultiMap& f2,
                            const BiMultiMap& g, const OpCompAnchor& a,
                            const RateConstants& k, PointView u,
                            const NeighborhoodConfig& cfg,
                            const SolveOptions& opt) {
  SolveResult res;
  if (opt.check_hypotheses) {
    res.hypotheses = op_comp_hypotheses(f1, f2, g, a, k, cfg, opt.estimate);
    for (const auto& hyp : res.hypotheses) {
      if (!hyp.passed) throw PreconditionError("hypothesis " + hyp.name + " is refuted");
    }
  }
  const double L = k.L.value_or(0.0), M = k.M.value_or(0.0);
  const double C = k.C.value_or(0.0), D = k.D.value_or(0.0);
  if (!(L > 0.0) || !(M > 0.0) || !(C > 0.0) || !(D >= 0.0)) {
    throw PreconditionError("L, M, C must be positive and D nonnegative");
  }
  res.rate = L * C - M * D;
  if (!(res.rate > 0.0)) throw PreconditionError("LC - MD is not positive");
  const std::size_t xi = f1.source().index_of(a.x);
  const std::size_t yi = f1.target().index_of(a.y);
  const std::size_t zi = f2.target().index_of(a.z);
  const std::size_t wi = g.target().index_of(a.w);
  if (!f1.contains(xi, yi) || !f2.contains(xi, zi) || !g.contains(yi, zi, wi)) {
    throw PreconditionError("anchor is not an incidence of F1, F2 and G");
  }

  const GridSpace& W = g.target();
  W.check_dim(u);
  res.u = Point(u.begin(), u.end());
  const double gap = W.distance(u, a.w);
  if (opt.rho) {
    res.rho = *opt.rho;
  } else {
    std::optional<double> pick;
    for (double r : cfg.rho_grid) {
      if (gap < res.rate * r - kOpenBallSlack) {
        pick = r;
        break;
      }
    }
    if (!pick) throw PreconditionError("u is outside every swept rate ball around w̄");
    res.rho = *pick;
  }
  if (!(res.rho > 0.0) || !(gap < res.rate * res.rho - kOpenBallSlack)) {
    throw PreconditionError("u is outside B(w̄, (LC - MD) rho)");
  }
  res.tau = opt.tau.value_or((1.0 + gap / (res.rate * res.rho)) / 2.0);
  if (!(res.tau > 0.0) || !(res.tau < 1.0)) throw PreconditionError("tau must lie in (0, 1)");

  // Ω ∩ cl A.
  const double rho = res.rho;
  const PointSet xs = ball(f1.source_ptr(), a.x, rho, BallKind::Closed);
  const PointSet ys = ball(f1.target_ptr(), a.y, L * rho, BallKind::Closed);
  const PointSet zs = ball(f2.target_ptr(), a.z, M * rho, BallKind::Closed);
  const PointSet ws = ball(g.target_ptr(), a.w, (L * C + M * D) * rho, BallKind::Closed);
  std::vector<Point> domain;
  std::vector<double> hv;
  for (auto x : xs.members()) {
    for (auto y : f1.row(x)) {
      if (!ys.contains(y)) continue;
      for (auto z : f2.row(x)) {
        if (!zs.contains(z)) continue;
        for (auto w : g.image(y, z)) {
          if (!ws.contains(w)) continue;
          Point p = f1.source().point(x);
          for (double v : f1.target().point(y)) p.push_back(v);
          for (double v : f2.target().point(z)) p.push_back(v);
          for (double v : W.point(w)) p.push_back(v);
          domain.push_back(std::move(p));
          hv.push_back(W.distance(u, W.point(w)));
        }
      }
    }
  }
  res.domain_size = domain.size();

  ScaledMaxNorm norm{res.tau, L, M, C, D, f1.source_ptr(), f1.target_ptr(),
                     f2.target_ptr(), g.target_ptr()};
  Point ref = f1.source().point(xi);
  for (double v : f1.target().point(yi)) ref.push_back(v);
  for (double v : f2.target().point(zi)) ref.push_back(v);
  for (double v : W.point(wi)) ref.push_back(v);
  res.evp = ekeland_point(domain, hv, ref, norm.handle());

  const std::size_t dx = f1.source().dim();
  res.x = Point(res.evp.point.begin(), res.evp.point.begin() + dx);
  res.residual = res.evp.value;
  if (res.residual <= kTol) {
    res.outcome = SolveOutcome::Success;
    const MultiMap h = compose_g(f1, f2, g);
    const auto hit = W.find(u);
    res.certified = hit && h.contains(f1.source().index_of(res.x), *hit) &&
                    f1.source().distance(res.x, a.x) < rho - kOpenBallSlack;
  } else {
    res.outcome = SolveOutcome::DiscretizationGap;
  }
  return res;
}

}  // namespace setreg
