#include <cmath>
#include <random>

#include "doctest.h"
#include "oracle.hpp"
#include "setreg/ekeland.hpp"

using namespace setreg;

namespace {

NeighborhoodConfig cfg(double ru, double rv, double eps, std::vector<double> rho) {
  NeighborhoodConfig c;
  c.radius_u = ru;
  c.radius_v = rv;
  c.epsilon = eps;
  c.rho_grid = std::move(rho);
  return c;
}

// F1 = 2x, F2 = x, G = y - z, so H is the identity; X and W share `step`.
struct Identity {
  SpacePtr x, y, w;
  MultiMap f1, f2;
  BiMultiMap g;
  RateConstants k;

  explicit Identity(double step)
      : x(line_space("X", -2, 2, step)),
        y(line_space("Y", -4, 4, 2 * step)),
        w(line_space("W", -3, 3, step)),
        f1(from_linear(Matrix(1, 1, {2.0}), x, y)),
        f2(identity_map(x)),
        g(from_function(y, x, w,
                        [](const Point& a, const Point& b) { return Point{a[0] - b[0]}; },
                        OffGridPolicy::Drop)) {
    k.L = 2;
    k.M = 1;
    k.C = 1;
    k.D = 1;
  }

  NeighborhoodConfig hyp() const { return cfg(0.8, 0.8, 0.8, {x->min_spacing()}); }
};

// Independent re-check of both conclusions.
void oracle_evp(const std::vector<Point>& dom, const std::vector<double>& h,
                std::size_t ref, const EkelandPoint& e,
                const std::function<double(const Point&, const Point&)>& d) {
  CHECK(e.value <= h[ref] - d(e.point, dom[ref]) + 1e-12);
  for (std::size_t i = 0; i < dom.size(); ++i) {
    CHECK(e.value <= h[i] + d(e.point, dom[i]) + 1e-12);
  }
  CHECK(e.iterations <= dom.size());
  CHECK(e.trace.size() == e.iterations + 1);
  for (std::size_t i = 1; i < e.trace.size(); ++i) {
    CHECK(e.trace[i].second < e.trace[i - 1].second);
  }
}

}  // namespace

TEST_CASE("EVP two-point example flips at scale 1") {
  auto s = line_space("S", 0, 1, 1);
  const std::vector<Point> dom{{0}, {1}};
  const std::vector<double> h{1.0, 0.0};
  auto low = ekeland_point(dom, h, Point{0}, grid_norm(s, 0.5));
  CHECK(low.point == Point{1});
  CHECK(low.iterations == 1);
  auto high = ekeland_point(dom, h, Point{0}, grid_norm(s, 2.0));
  CHECK(high.point == Point{0});
  auto edge = ekeland_point(dom, h, Point{0}, grid_norm(s, 1.0));
  CHECK(edge.point == Point{0});
  CHECK(edge.ek1);
  CHECK(edge.ek2);
  CHECK(ekeland_point(dom, h, Point{0}, grid_norm(s, 0.999)).point == Point{1});
}

TEST_CASE("EVP stays at a minimizer and on constant h") {
  auto s = line_space("S", 0, 1, 0.25);
  std::vector<Point> dom;
  for (double v : oracle::line(0, 1, 0.25)) dom.push_back({v});
  auto m = ekeland_point(dom, {0.5, 0.0, 0.3, 0.4, 0.9}, Point{0.25}, grid_norm(s));
  CHECK(m.point == Point{0.25});
  CHECK(m.iterations == 0);
  auto c = ekeland_point(dom, std::vector<double>(5, 0.7), Point{0.75}, grid_norm(s, 0.01));
  CHECK(c.point == Point{0.75});
  CHECK(c.ek1);
  CHECK(c.ek2);
}

TEST_CASE("EVP property: random domains re-validate against an oracle") {
  std::mt19937 rng(20261017);
  std::uniform_real_distribution<double> val(0.0, 3.0);
  std::uniform_real_distribution<double> scale(0.05, 3.0);
  auto plane = lattice_space("P", {{-1, 1, 0.25}, {-1, 1, 0.25}}, Norm::Max);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<Point> dom;
    std::vector<double> h;
    for (const auto& p : plane->points()) {
      if (rng() % 3 == 0) continue;
      dom.push_back(p);
      h.push_back(std::round(val(rng) * 4) / 4);  // ties on purpose
    }
    const std::size_t ref = rng() % dom.size();
    const double sc = scale(rng);
    auto e = ekeland_point(dom, h, dom[ref], grid_norm(plane, sc));
    CHECK(e.ek1);
    CHECK(e.ek2);
    oracle_evp(dom, h, ref, e, [&](const Point& a, const Point& b) {
      return sc * std::max(std::abs(a[0] - b[0]), std::abs(a[1] - b[1]));
    });
  }
}

TEST_CASE("EVP preconditions") {
  auto s = line_space("S", 0, 1, 1);
  CHECK_THROWS_AS(ekeland_point({}, {}, Point{0}, grid_norm(s)), PreconditionError);
  CHECK_THROWS_AS(ekeland_point({{0}, {1}}, {1.0, -0.5}, Point{0}, grid_norm(s)),
                  PreconditionError);
  CHECK_THROWS_AS(ekeland_point({{0}, {1}}, {1.0}, Point{0}, grid_norm(s)), DimensionError);
  CHECK_THROWS_AS(ekeland_point({{0}, {1}}, {1.0, 0.0}, Point{0.5}, grid_norm(s)),
                  PreconditionError);
}

TEST_CASE("scaled max norm weights") {
  auto a = line_space("A", -1, 1, 0.1);
  ScaledMaxNorm n{0.5, 2.0, 1.0, 1.0, 1.0, a, a, a, a};
  // tau (LC - MD) = 0.5; blocks weighted 1, 1/2, 1, 1/3.
  CHECK(n(Point{0, 0, 0, 0}, Point{0.1, 0, 0, 0}) == doctest::Approx(0.05));
  CHECK(n(Point{0, 0, 0, 0}, Point{0, 0.4, 0, 0}) == doctest::Approx(0.1));
  CHECK(n(Point{0, 0, 0, 0}, Point{0, 0, 0, 0.9}) == doctest::Approx(0.15));
  CHECK(n(Point{0, 0, 0, 0}, Point{0.1, 0.4, 0.3, 0.9}) == doctest::Approx(0.15));
  CHECK(n(Point{0.2, 0, 0, 0}, Point{0.2, 0, 0, 0}) == 0.0);
}

TEST_CASE("solve: identity composition returns x = u") {
  Identity t(0.1);
  auto r = solve_inclusion(t.f1, t.f2, t.g, {{0}, {0}, {0}, {0}}, t.k, Point{0.3}, t.hyp(),
                           {.rho = 0.5});
  CHECK(r.outcome == SolveOutcome::Success);
  CHECK(r.x[0] == doctest::Approx(0.3));
  CHECK(r.residual == 0.0);
  CHECK(r.certified);
  CHECK(r.evp.ek1);
  CHECK(r.evp.ek2);
  CHECK(r.tau == doctest::Approx(0.8));
  CHECK(r.hypotheses.size() == 5);

  auto same = solve_inclusion(t.f1, t.f2, t.g, {{0}, {0}, {0}, {0}}, t.k, Point{0}, t.hyp(),
                              {.rho = 0.5});
  CHECK(same.x == Point{0});
  CHECK(same.evp.iterations == 0);
}

TEST_CASE("solve: twenty lattice targets in the rate ball") {
  Identity t(0.1);
  int solved = 0;
  for (double u : oracle::line(-1.0, 0.9, 0.1)) {
    auto r = solve_inclusion(t.f1, t.f2, t.g, {{0}, {0}, {0}, {0}}, t.k, Point{u}, t.hyp(),
                             {.rho = 1.05, .check_hypotheses = solved == 0});
    CHECK(r.outcome == SolveOutcome::Success);
    CHECK(r.x[0] == doctest::Approx(u));
    CHECK(r.residual == 0.0);
    CHECK(r.certified);
    CHECK(r.evp.iterations <= r.domain_size);
    ++solved;
  }
  CHECK(solved == 20);
}

TEST_CASE("solve: coarse grid reports a discretization gap") {
  Identity t(0.2);
  auto r = solve_inclusion(t.f1, t.f2, t.g, {{0}, {0}, {0}, {0}}, t.k, Point{0.3}, t.hyp(),
                           {.rho = 0.5});
  CHECK(r.outcome == SolveOutcome::DiscretizationGap);
  CHECK(r.residual <= 0.2);
  CHECK(r.residual == doctest::Approx(0.1));
  CHECK_FALSE(r.certified);
  CHECK(r.evp.ek2);

  // Refining the grid closes the gap for the same target.
  Identity fine(0.05);
  auto f = solve_inclusion(fine.f1, fine.f2, fine.g, {{0}, {0}, {0}, {0}}, fine.k, Point{0.3},
                           fine.hyp(), {.rho = 0.5});
  CHECK(f.outcome == SolveOutcome::Success);
  CHECK(f.x[0] == doctest::Approx(0.3));
}

TEST_CASE("solve: preconditions") {
  Identity t(0.1);
  CHECK_THROWS_AS(solve_inclusion(t.f1, t.f2, t.g, {{0}, {0}, {0}, {0}}, t.k, Point{0.6},
                                  t.hyp(), {.rho = 0.5}),
                  PreconditionError);
  CHECK_THROWS_AS(solve_inclusion(t.f1, t.f2, t.g, {{0}, {0}, {0}, {0}}, t.k, Point{0.3},
                                  t.hyp(), {.rho = 0.5, .tau = 1.0}),
                  PreconditionError);
  // Default rho picks the least swept radius whose ball holds u.
  auto c = cfg(0.8, 0.8, 0.8, {0.1, 0.2, 0.4, 0.8});
  auto r = solve_inclusion(t.f1, t.f2, t.g, {{0}, {0}, {0}, {0}}, t.k, Point{0.3}, c,
                           {.check_hypotheses = false});
  CHECK(r.rho == 0.4);
  CHECK(r.outcome == SolveOutcome::Success);

  RateConstants wrong = t.k;
  wrong.L = 3;
  CHECK_THROWS_AS(solve_inclusion(t.f1, t.f2, t.g, {{0}, {0}, {0}, {0}}, wrong, Point{0.3},
                                  t.hyp(), {.rho = 0.5}),
                  PreconditionError);
}
