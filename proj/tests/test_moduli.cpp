#include <cmath>

#include "doctest.h"
#include "oracle.hpp"
#include "setreg/moduli.hpp"

using namespace setreg;

namespace {

NeighborhoodConfig cfg(double ru, double rv, std::vector<double> rho) {
  NeighborhoodConfig c;
  c.radius_u = ru;
  c.radius_v = rv;
  c.epsilon = rho.back();
  c.rho_grid = std::move(rho);
  return c;
}

struct Linear2x {
  SpacePtr x = line_space("X", -1, 1, 0.1);
  SpacePtr y = line_space("Y", -2, 2, 0.2);
  MultiMap f = from_linear(Matrix(1, 1, {2.0}), x, y);
  oracle::Rel rel = oracle::sample(oracle::line(-1, 1, 0.1),
                                   oracle::line(-2, 2, 0.2),
                                   [](double v) { return 2 * v; });
};

void check_sound(const ModulusReport& r, const MultiMap& f) {
  const Point& x = r.ref_x;
  const Point& y = r.ref_y;
  if (r.direction() == Direction::Sup) {
    if (r.lo.is_finite()) CHECK(constant_feasible(r.kind, f, x, y, r.config, r.lo.value()));
    if (r.hi.is_finite()) {
      REQUIRE(r.witness.has_value());
      CHECK(witness_refutes(r, f, r.hi.value()));
      CHECK_FALSE(constant_feasible(r.kind, f, x, y, r.config, r.hi.value()));
    }
  } else {
    if (r.hi.is_finite()) CHECK(constant_feasible(r.kind, f, x, y, r.config, r.hi.value()));
    if (r.witness && r.lo.is_finite()) {
      CHECK(witness_refutes(r, f, r.lo.value()));
      CHECK_FALSE(constant_feasible(r.kind, f, x, y, r.config, r.lo.value()));
    }
  }
}

}  // namespace

TEST_CASE("2x on steps 0.1 / 0.2 matches the brute-force oracle") {
  Linear2x m;
  auto c = cfg(0.5, 1.0, {0.1, 0.2});
  const std::vector<double> rhos{0.1, 0.2};

  const double lop_o = oracle::lop(m.rel, 0, 0, 0.5, 1.0, rhos);
  const double lip_o = oracle::lip(m.rel, 0, 0, 0.5, 1.0);
  const double reg_o = oracle::reg(m.rel, 0, 0, 0.5, 1.0);
  CHECK(lop_o == doctest::Approx(2.0));
  CHECK(lip_o == doctest::Approx(2.0));
  CHECK(reg_o == doctest::Approx(0.5));

  auto lop = estimate_lop_around(m.f, Point{0}, Point{0}, c);
  auto lip = estimate_lip_around(m.f, Point{0}, Point{0}, c);
  auto reg = estimate_reg_around(m.f, Point{0}, Point{0}, c);
  CHECK(lop.contains(lop_o, 1e-12));
  CHECK(lip.contains(lip_o, 1e-12));
  CHECK(reg.contains(reg_o, 1e-12));
  for (const auto* r : {&lop, &lip, &reg}) {
    CHECK(r->width() <= 1e-6);
    check_sound(*r, m.f);
  }
}

TEST_CASE("off-lattice rho is measured at grid level") {
  Linear2x m;
  auto c = cfg(0.5, 1.0, {0.125, 0.25});
  const double want = oracle::lop(m.rel, 0, 0, 0.5, 1.0, {0.125, 0.25});
  auto lop = estimate_lop_around(m.f, Point{0}, Point{0}, c);
  CHECK(lop.contains(want, 1e-12));
  CHECK(want == doctest::Approx(2.4));
  check_sound(lop, m.f);
}

TEST_CASE("identity has all six moduli equal to one") {
  auto x = line_space("X", -1, 1, 0.1);
  auto f = identity_map(x);
  auto c = cfg(0.5, 0.5, {0.1, 0.2, 0.3});
  for (auto kind : {ModulusKind::Lop, ModulusKind::Lip, ModulusKind::Reg,
                    ModulusKind::Plop, ModulusKind::Psdclm, ModulusKind::Hemreg}) {
    auto r = estimate(kind, f, Point{0}, Point{0}, c);
    CHECK_MESSAGE(r.contains(1.0, 1e-12), to_string(kind));
    check_sound(r, f);
  }
}

TEST_CASE("constant map: openness is only the grid spacing over rho") {
  auto x = line_space("X", -1, 1, 0.1);
  auto f = from_function(x, x, [](const Point&) { return Point{0.0}; });
  auto c = cfg(0.5, 0.5, {0.1, 0.2});
  auto r = estimate_lop_around(f, Point{0}, Point{0}, c);
  CHECK(r.contains(0.1 / 0.2, 1e-12));
  REQUIRE(r.witness.has_value());
  check_sound(r, f);
  auto reg = estimate_reg_around(f, Point{0}, Point{0}, c);
  CHECK(reg.hi.is_infinite());
  CHECK(reg.witness.has_value());
}

TEST_CASE("empty image makes the Lipschitz bound infinite") {
  auto x = line_space("X", -1, 1, 0.5);
  auto f = from_pairs(x, x, {{{0}, {0}}, {{-0.5}, {-0.5}}});
  auto r = estimate_lip_around(f, Point{0}, Point{0}, cfg(0.75, 0.75, {0.5}));
  CHECK(r.lo.is_infinite());
  CHECK(r.hi.is_infinite());
  REQUIRE(r.witness.has_value());
  CHECK(r.witness->lhs.is_infinite());
  CHECK(witness_refutes(r, f, 1e9));
}

TEST_CASE("empty preimage makes the regularity bound infinite") {
  auto x = line_space("X", -1, 1, 0.5);
  auto f = from_pairs(x, x, {{{0}, {0}}, {{0.5}, {0}}});
  auto r = estimate_reg_around(f, Point{0}, Point{0}, cfg(0.75, 0.75, {0.5}));
  CHECK(r.hi.is_infinite());
  CHECK(witness_refutes(r, f, 1e9));
}

TEST_CASE("plateau map separates at-point and around-point openness") {
  auto x = line_space("X", -1, 1, 0.1);
  auto f = from_function(x, x, [](const Point& p) {
    return Point{p[0] <= 1e-12 ? p[0] : 0.1};
  });
  auto c = cfg(0.35, 0.35, {0.1, 0.2});
  auto plop = estimate_plop_at(f, Point{0}, Point{0}, c);
  auto lop = estimate_lop_around(f, Point{0}, Point{0}, c);
  CHECK(plop.contains(1.0, 1e-12));
  CHECK(lop.lo.value() <= 0.5);
  CHECK(lop.hi < plop.lo);
  check_sound(plop, f);
  check_sound(lop, f);
}

TEST_CASE("|x| is punctually open and pseudocalm-inverse at the origin") {
  auto x = line_space("X", -1, 1, 0.1);
  auto y = line_space("Y", 0, 1, 0.1);
  auto f = from_function(x, y, [](const Point& p) { return Point{std::abs(p[0])}; });
  auto c = cfg(0.35, 0.35, {0.1, 0.2});
  auto eq = check_equivalence_at(f, Point{0}, Point{0}, c);
  CHECK(eq.reports[0].contains(1.0, 1e-12));
  CHECK(eq.reports[1].contains(1.0, 1e-12));
  CHECK(eq.agree);
}

TEST_CASE("pseudocalmness of the inverse of 2x") {
  Linear2x m;
  auto r = estimate_psdclm_at(inverse(m.f), Point{0}, Point{0}, cfg(1.0, 0.5, {0.2}));
  CHECK(r.contains(0.5, 1e-12));
  check_sound(r, inverse(m.f));
}

TEST_CASE("equivalence around and at for 2x") {
  Linear2x m;
  auto c = cfg(0.5, 1.0, {0.1, 0.2});
  auto around = check_equivalence_around(m.f, Point{0}, Point{0}, c);
  CHECK(around.agree);
  CHECK(around.reports[0].contains(2.0));
  CHECK(around.reports[2].contains(0.5));
  auto at = check_equivalence_at(m.f, Point{0}, Point{0}, c);
  CHECK(at.agree);
  CHECK(at.reports[0].contains(2.0));
  CHECK(at.reports[1].contains(0.5));
  CHECK(at.reports[2].contains(0.5));
}

TEST_CASE("equivalence for x -> (x, 2x) into an l1 target") {
  auto x = line_space("X", -1, 1, 0.1);
  std::vector<Point> line;
  for (const auto& p : x->points()) line.push_back({p[0], 2 * p[0]});
  auto y = make_space("Y", line, Norm::Sum);
  auto f = from_linear(Matrix(2, 1, {1.0, 2.0}), x, y);
  auto c = cfg(0.5, 1.5, {0.1, 0.2});
  auto eq = check_equivalence_around(f, Point{0}, Point{0, 0}, c);
  CHECK(eq.agree);
  CHECK(eq.reports[0].contains(3.0));

  // On the full planar lattice the map is not onto a neighborhood.
  auto plane = lattice_space("P", {{-1, 1, 0.1}, {-2, 2, 0.1}}, Norm::Sum);
  auto g = from_linear(Matrix(2, 1, {1.0, 2.0}), x, plane);
  CHECK(estimate_reg_around(g, Point{0}, Point{0, 0}, c).hi.is_infinite());
}

TEST_CASE("partial moduli of H(x, p) = 2x - p") {
  auto x = line_space("X", -1, 1, 0.05);
  auto p = line_space("P", -1, 1, 0.1);
  auto y = line_space("Y", -3, 3, 0.1);
  auto h = from_function(x, p, y, [](const Point& a, const Point& b) {
    return Point{2 * a[0] - b[0]};
  });
  NeighborhoodConfig c = cfg(0.3, 0.6, {0.05, 0.1});
  c.radius_w = 0.3;
  auto lop_x = estimate_partial(h, ModulusKind::LopX, Point{0}, Point{0}, Point{0}, c);
  auto lip_p = estimate_partial(h, ModulusKind::LipP, Point{0}, Point{0}, Point{0}, c);
  auto lip_x = estimate_partial(h, ModulusKind::LipX, Point{0}, Point{0}, Point{0}, c);
  NeighborhoodConfig cp = c;
  cp.rho_grid = {0.1, 0.2};
  cp.epsilon = 0.2;
  auto lop_p = estimate_partial(h, ModulusKind::LopP, Point{0}, Point{0}, Point{0}, cp);
  CHECK(lop_x.contains(2.0, 1e-12));
  CHECK(lip_p.contains(1.0, 1e-12));
  CHECK(lip_x.contains(2.0, 1e-12));
  CHECK(lop_p.contains(1.0, 1e-12));
  for (const auto* r : {&lop_x, &lip_p, &lip_x, &lop_p}) {
    if (r->direction() == Direction::Sup) {
      CHECK(constant_feasible(h, r->kind, Point{0}, Point{0}, Point{0}, r->config, r->lo.value()));
      CHECK(witness_refutes(*r, h, r->hi.value()));
    } else {
      CHECK(constant_feasible(h, r->kind, Point{0}, Point{0}, Point{0}, r->config, r->hi.value()));
      CHECK(witness_refutes(*r, h, r->lo.value()));
    }
  }
}

TEST_CASE("p-independent parametric map has the plain moduli") {
  auto x = line_space("X", -1, 1, 0.1);
  auto p = line_space("P", -1, 1, 0.5);
  auto y = line_space("Y", -2, 2, 0.2);
  auto h = from_function(x, p, y, [](const Point& a, const Point&) {
    return Point{2 * a[0]};
  });
  NeighborhoodConfig c = cfg(0.5, 1.0, {0.1, 0.2});
  c.radius_w = 0.8;
  auto f = slice_param(h, Point{0});
  auto a = estimate_partial(h, ModulusKind::RegX, Point{0}, Point{0}, Point{0}, c);
  auto b = estimate_reg_around(f, Point{0}, Point{0}, c);
  CHECK(a.lo == b.lo);
  CHECK(a.hi == b.hi);
}

TEST_CASE("linear_operator_moduli") {
  auto i = linear_operator_moduli(Matrix(2, 2, {1, 0, 0, 1}));
  CHECK(i.surjective);
  CHECK(i.lop.value() == doctest::Approx(1.0));
  CHECK(i.reg.value() == doctest::Approx(1.0));
  auto two = linear_operator_moduli(Matrix(1, 1, {2}));
  CHECK(two.reg.value() == doctest::Approx(0.5));
  CHECK(two.lop.value() == doctest::Approx(2.0));
  auto wide = linear_operator_moduli(Matrix(1, 2, {1, 0}));
  CHECK(wide.surjective);
  CHECK(wide.lop.value() == doctest::Approx(1.0));
  auto tall = linear_operator_moduli(Matrix(2, 1, {1, 2}));
  CHECK_FALSE(tall.surjective);
  CHECK(tall.reg.is_infinite());
  CHECK(tall.lop == ExtReal(0.0));
  auto d = linear_operator_moduli(Matrix(2, 2, {2, 0, 0, 0.5}));
  CHECK(d.lop.value() == doctest::Approx(0.5));
  CHECK(d.reg.value() == doctest::Approx(2.0));
}

TEST_CASE("shrinking neighborhoods is monotone") {
  Linear2x m;
  auto f = from_function(m.x, m.y, [](const Point& p) {
    return Point{std::round(2 * p[0] * p[0] * 5) / 5};
  });
  auto big = cfg(0.8, 1.5, {0.1, 0.2});
  auto small = cfg(0.4, 0.7, {0.1, 0.2});
  auto lop_big = estimate_lop_around(f, Point{0}, Point{0}, big);
  auto lop_small = estimate_lop_around(f, Point{0}, Point{0}, small);
  CHECK(lop_small.lo >= lop_big.lo);
  auto lip_big = estimate_lip_around(f, Point{0}, Point{0}, big);
  auto lip_small = estimate_lip_around(f, Point{0}, Point{0}, small);
  CHECK(lip_small.hi <= lip_big.hi);
}

TEST_CASE("config validation") {
  auto c = cfg(0.5, 0.5, {0.2, 0.1});
  CHECK_THROWS(c.validate());
  c = cfg(0.5, 0.5, {0.1});
  c.epsilon = 0.05;
  CHECK_THROWS(c.validate());
  Linear2x m;
  CHECK_THROWS_AS(estimate_lop_around(m.f, Point{0}, Point{0.2}, cfg(1, 1, {0.1})),
                  PreconditionError);
  auto d = NeighborhoodConfig::defaults(*m.x, *m.y);
  CHECK(d.radius_u == doctest::Approx(0.5));
  CHECK(d.epsilon == doctest::Approx(0.25));
  CHECK(d.rho_grid.size() == 8);
  CHECK_NOTHROW(d.validate());
}
