#include <cmath>

#include "doctest.h"
#include "oracle.hpp"
#include "setreg/coincidence.hpp"
#include "setreg/implicit.hpp"

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

MultiMap constant(SpacePtr x, SpacePtr y, std::vector<double> values) {
  std::vector<std::pair<Point, Point>> pairs;
  for (const auto& p : x->points()) {
    for (double v : values) pairs.push_back({p, {v}});
  }
  return from_pairs(std::move(x), std::move(y), pairs);
}

// F1 = 2x, F2 ≡ {0.5}, x̄ = 0.25, ȳ = 0.5.
CoincidenceInstance two_x_vs_half(double l = 0.5, double m = 0.01) {
  auto x = line_space("X", -1, 1, 0.05);
  auto y = line_space("Y", -2, 2, 0.1);
  return CoincidenceInstance{from_linear(Matrix(1, 1, {2.0}), x, y),
                             constant(x, y, {0.5}),
                             {0.25},
                             {0.5},
                             l,
                             m,
                             0.5,
                             1.0,
                             cfg(0.4, 0.6, 0.3, {0.05, 0.1}),
                             line_space("D", -3, 3, 0.1)};
}

}  // namespace

TEST_CASE("fix_set by enumeration") {
  auto inst = two_x_vs_half();
  auto s = fix_set(inst.f1, inst.f2);
  REQUIRE(s.size() == 1);
  CHECK(s.points()[0][0] == doctest::Approx(0.25));
  CHECK(fix_set(inst.f2, inst.f1) == s);

  CHECK(fix_set(inst.f1, inst.f1) == inst.f1.domain());

  auto x = line_space("X", 0, 1, 0.1);
  auto y = line_space("Y", -1, 1, 0.1);
  CHECK(fix_set(constant(x, y, {-0.5}), constant(x, y, {0.5})).empty());

  // Targets on different grids are matched by coordinates.
  auto y2 = line_space("Y2", -1, 1, 0.05);
  auto f = from_function(x, y, [](const Point& p) { return Point{p[0] - 0.5}; },
                         OffGridPolicy::Drop);
  auto s2 = fix_set(f, constant(x, y2, {0.2}));
  REQUIRE(s2.size() == 1);
  CHECK(s2.points()[0][0] == doctest::Approx(0.7));
}

TEST_CASE("fix_set is the zero set of the difference") {
  auto x = line_space("X", -1, 1, 0.1);
  auto y = line_space("Y", -2, 2, 0.1);
  auto f1 = from_pairs(x, y, {{{0.0}, {0.1}}, {{0.0}, {0.3}}, {{0.5}, {-0.2}}, {{0.2}, {0.4}}});
  auto f2 = from_pairs(x, y, {{{0.0}, {0.3}}, {{0.5}, {0.2}}, {{0.2}, {0.4}}, {{0.2}, {0.0}}});
  auto d = difference(f1, f2);
  std::vector<std::size_t> zeros;
  const auto zero = d.target().index_of(Point{0.0});
  for (std::size_t i = 0; i < x->size(); ++i) {
    if (d.contains(i, zero)) zeros.push_back(i);
  }
  CHECK(fix_set(f1, f2) == PointSet(x, zeros));
  CHECK(fix_set(f1, f2).size() == 2);
}

TEST_CASE("fixp bound at x = 0 for 2x against 0.5") {
  auto inst = two_x_vs_half();
  auto r = verify_fixp_bound(inst, Point{0});
  CHECK(r.status == Status::Pass);
  REQUIRE(r.rows.size() == 1);
  CHECK(r.rows[0].lhs.value() == doctest::Approx(0.25));
  CHECK(r.rows[0].rhs.value() == doctest::Approx(0.5 / 1.99));
  CHECK(*r.rows[0].ratio == doctest::Approx(0.995));
  REQUIRE(r.fix.size() == 1);
  CHECK(r.fix[0][0] == doctest::Approx(0.25));

  auto alt = verify_fixp_bound_alt(inst, Point{0});
  CHECK(alt.status == Status::Pass);
  CHECK(alt.rows[0].rhs.value() == doctest::Approx(0.5 / 1.99));
  REQUIRE(alt.rows[0].rhs_diffix.has_value());
  CHECK(*alt.rows[0].rhs_diffix == r.rows[0].rhs);

  auto on = verify_fixp_bound(inst, Point{0.25});
  CHECK(on.rows[0].lhs == ExtReal(0.0));
}

TEST_CASE("fixp bound holds over the whole neighborhood, checked by an oracle") {
  auto inst = two_x_vs_half();
  for (auto v : {FixpVariant::Diffix, FixpVariant::Difference}) {
    auto r = sweep_fixp_bound(inst, v);
    CHECK(r.status == Status::Pass);
    CHECK(r.violations == 0);
    CHECK(r.rows.size() == 19);
    for (const auto& row : r.rows) {
      const double x = row.x[0];
      CHECK(row.lhs.value() == doctest::Approx(std::abs(x - 0.25)));
      const double y = 2 * x;
      if (std::abs(y - 0.5) < 1.0) {
        CHECK(row.rhs.value() == doctest::Approx(std::abs(y - 0.5) / 1.99));
      } else {
        CHECK(row.rhs.is_infinite());
      }
    }
  }
}

TEST_CASE("fixp: empty capped image is vacuous") {
  auto inst = two_x_vs_half();
  inst.beta = 0.05;
  inst.alpha = 0.3;
  auto r = verify_fixp_bound(inst, Point{0});
  CHECK(r.rows[0].rhs.is_infinite());
  CHECK(r.rows[0].holds);
  CHECK_FALSE(r.rows[0].ratio.has_value());
}

TEST_CASE("fixp: refuted constants and preconditions") {
  auto bad = two_x_vs_half(0.3);
  auto r = verify_fixp_bound(bad, Point{0});
  CHECK(r.status == Status::Fail);
  CHECK_FALSE(r.hypotheses[0].passed);
  CHECK(r.rows.empty());

  auto inst = two_x_vs_half();
  CHECK_THROWS_AS(verify_fixp_bound(inst, Point{0.8}), PreconditionError);
  auto big = two_x_vs_half(0.5, 2.0);
  CHECK_THROWS_AS(verify_fixp_bound(big, Point{0}), PreconditionError);
}

TEST_CASE("proof constraints report the binding inequality") {
  auto inst = two_x_vs_half();
  auto r = verify_fixp_bound(inst, Point{0});
  REQUIRE(r.proof.size() == 5);
  CHECK_FALSE(r.proof[0].holds);  // alpha = 0.5 is not below m = 0.01
  REQUIRE(r.binding.has_value());
  CHECK(*r.binding == "3 beta < epsilon");

  auto radii = proof_radii(0.5, 0.01, 0.3);
  for (const auto& c : proof_constraints(0.5, 0.01, radii.alpha, radii.beta, 0.3)) {
    CHECK(c.holds);
  }
  CHECK(radii.binding_beta == "3 beta < epsilon");
  CHECK(radii.binding_alpha == "alpha < m");
  CHECK(radii.beta == doctest::Approx(0.05));
  CHECK(radii.alpha == doctest::Approx(0.005));
}

TEST_CASE("parametric_fix agrees with implicit_map of the difference") {
  auto x = line_space("X", -1, 1, 0.05);
  auto p = line_space("P", -0.5, 0.5, 0.1);
  auto y = line_space("Y", -3, 3, 0.1);
  auto f1 = from_function(x, p, y,
                          [](const Point& a, const Point& b) { return Point{2 * a[0] - b[0]}; },
                          OffGridPolicy::Drop);
  auto f2 = constant(x, y, {0.5});
  auto s = parametric_fix(f1, f2);
  CHECK(s == implicit_map(difference(f1, f2)));
  for (double pv : oracle::line(-0.5, 0.5, 0.1)) {
    auto img = image(s, Point{pv});
    REQUIRE(img.size() == 1);
    CHECK(img.points()[0][0] == doctest::Approx((0.5 + pv) / 2));
  }

  auto flat = from_function(x, p, y, [](const Point& a, const Point&) { return Point{2 * a[0]}; },
                            OffGridPolicy::Drop);
  auto sf = parametric_fix(flat, f2);
  for (double pv : oracle::line(-0.5, 0.5, 0.1)) {
    CHECK(image(sf, Point{pv}).points() == std::vector<Point>{{0.25}});
  }

  auto far = constant(x, y, {2.9});
  CHECK(parametric_fix(f1, far).graph().size() < p->size());
  CHECK(image(parametric_fix(f1, far), Point{0.0}).empty());
}
