#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "oracle.hpp"
#include "setreg/composition.hpp"

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

MultiMap scale(SpacePtr x, SpacePtr y, double a) {
  return from_linear(Matrix(1, 1, {a}), std::move(x), std::move(y));
}

MultiMap constant(SpacePtr x, SpacePtr y, std::vector<double> values) {
  std::vector<std::pair<Point, Point>> pairs;
  for (const auto& p : x->points()) {
    for (double v : values) pairs.push_back({p, {v}});
  }
  return from_pairs(std::move(x), std::move(y), pairs);
}

BiMultiMap affine(SpacePtr y, SpacePtr z, SpacePtr w, double a, double b) {
  return from_function(std::move(y), std::move(z), std::move(w),
                       [a, b](const Point& p, const Point& q) {
                         return Point{a * p[0] + b * q[0]};
                       },
                       OffGridPolicy::Drop);
}

bool all_zero(const CompositionCertificate& c) {
  return std::all_of(c.conclusions.begin(), c.conclusions.end(),
                     [](const ConclusionResult& r) { return r.defect == ExtReal(0.0); });
}

// Independent check of B(w, r rho) ⊂ H(B(x, rho)) for a 1-D single-valued H.
bool oracle_open(const std::vector<double>& xs, const std::vector<double>& ws,
                 const std::function<double(double)>& h, double x, double w,
                 double rate, double rho) {
  std::vector<double> img;
  for (double s : xs) {
    if (std::abs(s - x) < rho) img.push_back(h(s));
  }
  for (double t : ws) {
    if (std::abs(t - w) < rate * rho && oracle::dist(t, img) > 1e-9) return false;
  }
  return true;
}

struct TwoXMinusX {
  SpacePtr x = line_space("X", -1, 1, 0.1);
  SpacePtr y = line_space("Y", -2, 2, 0.2);
  SpacePtr w = line_space("W", -3, 3, 0.1);
  MultiMap f1 = scale(x, y, 2.0);
  MultiMap f2 = scale(x, x, 1.0);
  BiMultiMap g = affine(y, x, w, 1.0, -1.0);
};

}  // namespace

TEST_CASE("op_comp: 2x - x at rate 1") {
  TwoXMinusX t;
  RateConstants k;
  k.L = 2;
  k.M = 1;
  k.C = 1;
  k.D = 1;
  auto c = certify_op_comp(t.f1, t.f2, t.g, {{0}, {0}, {0}, {0}}, k,
                           cfg(0.5, 0.5, 0.8, {0.1}));
  CHECK(c.rate == 1.0);
  CHECK(c.passed());
  CHECK(all_zero(c));
  CHECK(c.conclusions.size() > 3);
  CHECK(c.observed_rate >= ExtReal(c.rate));
  CHECK(c.epsilon_formula.has_value());
  // H is the identity on the sampled region.
  for (const auto& r : c.conclusions) {
    CHECK(oracle_open(oracle::line(-1, 1, 0.1), oracle::line(-3, 3, 0.1),
                      [](double v) { return v; }, r.x[0], r.w[0], 1.0, r.rho));
  }
}

TEST_CASE("op_comp: rate boundary is rejected") {
  auto x = line_space("X", -1, 1, 0.1);
  auto w = line_space("W", -2, 2, 0.1);
  auto id = identity_map(x);
  RateConstants k;
  k.L = 1;
  k.M = 1;
  k.C = 1;
  k.D = 1;
  CHECK_THROWS_AS(certify_op_comp(id, id, affine(x, x, w, 1, -1), {{0}, {0}, {0}, {0}},
                                  k, cfg(0.5, 0.5, 0.2, {0.1})),
                  PreconditionError);
}

TEST_CASE("op_comp: y + z records grid-level slack") {
  TwoXMinusX t;
  auto g = affine(t.y, t.x, t.w, 1.0, 1.0);
  RateConstants k;
  k.L = 2;
  k.M = 1;
  k.C = 1;
  k.D = 1;
  auto c = certify_op_comp(t.f1, t.f2, g, {{0}, {0}, {0}, {0}}, k,
                           cfg(0.5, 0.5, 0.4, {0.1}));
  CHECK(c.passed());
  CHECK(c.slack >= 0.0);
}

TEST_CASE("op_comp: constant F2 gives rate 1.99 with non-trivial balls") {
  auto x = line_space("X", -1, 1, 0.1);
  auto y = line_space("Y", -2, 2, 0.2);
  auto z = line_space("Z", 0.5, 0.5, 1.0);
  auto w = line_space("W", -2.5, 1.5, 0.2);
  RateConstants k;
  k.L = 2;
  k.M = 0.01;
  k.C = 1;
  k.D = 1;
  auto c = certify_op_comp(scale(x, y, 2), constant(x, z, {0.5}), affine(y, z, w, 1, -1),
                           {{0.2}, {0.4}, {0.5}, {-0.1}}, k,
                           cfg(0.5, 1.0, 0.6, {0.1, 0.2, 0.3}));
  CHECK(c.rate == doctest::Approx(1.99));
  CHECK(c.passed());
  CHECK(all_zero(c));
  for (const auto& r : c.conclusions) {
    CHECK(oracle_open(oracle::line(-1, 1, 0.1), oracle::line(-2.5, 1.5, 0.2),
                      [](double v) { return 2 * v - 0.5; }, r.x[0], r.w[0], 1.99, r.rho));
  }
  CHECK(c.observed_rate >= ExtReal(1.99));
}

TEST_CASE("op_comp: constant F1 fails the openness hypothesis before any sweep") {
  TwoXMinusX t;
  RateConstants k;
  k.L = 2;
  k.M = 1;
  k.C = 1;
  k.D = 1;
  auto f1 = constant(t.x, t.y, {0.0});
  auto c = certify_op_comp(f1, t.f2, t.g, {{0}, {0}, {0}, {0}}, k,
                           cfg(0.5, 0.5, 0.4, {0.1, 0.2}));
  CHECK_FALSE(c.passed());
  REQUIRE(c.failed_hypothesis.has_value());
  CHECK(*c.failed_hypothesis == "F1_open_L");
  CHECK(c.conclusions.empty());
  const auto& h = c.hypotheses[1];
  REQUIRE(h.report.has_value());
  CHECK(h.report->witness.has_value());
}

TEST_CASE("op_comp: incidence preconditions") {
  TwoXMinusX t;
  RateConstants k;
  k.L = 2;
  k.M = 1;
  k.C = 1;
  k.D = 1;
  CHECK_THROWS_AS(certify_op_comp(t.f1, t.f2, t.g, {{0}, {0.2}, {0}, {0}}, k,
                                  cfg(0.5, 0.5, 0.4, {0.1})),
                  PreconditionError);
  RateConstants missing = k;
  missing.C.reset();
  CHECK_THROWS_AS(certify_op_comp(t.f1, t.f2, t.g, {{0}, {0}, {0}, {0}}, missing,
                                  cfg(0.5, 0.5, 0.4, {0.1})),
                  PreconditionError);
}

TEST_CASE("main_const agrees with op_comp on y - z") {
  TwoXMinusX t;
  RateConstants mc;
  mc.l = 0.5;
  mc.m = 1.0;
  auto a = certify_main_const(t.f1, t.f2, {{0}, {0}, {0}}, mc, cfg(0.5, 0.5, 0.4, {0.1}), t.w);
  RateConstants oc;
  oc.L = 1.0 / 0.5;
  oc.M = 1.0;
  oc.C = 1.0;
  oc.D = 1.0;
  auto b = certify_op_comp(t.f1, t.f2, t.g, {{0}, {0}, {0}, {0}}, oc, cfg(0.5, 0.5, 0.4, {0.1}));
  CHECK(a.rate == b.rate);
  CHECK(a.status == b.status);
  CHECK(a.passed());

  RateConstants bad;
  bad.l = 1.0;
  bad.m = 1.0;
  CHECK_THROWS_AS(certify_main_const(t.f1, t.f2, {{0}, {0}, {0}}, bad,
                                     cfg(0.5, 0.5, 0.4, {0.1}), t.w),
                  PreconditionError);
}

TEST_CASE("main_const with a constant F2 checks rate 1.99") {
  auto x = line_space("X", -1, 1, 0.1);
  auto y = line_space("Y", -2, 2, 0.2);
  auto z = line_space("Z", 0.5, 0.5, 1.0);
  auto w = line_space("W", -2.5, 1.5, 0.2);
  RateConstants mc;
  mc.l = 0.5;
  mc.m = 0.01;
  auto c = certify_main_const(scale(x, y, 2), constant(x, z, {0.5}), {{0.2}, {0.4}, {0.5}},
                              mc, cfg(0.5, 1.0, 0.3, {0.1, 0.2, 0.3}), w);
  CHECK(c.rate == doctest::Approx(1.99));
  CHECK(c.passed());
  CHECK(c.observed_rate >= ExtReal(2.0 - 1e-9));
}

TEST_CASE("part A: projection, non-open G, and y + x with the disjointness check") {
  auto x = line_space("X", -1, 1, 0.1);
  auto y = line_space("Y", -2, 2, 0.2);
  auto f = scale(x, y, 2);
  {
    auto g = affine(x, y, y, 0.0, 1.0);
    RateConstants k;
    k.L = 2;
    k.C = 1;
    k.D = 0;
    auto c = certify_part_A(f, g, {{0}, {0}, {0}}, k, cfg(0.5, 1.0, 0.2, {0.1, 0.2}), true);
    CHECK(c.rate == 2.0);
    CHECK(c.passed());
    CHECK(all_zero(c));
    CHECK(std::any_of(c.conclusions.begin(), c.conclusions.end(),
                      [](const ConclusionResult& r) { return r.conclusion == "graph"; }));
  }
  {
    auto g = affine(x, y, x, 1.0, 0.0);
    RateConstants k;
    k.L = 2;
    k.C = 1;
    k.D = 1;
    auto c = certify_part_A(f, g, {{0}, {0}, {0}}, k, cfg(0.5, 1.0, 0.2, {0.1, 0.2}), false);
    CHECK_FALSE(c.passed());
    CHECK(c.failed_hypothesis == std::optional<std::string>("G_open_in_y_C"));
  }
  {
    auto z = line_space("Z", -3, 3, 0.1);
    auto g = affine(x, y, z, 1.0, 1.0);
    RateConstants k;
    k.L = 2;
    k.C = 1;
    k.D = 1;
    auto c = certify_part_A(f, g, {{0}, {0}, {0}}, k, cfg(0.5, 1.0, 0.2, {0.1}), true);
    CHECK(c.rate == 1.0);
    CHECK(c.passed());
    CHECK(std::any_of(c.conclusions.begin(), c.conclusions.end(),
                      [](const ConclusionResult& r) { return r.conclusion == "graph"; }));
  }
}

TEST_CASE("part A: disjointness violation downgrades") {
  auto x = line_space("X", -1, 1, 0.1);
  auto y = line_space("Y", -1, 1, 0.1);
  auto f = scale(x, y, 1);
  // G(x, y) = {y, -y} overlaps for y and -y.
  std::vector<ParamMultiMap::Triple> tr;
  for (std::size_t i = 0; i < x->size(); ++i) {
    for (std::size_t j = 0; j < y->size(); ++j) {
      tr.push_back({i, j, j});
      tr.push_back({i, j, y->size() - 1 - j});
    }
  }
  BiMultiMap g(x, y, y, tr);
  RateConstants k;
  k.L = 1;
  k.C = 1;
  k.D = 0.5;
  auto c = certify_part_A(f, g, {{0}, {0}, {0}}, k, cfg(0.5, 0.5, 0.2, {0.1}), true);
  CHECK(std::any_of(c.notes.begin(), c.notes.end(), [](const std::string& n) {
    return n.find("downgraded") != std::string::npos;
  }));
  CHECK(std::none_of(c.conclusions.begin(), c.conclusions.end(),
                     [](const ConclusionResult& r) { return r.conclusion == "graph"; }));
}

TEST_CASE("part B: x + y with a constant F") {
  auto x = line_space("X", -1, 1, 0.1);
  auto y = line_space("Y", -0.5, 0.5, 0.1);
  auto z = line_space("Z", -2, 2, 0.1);
  auto g = affine(x, y, z, 1.0, 1.0);
  RateConstants k;
  k.C = 1;
  k.D = 1;
  k.M = 0.01;
  auto c = certify_part_B(constant(x, y, {0}), g, {{0}, {0}, {0}}, k,
                          cfg(0.5, 0.5, 0.3, {0.1, 0.2, 0.3}), true);
  CHECK(c.rate == doctest::Approx(0.99));
  CHECK(c.passed());
  CHECK(std::any_of(c.conclusions.begin(), c.conclusions.end(),
                    [](const ConclusionResult& r) { return r.conclusion == "graph"; }));

  auto multi = certify_part_B(constant(x, y, {0, 0.1}), g, {{0}, {0}, {0}}, k,
                              cfg(0.5, 0.5, 0.3, {0.1, 0.2, 0.3}), true);
  CHECK(std::any_of(multi.notes.begin(), multi.notes.end(), [](const std::string& n) {
    return n.find("not a singleton") != std::string::npos;
  }));

  RateConstants tight = k;
  tight.M = 1.0;
  CHECK_THROWS_AS(certify_part_B(constant(x, y, {0}), g, {{0}, {0}, {0}}, tight,
                                 cfg(0.5, 0.5, 0.3, {0.1}), false),
                  PreconditionError);
}

TEST_CASE("Lyusternik-Graves: F = 2x, G = identity") {
  auto x = line_space("X", -1, 1, 0.1);
  auto y = line_space("Y", -2, 2, 0.2);
  auto f = scale(x, y, 2);
  auto g = from_function(y, x, [](const Point& p) { return p; }, OffGridPolicy::Drop);
  RateConstants k;
  k.L = 2;
  k.M = 1;
  auto c = certify_lyusternik_graves(f, g, k, cfg(0.5, 0.5, 0.1, {0.1}), true);
  CHECK(c.rate == 1.0);
  CHECK(c.passed());
  CHECK(all_zero(c));
  REQUIRE(c.symmetric_rate.has_value());
  CHECK(*c.symmetric_rate == 0.5);
  CHECK(std::any_of(c.conclusions.begin(), c.conclusions.end(), [](const ConclusionResult& r) {
    return r.conclusion == "graph_symmetric";
  }));

  RateConstants edge;
  edge.L = 1;
  edge.M = 1;
  CHECK_THROWS_AS(certify_lyusternik_graves(f, g, edge, cfg(0.5, 0.5, 0.1, {0.1})),
                  PreconditionError);
}

TEST_CASE("validate_constant decides inside the bracket") {
  ModulusReport r;
  r.kind = ModulusKind::Lop;
  r.lo = ExtReal(1.0);
  r.hi = ExtReal(2.0);
  CHECK(validate_constant("a", r, 0.5, [](double) { return false; }).passed);
  CHECK_FALSE(validate_constant("a", r, 2.0, [](double) { return true; }).passed);
  CHECK(validate_constant("a", r, 1.5, [](double l) { return l < 1.6; }).passed);
  r.kind = ModulusKind::Lip;
  CHECK(validate_constant("a", r, 2.0, [](double) { return false; }).passed);
  CHECK_FALSE(validate_constant("a", r, 1.0, [](double) { return true; }).passed);
}
