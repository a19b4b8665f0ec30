#include <cmath>
#include <string>

#include "doctest.h"
#include "setreg/expression.hpp"
#include "setreg/parallel.hpp"
#include "setreg/report.hpp"
#include "setreg/runner.hpp"

using namespace setreg;

namespace {

const char* kMinimal = R"({
  "spaces": {"X": {"range": [-1, 1, 0.1]}},
  "maps": {"I": {"kind": "identity", "on": "X"}},
  "configs": {"c": {"radius_u": 0.5, "radius_v": 0.5, "epsilon": 0.2, "rho": [0.1, 0.2]}},
  "tasks": [{"name": "est", "command": "estimate", "map": "I", "kind": "lop",
             "anchor": {"x": 0, "y": 0}, "config": "c", "expect": 1}]
})";

// F1 = 2x, F2 = x, G = y - z: H = identity.
const char* kChain = R"({
  "spaces": {"X": {"range": [-1, 1, 0.1]}, "Y": {"range": [-2, 2, 0.2]},
             "W": {"range": [-3, 3, 0.1]}},
  "maps": {
    "F1": {"kind": "linear", "from": "X", "to": "Y", "matrix": [[2]]},
    "F2": {"kind": "identity", "on": "X"},
    "G": {"kind": "formula", "from": ["Y", "X"], "to": "W", "args": ["y", "z"],
          "formula": "y - z"}
  },
  "constants": {"k": {"L": 2, "M": 1, "C": 1, "D": 1}},
  "anchors": {"a": {"x": 0, "y": 0, "z": 0, "w": 0}},
  "configs": {"c": {"radius_u": 0.5, "radius_v": 0.5, "epsilon": 0.8, "rho": [0.1]}},
  "tasks": [
    {"name": "cert", "command": "certify", "theorem": "op_comp",
     "maps": {"F1": "F1", "F2": "F2", "G": "G"}, "anchor": "a", "constants": "k", "config": "c"},
    {"name": "far", "command": "solve", "maps": {"F1": "F1", "F2": "F2", "G": "G"},
     "anchor": "a", "constants": "k", "config": "c", "rho": 0.1, "targets": [0.9]},
    {"name": "after", "command": "certify", "theorem": "op_comp",
     "maps": {"F1": "F1", "F2": "F2", "G": "G"}, "anchor": "a", "constants": "k", "config": "c"}
  ]
})";

std::string with_task(const std::string& task) {
  return R"({"spaces": {"X": {"range": [-1, 1, 0.1]}, "P": {"range": [-1, 1, 0.1]},
                        "Y": {"range": [-3, 3, 0.1]}},
             "maps": {"H": {"kind": "formula", "from": ["X", "P"], "to": "Y",
                            "args": ["x", "p"], "formula": "2*x - p"},
                      "I": {"kind": "identity", "on": "X"}},
             "tasks": [)" +
         task + "]}";
}

}  // namespace

TEST_CASE("expressions") {
  const std::vector<std::string> v{"x", "p"};
  CHECK(Expression("2*x - p", v).eval({0.3, 0.1}) == doctest::Approx(0.5));
  CHECK(Expression("1 + 2 * 3", {}).eval({}) == 7);
  CHECK(Expression("2 ^ 3 ^ 2", {}).eval({}) == 512);
  CHECK(Expression("-2 ^ 2", {}).eval({}) == -4);
  CHECK(Expression("(1 + 2) * -x", v).eval({2, 0}) == -6);
  CHECK(Expression("max(abs(x), p) / 2", v).eval({-3, 1}) == 1.5);
  CHECK(Expression("min(x, p) + sqrt(4) + pow(2, 3)", v).eval({1, 2}) == 11);
  CHECK(Expression("cos(pi)", {}).eval({}) == doctest::Approx(-1));
  CHECK(Expression("x1 + x2", {"x1", "x2"}).eval({1, 2}) == 3);

  CHECK_THROWS_AS(Expression("2 * q", v), ExpressionError);
  CHECK_THROWS_AS(Expression("max(1)", v), ExpressionError);
  CHECK_THROWS_AS(Expression("foo(1)", v), ExpressionError);
  CHECK_THROWS_AS(Expression("(1 + 2", v), ExpressionError);
  CHECK_THROWS_AS(Expression("1 2", v), ExpressionError);
  CHECK_THROWS_AS(Expression("", v), ExpressionError);
  CHECK_THROWS_AS(Expression("x", v).eval({1}), DimensionError);
}

TEST_CASE("content digest is FNV-1a 64") {
  CHECK(content_digest("") == "fnv1a64:cbf29ce484222325");
  CHECK(content_digest("a") == "fnv1a64:af63dc4c8601ec8c");
  CHECK(content_digest("foobar") == "fnv1a64:85944171f73967e8");
}

TEST_CASE("minimal instance loads") {
  const auto inst = parse_instance(kMinimal);
  CHECK(inst.spaces.at("X")->size() == 21);
  CHECK(inst.map1("I").graph().size() == 21);
  REQUIRE(inst.tasks.size() == 1);
  CHECK(inst.tasks[0].command == "estimate");
  CHECK(inst.tasks[0].tuples == 21);
  CHECK(inst.digest == content_digest(kMinimal));
}

TEST_CASE("formula map 2x - p has |X| |P| triples") {
  const auto inst = parse_instance(with_task(
      R"({"name": "t", "command": "implicit", "operation": "xSp", "map": "H",
          "anchor": {"x": 0, "p": 0}})"));
  const auto& h = inst.map2("H");
  CHECK(h.graph().size() == 21 * 21);
  for (const auto& [i, j, k] : h.graph()) {
    CHECK(h.target().point(k)[0] ==
          doctest::Approx(2 * h.first().point(i)[0] - h.second().point(j)[0]));
  }
  CHECK(inst.tasks[0].tuples == 21.0 * 21 * 61);
}

TEST_CASE("declarations of every kind") {
  const auto inst = parse_instance(R"({
    "spaces": {"A": {"points": [[0, 0], [1, 0], [0, 1]], "norm": "max"},
               "B": {"axes": [[0, 1, 0.5], [0, 1, 1]], "norm": "euclidean"},
               "L": {"range": [0, 1, 0.5]},
               "LL": {"product": ["L", "L"]},
               "D": {"range": [-1, 1, 0.5]}},
    "maps": {"E": {"kind": "explicit", "from": "L", "to": "L", "pairs": [[0, 0.5], [0, 1], [1, 0]]},
             "Einv": {"kind": "inverse", "of": "E"},
             "K": {"kind": "constant", "from": "L", "to": "L", "values": [0.5]},
             "Diff": {"kind": "difference", "left": "E", "right": "K", "to": "D"},
             "Lin": {"kind": "linear", "from": "A", "to": "B", "matrix": [[1, 0], [0, 1]]},
             "Pr": {"kind": "formula", "from": "LL", "to": "L", "formula": "x1"},
             "T": {"kind": "explicit", "from": ["L", "L"], "to": "L", "pairs": [[0, 1, 0.5]]}},
    "tasks": []})");
  CHECK(inst.space("A")->size() == 3);
  CHECK(inst.space("B")->size() == 6);
  CHECK(inst.space("LL")->size() == 9);
  CHECK(inst.map1("E").graph().size() == 3);
  CHECK(inst.map1("Einv") == inverse(inst.map1("E")));
  CHECK(inst.map1("K").graph().size() == 3);
  CHECK(image(inst.map1("Diff"), Point{0}).points() == std::vector<Point>{{0.0}, {0.5}});
  CHECK(inst.map1("Lin").graph().size() == 3);
  CHECK(inst.map1("Pr").graph().size() == 9);
  CHECK(inst.map2("T").graph().size() == 1);
  CHECK_THROWS_AS(inst.map1("T"), InstanceError);
  CHECK_THROWS_AS(inst.map2("E"), InstanceError);
}

TEST_CASE("validation errors name the culprit") {
  auto message = [](const std::string& text) -> std::string {
    try {
      parse_instance(text);
    } catch (const Error& e) {
      return e.what();
    }
    return "";
  };
  const auto dangling = message(with_task(
      R"({"name": "t", "command": "estimate", "map": "Nope", "kind": "lop",
          "anchor": {"x": 0, "y": 0}})"));
  CHECK(dangling.find("task 't'") != std::string::npos);
  CHECK(dangling.find("'Nope'") != std::string::npos);

  CHECK_THROWS_AS(parse_instance(with_task(R"({"name": "t", "command": "frobnicate"})")),
                  InstanceError);
  CHECK_THROWS_AS(parse_instance(with_task(R"({"name": "t", "command": "estimate", "map": "I"})")),
                  InstanceError);
  CHECK_THROWS_AS(parse_instance(with_task(R"({"name": "t", "command": "verify-equiv",
      "map": "I", "anchor": "missing"})")),
                  InstanceError);
  CHECK_THROWS_AS(parse_instance(with_task(R"({"name": "t", "command": "verify-fixpoint",
      "maps": {"F1": "I", "F2": "I"}}, {"name": "t", "command": "verify-fixpoint",
      "maps": {"F1": "I", "F2": "I"}})")),
                  InstanceError);
  CHECK(message(R"({"spaces": {"X": {"range": [0, 1, 0.5]}},
                    "maps": {"M": {"kind": "linear", "from": "X", "to": "X", "matrix": [[3]]}},
                    "tasks": []})")
            .find("map 'M'") != std::string::npos);
  CHECK_THROWS_AS(parse_instance(R"({"spaces": {"X": {"range": [0, 1, 0.5]}},
                    "maps": {"A": {"kind": "inverse", "of": "B"},
                             "B": {"kind": "inverse", "of": "A"}}, "tasks": []})"),
                  InstanceError);
  CHECK_THROWS_AS(parse_instance(R"({"spaces": {}, "maps": {}, "tasks": [], "extra": 1})"),
                  InstanceError);
  CHECK_THROWS_AS(parse_instance(R"({"spaces": {"X": {"range": [0, 1, 0.5]}}, "maps": {},
                    "configs": {"c": {"radius_u": 1, "radius_v": 1, "epsilon": -1, "rho": [0.1]}},
                    "tasks": []})"),
                  InstanceError);
}

TEST_CASE("parse errors carry line and column") {
  try {
    parse_instance("{\n  \"spaces\": {\n    \"X\": [1,, 2]\n  }\n}");
    FAIL("no error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(e.column() == 13);  // the second comma
  }
  CHECK_THROWS_AS(parse_instance("[1, 2]"), ParseError);
}

TEST_CASE("cap is enforced at load and names the task") {
  const auto text = with_task(
      R"({"name": "big", "command": "implicit", "operation": "xSp", "map": "H",
          "anchor": {"x": 0, "p": 0}})");
  try {
    parse_instance(text, 1000);
    FAIL("no error");
  } catch (const CapExceeded& e) {
    CHECK(e.subject() == "task 'big'");
    CHECK(e.tuples() == 21.0 * 21 * 61);
  }
  CHECK_NOTHROW(parse_instance(text, 21 * 21 * 61));
  CHECK_THROWS_AS(parse_instance(R"({"spaces": {"X": {"range": [0, 1, 1e-9]}}, "maps": {},
                                     "tasks": []})"),
                  CapExceeded);
}

TEST_CASE("estimate task brackets 1 for the identity") {
  const auto inst = parse_instance(kMinimal);
  const auto reports = run(inst, {});
  REQUIRE(reports.size() == 1);
  CHECK(reports[0].status == "PASS");
  const auto& r = reports[0].payload["result"]["reports"][0];
  CHECK(r["kind"] == "lop");
  CHECK(r["lo"].get<double>() <= 1.0);
  CHECK(r["hi"].get<double>() >= 1.0);
  CHECK(r["hi"].get<double>() - r["lo"].get<double>() <= 1e-6);
  CHECK(reports[0].payload["instance_digest"] == inst.digest);
  CHECK(reports[0].payload["task"]["name"] == "est");
  CHECK(exit_code(reports) == 0);
}

TEST_CASE("certify and solve tasks; precondition rejection is recorded") {
  const auto inst = parse_instance(kChain);
  const auto reports = run(inst, {});
  REQUIRE(reports.size() == 3);
  CHECK(reports[0].status == "PASS");
  CHECK(reports[0].payload["result"]["rate"] == 1.0);
  CHECK(reports[1].status == "ERROR");
  CHECK(reports[1].payload["result"]["solutions"][0].contains("error"));
  CHECK(reports[2].status == "PASS");
  CHECK(exit_code(reports) == 1);

  RunOptions ff;
  ff.fail_fast = true;
  CHECK(run(inst, ff).size() == 2);

  RunOptions one;
  one.task = "after";
  CHECK(run(inst, one).size() == 1);
  one.command = "solve";
  CHECK_THROWS_AS(select_tasks(inst, one), InstanceError);
  RunOptions solve_only;
  solve_only.command = "solve";
  CHECK(select_tasks(inst, solve_only).size() == 1);
}

TEST_CASE("verify-fixpoint writes x,lhs,rhs,ratio,status rows") {
  const auto inst = parse_instance(R"({
    "spaces": {"X": {"range": [-1, 1, 0.05]}, "Y": {"range": [-2, 2, 0.1]},
               "D": {"range": [-3, 3, 0.1]}},
    "maps": {"F1": {"kind": "linear", "from": "X", "to": "Y", "matrix": [[2]]},
             "F2": {"kind": "constant", "from": "X", "to": "Y", "values": [0.5]}},
    "tasks": [{"name": "fx", "command": "verify-fixpoint", "maps": {"F1": "F1", "F2": "F2"},
               "anchor": {"x": 0.25, "y": 0.5}, "l": 0.5, "m": 0.01, "alpha": 0.5, "beta": 1,
               "config": {"radius_u": 0.4, "radius_v": 0.6, "epsilon": 0.3, "rho": [0.05, 0.1]},
               "diff": "D", "at": [0]}]})");
  const auto r = run(inst, {});
  REQUIRE(r.size() == 1);
  CHECK(r[0].status == "PASS");
  REQUIRE(r[0].csv.size() == 1);
  CHECK(r[0].csv[0].first == "fx.csv");
  CHECK(r[0].csv[0].second ==
        "x,lhs,rhs,ratio,status\n0.0,0.25,0.25125628140703515,0.9950000000000001,PASS\n");
  CHECK(r[0].payload["result"]["fix"] == json::array({json::array({0.25})}));
}

TEST_CASE("payloads are deterministic across runs and thread counts") {
  const auto inst = parse_instance(kChain);
  RunOptions opt;
  opt.task = "cert";
  parallel::set_threads(1);
  const auto a = run(inst, opt)[0].payload.dump();
  parallel::set_threads(4);
  const auto b = run(inst, opt)[0].payload.dump();
  parallel::set_threads(0);
  const auto c = run(parse_instance(kChain), opt)[0].payload.dump();
  CHECK(a == b);
  CHECK(a == c);

  const auto e = envelope(run(inst, opt)[0], "2026-01-01T00:00:00Z");
  CHECK(e["payload"].dump() == a);
  CHECK(e["generated_at"] == "2026-01-01T00:00:00Z");
  CHECK(pretty_report(e).find("status: PASS") != std::string::npos);
}
