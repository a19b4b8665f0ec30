#include "setreg/runner.hpp"

#include <chrono>
#include <ctime>

#include "setreg/coincidence.hpp"
#include "setreg/report.hpp"

#ifndef SETREG_VERSION
#define SETREG_VERSION "0.0.0"
#endif

namespace setreg {

std::string tool_version() { return std::string("setreg ") + SETREG_VERSION; }

namespace {

using Roles = std::map<std::string, Point>;

[[noreturn]] void bad(const std::string& what) { throw InstanceError(what); }

const json& field(const json& spec, const char* key) {
  if (!spec.contains(key)) bad(std::string("missing '") + key + "'");
  return spec.at(key);
}

double number(const json& spec, const char* key) {
  const json& j = field(spec, key);
  if (!j.is_number()) bad(std::string("'") + key + "' must be a number");
  return j.get<double>();
}

double number_or(const json& spec, const char* key, double fallback) {
  return spec.contains(key) ? number(spec, key) : fallback;
}

bool flag(const json& spec, const char* key, bool fallback = false) {
  if (!spec.contains(key)) return fallback;
  if (!spec.at(key).is_boolean()) bad(std::string("'") + key + "' must be true or false");
  return spec.at(key).get<bool>();
}

std::string str(const json& spec, const char* key) {
  const json& j = field(spec, key);
  if (!j.is_string()) bad(std::string("'") + key + "' must be a string");
  return j.get<std::string>();
}

const Point& role(const Roles& r, const std::string& name) {
  const auto it = r.find(name);
  if (it == r.end()) bad("anchor has no '" + name + "' point");
  return it->second;
}

Roles anchor(const Instance& inst, const json& spec) {
  return resolve_anchor(inst, field(spec, "anchor"), "anchor");
}

std::string map_role(const json& spec, const char* role) {
  const json& maps = field(spec, "maps");
  if (!maps.contains(role)) bad(std::string("'maps' has no '") + role + "' entry");
  return maps.at(role).get<std::string>();
}

NeighborhoodConfig config_of(const Instance& inst, const json& spec, const char* key,
                             const GridSpace& x, const GridSpace& y,
                             const GridSpace* p = nullptr) {
  if (!spec.contains(key)) return NeighborhoodConfig::defaults(x, y, p);
  const json& c = spec.at(key);
  if (c.is_string()) return inst.config(c.get<std::string>());
  return parse_config(c, key);
}

RateConstants constants_of(const Instance& inst, const json& spec) {
  const json& c = field(spec, "constants");
  if (c.is_string()) return inst.rate_constants(c.get<std::string>());
  return parse_constants(c, "constants");
}

SpacePtr space_or_null(const Instance& inst, const json& spec, const char* key) {
  return spec.contains(key) ? inst.space(str(spec, key)) : nullptr;
}

std::vector<Point> point_list(const json& spec, const char* key) {
  const json& j = field(spec, key);
  if (!j.is_array()) bad(std::string("'") + key + "' must be a list of points");
  std::vector<Point> out;
  for (const auto& p : j) out.push_back(parse_point(p, key));
  return out;
}

std::vector<std::string> names(const json& j) {
  if (j.is_string()) return {j.get<std::string>()};
  std::vector<std::string> out;
  for (const auto& v : j) out.push_back(v.get<std::string>());
  return out;
}

struct Outcome {
  std::string status;
  json result;
  std::vector<std::pair<std::string, std::string>> csv;
};

std::string pass_fail(bool ok) { return ok ? "PASS" : "FAIL"; }

Outcome run_estimate(const Instance& inst, const json& spec, const EstimateOptions& eo) {
  const std::string name = str(spec, "map");
  const Roles a = anchor(inst, spec);
  const auto kinds = names(field(spec, "kind"));
  const auto& m = inst.maps.at(name);
  json reports = json::array();
  json checks = json::array();
  bool ok = true;
  for (const auto& kname : kinds) {
    const ModulusKind kind = parse_modulus_kind(kname);
    ModulusReport r;
    if (const auto* f = std::get_if<MultiMap>(&m)) {
      const auto cfg = config_of(inst, spec, "config", f->source(), f->target());
      r = estimate(kind, *f, role(a, "x"), role(a, "y"), cfg, eo);
    } else {
      const auto& h = std::get<ParamMultiMap>(m);
      const auto cfg = config_of(inst, spec, "config", h.first(), h.target(), &h.second());
      r = estimate_partial(h, kind, role(a, "x"), role(a, "p"), role(a, "y"), cfg, eo);
    }
    if (spec.contains("expect")) {
      const json& e = spec.at("expect");
      std::optional<double> want;
      if (e.is_number()) want = e.get<double>();
      if (e.is_object() && e.contains(kname)) want = e.at(kname).get<double>();
      if (want) {
        const double tol = number_or(spec, "tolerance", 2 * eo.resolution);
        const bool hit = r.contains(*want, tol);
        ok = ok && hit;
        checks.push_back({{"kind", kname}, {"expect", *want}, {"tolerance", tol},
                          {"contained", hit}});
      }
    }
    reports.push_back(to_json(r));
  }
  return {pass_fail(ok), {{"reports", reports}, {"expectations", checks}}, {}};
}

Outcome run_equiv(const Instance& inst, const json& spec, const EstimateOptions& eo) {
  const MultiMap& f = inst.map1(str(spec, "map"));
  const Roles a = anchor(inst, spec);
  const auto cfg = config_of(inst, spec, "config", f.source(), f.target());
  const std::string mode = spec.contains("mode") ? str(spec, "mode") : "both";
  if (mode != "around" && mode != "at" && mode != "both") {
    bad("'mode' must be around, at or both");
  }
  json out = json::array();
  bool ok = true;
  if (mode != "at") {
    const auto r = check_equivalence_around(f, role(a, "x"), role(a, "y"), cfg, eo);
    ok = ok && r.agree;
    out.push_back(to_json(r));
  }
  if (mode != "around") {
    const auto r = check_equivalence_at(f, role(a, "x"), role(a, "y"), cfg, eo);
    ok = ok && r.agree;
    out.push_back(to_json(r));
  }
  return {pass_fail(ok), {{"equivalences", out}}, {}};
}

Outcome run_certify(const Instance& inst, const json& spec, const EstimateOptions& eo,
                    bool fail_fast) {
  const std::string th = str(spec, "theorem");
  CertifyOptions co{eo, fail_fast};
  CompositionCertificate c;
  if (th == "op_comp") {
    const MultiMap& f1 = inst.map1(map_role(spec, "F1"));
    const MultiMap& f2 = inst.map1(map_role(spec, "F2"));
    const ParamMultiMap& g = inst.map2(map_role(spec, "G"));
    const Roles a = anchor(inst, spec);
    const auto cfg = config_of(inst, spec, "config", f1.source(), g.target());
    c = certify_op_comp(f1, f2, g, {role(a, "x"), role(a, "y"), role(a, "z"), role(a, "w")},
                        constants_of(inst, spec), cfg, co);
  } else if (th == "part_A" || th == "op_comp_part_A" || th == "part_B" ||
             th == "op_comp_part_B") {
    const MultiMap& f = inst.map1(map_role(spec, "F"));
    const ParamMultiMap& g = inst.map2(map_role(spec, "G"));
    const Roles a = anchor(inst, spec);
    const auto cfg = config_of(inst, spec, "config", f.source(), g.target());
    const PartAnchor pa{role(a, "x"), role(a, "y"), role(a, "z")};
    if (th.back() == 'A') {
      c = certify_part_A(f, g, pa, constants_of(inst, spec), cfg, flag(spec, "check_cond"), co);
    } else {
      c = certify_part_B(f, g, pa, constants_of(inst, spec), cfg,
                         flag(spec, "singleton_check"), co);
    }
  } else if (th == "main_const") {
    const MultiMap& f1 = inst.map1(map_role(spec, "F1"));
    const MultiMap& f2 = inst.map1(map_role(spec, "F2"));
    const Roles a = anchor(inst, spec);
    const auto cfg = config_of(inst, spec, "config", f1.source(), f1.target());
    const Point& y1 = a.count("y1") ? role(a, "y1") : role(a, "y");
    const Point& y2 = a.count("y2") ? role(a, "y2") : y1;
    c = certify_main_const(f1, f2, {role(a, "x"), y1, y2}, constants_of(inst, spec), cfg,
                           space_or_null(inst, spec, "diff"), co);
  } else if (th == "lyusternik_graves") {
    const MultiMap& f = inst.map1(map_role(spec, "F"));
    const MultiMap& g = inst.map1(map_role(spec, "G"));
    const auto cfg = config_of(inst, spec, "config", f.source(), f.target());
    c = certify_lyusternik_graves(f, g, constants_of(inst, spec), cfg, flag(spec, "symmetric"),
                                  space_or_null(inst, spec, "diff"),
                                  space_or_null(inst, spec, "diff_symmetric"), co);
  } else {
    bad("unknown theorem '" + th + "'");
  }
  return {to_string(c.status), to_json(c), {}};
}

ImplicitInstance implicit_instance(const Instance& inst, const json& spec) {
  const ParamMultiMap& h = inst.map2(str(spec, "map"));
  const Roles a = anchor(inst, spec);
  ImplicitInstance ii{h,
                      role(a, "x"),
                      role(a, "p"),
                      number(spec, "c"),
                      number(spec, "gamma"),
                      number(spec, "alpha"),
                      number(spec, "beta"),
                      config_of(inst, spec, "config", h.first(), h.target(), &h.second()),
                      std::nullopt};
  if (spec.contains("solution_config")) {
    ii.solution_config =
        config_of(inst, spec, "solution_config", h.second(), h.first(), nullptr);
  }
  return ii;
}

Outcome run_implicit(const Instance& inst, const json& spec, const EstimateOptions& eo,
                     bool fail_fast) {
  const std::string op = str(spec, "operation");
  if (op == "xSp" || op == "pSx") {
    const auto ii = implicit_instance(inst, spec);
    const auto side = op == "xSp" ? ImplicitSide::XSp : ImplicitSide::PSx;
    if (!spec.contains("at")) {
      const auto r = sweep_estimate(ii, side, eo, fail_fast);
      return {to_string(r.status), to_json(r), {}};
    }
    json rows = json::array();
    bool ok = true;
    for (const auto& pair : field(spec, "at")) {
      if (!pair.is_array() || pair.size() != 2) bad("'at' entries are [x, p]");
      const Point x = parse_point(pair[0], "at");
      const Point p = parse_point(pair[1], "at");
      const auto r = side == ImplicitSide::XSp ? verify_xSp_estimate(ii, x, p, eo)
                                               : verify_pSx_estimate(ii, x, p, eo);
      ok = ok && r.status == Status::Pass;
      rows.push_back(to_json(r));
      if (!ok && fail_fast) break;
    }
    return {pass_fail(ok), {{"points", rows}}, {}};
  }
  if (op == "lip_S" || op == "reg_S") {
    const auto ii = implicit_instance(inst, spec);
    const auto b = op == "lip_S" ? bound_lip_S(ii, number(spec, "lip"), eo)
                                 : bound_reg_S(ii, number(spec, "lip"), eo);
    return {to_string(b.status), to_json(b), {}};
  }
  if (op == "gamma") {
    const ParamMultiMap& g = inst.map2(str(spec, "map"));
    const Roles a = anchor(inst, spec);
    std::vector<double> deltas;
    if (spec.contains("deltas")) {
      for (const auto& d : spec.at("deltas")) deltas.push_back(d.get<double>());
    } else {
      deltas.push_back(number_or(spec, "delta", 0.01));
    }
    json reports = json::array();
    bool ok = true;
    for (double d : deltas) {
      GammaInstance gi{g,
                       role(a, "y"),
                       role(a, "z"),
                       role(a, "w"),
                       number(spec, "C"),
                       number(spec, "D"),
                       number(spec, "gamma"),
                       d,
                       config_of(inst, spec, "config", g.first(), g.target(), &g.second())};
      const auto r = verify_gamma_lemma(gi, eo, fail_fast);
      ok = ok && r.status == Status::Pass;
      reports.push_back(to_json(r));
      if (!ok && fail_fast) break;
    }
    return {pass_fail(ok), {{"reports", reports}}, {}};
  }
  bad("unknown operation '" + op + "'");
}

Outcome run_solve(const Instance& inst, const json& spec, const EstimateOptions& eo,
                  bool fail_fast) {
  const MultiMap& f1 = inst.map1(map_role(spec, "F1"));
  const MultiMap& f2 = inst.map1(map_role(spec, "F2"));
  const ParamMultiMap& g = inst.map2(map_role(spec, "G"));
  const Roles a = anchor(inst, spec);
  const OpCompAnchor oa{role(a, "x"), role(a, "y"), role(a, "z"), role(a, "w")};
  const auto k = constants_of(inst, spec);
  const auto cfg = config_of(inst, spec, "config", f1.source(), g.target());
  SolveOptions so;
  if (spec.contains("rho")) so.rho = number(spec, "rho");
  if (spec.contains("tau")) so.tau = number(spec, "tau");
  so.check_hypotheses = flag(spec, "check_hypotheses", true);
  so.estimate = eo;
  json results = json::array();
  std::string status = "SUCCESS";
  for (const auto& u : point_list(spec, "targets")) {
    try {
      const auto r = solve_inclusion(f1, f2, g, oa, k, u, cfg, so);
      if (r.outcome != SolveOutcome::Success && status == "SUCCESS") {
        status = to_string(r.outcome);
      }
      results.push_back(to_json(r));
    } catch (const PreconditionError& e) {
      status = "ERROR";
      results.push_back({{"u", to_json(u)}, {"error", e.what()}});
    }
    if (status != "SUCCESS" && fail_fast) break;
  }
  return {status, {{"solutions", results}}, {}};
}

FixpReport merge(std::vector<FixpReport> parts) {
  FixpReport out = std::move(parts.front());
  for (std::size_t i = 1; i < parts.size(); ++i) {
    for (auto& row : parts[i].rows) out.rows.push_back(std::move(row));
    out.violations += parts[i].violations;
    if (parts[i].status == Status::Fail) out.status = Status::Fail;
  }
  return out;
}

Outcome run_fixpoint(const Instance& inst, const json& spec, const std::string& task,
                     const EstimateOptions& eo, bool fail_fast) {
  const std::string n1 = map_role(spec, "F1");
  const MultiMap& f2 = inst.map1(map_role(spec, "F2"));
  const SpacePtr diff = space_or_null(inst, spec, "diff");
  if (std::holds_alternative<ParamMultiMap>(inst.maps.at(n1))) {
    const ParamMultiMap& f1 = inst.map2(n1);
    const MultiMap s = parametric_fix(f1, f2);
    const MultiMap reference = implicit_map(difference(f1, f2, diff));
    json graph = json::array();
    for (const auto& [i, j] : s.graph()) {
      graph.push_back({to_json(s.source().point(i)), to_json(s.target().point(j))});
    }
    const bool agree = s == reference;
    return {pass_fail(agree),
            {{"mode", "parametric"},
             {"agrees_with_implicit_map", agree},
             {"graph_size", s.graph().size()},
             {"graph", graph}},
            {}};
  }
  const MultiMap& f1 = inst.map1(n1);
  const Roles a = anchor(inst, spec);
  CoincidenceInstance ci{f1,
                         f2,
                         role(a, "x"),
                         role(a, "y"),
                         number(spec, "l"),
                         number(spec, "m"),
                         number(spec, "alpha"),
                         number(spec, "beta"),
                         config_of(inst, spec, "config", f1.source(), f1.target()),
                         diff};
  const std::string which = spec.contains("variant") ? str(spec, "variant") : "diffix";
  std::vector<FixpVariant> variants;
  if (which == "diffix" || which == "both") variants.push_back(FixpVariant::Diffix);
  if (which == "difference" || which == "both") variants.push_back(FixpVariant::Difference);
  if (variants.empty()) bad("'variant' must be diffix, difference or both");

  Outcome out{"PASS", {{"mode", "bound"}, {"reports", json::array()}}, {}};
  json fix = json::array();
  for (const auto& p : fix_set(f1, f2).points()) fix.push_back(to_json(p));
  out.result["fix"] = fix;
  for (auto v : variants) {
    FixpReport r;
    if (spec.contains("at")) {
      std::vector<FixpReport> parts;
      for (const auto& x : point_list(spec, "at")) {
        parts.push_back(v == FixpVariant::Diffix ? verify_fixp_bound(ci, x, eo)
                                                 : verify_fixp_bound_alt(ci, x, eo));
        if (parts.back().status == Status::Fail && fail_fast) break;
      }
      if (parts.empty()) bad("'at' must list at least one point");
      r = merge(std::move(parts));
    } else {
      r = sweep_fixp_bound(ci, v, eo, fail_fast);
    }
    if (r.status == Status::Fail) out.status = "FAIL";
    const std::string file =
        variants.size() == 1 ? task + ".csv" : task + "_" + to_string(v) + ".csv";
    out.csv.emplace_back(file, fixp_csv(r));
    out.result["reports"].push_back(to_json(r));
    if (out.status != "PASS" && fail_fast) break;
  }
  return out;
}

}  // namespace

std::vector<const Task*> select_tasks(const Instance& inst, const RunOptions& opt) {
  std::vector<const Task*> out;
  for (const auto& t : inst.tasks) {
    if (opt.task != "all" && t.name != opt.task) continue;
    if (opt.command && t.command != *opt.command) {
      if (opt.task != "all") {
        bad("task '" + t.name + "' is a " + t.command + " task, not " + *opt.command);
      }
      continue;
    }
    out.push_back(&t);
  }
  if (opt.task != "all" && out.empty()) bad("no task named '" + opt.task + "'");
  return out;
}

TaskReport run_task(const Instance& inst, const Task& task, const RunOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  TaskReport r{task.name, task.command, "ERROR", json::object(), {}, 0.0};
  const json& spec = task.spec;
  EstimateOptions eo;
  if (spec.contains("resolution")) eo.resolution = spec.at("resolution").get<double>();
  if (opt.resolution) eo.resolution = *opt.resolution;

  json result;
  std::optional<std::string> error;
  try {
    Outcome o;
    if (task.command == "estimate") {
      o = run_estimate(inst, spec, eo);
    } else if (task.command == "verify-equiv") {
      o = run_equiv(inst, spec, eo);
    } else if (task.command == "certify") {
      o = run_certify(inst, spec, eo, opt.fail_fast);
    } else if (task.command == "implicit") {
      o = run_implicit(inst, spec, eo, opt.fail_fast);
    } else if (task.command == "solve") {
      o = run_solve(inst, spec, eo, opt.fail_fast);
    } else if (task.command == "verify-fixpoint") {
      o = run_fixpoint(inst, spec, task.name, eo, opt.fail_fast);
    } else {
      bad("unknown command '" + task.command + "'");
    }
    r.status = o.status;
    result = std::move(o.result);
    r.csv = std::move(o.csv);
  } catch (const Error& e) {
    error = e.what();
  } catch (const json::exception& e) {
    error = std::string("malformed task field: ") + e.what();
  }

  r.payload = {{"tool_version", tool_version()},
               {"instance_digest", inst.digest},
               {"task", spec},
               {"command", task.command},
               {"status", r.status},
               {"resolution", eo.resolution}};
  if (error) {
    r.payload["error"] = *error;
  } else {
    r.payload["result"] = std::move(result);
  }
  r.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::vector<TaskReport> run(const Instance& inst, const RunOptions& opt) {
  std::vector<TaskReport> out;
  for (const Task* t : select_tasks(inst, opt)) {
    out.push_back(run_task(inst, *t, opt));
    if (opt.fail_fast && !out.back().ok()) break;
  }
  return out;
}

json envelope(const TaskReport& r, const std::string& generated_at) {
  return {{"generated_at", generated_at},
          {"wall_time_seconds", r.wall_time},
          {"payload", r.payload}};
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

int exit_code(const std::vector<TaskReport>& reports) {
  for (const auto& r : reports) {
    if (!r.ok()) return 1;
  }
  return 0;
}

}  // namespace setreg
