#include "setreg/report.hpp"

#include <sstream>

namespace setreg {

namespace {

template <class T>
json opt(const std::optional<T>& v) {
  return v ? json(to_json(*v)) : json(nullptr);
}

json opt_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json points(const std::vector<Point>& ps) {
  json out = json::array();
  for (const auto& p : ps) out.push_back(to_json(p));
  return out;
}

template <class T>
json list(const std::vector<T>& xs) {
  json out = json::array();
  for (const auto& x : xs) out.push_back(to_json(x));
  return out;
}

std::string cell(double v) { return json(v).dump(); }

std::string cell(const ExtReal& v) { return v.is_infinite() ? "inf" : cell(v.value()); }

}  // namespace

json to_json(const Point& p) {
  json out = json::array();
  for (double v : p) out.push_back(v);
  return out;
}

json to_json(const ExtReal& v) {
  if (v.is_infinite()) return "inf";
  return v.value();
}

json to_json(const NeighborhoodConfig& c) {
  return {{"radius_u", c.radius_u},
          {"radius_v", c.radius_v},
          {"radius_w", opt_number(c.radius_w)},
          {"epsilon", c.epsilon},
          {"rho_grid", c.rho_grid}};
}

json to_json(const RateConstants& k) {
  json out = json::object();
  auto put = [&](const char* n, const std::optional<double>& v) {
    if (v) out[n] = *v;
  };
  put("L", k.L);
  put("M", k.M);
  put("C", k.C);
  put("D", k.D);
  put("l", k.l);
  put("m", k.m);
  return out;
}

json to_json(const Witness& w) {
  json out = {{"x", to_json(w.x)}, {"y", to_json(w.y)}, {"lhs", to_json(w.lhs)},
              {"coef", to_json(w.coef)}};
  if (w.u) out["u"] = to_json(*w.u);
  if (w.p) out["p"] = to_json(*w.p);
  if (w.q) out["q"] = to_json(*w.q);
  if (w.rho) out["rho"] = *w.rho;
  if (w.target) out["target"] = to_json(*w.target);
  return out;
}

json to_json(const ModulusReport& r) {
  return {{"kind", to_string(r.kind)},
          {"direction", r.direction() == Direction::Sup ? "sup" : "inf"},
          {"ref_x", to_json(r.ref_x)},
          {"ref_y", to_json(r.ref_y)},
          {"ref_p", opt(r.ref_p)},
          {"config", to_json(r.config)},
          {"lo", to_json(r.lo)},
          {"hi", to_json(r.hi)},
          {"witness", opt(r.witness)},
          {"resolution", r.resolution},
          {"iterations", r.iterations},
          {"checked", r.checked},
          {"notes", r.notes}};
}

json to_json(const EquivalenceReport& r) {
  json intervals = json::array();
  for (const auto& [lo, hi] : r.intervals) intervals.push_back({lo, hi});
  return {{"mode", r.around ? "around" : "at"},
          {"reports", list(r.reports)},
          {"intervals", intervals},
          {"tolerance", r.tolerance},
          {"agree", r.agree}};
}

json to_json(const HypothesisResult& h) {
  return {{"name", h.name},
          {"passed", h.passed},
          {"claimed", h.claimed},
          {"report", opt(h.report)},
          {"note", h.note}};
}

json to_json(const ConclusionResult& c) {
  return {{"conclusion", c.conclusion}, {"x", to_json(c.x)},     {"w", to_json(c.w)},
          {"via", points(c.via)},       {"rho", c.rho},          {"defect", to_json(c.defect)},
          {"missing", opt(c.missing)}};
}

json to_json(const CompositionCertificate& c) {
  json out = {{"theorem", to_string(c.theorem)},
              {"constants", to_json(c.constants)},
              {"rate", c.rate},
              {"hypotheses", list(c.hypotheses)},
              {"epsilon_used", c.epsilon_used},
              {"epsilon_formula", opt_number(c.epsilon_formula)},
              {"conclusions", list(c.conclusions)},
              {"status", to_string(c.status)},
              {"failure", opt(c.failure)},
              {"failed_hypothesis", c.failed_hypothesis ? json(*c.failed_hypothesis) : json()},
              {"observed_rate", to_json(c.observed_rate)},
              {"slack", c.slack},
              {"notes", c.notes}};
  if (c.symmetric_rate) out["symmetric_rate"] = *c.symmetric_rate;
  if (c.symmetric_observed_rate) out["symmetric_observed_rate"] = to_json(*c.symmetric_observed_rate);
  return out;
}

json to_json(const EstimateRow& r) {
  return {{"x", to_json(r.x)},     {"p", to_json(r.p)},
          {"lhs", to_json(r.lhs)}, {"rhs", to_json(r.rhs)},
          {"ratio", opt_number(r.ratio)}, {"holds", r.holds}};
}

json to_json(const ImplicitEstimateReport& r) {
  return {{"side", to_string(r.side)},
          {"c", r.c},
          {"hypothesis", to_json(r.hypothesis)},
          {"rows", list(r.rows)},
          {"violations", r.violations},
          {"status", to_string(r.status)}};
}

json to_json(const SolutionBound& b) {
  return {{"name", b.name},
          {"bound", b.bound},
          {"hypotheses", list(b.hypotheses)},
          {"companion", to_json(b.companion)},
          {"companion_ok", b.companion_ok},
          {"status", to_string(b.status)}};
}

json to_json(const GammaCheck& c) {
  return {{"z", to_json(c.z)},   {"w", to_json(c.w)},           {"z2", to_json(c.z2)},
          {"w2", to_json(c.w2)}, {"radius", c.radius},          {"defect", to_json(c.defect)},
          {"missing", opt(c.missing)}};
}

json to_json(const GammaReport& r) {
  return {{"delta", r.delta},
          {"hypotheses", list(r.hypotheses)},
          {"intermediate_holds", r.intermediate_holds},
          {"intermediate_checked", r.intermediate_checked},
          {"intermediate_counterexample",
           r.intermediate_counterexample ? json(*r.intermediate_counterexample) : json()},
          {"checks", list(r.checks)},
          {"violations", r.violations},
          {"status", to_string(r.status)}};
}

json to_json(const EkelandPoint& e) {
  json trace = json::array();
  for (const auto& [p, h] : e.trace) trace.push_back({{"point", to_json(p)}, {"h", h}});
  return {{"point", to_json(e.point)},
          {"value", e.value},
          {"reference", to_json(e.reference)},
          {"norm", e.norm},
          {"iterations", e.iterations},
          {"trace", trace},
          {"ek1", e.ek1},
          {"ek2", e.ek2}};
}

json to_json(const SolveResult& r) {
  return {{"outcome", to_string(r.outcome)},
          {"u", to_json(r.u)},
          {"x", to_json(r.x)},
          {"residual", r.residual},
          {"rho", r.rho},
          {"tau", r.tau},
          {"rate", r.rate},
          {"domain_size", r.domain_size},
          {"hypotheses", list(r.hypotheses)},
          {"evp", to_json(r.evp)},
          {"certified", r.certified}};
}

json to_json(const ProofConstraint& c) {
  return {{"name", c.name}, {"lhs", c.lhs}, {"rhs", c.rhs}, {"holds", c.holds}};
}

json to_json(const FixpRow& r) {
  json out = {{"x", to_json(r.x)},
              {"lhs", to_json(r.lhs)},
              {"rhs", to_json(r.rhs)},
              {"ratio", opt_number(r.ratio)},
              {"holds", r.holds}};
  if (r.rhs_diffix) out["rhs_diffix"] = to_json(*r.rhs_diffix);
  return out;
}

json to_json(const FixpReport& r) {
  return {{"variant", to_string(r.variant)},
          {"factor", r.factor},
          {"hypotheses", list(r.hypotheses)},
          {"fix", points(r.fix)},
          {"rows", list(r.rows)},
          {"violations", r.violations},
          {"proof", list(r.proof)},
          {"binding", r.binding ? json(*r.binding) : json()},
          {"status", to_string(r.status)}};
}

std::string fixp_csv(const FixpReport& r) {
  std::ostringstream os;
  os << "x,lhs,rhs,ratio,status\n";
  for (const auto& row : r.rows) {
    for (std::size_t i = 0; i < row.x.size(); ++i) os << (i ? ";" : "") << cell(row.x[i]);
    os << ',' << cell(row.lhs) << ',' << cell(row.rhs) << ','
       << (row.ratio ? cell(*row.ratio) : "") << ',' << (row.holds ? "PASS" : "FAIL") << '\n';
  }
  return os.str();
}

std::string pretty_report(const json& report) {
  const json& p = report.contains("payload") ? report.at("payload") : report;
  std::ostringstream os;
  auto field = [&](const char* label, const json& j, const char* key) {
    if (j.contains(key)) {
      os << label << ": " << (j.at(key).is_string() ? j.at(key).get<std::string>() : j.at(key).dump())
         << '\n';
    }
  };
  field("task", p.contains("task") ? p.at("task") : json::object(), "name");
  field("command", p, "command");
  field("status", p, "status");
  field("instance", p, "instance_digest");
  field("tool", p, "tool_version");
  field("generated", report, "generated_at");
  field("wall time (s)", report, "wall_time_seconds");
  if (p.contains("error")) field("error", p, "error");
  if (p.contains("result")) os << "result:\n" << p.at("result").dump(2) << '\n';
  return os.str();
}

}  // namespace setreg
