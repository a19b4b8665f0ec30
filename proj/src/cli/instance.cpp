#include "setreg/instance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "setreg/expression.hpp"

namespace setreg {

ParseError::ParseError(const std::string& what, std::size_t line, std::size_t column)
    : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
            what),
      line_(line),
      column_(column) {}

CapExceeded::CapExceeded(std::string subject, double tuples, std::size_t cap)
    : Error([&] {
        std::ostringstream os;
        os.precision(15);
        os << subject << " enumerates " << tuples << " tuples, above the cap of " << cap;
        return os.str();
      }()),
      subject_(std::move(subject)),
      tuples_(tuples) {}

std::string content_digest(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string("fnv1a64:") + buf;
}

const std::vector<std::string>& task_commands() {
  static const std::vector<std::string> c{"estimate", "verify-equiv",     "certify",
                                          "implicit", "solve", "verify-fixpoint"};
  return c;
}

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  throw InstanceError(where + ": " + what);
}

const json& need(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) bad(where, std::string("missing '") + key + "'");
  return obj.at(key);
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) bad(where, "expected a number");
  return j.get<double>();
}

std::string text(const json& j, const std::string& where) {
  if (!j.is_string()) bad(where, "expected a string");
  return j.get<std::string>();
}

Norm norm_of(const json& decl, const std::string& where) {
  if (!decl.contains("norm")) return Norm::Sum;
  try {
    return parse_norm(text(decl.at("norm"), where));
  } catch (const InstanceError&) {
    throw;
  } catch (const Error& e) {
    bad(where, e.what());
  }
}

Axis axis_of(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) bad(where, "an axis is [lo, hi, step]");
  Axis a{number(j[0], where), number(j[1], where), number(j[2], where)};
  if (!(a.step > 0.0) || a.hi < a.lo) bad(where, "axis needs lo <= hi and step > 0");
  return a;
}

OffGridPolicy policy_of(const json& decl, const std::string& where) {
  if (!decl.contains("off_grid")) return OffGridPolicy::Reject;
  const auto p = text(decl.at("off_grid"), where);
  if (p == "reject") return OffGridPolicy::Reject;
  if (p == "drop") return OffGridPolicy::Drop;
  bad(where, "off_grid must be 'reject' or 'drop'");
}

class Builder {
 public:
  Builder(const json& root, Instance& inst, std::size_t cap)
      : root_(root), inst_(inst), cap_(cap) {}

  void spaces() {
    const json& decls = need(root_, "spaces", "instance");
    if (!decls.is_object() || decls.empty()) bad("spaces", "expected a nonempty object");
    for (const auto& [name, _] : decls.items()) space(name);
  }

  void maps() {
    const json& decls = need(root_, "maps", "instance");
    if (!decls.is_object()) bad("maps", "expected an object");
    for (const auto& [name, _] : decls.items()) map(name);
  }

  /// Grids a declared map enumerates, read off the declarations before any
  /// graph is built.
  std::vector<const GridSpace*> touched(const std::string& name) {
    const std::string where = "map '" + name + "'";
    const json& decls = root_.at("maps");
    if (!decls.contains(name)) bad(where, "is not declared");
    if (!visiting_.insert("touch:" + name).second) bad(where, "is defined in terms of itself");
    const json& d = decls.at(name);
    if (!d.is_object()) bad(where, "expected an object");
    const std::string kind = text(need(d, "kind", where), where);
    std::vector<const GridSpace*> out;
    auto add = [&](const GridSpace* s) {
      if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
    };
    if (kind == "identity") {
      add(space_ref(need(d, "on", where), where).get());
    } else if (kind == "inverse") {
      for (auto* s : touched(text(need(d, "of", where), where))) add(s);
    } else if (kind == "difference") {
      for (const char* side : {"left", "right"}) {
        for (auto* s : touched(text(need(d, side, where), where))) add(s);
      }
      if (d.contains("to")) add(space_ref(d.at("to"), where).get());
    } else {
      for (const auto& s : sources(d, where)) add(s.get());
      add(space_ref(need(d, "to", where), where).get());
    }
    visiting_.erase("touch:" + name);
    return out;
  }

 private:
  static double count(const json& axis) {
    if (!axis.is_array() || axis.size() != 3 || !axis[0].is_number() || !axis[1].is_number() ||
        !axis[2].is_number() || !(axis[2].get<double>() > 0.0)) {
      return 1.0;  // rejected with a precise message when the axis is parsed
    }
    return std::floor((axis[1].get<double>() - axis[0].get<double>()) / axis[2].get<double>() +
                      1e-9) + 1.0;
  }

  void guard(const json& d, const std::string& where) {
    double n = 1.0;
    if (d.contains("range")) {
      n = count(d.at("range"));
    } else if (d.contains("axes") && d.at("axes").is_array()) {
      for (const auto& a : d.at("axes")) n *= count(a);
    }
    if (n > static_cast<double>(cap_)) throw CapExceeded(where, n, cap_);
  }

  SpacePtr space(const std::string& name) {
    if (auto it = inst_.spaces.find(name); it != inst_.spaces.end()) return it->second;
    const std::string where = "space '" + name + "'";
    const json& decls = root_.at("spaces");
    if (!decls.contains(name)) bad(where, "is not declared");
    if (!visiting_.insert(name).second) bad(where, "is defined in terms of itself");
    const json& d = decls.at(name);
    if (!d.is_object()) bad(where, "expected an object");
    guard(d, where);
    SpacePtr s;
    try {
      if (d.contains("range")) {
        const Axis a = axis_of(d.at("range"), where);
        s = line_space(name, a.lo, a.hi, a.step, norm_of(d, where));
      } else if (d.contains("axes")) {
        std::vector<Axis> axes;
        for (const auto& a : d.at("axes")) axes.push_back(axis_of(a, where));
        if (axes.empty()) bad(where, "axes must be nonempty");
        s = lattice_space(name, axes, norm_of(d, where));
      } else if (d.contains("points")) {
        std::vector<Point> pts;
        for (const auto& p : d.at("points")) pts.push_back(parse_point(p, where));
        if (pts.empty()) bad(where, "points must be nonempty");
        s = make_space(name, std::move(pts), norm_of(d, where));
      } else if (d.contains("product")) {
        std::vector<SpacePtr> factors;
        for (const auto& f : d.at("product")) factors.push_back(space(text(f, where)));
        if (factors.size() < 2) bad(where, "a product needs at least two factors");
        double n = 1.0;
        for (const auto& f : factors) n *= static_cast<double>(f->size());
        if (n > static_cast<double>(cap_)) throw CapExceeded(where, n, cap_);
        s = product_space(factors);
      } else {
        bad(where, "needs one of range, axes, points, product");
      }
    } catch (const InstanceError&) {
      throw;
    } catch (const Error& e) {
      bad(where, e.what());
    }
    visiting_.erase(name);
    inst_.spaces.emplace(name, s);
    return s;
  }

  SpacePtr space_ref(const json& j, const std::string& where) {
    const std::string n = text(j, where);
    if (!root_.at("spaces").contains(n)) bad(where, "unknown space '" + n + "'");
    return space(n);
  }

  const AnyMap& map(const std::string& name) {
    if (auto it = inst_.maps.find(name); it != inst_.maps.end()) return it->second;
    const std::string where = "map '" + name + "'";
    const json& decls = root_.at("maps");
    if (!decls.contains(name)) bad(where, "is not declared");
    if (!visiting_.insert("map:" + name).second) bad(where, "is defined in terms of itself");
    const json& d = decls.at(name);
    if (!d.is_object()) bad(where, "expected an object");
    const std::string kind = text(need(d, "kind", where), where);
    std::optional<AnyMap> out;
    try {
      out = build(kind, d, where);
    } catch (const InstanceError&) {
      throw;
    } catch (const Error& e) {
      bad(where, e.what());
    }
    visiting_.erase("map:" + name);
    return inst_.maps.emplace(name, std::move(*out)).first->second;
  }

  std::vector<SpacePtr> sources(const json& d, const std::string& where) {
    const json& f = need(d, "from", where);
    std::vector<SpacePtr> out;
    if (f.is_array()) {
      for (const auto& s : f) out.push_back(space_ref(s, where));
    } else {
      out.push_back(space_ref(f, where));
    }
    if (out.size() > 2) bad(where, "maps take one or two arguments");
    return out;
  }

  AnyMap build(const std::string& kind, const json& d, const std::string& where) {
    if (kind == "identity") {
      return identity_map(space_ref(need(d, "on", where), where));
    }
    if (kind == "inverse") {
      const std::string of = text(need(d, "of", where), where);
      const AnyMap& m = map_ref(of, where);
      if (!std::holds_alternative<MultiMap>(m)) bad(where, "only one-argument maps invert");
      return inverse(std::get<MultiMap>(m));
    }
    if (kind == "difference") {
      const AnyMap& l = map_ref(text(need(d, "left", where), where), where);
      const AnyMap& r = map_ref(text(need(d, "right", where), where), where);
      if (!std::holds_alternative<MultiMap>(r)) bad(where, "right operand must take one argument");
      SpacePtr to = d.contains("to") ? space_ref(d.at("to"), where) : nullptr;
      if (std::holds_alternative<MultiMap>(l)) {
        return difference(std::get<MultiMap>(l), std::get<MultiMap>(r), to);
      }
      return difference(std::get<ParamMultiMap>(l), std::get<MultiMap>(r), to);
    }
    const auto from = sources(d, where);
    const SpacePtr to = space_ref(need(d, "to", where), where);
    if (kind == "linear") {
      if (from.size() != 1) bad(where, "linear maps take one argument");
      std::vector<std::vector<double>> rows;
      for (const auto& row : need(d, "matrix", where)) {
        std::vector<double> r;
        for (const auto& v : row) r.push_back(number(v, where));
        rows.push_back(std::move(r));
      }
      return from_linear(Matrix::from_rows(rows), from[0], to, policy_of(d, where));
    }
    if (kind == "constant") {
      std::vector<Point> values;
      for (const auto& v : need(d, "values", where)) values.push_back(parse_point(v, where));
      if (from.size() == 1) {
        std::vector<std::pair<Point, Point>> pairs;
        for (const auto& p : from[0]->points()) {
          for (const auto& v : values) pairs.push_back({p, v});
        }
        return from_pairs(from[0], to, pairs);
      }
      std::vector<ParamMultiMap::Triple> triples;
      std::vector<std::size_t> idx;
      for (const auto& v : values) idx.push_back(to->index_of(v));
      for (std::size_t i = 0; i < from[0]->size(); ++i) {
        for (std::size_t j = 0; j < from[1]->size(); ++j) {
          for (auto k : idx) triples.push_back({i, j, k});
        }
      }
      return ParamMultiMap(from[0], from[1], to, std::move(triples));
    }
    if (kind == "explicit") {
      const json& pairs = need(d, "pairs", where);
      if (from.size() == 1) {
        std::vector<std::pair<Point, Point>> out;
        for (const auto& p : pairs) {
          if (!p.is_array() || p.size() != 2) bad(where, "pairs are [x, y]");
          out.push_back({parse_point(p[0], where), parse_point(p[1], where)});
        }
        return from_pairs(from[0], to, out);
      }
      std::vector<ParamMultiMap::Triple> out;
      for (const auto& p : pairs) {
        if (!p.is_array() || p.size() != 3) bad(where, "two-argument pairs are [a, b, y]");
        out.push_back({from[0]->index_of(parse_point(p[0], where)),
                       from[1]->index_of(parse_point(p[1], where)),
                       to->index_of(parse_point(p[2], where))});
      }
      return ParamMultiMap(from[0], from[1], to, std::move(out));
    }
    if (kind == "formula") {
      return formula(d, from, to, where);
    }
    bad(where, "unknown kind '" + kind + "'");
  }

  AnyMap formula(const json& d, const std::vector<SpacePtr>& from, const SpacePtr& to,
                 const std::string& where) {
    std::vector<std::string> args;
    if (d.contains("args")) {
      for (const auto& a : d.at("args")) args.push_back(text(a, where));
    } else {
      args = from.size() == 1 ? std::vector<std::string>{"x"}
                              : std::vector<std::string>{"x", "p"};
    }
    if (args.size() != from.size()) bad(where, "one argument name per source grid");
    // 1-D arguments are used by name, n-D ones as name1 .. nameN.
    std::vector<std::string> vars;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (from[i]->dim() == 1) {
        vars.push_back(args[i]);
      } else {
        for (std::size_t k = 0; k < from[i]->dim(); ++k) {
          vars.push_back(args[i] + std::to_string(k + 1));
        }
      }
    }
    std::vector<std::string> texts;
    const json& f = need(d, "formula", where);
    if (f.is_array()) {
      for (const auto& t : f) texts.push_back(text(t, where));
    } else {
      texts.push_back(text(f, where));
    }
    if (texts.size() != to->dim()) bad(where, "one formula per target coordinate");
    auto exprs = std::make_shared<std::vector<Expression>>();
    for (const auto& t : texts) exprs->emplace_back(t, vars);
    const auto policy = d.contains("off_grid") ? policy_of(d, where) : OffGridPolicy::Drop;
    auto eval = [exprs](std::vector<double> v) {
      Point out;
      for (const auto& e : *exprs) out.push_back(e.eval(v));
      return out;
    };
    if (from.size() == 1) {
      return from_function(from[0], to, [eval](const Point& x) { return eval(x); }, policy);
    }
    return from_function(from[0], from[1], to,
                         [eval](const Point& a, const Point& b) {
                           std::vector<double> v = a;
                           v.insert(v.end(), b.begin(), b.end());
                           return eval(std::move(v));
                         },
                         policy);
  }

  const AnyMap& map_ref(const std::string& name, const std::string& where) {
    if (!root_.at("maps").contains(name)) bad(where, "unknown map '" + name + "'");
    return map(name);
  }

  const json& root_;
  Instance& inst_;
  std::size_t cap_;
  std::set<std::string> visiting_;
};

std::vector<std::string> referenced_maps(const json& spec, const std::string& where) {
  std::vector<std::string> out;
  if (spec.contains("map")) out.push_back(text(spec.at("map"), where));
  if (spec.contains("maps")) {
    const json& m = spec.at("maps");
    if (!m.is_object()) bad(where, "'maps' is an object of role -> map name");
    for (const auto& [role, v] : m.items()) out.push_back(text(v, where + " role " + role));
  }
  return out;
}

template <class T>
void check_ref(const json& spec, const char* key, const std::map<std::string, T>& table,
               const std::string& where) {
  if (!spec.contains(key) || !spec.at(key).is_string()) return;
  const auto n = spec.at(key).get<std::string>();
  if (!table.count(n)) bad(where, std::string("unknown ") + key + " '" + n + "'");
}

}  // namespace

Point parse_point(const json& j, const std::string& where) {
  if (j.is_number()) return {j.get<double>()};
  if (!j.is_array() || j.empty()) bad(where, "a point is a number or a nonempty array");
  Point p;
  for (const auto& v : j) p.push_back(number(v, where));
  return p;
}

NeighborhoodConfig parse_config(const json& j, const std::string& where) {
  if (!j.is_object()) bad(where, "a config is an object");
  NeighborhoodConfig c;
  c.radius_u = number(need(j, "radius_u", where), where);
  c.radius_v = number(need(j, "radius_v", where), where);
  if (j.contains("radius_w")) c.radius_w = number(j.at("radius_w"), where);
  c.epsilon = number(need(j, "epsilon", where), where);
  const json& rho = need(j, "rho", where);
  if (rho.is_array()) {
    for (const auto& r : rho) c.rho_grid.push_back(number(r, where));
  } else if (rho.is_object() && rho.contains("geometric")) {
    c.rho_grid = geometric_rho_grid(c.epsilon, rho.at("geometric").get<std::size_t>());
  } else {
    bad(where, "rho is a list or {\"geometric\": count}");
  }
  try {
    c.validate();
  } catch (const Error& e) {
    bad(where, e.what());
  }
  return c;
}

RateConstants parse_constants(const json& j, const std::string& where) {
  if (!j.is_object()) bad(where, "constants are an object");
  RateConstants k;
  for (const auto& [key, v] : j.items()) {
    const double x = number(v, where + " constant " + key);
    if (key == "L") k.L = x;
    else if (key == "M") k.M = x;
    else if (key == "C") k.C = x;
    else if (key == "D") k.D = x;
    else if (key == "l") k.l = x;
    else if (key == "m") k.m = x;
    else bad(where, "unknown constant '" + key + "'");
  }
  return k;
}

std::map<std::string, Point> resolve_anchor(const Instance& inst, const json& j,
                                            const std::string& where) {
  const json* obj = &j;
  if (j.is_string()) {
    const auto it = inst.anchors.find(j.get<std::string>());
    if (it == inst.anchors.end()) bad(where, "unknown anchor '" + j.get<std::string>() + "'");
    obj = &it->second;
  }
  if (!obj->is_object()) bad(where, "an anchor is an object of role -> point");
  std::map<std::string, Point> out;
  for (const auto& [role, p] : obj->items()) out.emplace(role, parse_point(p, where + " " + role));
  return out;
}

const MultiMap& Instance::map1(const std::string& name) const {
  const auto it = maps.find(name);
  if (it == maps.end()) throw InstanceError("unknown map '" + name + "'");
  if (!std::holds_alternative<MultiMap>(it->second)) {
    throw InstanceError("map '" + name + "' takes two arguments; one expected");
  }
  return std::get<MultiMap>(it->second);
}

const ParamMultiMap& Instance::map2(const std::string& name) const {
  const auto it = maps.find(name);
  if (it == maps.end()) throw InstanceError("unknown map '" + name + "'");
  if (!std::holds_alternative<ParamMultiMap>(it->second)) {
    throw InstanceError("map '" + name + "' takes one argument; two expected");
  }
  return std::get<ParamMultiMap>(it->second);
}

SpacePtr Instance::space(const std::string& name) const {
  const auto it = spaces.find(name);
  if (it == spaces.end()) throw InstanceError("unknown space '" + name + "'");
  return it->second;
}

const NeighborhoodConfig& Instance::config(const std::string& name) const {
  const auto it = configs.find(name);
  if (it == configs.end()) throw InstanceError("unknown config '" + name + "'");
  return it->second;
}

const RateConstants& Instance::rate_constants(const std::string& name) const {
  const auto it = constants.find(name);
  if (it == constants.end()) throw InstanceError("unknown constants '" + name + "'");
  return it->second;
}

Instance parse_instance(const std::string& body, std::size_t cap, std::string origin) {
  json root;
  try {
    root = json::parse(body);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, body.size());
    for (std::size_t i = 0; i < upto; ++i) {
      if (body[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    // nlohmann prefixes its own position; keep only the description.
    std::string what = e.what();
    if (const auto k = what.find("column"); k != std::string::npos) {
      if (const auto c = what.find(": ", k); c != std::string::npos) what = what.substr(c + 2);
    }
    throw ParseError(what, line, col);
  }
  if (!root.is_object()) throw ParseError("the instance must be a JSON object", 1, 1);
  for (const auto& [key, _] : root.items()) {
    static const std::set<std::string> known{"spaces", "maps", "constants", "anchors",
                                             "configs", "tasks", "description"};
    if (!known.count(key)) bad("instance", "unknown section '" + key + "'");
  }

  Instance inst;
  inst.origin = std::move(origin);
  inst.digest = content_digest(body);
  Builder b(root, inst, cap);
  b.spaces();

  // Names, commands and tuple counts are checked before any graph is built,
  // so an oversized task fails here and not halfway through enumeration.
  const json& tasks = need(root, "tasks", "instance");
  if (!tasks.is_array()) bad("tasks", "expected an array");
  const json& map_decls = need(root, "maps", "instance");
  if (!map_decls.is_object()) bad("maps", "expected an object");
  std::set<std::string> names;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const json& t = tasks[i];
    Task task;
    task.name = t.contains("name") ? text(t.at("name"), "task " + std::to_string(i))
                                   : "task" + std::to_string(i);
    const std::string where = "task '" + task.name + "'";
    if (!t.is_object()) bad(where, "expected an object");
    if (!names.insert(task.name).second) bad(where, "duplicate task name");
    task.command = text(need(t, "command", where), where);
    const auto& cmds = task_commands();
    if (std::find(cmds.begin(), cmds.end(), task.command) == cmds.end()) {
      bad(where, "unknown command '" + task.command + "'");
    }
    static const std::map<std::string, std::vector<const char*>> required{
        {"estimate", {"map", "kind", "anchor"}},
        {"verify-equiv", {"map", "anchor"}},
        {"certify", {"theorem", "maps", "constants"}},
        {"implicit", {"operation", "map", "anchor"}},
        {"solve", {"maps", "anchor", "constants", "targets"}},
        {"verify-fixpoint", {"maps"}},
    };
    for (const char* key : required.at(task.command)) need(t, key, where);
    std::vector<const GridSpace*> touched;
    auto add = [&](const GridSpace* s) {
      if (std::find(touched.begin(), touched.end(), s) == touched.end()) touched.push_back(s);
    };
    for (const auto& m : referenced_maps(t, where)) {
      if (!map_decls.contains(m)) bad(where, "unknown map '" + m + "'");
      for (const auto* s : b.touched(m)) add(s);
    }
    for (const char* key : {"diff", "diff_symmetric"}) {
      if (t.contains(key)) {
        const auto n = text(t.at(key), where);
        if (!inst.spaces.count(n)) bad(where, "unknown space '" + n + "'");
        add(inst.spaces.at(n).get());
      }
    }
    task.tuples = touched.empty() ? 0.0 : 1.0;
    for (const auto* s : touched) task.tuples *= static_cast<double>(s->size());
    if (task.tuples > static_cast<double>(cap)) throw CapExceeded(where, task.tuples, cap);
    task.spec = t;
    inst.tasks.push_back(std::move(task));
  }
  for (const auto& [name, _] : map_decls.items()) {
    double n = 1.0;
    for (const auto* s : b.touched(name)) n *= static_cast<double>(s->size());
    if (n > static_cast<double>(cap)) throw CapExceeded("map '" + name + "'", n, cap);
  }

  b.maps();
  if (root.contains("constants")) {
    for (const auto& [name, v] : root.at("constants").items()) {
      inst.constants.emplace(name, parse_constants(v, "constants '" + name + "'"));
    }
  }
  if (root.contains("anchors")) {
    for (const auto& [name, v] : root.at("anchors").items()) {
      if (!v.is_object()) bad("anchor '" + name + "'", "expected an object of role -> point");
      for (const auto& [role, p] : v.items()) parse_point(p, "anchor '" + name + "' " + role);
      inst.anchors.emplace(name, v);
    }
  }
  if (root.contains("configs")) {
    for (const auto& [name, v] : root.at("configs").items()) {
      inst.configs.emplace(name, parse_config(v, "config '" + name + "'"));
    }
  }
  for (const auto& task : inst.tasks) {
    const std::string where = "task '" + task.name + "'";
    check_ref(task.spec, "config", inst.configs, where);
    check_ref(task.spec, "solution_config", inst.configs, where);
    check_ref(task.spec, "constants", inst.constants, where);
    check_ref(task.spec, "anchor", inst.anchors, where);
  }
  return inst;
}

Instance load_instance(const std::string& path, std::size_t cap) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InstanceError("cannot open instance file '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return parse_instance(os.str(), cap, path);
}

}  // namespace setreg
