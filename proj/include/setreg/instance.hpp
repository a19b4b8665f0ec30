#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "setreg/composition.hpp"

namespace setreg {

using json = nlohmann::json;

/// Malformed JSON; carries the 1-based line and column.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// A declaration or reference that does not validate; names the culprit.
class InstanceError : public Error {
 public:
  using Error::Error;
};

/// A task (or a declaration) whose enumeration would exceed the cap.
/// `subject` reads like "task 'name'".
class CapExceeded : public Error {
 public:
  CapExceeded(std::string subject, double tuples, std::size_t cap);
  const std::string& subject() const { return subject_; }
  double tuples() const { return tuples_; }

 private:
  std::string subject_;
  double tuples_;
};

constexpr std::size_t kDefaultCap = 10'000'000;

using AnyMap = std::variant<MultiMap, ParamMultiMap>;

struct Task {
  std::string name;
  std::string command;
  json spec;
  double tuples = 0.0;  // product of the sizes of the grids the task touches
};

struct Instance {
  std::string origin;
  std::string digest;
  std::map<std::string, SpacePtr> spaces;
  std::map<std::string, AnyMap> maps;
  std::map<std::string, RateConstants> constants;
  std::map<std::string, json> anchors;
  std::map<std::string, NeighborhoodConfig> configs;
  std::vector<Task> tasks;

  const MultiMap& map1(const std::string& name) const;
  const ParamMultiMap& map2(const std::string& name) const;
  SpacePtr space(const std::string& name) const;
  const NeighborhoodConfig& config(const std::string& name) const;
  const RateConstants& rate_constants(const std::string& name) const;
};

/// "fnv1a64:" followed by 16 hex digits of the 64-bit FNV-1a hash.
std::string content_digest(std::string_view bytes);

const std::vector<std::string>& task_commands();

Instance parse_instance(const std::string& text, std::size_t cap = kDefaultCap,
                        std::string origin = "<memory>");
Instance load_instance(const std::string& path, std::size_t cap = kDefaultCap);

/// A point written as a number (1-D) or an array of numbers.
Point parse_point(const json& j, const std::string& where);
/// A named anchor or an inline object of role -> point.
std::map<std::string, Point> resolve_anchor(const Instance& inst, const json& j,
                                            const std::string& where);
NeighborhoodConfig parse_config(const json& j, const std::string& where);
RateConstants parse_constants(const json& j, const std::string& where);

}  // namespace setreg
