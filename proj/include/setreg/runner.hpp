#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "setreg/instance.hpp"

namespace setreg {

std::string tool_version();

struct RunOptions {
  std::string task = "all";            // a task name or "all"
  std::optional<std::string> command;  // only tasks of this command
  bool fail_fast = false;
  std::optional<double> resolution;    // overrides every task's resolution
};

/// Task status strings: PASS, FAIL, SUCCESS, DISCRETIZATION_GAP, ERROR.
struct TaskReport {
  std::string name;
  std::string command;
  std::string status;
  json payload;  // deterministic: no clocks, no paths
  std::vector<std::pair<std::string, std::string>> csv;  // file name, contents
  double wall_time = 0.0;

  bool ok() const { return status == "PASS" || status == "SUCCESS"; }
};

/// The tasks selected by opt, in file order. Throws InstanceError if a named
/// task does not exist or does not match the command filter.
std::vector<const Task*> select_tasks(const Instance& inst, const RunOptions& opt);

TaskReport run_task(const Instance& inst, const Task& task, const RunOptions& opt);

/// Runs the selected tasks in order; stops after the first non-passing task
/// when opt.fail_fast is set.
std::vector<TaskReport> run(const Instance& inst, const RunOptions& opt);

/// {"generated_at", "wall_time_seconds", "payload"}.
json envelope(const TaskReport& r, const std::string& generated_at);
std::string utc_timestamp();

/// 0 if every report is PASS or SUCCESS, else 1.
int exit_code(const std::vector<TaskReport>& reports);

}  // namespace setreg
