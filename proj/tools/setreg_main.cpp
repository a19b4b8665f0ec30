#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "setreg/report.hpp"
#include "setreg/runner.hpp"

namespace fs = std::filesystem;
using namespace setreg;

namespace {

constexpr int kUsage = 2;
constexpr int kCap = 3;

struct RunArgs {
  std::string instance;
  std::string task = "all";
  std::string out = "reports";
  bool fail_fast = false;
  std::optional<double> resolution;
  std::size_t cap = kDefaultCap;
};

void add_run_flags(CLI::App* sub, RunArgs& a) {
  sub->add_option("--instance", a.instance, "instance file (JSON)")->required();
  sub->add_option("--task", a.task, "task name or 'all'");
  sub->add_option("--out", a.out, "directory for reports");
  sub->add_flag("--fail-fast", a.fail_fast, "stop at the first failing task or check");
  sub->add_option("--resolution", a.resolution, "bisection resolution of bound estimates")
      ->check(CLI::PositiveNumber);
  sub->add_option("--cap", a.cap, "largest number of enumerated tuples per task");
}

void write_file(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << body;
}

int run_command(const RunArgs& a, std::optional<std::string> command) {
  Instance inst;
  try {
    inst = load_instance(a.instance, a.cap);
  } catch (const CapExceeded& e) {
    std::cerr << "cap exceeded: " << e.what() << '\n';
    return kCap;
  } catch (const ParseError& e) {
    std::cerr << a.instance << ": parse error at " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    std::cerr << a.instance << ": " << e.what() << '\n';
    return kUsage;
  }

  RunOptions opt;
  opt.task = a.task;
  opt.command = std::move(command);
  opt.fail_fast = a.fail_fast;
  opt.resolution = a.resolution;

  std::vector<const Task*> tasks;
  try {
    tasks = select_tasks(inst, opt);
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return kUsage;
  }
  if (tasks.empty()) {
    std::cerr << "no " << (opt.command ? *opt.command + " " : "") << "tasks in "
              << a.instance << '\n';
    return kUsage;
  }

  std::error_code ec;
  fs::create_directories(a.out, ec);
  if (ec) {
    std::cerr << "cannot create '" << a.out << "': " << ec.message() << '\n';
    return kUsage;
  }

  std::vector<TaskReport> reports;
  for (const Task* t : tasks) {
    reports.push_back(run_task(inst, *t, opt));
    const auto& r = reports.back();
    write_file(fs::path(a.out) / (r.name + ".json"), envelope(r, utc_timestamp()).dump(2) + "\n");
    for (const auto& [name, body] : r.csv) write_file(fs::path(a.out) / name, body);
    std::cout << r.name << ' ' << r.command << ' ' << r.status;
    if (r.payload.contains("error")) std::cout << ": " << r.payload["error"].get<std::string>();
    std::cout << '\n';
    if (opt.fail_fast && !r.ok()) break;
  }
  return exit_code(reports);
}

int report_command(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "cannot open '" << path << "'\n";
    return kUsage;
  }
  std::ostringstream os;
  os << in.rdbuf();
  json j;
  try {
    j = json::parse(os.str());
  } catch (const json::parse_error& e) {
    std::cerr << path << ": " << e.what() << '\n';
    return kUsage;
  }
  std::cout << pretty_report(j);
  const json& p = j.contains("payload") ? j.at("payload") : j;
  const std::string status = p.value("status", "");
  return status == "PASS" || status == "SUCCESS" ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Verification toolkit for set-valued maps on sampled grids"};
  app.set_version_flag("--version", tool_version());
  app.require_subcommand(1);

  RunArgs args;
  std::vector<std::pair<CLI::App*, std::optional<std::string>>> runners;
  const std::pair<const char*, const char*> commands[] = {
      {"estimate", "bracket modulus bounds of a map"},
      {"verify-equiv", "check the openness / Lipschitz / regularity equivalences"},
      {"certify", "certify a composition theorem instance"},
      {"implicit", "verify implicit-map estimates and bounds"},
      {"solve", "solve inclusions with the Ekeland descent"},
      {"verify-fixpoint", "check the fixed-point distance bound"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    add_run_flags(sub, args);
    runners.emplace_back(sub, std::string(name));
  }
  auto* all = app.add_subcommand("run", "run every selected task regardless of command");
  add_run_flags(all, args);
  runners.emplace_back(all, std::nullopt);

  std::string report_path;
  auto* report = app.add_subcommand("report", "pretty-print a stored report");
  report->add_option("file", report_path, "report JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (report->parsed()) return report_command(report_path);
    for (const auto& [sub, command] : runners) {
      if (sub->parsed()) return run_command(args, command);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
