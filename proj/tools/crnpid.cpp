// crnpid command-line tool.
//
//   crnpid simulate <file.crn | builtin> [--t-end T] [-o out.csv]
//   crnpid compose [--config exp.cfg] [--set key=value]... [-o loop.crn]
//   crnpid experiment [--config exp.cfg] [--set key=value]... [--out-dir DIR]
//   crnpid verify derivative|proportional --scales 1,10 [-o report.csv]
//   crnpid fmt <file.crn> [--in-place]
//
// Exit codes: 0 success, 1 numerical failure, 2 usage or parse error.

#include <CLI11.hpp>

#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "crnpid/analysis.hpp"
#include "crnpid/builtin.hpp"
#include "crnpid/config.hpp"
#include "crnpid/dsl.hpp"
#include "crnpid/loop.hpp"
#include "crnpid/sim.hpp"

namespace {

using namespace crnpid;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitNumerical = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

CrnDocument load_network(const std::string& name) {
  if (!fs::exists(name)) {
    if (auto builtin = builtin_network(name)) return *builtin;
    throw UsageError("no such file or builtin network: '" + name + "'");
  }
  return load_crn_file(name);
}

Method parse_method(const std::string& name) {
  if (name == "rk45") return Method::DormandPrince45;
  if (name == "rosenbrock") return Method::Rosenbrock23;
  throw UsageError("unknown method '" + name + "' (expected rk45 or rosenbrock)");
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write '" + path.string() + "'");
  out << text;
}

// Writes to `path`, or stdout when empty or "-".
template <typename Fn>
void emit(const std::string& path, Fn&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write '" + path + "'");
  write(out);
}

struct SimulateArgs {
  std::string input;
  std::string output;
  double t_end = 10.0;
  double rel_tol = 1e-6;
  double abs_tol = 1e-9;
  double max_step = 0.0;
  std::size_t grid = 0;
  std::string method = "rk45";
};

int run_simulate(const SimulateArgs& args) {
  const CrnDocument doc = load_network(args.input);
  SimOptions opts;
  opts.t_end = args.t_end;
  opts.rel_tol = args.rel_tol;
  opts.abs_tol = args.abs_tol;
  if (args.max_step > 0.0) opts.max_step = args.max_step;
  if (args.grid > 0) opts.grid_intervals = args.grid;
  opts.method = parse_method(args.method);
  const Trajectory traj = simulate(doc, opts);
  emit(args.output, [&](std::ostream& os) { write_csv(os, traj); });
  return kExitOk;
}

struct ExperimentArgs {
  std::string config;
  std::vector<std::string> assignments;
  std::string out_dir;
  std::string output;  // compose only
};

ExperimentConfig load_config(const ExperimentArgs& args) {
  ExperimentConfig config = args.config.empty() ? ExperimentConfig{} : load_experiment_config(args.config);
  for (const auto& a : args.assignments) config.set_assignment(a);
  if (!args.out_dir.empty()) config.out_dir = args.out_dir;
  return config;
}

int run_compose(const ExperimentArgs& args) {
  const ExperimentConfig config = load_config(args);
  const CrnDocument loop = build_closed_loop(config.to_loop_spec());
  emit(args.output, [&](std::ostream& os) { os << format_crn(loop); });
  return kExitOk;
}

int run_experiment(const ExperimentArgs& args) {
  const ExperimentConfig config = load_config(args);
  const LoopSpec spec = config.to_loop_spec();
  const ComparisonReport report = compare_pi_pid(spec, config.compare_options());

  fs::create_directories(config.out_dir);
  const fs::path dir(config.out_dir);
  for (const auto& run : report.runs) {
    std::string name = run.name;
    for (auto& c : name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    std::ofstream csv(dir / (name + ".csv"), std::ios::binary);
    if (!csv) throw UsageError("cannot write into '" + dir.string() + "'");
    write_csv(csv, run.trajectory);
  }
  {
    std::ofstream csv(dir / "report.csv", std::ios::binary);
    write_report_csv(csv, report);
  }
  std::cout << summary_table(report);
  for (const auto& run : report.runs) {
    if (!run.integral.passed)
      std::cout << "warning: " << run.name << " integral identity off by " << run.integral.rel_err << " (relative)\n";
  }
  std::cout << "wrote " << (dir / "pi.csv").string() << ", " << (dir / "pid.csv").string() << ", "
            << (dir / "report.csv").string() << '\n';
  return kExitOk;
}

struct VerifyArgs {
  std::string block;
  std::vector<double> scales{1.0, 10.0};
  std::string output;
  std::string input = "sine";
  std::string method;
  double r = 1.0;
  std::optional<double> s, q, v;
  std::optional<double> t_end;
};

int run_verify(const VerifyArgs& args) {
  StudyOptions sim;
  if (!args.method.empty()) sim.method = parse_method(args.method);
  ConvergenceReport report;
  if (args.block == "derivative") {
    BlockParams p{args.r, args.s.value_or(10.0), args.q.value_or(10.0), args.v.value_or(1.0)};
    DerivativeStudy study;
    study.sim = sim;
    if (args.input == "sine")
      study.input = DerivativeInput::sine();
    else if (args.input == "constant")
      study.input = DerivativeInput::constant(10.0);
    else if (args.input == "ramp")
      study.input = DerivativeInput::ramp(1.0);
    else
      throw UsageError("unknown derivative input '" + args.input + "' (expected sine, constant or ramp)");
    study.t_end = args.t_end.value_or(args.input == "sine" ? 600.0 : 50.0);
    report = derivative_convergence(p, args.scales, study);
  } else if (args.block == "proportional") {
    BlockParams p{args.r, args.s.value_or(1.0), args.q.value_or(1.0), args.v.value_or(1.0)};
    ProportionalStudy study;
    study.sim = sim;
    if (args.t_end) study.t_end = *args.t_end;
    report = proportional_convergence(p, args.scales, study);
  } else {
    throw UsageError("unknown block '" + args.block + "' (expected derivative or proportional)");
  }
  std::cout << summary_table(report);
  if (!args.output.empty()) emit(args.output, [&](std::ostream& os) { write_report_csv(os, report); });
  return kExitOk;
}

int run_fmt(const std::string& input, bool in_place) {
  const CrnDocument doc = load_network(input);
  const std::string text = format_crn(doc);
  if (in_place)
    write_text_file(input, text);
  else
    std::cout << text;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthesize, simulate and verify PID controllers built from chemical reaction networks"};
  app.require_subcommand(1);

  SimulateArgs sim_args;
  auto* simulate_cmd = app.add_subcommand("simulate", "Integrate a .crn network (or builtin) and print a CSV trajectory");
  simulate_cmd->add_option("network", sim_args.input, "Path to a .crn file, or gene-expression, constant-reference, sine-reference")
      ->required();
  simulate_cmd->add_option("--t-end", sim_args.t_end, "End time")->capture_default_str();
  simulate_cmd->add_option("--rtol", sim_args.rel_tol, "Relative tolerance")->capture_default_str();
  simulate_cmd->add_option("--atol", sim_args.abs_tol, "Absolute tolerance")->capture_default_str();
  simulate_cmd->add_option("--max-step", sim_args.max_step, "Largest step (0: unlimited)");
  simulate_cmd->add_option("--grid", sim_args.grid, "Output on a uniform grid with this many intervals");
  simulate_cmd->add_option("--method", sim_args.method, "rk45 or rosenbrock")->capture_default_str();
  simulate_cmd->add_option("-o,--output", sim_args.output, "CSV output path (default stdout)");

  ExperimentArgs compose_args;
  auto* compose_cmd = app.add_subcommand("compose", "Emit the closed-loop network as .crn text");
  compose_cmd->add_option("--config", compose_args.config, "Experiment config file");
  compose_cmd->add_option("--set", compose_args.assignments, "Override a config key: key=value");
  compose_cmd->add_option("-o,--output", compose_args.output, "Output path (default stdout)");

  ExperimentArgs exp_args;
  auto* experiment_cmd = app.add_subcommand("experiment", "Run the loop with PI and PID control and report tracking metrics");
  experiment_cmd->add_option("--config", exp_args.config, "Experiment config file");
  experiment_cmd->add_option("--set", exp_args.assignments, "Override a config key: key=value");
  experiment_cmd->add_option("--out-dir", exp_args.out_dir, "Directory for pi.csv, pid.csv, report.csv");

  VerifyArgs verify_args;
  auto* verify_cmd = app.add_subcommand("verify", "Convergence study of an isolated block as its fast rates are scaled");
  verify_cmd->add_option("block", verify_args.block, "derivative or proportional")->required();
  verify_cmd->add_option("--scales", verify_args.scales, "Comma-separated scale ladder")->delimiter(',');
  verify_cmd->add_option("--input", verify_args.input, "Derivative input: sine, constant or ramp")->capture_default_str();
  verify_cmd->add_option("--method", verify_args.method, "rk45 or rosenbrock (default: chosen by stiffness)");
  verify_cmd->add_option("--r", verify_args.r, "Block multiplier")->capture_default_str();
  verify_cmd->add_option("--s", verify_args.s, "Base fast rate s");
  verify_cmd->add_option("--q", verify_args.q, "Annihilation rate q");
  verify_cmd->add_option("--v", verify_args.v, "Base tracking rate v (derivative)");
  verify_cmd->add_option("--t-end", verify_args.t_end, "Simulation length");
  verify_cmd->add_option("-o,--output", verify_args.output, "Report CSV path");

  std::string fmt_input;
  bool fmt_in_place = false;
  auto* fmt_cmd = app.add_subcommand("fmt", "Print a .crn file in canonical form");
  fmt_cmd->add_option("network", fmt_input, "Path to a .crn file")->required();
  fmt_cmd->add_flag("-i,--in-place", fmt_in_place, "Rewrite the file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (simulate_cmd->parsed()) return run_simulate(sim_args);
    if (compose_cmd->parsed()) return run_compose(compose_args);
    if (experiment_cmd->parsed()) return run_experiment(exp_args);
    if (verify_cmd->parsed()) return run_verify(verify_args);
    if (fmt_cmd->parsed()) return run_fmt(fmt_input, fmt_in_place);
  } catch (const IntegrationError& e) {
    std::cerr << "error: integration failed: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const StructuralError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitUsage;
}
