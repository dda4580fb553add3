#pragma once

// Experiment configuration: a flat "key = value" text file.
//
//   plant = gene-expression          builtin name or path to a .crn file
//   output = Pro                     plant output species
//   actuation = split                split | annihilate-mrna | annihilate-output | path
//   actuation.up = mRNA              species raised by U+ (split, annihilate-mrna)
//   actuation.down = microRNA        species raised by U- (split)
//   reference = constant             constant | sine | path (must define R+ and R-)
//   reference.level = 10             constant reference level (decay rate 1)
//   reference.amplitude = 10         sine amplitude
//   reference.rate = 0.01            sine angular frequency
//   gains.kp / gains.ki / gains.kd   P, I and D multipliers
//   rates.<block>.<s|q|v>            block = converter, subtraction, proportional,
//                                    integral, derivative, add_pi, add_pid
//   init.<species> = 0.5             initial value in the closed loop
//   override <lhs> -> <rhs> = 1      rate of one closed-loop reaction
//   t_end, transient_end, steady_length, rel_tol, abs_tol, max_step
//   method = rk45 | rosenbrock
//   out_dir = results
//
// '#' starts a comment. Relative paths resolve against the config file.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>

#include "crnpid/analysis.hpp"
#include "crnpid/builtin.hpp"
#include "crnpid/dsl.hpp"
#include "crnpid/errors.hpp"
#include "crnpid/loop.hpp"

namespace crnpid {

// Reads a whole .crn file; ParseError messages gain the file name.
inline CrnDocument load_crn_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StructuralError("cannot open '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_crn(text.str());
  } catch (const ParseError& e) {
    throw e.in_file(path.string());
  }
}

struct ExperimentConfig {
  std::string plant = "gene-expression";
  std::string output = "Pro";
  std::string actuation = "split";
  std::string actuation_up = "mRNA";
  std::string actuation_down = "microRNA";
  std::string reference = "constant";
  double reference_level = 10.0;
  double reference_amplitude = 10.0;
  double reference_rate = 0.01;
  Gains gains;
  LoopRates rates;
  std::map<std::string, double> initial{{"U+", 0.5}, {"U-", 0.5}};
  std::map<std::string, double> overrides;
  CompareOptions compare = default_compare_options(ReferenceKind::Constant);
  bool t_end_set = false;
  std::string out_dir = "results";
  std::filesystem::path base_dir = ".";

  std::optional<ReferenceKind> reference_kind() const {
    if (reference == "constant") return ReferenceKind::Constant;
    if (reference == "sine") return ReferenceKind::Sine;
    return std::nullopt;
  }

  // Applies one key; throws StructuralError for unknown keys or bad values.
  void set(const std::string& key, const std::string& value) {
    auto number = [&]() {
      std::size_t used = 0;
      double x = 0.0;
      try {
        x = std::stod(value, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != value.size() || !std::isfinite(x))
        throw StructuralError("config key '" + key + "' expects a number, got '" + value + "'");
      return x;
    };
    if (key == "plant") {
      plant = value;
    } else if (key == "output") {
      output = value;
    } else if (key == "actuation") {
      actuation = value;
    } else if (key == "actuation.up") {
      actuation_up = value;
    } else if (key == "actuation.down") {
      actuation_down = value;
    } else if (key == "reference") {
      reference = value;
    } else if (key == "reference.level") {
      reference_level = number();
    } else if (key == "reference.amplitude") {
      reference_amplitude = number();
    } else if (key == "reference.rate") {
      reference_rate = number();
    } else if (key == "gains.kp") {
      gains.kp = number();
    } else if (key == "gains.ki") {
      gains.ki = number();
    } else if (key == "gains.kd") {
      gains.kd = number();
    } else if (key.rfind("rates.", 0) == 0) {
      set_rate(key, number());
    } else if (key.rfind("init.", 0) == 0) {
      initial[key.substr(5)] = number();
    } else if (key.rfind("override ", 0) == 0) {
      overrides[key.substr(9)] = number();
    } else if (key == "t_end") {
      compare.t_end = number();
      t_end_set = true;
    } else if (key == "transient_end") {
      compare.transient_end = number();
    } else if (key == "steady_length") {
      compare.steady_length = number();
    } else if (key == "rel_tol") {
      compare.rel_tol = number();
    } else if (key == "abs_tol") {
      compare.abs_tol = number();
    } else if (key == "max_step") {
      compare.max_step = number();
    } else if (key == "method") {
      if (value == "rk45")
        compare.method = Method::DormandPrince45;
      else if (value == "rosenbrock")
        compare.method = Method::Rosenbrock23;
      else
        throw StructuralError("unknown method '" + value + "' (expected rk45 or rosenbrock)");
    } else if (key == "out_dir") {
      out_dir = value;
    } else {
      throw StructuralError("unknown config key '" + key + "'");
    }
  }

  // Applies "key=value" (as given on the command line).
  void set_assignment(std::string_view assignment) {
    auto eq = assignment.rfind('=');
    if (eq == std::string_view::npos) throw StructuralError("expected key=value, got '" + std::string(assignment) + "'");
    set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
  }

  double t_end() const {
    if (t_end_set) return compare.t_end;
    return reference == "sine" ? 600.0 : 200.0;
  }

  CompareOptions compare_options() const {
    CompareOptions opts = compare;
    opts.t_end = t_end();
    return opts;
  }

  LoopSpec to_loop_spec() const {
    LoopSpec spec;
    if (auto builtin = builtin_network(plant); builtin && !std::filesystem::exists(resolve(plant)))
      spec.plant = *builtin;
    else
      spec.plant = load_crn_file(resolve(plant));
    spec.output = output;

    ActuationModel model;
    model.up_target = actuation_up;
    model.down_target = actuation_down;
    if (actuation == "split") {
      model.kind = ActuationKind::Split;
    } else if (actuation == "annihilate-mrna") {
      model.kind = ActuationKind::AnnihilateMrna;
    } else if (actuation == "annihilate-output") {
      model.kind = ActuationKind::AnnihilateOutput;
    } else if (std::filesystem::exists(resolve(actuation))) {
      model.kind = ActuationKind::Custom;
      model.custom = load_crn_file(resolve(actuation));
    } else {
      throw StructuralError("unknown actuation '" + actuation +
                            "' (expected split, annihilate-mrna, annihilate-output or a .crn file)");
    }
    spec.actuation = std::move(model);

    if (reference == "constant")
      spec.reference = constant_reference(reference_level, 1.0);
    else if (reference == "sine")
      spec.reference = sine_reference(reference_amplitude, reference_rate);
    else if (std::filesystem::exists(resolve(reference)))
      spec.reference = load_crn_file(resolve(reference));
    else
      throw StructuralError("unknown reference '" + reference + "' (expected constant, sine or a .crn file)");

    spec.gains = gains;
    spec.rates = rates;
    spec.initial = initial;
    spec.overrides = overrides;
    return spec;
  }

  static std::string trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return std::string(s);
  }

  std::filesystem::path resolve(const std::string& path) const {
    std::filesystem::path p(path);
    return p.is_absolute() ? p : base_dir / p;
  }

 private:
  void set_rate(const std::string& key, double value) {
    static const std::map<std::string, BlockParams LoopRates::*> blocks{
        {"converter", &LoopRates::converter},       {"subtraction", &LoopRates::subtraction},
        {"proportional", &LoopRates::proportional}, {"integral", &LoopRates::integral},
        {"derivative", &LoopRates::derivative},     {"add_pi", &LoopRates::add_pi},
        {"add_pid", &LoopRates::add_pid}};
    const std::string rest = key.substr(6);
    const auto dot = rest.find('.');
    auto it = dot == std::string::npos ? blocks.end() : blocks.find(rest.substr(0, dot));
    if (it == blocks.end()) throw StructuralError("unknown config key '" + key + "'");
    BlockParams& p = rates.*(it->second);
    const std::string field = rest.substr(dot + 1);
    if (field == "s")
      p.s = value;
    else if (field == "q")
      p.q = value;
    else if (field == "v")
      p.v = value;
    else
      throw StructuralError("unknown config key '" + key + "' (block fields are s, q, v)");
  }

};

inline ExperimentConfig parse_experiment_config(std::string_view text, std::filesystem::path base_dir = ".") {
  ExperimentConfig config;
  config.base_dir = std::move(base_dir);
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string trimmed = ExperimentConfig::trim(line);
    if (trimmed.empty()) continue;
    try {
      if (trimmed.find('=') == std::string::npos) throw StructuralError("expected 'key = value'");
      config.set_assignment(trimmed);
    } catch (const StructuralError& e) {
      throw ParseError(line_no, 1, e.what());
    }
  }
  return config;
}

inline ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StructuralError("cannot open '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_experiment_config(text.str(), path.parent_path().empty() ? "." : path.parent_path());
  } catch (const ParseError& e) {
    throw e.in_file(path.string());
  }
}

}  // namespace crnpid
