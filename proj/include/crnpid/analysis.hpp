#pragma once

// Numerical studies of the controller blocks and of the full loop.
//
// proportional_convergence / derivative_convergence scale the fast rates of an
// isolated block along a ladder and measure how far the block output is from
// its ideal value; compare_pi_pid runs one loop with and without the
// derivative path and scores the plant output against the reference.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <future>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "crnpid/blocks.hpp"
#include "crnpid/builtin.hpp"
#include "crnpid/crn.hpp"
#include "crnpid/dsl.hpp"
#include "crnpid/loop.hpp"
#include "crnpid/sim.hpp"

namespace crnpid {

inline constexpr double kMonotoneSlack = 0.05;

struct ConvergenceReport {
  std::string parameter;
  std::vector<double> ladder;
  std::vector<double> errors;
  // errors[i+1] <= (1 + slack) * errors[i] for all i; unset for a single point.
  std::optional<bool> monotone_decrease;

  // errors[i+1] <= (1 - slack) * errors[i]: each step removes at least `slack`
  // of the error.
  std::optional<bool> strictly_decreasing(double slack = kMonotoneSlack) const {
    if (errors.size() < 2) return std::nullopt;
    for (std::size_t i = 0; i + 1 < errors.size(); ++i)
      if (!(errors[i + 1] <= (1.0 - slack) * errors[i])) return false;
    return true;
  }
};

struct StudyOptions {
  std::optional<Method> method;  // unset: explicit, switching to Rosenbrock for very fast rates
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double max_step = 0.5;
  double stiff_rate = 1e4;  // fastest block rate above which the implicit method is used
};

namespace detail {

inline double fastest_rate(const Crn& crn) {
  double k = 0.0;
  for (const auto& r : crn.reactions()) k = std::max(k, r.rate());
  return k;
}

inline SimOptions study_sim_options(const StudyOptions& study, const Crn& crn, double t_end) {
  SimOptions opts;
  opts.t_end = t_end;
  opts.rel_tol = study.rel_tol;
  opts.abs_tol = study.abs_tol;
  opts.max_step = study.max_step;
  opts.method = study.method.value_or(fastest_rate(crn) >= study.stiff_rate ? Method::Rosenbrock23
                                                                           : Method::DormandPrince45);
  return opts;
}

inline void check_ladder(const std::vector<double>& ladder) {
  if (ladder.empty()) throw StructuralError("ladder needs at least one scale");
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    if (!(ladder[i] > 0.0) || !std::isfinite(ladder[i])) throw StructuralError("ladder scales must be positive");
    if (i > 0 && !(ladder[i] > ladder[i - 1])) throw StructuralError("ladder must be strictly increasing");
  }
}

inline ConvergenceReport finish_report(std::string parameter, std::vector<double> ladder,
                                       std::vector<double> errors) {
  ConvergenceReport report{std::move(parameter), std::move(ladder), std::move(errors), std::nullopt};
  for (double e : report.errors)
    if (!std::isfinite(e)) throw IntegrationError(0.0, "non-finite error in convergence study");
  if (report.errors.size() >= 2) {
    bool ok = true;
    for (std::size_t i = 0; i + 1 < report.errors.size(); ++i)
      ok = ok && report.errors[i + 1] <= (1.0 + kMonotoneSlack) * report.errors[i];
    report.monotone_decrease = ok;
  }
  return report;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Proportional block

struct ProportionalStudy {
  double input_plus = 3.0;
  double input_minus = 1.0;
  double t_end = 50.0;  // in units of 1 / s of the unscaled block
  StudyOptions sim;
};

// Block with inert inputs held at (input_plus, input_minus).
inline CrnDocument proportional_test_network(const BlockParams& p, double input_plus, double input_minus) {
  const auto in = DualRailSignal::named("E");
  CrnDocument doc;
  doc.crn = proportional_block(in, DualRailSignal::named("P"), p);
  doc.set_initial(in.plus, input_plus);
  doc.set_initial(in.minus, input_minus);
  return doc;
}

// Error |P+ - r E+| + |P- - r E-| at the end of the run, for s <- scale * s.
inline ConvergenceReport proportional_convergence(const BlockParams& base, const std::vector<double>& ladder,
                                                  const ProportionalStudy& study = {}) {
  base.validate();
  detail::check_ladder(ladder);
  std::vector<std::future<double>> jobs;
  for (double scale : ladder) {
    jobs.push_back(std::async(std::launch::async, [=] {
      BlockParams p = base;
      p.s = base.s * scale;
      const CrnDocument doc = proportional_test_network(p, study.input_plus, study.input_minus);
      const Trajectory traj = simulate(doc, detail::study_sim_options(study.sim, doc.crn, study.t_end / base.s));
      const double pp = traj.at(traj.rows() - 1, traj.index_of("P+"));
      const double pm = traj.at(traj.rows() - 1, traj.index_of("P-"));
      return std::abs(pp - p.r * study.input_plus) + std::abs(pm - p.r * study.input_minus);
    }));
  }
  std::vector<double> errors;
  for (auto& j : jobs) errors.push_back(j.get());
  return detail::finish_report("s", ladder, std::move(errors));
}

// ---------------------------------------------------------------------------
// Derivative block

struct DerivativeInput {
  enum class Kind { Sine, Constant, Ramp };
  Kind kind = Kind::Sine;
  double amplitude = 10.0;  // sine amplitude, or constant level
  double rate = 0.01;       // sine angular frequency, or ramp slope

  static DerivativeInput sine(double amplitude = 10.0, double rate = 0.01) { return {Kind::Sine, amplitude, rate}; }
  static DerivativeInput constant(double level) { return {Kind::Constant, level, 0.0}; }
  static DerivativeInput ramp(double slope) { return {Kind::Ramp, 0.0, slope}; }

  double derivative(double t) const {
    switch (kind) {
      case Kind::Sine:
        return amplitude * rate * std::cos(rate * t);
      case Kind::Constant:
        return 0.0;
      case Kind::Ramp:
        return rate;
    }
    return 0.0;
  }
};

struct DerivativeStudy {
  DerivativeInput input = DerivativeInput::sine();
  double t_end = 600.0;
  // Errors are taken over [window_tracking_constants / v_base, t_end], the same
  // window for every scale.
  double window_tracking_constants = 5.0;
  StudyOptions sim;
};

// Names used by derivative_test_network.
inline DualRailSignal derivative_test_input() { return {"R+", "R-"}; }
inline DualRailSignal derivative_test_output() { return {"drv.D+", "drv.D-"}; }

// Derivative block fed by the input generator; the sine generator is the
// reference oscillator network.
inline CrnDocument derivative_test_network(const BlockParams& p, const DerivativeInput& input) {
  const DualRailSignal in = derivative_test_input();
  CrnDocument doc;
  switch (input.kind) {
    case DerivativeInput::Kind::Sine:
      doc = sine_reference(input.amplitude, input.rate);
      break;
    case DerivativeInput::Kind::Constant:
      doc.crn.add_species(in.plus);
      doc.crn.add_species(in.minus);
      doc.set_initial(in.plus, input.amplitude);
      break;
    case DerivativeInput::Kind::Ramp:
      doc.crn.add_reaction(Reaction(Complex{}, Complex{{in.plus, 1}}, input.rate));
      doc.crn.add_species(in.minus);
      break;
  }
  const Crn block = derivative_block(in, {"drv.A+", "drv.A-"}, derivative_test_output(), p);
  CrnDocument out{merge(doc.crn, block), {}};
  for (const auto& [name, value] : doc.initial) out.set_initial(name, value);
  return out;
}

// Sup-norm error between decoded D and r * d/dt(input) over the window, with
// s <- scale * s and v <- scale * v.
inline ConvergenceReport derivative_convergence(const BlockParams& base, const std::vector<double>& ladder,
                                                const DerivativeStudy& study = {}) {
  base.validate();
  detail::check_ladder(ladder);
  const double window_start = study.window_tracking_constants / base.v;
  if (!(window_start < study.t_end)) throw StructuralError("derivative error window is empty");
  std::vector<std::future<double>> jobs;
  for (double scale : ladder) {
    jobs.push_back(std::async(std::launch::async, [=] {
      BlockParams p = base;
      p.s = base.s * scale;
      p.v = base.v * scale;
      const CrnDocument doc = derivative_test_network(p, study.input);
      const Trajectory traj = simulate(doc, detail::study_sim_options(study.sim, doc.crn, study.t_end));
      const auto d = decode(traj, derivative_test_output());
      double worst = 0.0;
      for (std::size_t i = 0; i < traj.rows(); ++i) {
        const double t = traj.times[i];
        if (t < window_start) continue;
        worst = std::max(worst, std::abs(d[i] - p.r * study.input.derivative(t)));
      }
      return worst;
    }));
  }
  std::vector<double> errors;
  for (auto& j : jobs) errors.push_back(j.get());
  return detail::finish_report("s_and_v", ladder, std::move(errors));
}

// ---------------------------------------------------------------------------
// Integral identity

struct IntegralAudit {
  double max_abs_deviation = 0.0;
  double scale = 0.0;  // max |r * integral of E|
  double rel_err = 0.0;
  bool passed = true;
};

inline constexpr double kIntegralAuditTolerance = 1e-4;

// Compares I(t) - I(0) against r times the trapezoidal integral of the stored
// error signal.
inline IntegralAudit audit_integral(const Trajectory& traj, const DualRailSignal& error,
                                    const DualRailSignal& integral, double r, double t_max,
                                    double tolerance = kIntegralAuditTolerance) {
  const auto e = decode(traj, error);
  const auto i = decode(traj, integral);
  const auto area = cumulative_trapezoid(traj.times, e);
  IntegralAudit audit;
  for (std::size_t k = 0; k < traj.rows(); ++k) {
    if (traj.times[k] > t_max) break;
    const double expected = r * area[k];
    audit.scale = std::max(audit.scale, std::abs(expected));
    audit.max_abs_deviation = std::max(audit.max_abs_deviation, std::abs((i[k] - i[0]) - expected));
  }
  audit.rel_err = audit.scale > 0.0 ? audit.max_abs_deviation / audit.scale : audit.max_abs_deviation;
  audit.passed = audit.rel_err <= tolerance;
  return audit;
}

// ---------------------------------------------------------------------------
// PI versus PID

struct CompareOptions {
  double t_end = 200.0;
  double transient_end = 50.0;
  double steady_length = 50.0;  // steady window is [t_end - steady_length, t_end]
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double max_step = 0.01;
  Method method = Method::DormandPrince45;

  void validate() const {
    if (!(t_end > 0.0)) throw StructuralError("comparison t_end must be positive");
    if (!(transient_end > 0.0 && transient_end <= t_end)) throw StructuralError("transient window outside [0, t_end]");
    if (!(steady_length > 0.0 && steady_length <= t_end)) throw StructuralError("steady window outside [0, t_end]");
  }
};

inline CompareOptions default_compare_options(ReferenceKind kind) {
  CompareOptions opts;
  opts.t_end = kind == ReferenceKind::Constant ? 200.0 : 600.0;
  return opts;
}

struct ControllerRun {
  std::string name;
  Gains gains;
  SignalMetrics transient;
  SignalMetrics steady;
  IntegralAudit integral;
  Trajectory trajectory;
  std::vector<double> reference;  // decoded reference on the trajectory grid
};

struct ComparisonReport {
  double t_end = 0.0;
  double transient_end = 0.0;
  double steady_start = 0.0;
  std::vector<ControllerRun> runs;  // PI, then PID

  const ControllerRun& pi() const { return runs.at(0); }
  const ControllerRun& pid() const { return runs.at(1); }
};

inline ControllerRun run_controller(const LoopSpec& spec, std::string name, const CompareOptions& opts) {
  const CrnDocument loop = build_closed_loop(spec);
  SimOptions sim;
  sim.t_end = opts.t_end;
  sim.rel_tol = opts.rel_tol;
  sim.abs_tol = opts.abs_tol;
  sim.max_step = opts.max_step;
  sim.method = opts.method;

  ControllerRun run;
  run.name = std::move(name);
  run.gains = spec.gains;
  run.trajectory = simulate(loop, sim);
  const LoopSignals sig = loop_signals(spec);
  const auto& traj = run.trajectory;
  run.reference = decode(traj, sig.reference);
  const auto output = traj.column(sig.output);
  run.transient = signal_metrics(traj.times, output, run.reference, 0.0, opts.transient_end);
  run.steady = signal_metrics(traj.times, output, run.reference, opts.t_end - opts.steady_length, opts.t_end);
  run.integral = audit_integral(traj, sig.error, sig.integral, spec.gains.ki, opts.t_end);
  return run;
}

// The PI variant is `spec` with kd = 0. Both loops are simulated concurrently.
inline ComparisonReport compare_pi_pid(const LoopSpec& spec, const CompareOptions& opts) {
  opts.validate();
  LoopSpec pi = spec;
  pi.gains.kd = 0.0;
  auto pi_job = std::async(std::launch::async, [&] { return run_controller(pi, "PI", opts); });
  ControllerRun pid = run_controller(spec, "PID", opts);
  ComparisonReport report;
  report.t_end = opts.t_end;
  report.transient_end = opts.transient_end;
  report.steady_start = opts.t_end - opts.steady_length;
  report.runs.push_back(pi_job.get());
  report.runs.push_back(std::move(pid));
  return report;
}

inline ComparisonReport compare_pi_pid(const LoopSpec& spec, ReferenceKind kind) {
  return compare_pi_pid(spec, default_compare_options(kind));
}

// ---------------------------------------------------------------------------
// Report output

inline void write_report_csv(std::ostream& os, const ComparisonReport& report) {
  os << "controller,window,t0,t1,rmse,max_abs_err,final_err,integral_rel_err\n";
  for (const auto& run : report.runs) {
    auto row = [&](const char* window, double t0, double t1, const SignalMetrics& m) {
      os << run.name << ',' << window << ',' << format_number(t0) << ',' << format_number(t1) << ','
         << format_number(m.rmse) << ',' << format_number(m.max_abs_err) << ',' << format_number(m.final_err) << ','
         << format_number(run.integral.rel_err) << '\n';
    };
    row("transient", 0.0, report.transient_end, run.transient);
    row("steady", report.steady_start, report.t_end, run.steady);
  }
}

inline void write_report_csv(std::ostream& os, const ConvergenceReport& report) {
  os << "scale,parameter,error\n";
  for (std::size_t i = 0; i < report.ladder.size(); ++i)
    os << format_number(report.ladder[i]) << ',' << report.parameter << ',' << format_number(report.errors[i])
       << '\n';
}

inline std::string summary_table(const ComparisonReport& report) {
  std::ostringstream os;
  os << std::left << std::setw(6) << "ctrl" << std::setw(11) << "window" << std::right << std::setw(14) << "rmse"
     << std::setw(14) << "max_abs_err" << std::setw(14) << "final_err" << std::setw(14) << "integral_rel" << '\n';
  os << std::scientific << std::setprecision(4);
  for (const auto& run : report.runs) {
    for (auto [label, m] : {std::pair{"transient", &run.transient}, std::pair{"steady", &run.steady}}) {
      os << std::left << std::setw(6) << run.name << std::setw(11) << label << std::right << std::setw(14) << m->rmse
         << std::setw(14) << m->max_abs_err << std::setw(14) << m->final_err << std::setw(14) << run.integral.rel_err
         << '\n';
    }
  }
  return os.str();
}

inline std::string summary_table(const ConvergenceReport& report) {
  std::ostringstream os;
  os << std::left << std::setw(12) << "scale" << std::right << std::setw(16) << "error" << '\n';
  os << std::scientific << std::setprecision(6);
  for (std::size_t i = 0; i < report.ladder.size(); ++i)
    os << std::left << std::setw(12) << format_number(report.ladder[i]) << std::right << std::setw(16)
       << report.errors[i] << '\n';
  if (report.monotone_decrease)
    os << "monotone decrease (" << static_cast<int>(kMonotoneSlack * 100) << "% slack): "
       << (*report.monotone_decrease ? "yes" : "no") << '\n';
  else
    os << "single scale: no monotonicity claim\n";
  return os.str();
}

}  // namespace crnpid
