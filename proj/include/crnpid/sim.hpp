#pragma once

// Numerical integration of the reaction-rate equations.
//
// Two adaptive one-step methods share one driver:
//   DormandPrince45  explicit 5(4) pair, FSAL, local extrapolation
//   Rosenbrock23     L-stable linearly implicit 2(3) pair (Shampine's ode23s)
//                    for stiff runs, using the exact mass-action Jacobian
//
// A step is accepted when every component satisfies
//   |err_i| <= abs_tol + rel_tol * max(|y_i|, |y_new_i|).
// Accepted states with a component below -min(abs_tol, 1e-9) are rejected and
// retried with a smaller step; remaining small negatives are clamped to 0.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <mutex>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "crnpid/blocks.hpp"
#include "crnpid/crn.hpp"
#include "crnpid/dsl.hpp"
#include "crnpid/errors.hpp"

namespace crnpid {

enum class Method { DormandPrince45, Rosenbrock23 };

struct SimOptions {
  double t_end = 1.0;
  double rel_tol = 1e-6;
  double abs_tol = 1e-9;
  double max_step = std::numeric_limits<double>::infinity();
  // When set, output on the uniform grid t_j = j * t_end / grid_intervals
  // (cubic Hermite interpolation between accepted steps); else at every accepted step.
  std::optional<std::size_t> grid_intervals;
  Method method = Method::DormandPrince45;
  std::size_t max_steps = 50'000'000;

  void validate() const {
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw StructuralError("t_end must be positive and finite");
    if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw StructuralError("rel_tol must lie in (0, 1)");
    if (!(abs_tol > 0.0 && abs_tol < 1.0)) throw StructuralError("abs_tol must lie in (0, 1)");
    if (!(max_step > 0.0)) throw StructuralError("max_step must be positive");
    if (grid_intervals && *grid_intervals == 0) throw StructuralError("grid needs at least one interval");
  }
};

struct Trajectory {
  std::vector<std::string> species;
  std::vector<double> times;
  std::vector<double> samples;  // row-major, times.size() x species.size()
  double min_unclamped = 0.0;   // most negative component of any accepted state
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;

  std::size_t rows() const noexcept { return times.size(); }
  std::size_t cols() const noexcept { return species.size(); }

  std::span<const double> row(std::size_t i) const { return {samples.data() + i * cols(), cols()}; }
  double at(std::size_t i, std::size_t j) const { return samples[i * cols() + j]; }

  std::size_t index_of(std::string_view name) const {
    auto it = std::find(species.begin(), species.end(), name);
    if (it == species.end()) throw StructuralError("trajectory has no species '" + std::string(name) + "'");
    return static_cast<std::size_t>(it - species.begin());
  }

  std::vector<double> column(std::string_view name) const {
    const std::size_t j = index_of(name);
    std::vector<double> out(rows());
    for (std::size_t i = 0; i < rows(); ++i) out[i] = at(i, j);
    return out;
  }

  std::vector<double> final_state() const {
    auto r = row(rows() - 1);
    return {r.begin(), r.end()};
  }
};

// Process-wide record of the most negative values seen, for auditing whole
// test runs.
struct NonnegativityAudit {
  double min_unclamped = 0.0;
  double min_exported = 0.0;
  std::size_t runs = 0;
};

namespace detail {

inline std::mutex& audit_mutex() {
  static std::mutex m;
  return m;
}

inline NonnegativityAudit& audit_state() {
  static NonnegativityAudit audit;
  return audit;
}

inline void record_audit(const Trajectory& traj) {
  double min_exported = 0.0;
  for (double x : traj.samples) min_exported = std::min(min_exported, x);
  std::lock_guard lock(audit_mutex());
  auto& a = audit_state();
  a.min_unclamped = std::min(a.min_unclamped, traj.min_unclamped);
  a.min_exported = std::min(a.min_exported, min_exported);
  ++a.runs;
}

using Vec = Eigen::VectorXd;

class Stepper {
 public:
  virtual ~Stepper() = default;
  virtual int order() const = 0;  // order of the error estimator's lower method + 1
  virtual void reset(double t, const Vec& y) = 0;
  // Attempts one step of size h from (t, y); fills y_new and err.
  virtual void attempt(double t, const Vec& y, double h, Vec& y_new, Vec& err) = 0;
  virtual void accepted() = 0;
  virtual const Vec& derivative() const = 0;  // f(t, y) at the current point
};

class DormandPrince45 final : public Stepper {
 public:
  explicit DormandPrince45(const MassActionSystem& sys) : sys_(sys) {
    const auto n = static_cast<Eigen::Index>(sys.dimension());
    for (auto& k : k_) k = Vec::Zero(n);
    tmp_ = Vec::Zero(n);
  }

  int order() const override { return 5; }

  void reset(double, const Vec& y) override { eval(y, k_[0]); }

  void attempt(double, const Vec& y, double h, Vec& y_new, Vec& err) override {
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                     a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                     e6 = 22.0 / 525, e7 = -1.0 / 40;

    tmp_ = y + h * a21 * k_[0];
    eval(tmp_, k_[1]);
    tmp_ = y + h * (a31 * k_[0] + a32 * k_[1]);
    eval(tmp_, k_[2]);
    tmp_ = y + h * (a41 * k_[0] + a42 * k_[1] + a43 * k_[2]);
    eval(tmp_, k_[3]);
    tmp_ = y + h * (a51 * k_[0] + a52 * k_[1] + a53 * k_[2] + a54 * k_[3]);
    eval(tmp_, k_[4]);
    tmp_ = y + h * (a61 * k_[0] + a62 * k_[1] + a63 * k_[2] + a64 * k_[3] + a65 * k_[4]);
    eval(tmp_, k_[5]);
    y_new = y + h * (b1 * k_[0] + b3 * k_[2] + b4 * k_[3] + b5 * k_[4] + b6 * k_[5]);
    eval(y_new, k_[6]);
    err = h * (e1 * k_[0] + e3 * k_[2] + e4 * k_[3] + e5 * k_[4] + e6 * k_[5] + e7 * k_[6]);
  }

  // FSAL: the last stage is f at the new point. Clamping after acceptance
  // moves the point by at most 1e-9, so the derivative is recomputed then.
  void accepted() override { std::swap(k_[0], k_[6]); }

  void refresh(const Vec& y) { eval(y, k_[0]); }

  const Vec& derivative() const override { return k_[0]; }

 private:
  void eval(const Vec& y, Vec& out) const {
    sys_.rhs(std::span<const double>(y.data(), y.size()), std::span<double>(out.data(), out.size()));
  }

  const MassActionSystem& sys_;
  std::array<Vec, 7> k_;
  Vec tmp_;
};

class Rosenbrock23 final : public Stepper {
 public:
  explicit Rosenbrock23(const MassActionSystem& sys) : sys_(sys) {
    const auto n = static_cast<Eigen::Index>(sys.dimension());
    f0_ = f1_ = f2_ = k1_ = k2_ = k3_ = tmp_ = Vec::Zero(n);
    jac_ = Eigen::MatrixXd::Zero(n, n);
    jac_buffer_.assign(static_cast<std::size_t>(n * n), 0.0);
  }

  int order() const override { return 3; }

  void reset(double, const Vec& y) override {
    eval(y, f0_);
    jacobian(y);
  }

  void attempt(double, const Vec& y, double h, Vec& y_new, Vec& err) override {
    const double d = 1.0 / (2.0 + std::sqrt(2.0));
    const double e32 = 6.0 + std::sqrt(2.0);
    const auto n = jac_.rows();
    Eigen::MatrixXd w = Eigen::MatrixXd::Identity(n, n) - h * d * jac_;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(w);

    k1_ = lu.solve(f0_);
    tmp_ = y + 0.5 * h * k1_;
    eval(tmp_, f1_);
    k2_ = lu.solve(f1_ - k1_) + k1_;
    y_new = y + h * k2_;
    eval(y_new, f2_);
    k3_ = lu.solve(f2_ - e32 * (k2_ - f1_) - 2.0 * (k1_ - f0_));
    err = (h / 6.0) * (k1_ - 2.0 * k2_ + k3_);
  }

  void accepted() override {}

  // Called with the (possibly clamped) accepted state.
  void refresh(const Vec& y) {
    eval(y, f0_);
    jacobian(y);
  }

  const Vec& derivative() const override { return f0_; }

 private:
  void eval(const Vec& y, Vec& out) const {
    sys_.rhs(std::span<const double>(y.data(), y.size()), std::span<double>(out.data(), out.size()));
  }

  void jacobian(const Vec& y) {
    sys_.jacobian(std::span<const double>(y.data(), y.size()), jac_buffer_);
    const auto n = jac_.rows();
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) jac_(i, j) = jac_buffer_[static_cast<std::size_t>(i * n + j)];
  }

  const MassActionSystem& sys_;
  Vec f0_, f1_, f2_, k1_, k2_, k3_, tmp_;
  Eigen::MatrixXd jac_;
  std::vector<double> jac_buffer_;
};

// Emits output rows either at every accepted step or on a uniform grid.
class Recorder {
 public:
  Recorder(Trajectory& traj, const SimOptions& opts) : traj_(traj), opts_(opts) {}

  void start(const Vec& y0) { push(0.0, y0); }

  // f0 and f1 are the derivatives at the ends of the step.
  void segment(double t0, const Vec& y0, const Vec& f0, double t1, const Vec& y1, const Vec& f1, bool last) {
    if (!opts_.grid_intervals) {
      push(t1, y1);
      return;
    }
    const std::size_t n = *opts_.grid_intervals;
    const double h = t1 - t0;
    while (next_ <= n) {
      const double tg = next_ == n ? opts_.t_end : opts_.t_end * static_cast<double>(next_) / static_cast<double>(n);
      if (tg > t1 && !(last && next_ == n)) break;
      if (next_ == n && last) {
        push(opts_.t_end, y1);
      } else {
        const double s = h > 0.0 ? (tg - t0) / h : 1.0;
        const double s2 = s * s, s3 = s2 * s;
        push(tg, (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * f0 + (3 * s2 - 2 * s3) * y1 +
                     (s3 - s2) * h * f1);
      }
      ++next_;
    }
  }

 private:
  void push(double t, const Vec& y) {
    traj_.times.push_back(t);
    for (Eigen::Index i = 0; i < y.size(); ++i) traj_.samples.push_back(std::max(y[i], 0.0));
  }

  Trajectory& traj_;
  const SimOptions& opts_;
  std::size_t next_ = 1;
};

inline double error_norm(const Vec& y, const Vec& y_new, const Vec& err, const SimOptions& opts) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double scale = opts.abs_tol + opts.rel_tol * std::max(std::abs(y[i]), std::abs(y_new[i]));
    worst = std::max(worst, std::abs(err[i]) / scale);
  }
  return worst;
}

inline bool all_finite(const Vec& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (!std::isfinite(v[i])) return false;
  return true;
}

// Starting step from the first-derivative and second-difference scale.
inline double initial_step(const MassActionSystem& sys, const Vec& y0, const Vec& f0, int order,
                           const SimOptions& opts) {
  const auto n = y0.size();
  double d0 = 0.0, d1 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sc = opts.abs_tol + opts.rel_tol * std::abs(y0[i]);
    d0 = std::max(d0, std::abs(y0[i]) / sc);
    d1 = std::max(d1, std::abs(f0[i]) / sc);
  }
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  h0 = std::min(h0, opts.t_end);
  Vec y1 = y0 + h0 * f0;
  Vec f1(n);
  sys.rhs(std::span<const double>(y1.data(), y1.size()), std::span<double>(f1.data(), f1.size()));
  double d2 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sc = opts.abs_tol + opts.rel_tol * std::abs(y0[i]);
    d2 = std::max(d2, std::abs(f1[i] - f0[i]) / sc);
  }
  d2 /= h0;
  const double dmax = std::max(d1, d2);
  const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 1.0 / order);
  return std::min({100.0 * h0, h1, opts.max_step, opts.t_end});
}

}  // namespace detail

inline NonnegativityAudit nonnegativity_audit() {
  std::lock_guard lock(detail::audit_mutex());
  return detail::audit_state();
}

inline Trajectory simulate(const Crn& crn, std::span<const double> x0, const SimOptions& opts) {
  opts.validate();
  if (x0.size() != crn.size())
    throw StructuralError("initial state has dimension " + std::to_string(x0.size()) + ", network has " +
                          std::to_string(crn.size()) + " species");
  for (std::size_t i = 0; i < x0.size(); ++i)
    if (!std::isfinite(x0[i]) || x0[i] < 0.0)
      throw StructuralError("initial value of '" + crn.species()[i] + "' must be finite and nonnegative");

  using detail::Vec;
  const MassActionSystem sys(crn);
  Trajectory traj;
  traj.species = crn.species();
  const auto n = static_cast<Eigen::Index>(crn.size());
  Vec y = Eigen::Map<const Vec>(x0.data(), n);

  detail::Recorder recorder(traj, opts);
  recorder.start(y);
  if (n == 0) {
    detail::record_audit(traj);
    return traj;
  }

  detail::DormandPrince45 dopri(sys);
  detail::Rosenbrock23 rosen(sys);
  detail::Stepper& stepper = opts.method == Method::Rosenbrock23 ? static_cast<detail::Stepper&>(rosen)
                                                                  : static_cast<detail::Stepper&>(dopri);
  auto refresh = [&](const Vec& state) {
    if (opts.method == Method::Rosenbrock23)
      rosen.refresh(state);
    else
      dopri.refresh(state);
  };
  stepper.reset(0.0, y);
  Vec f = stepper.derivative();

  const double negative_limit = std::min(opts.abs_tol, kNegativeTolerance);
  const int order = stepper.order();
  double t = 0.0;
  double h = detail::initial_step(sys, y, stepper.derivative(), order, opts);
  Vec y_new(n), err(n);
  bool last_failure_nonfinite = false;

  while (t < opts.t_end) {
    if (traj.accepted_steps + traj.rejected_steps >= opts.max_steps)
      throw IntegrationError(t, "step budget exhausted");
    double step = std::min({h, opts.max_step, opts.t_end - t});
    bool last = false;
    if (t + step >= opts.t_end * (1.0 - 1e-14)) {
      step = opts.t_end - t;
      last = true;
    }
    const double min_step = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
    if (step < min_step)
      throw IntegrationError(t, last_failure_nonfinite ? "non-finite state" : "step size underflow (stiff system?)");

    stepper.attempt(t, y, step, y_new, err);
    if (!detail::all_finite(y_new) || !detail::all_finite(err)) {
      last_failure_nonfinite = true;
      ++traj.rejected_steps;
      h = 0.25 * step;
      continue;
    }
    const double e = detail::error_norm(y, y_new, err, opts);
    const double exponent = 1.0 / order;
    if (e > 1.0) {
      last_failure_nonfinite = false;
      ++traj.rejected_steps;
      h = step * std::max(0.2, 0.9 * std::pow(e, -exponent));
      continue;
    }
    const double lowest = y_new.minCoeff();
    if (lowest < -negative_limit) {
      last_failure_nonfinite = false;
      ++traj.rejected_steps;
      h = 0.5 * step;
      continue;
    }

    traj.min_unclamped = std::min(traj.min_unclamped, lowest);
    bool clamped = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (y_new[i] < 0.0) {
        y_new[i] = 0.0;
        clamped = true;
      }
    }
    const double t_new = last ? opts.t_end : t + step;
    stepper.accepted();
    if (clamped || opts.method == Method::Rosenbrock23) refresh(y_new);
    recorder.segment(t, y, f, t_new, y_new, stepper.derivative(), last);
    f = stepper.derivative();
    y = y_new;
    t = t_new;
    ++traj.accepted_steps;
    last_failure_nonfinite = false;
    const double grow = e == 0.0 ? 5.0 : std::min(5.0, std::max(0.2, 0.9 * std::pow(e, -exponent)));
    h = step * grow;
  }
  detail::record_audit(traj);
  return traj;
}

inline Trajectory simulate(const CrnDocument& doc, const SimOptions& opts) {
  const auto x0 = doc.initial_state();
  return simulate(doc.crn, x0, opts);
}

// plus - minus at every output time.
inline std::vector<double> decode(const Trajectory& traj, const DualRailSignal& sig) {
  const std::size_t p = traj.index_of(sig.plus);
  const std::size_t m = traj.index_of(sig.minus);
  std::vector<double> out(traj.rows());
  for (std::size_t i = 0; i < traj.rows(); ++i) out[i] = traj.at(i, p) - traj.at(i, m);
  return out;
}

// Linear interpolation of one species at time t.
inline double sample_at(const Trajectory& traj, std::string_view species, double t) {
  const std::size_t j = traj.index_of(species);
  if (traj.rows() == 0) throw StructuralError("empty trajectory");
  if (t <= traj.times.front()) return traj.at(0, j);
  if (t >= traj.times.back()) return traj.at(traj.rows() - 1, j);
  auto it = std::upper_bound(traj.times.begin(), traj.times.end(), t);
  const std::size_t i1 = static_cast<std::size_t>(it - traj.times.begin());
  const std::size_t i0 = i1 - 1;
  const double theta = (t - traj.times[i0]) / (traj.times[i1] - traj.times[i0]);
  return traj.at(i0, j) + theta * (traj.at(i1, j) - traj.at(i0, j));
}

struct SignalMetrics {
  double rmse = 0.0;
  double max_abs_err = 0.0;
  double final_err = 0.0;  // |signal - reference| at the last sample in the window
  std::size_t samples = 0;
};

// Sample statistics of signal - reference over times in [t0, t1].
inline SignalMetrics signal_metrics(std::span<const double> times, std::span<const double> signal,
                                    std::span<const double> reference, double t0, double t1) {
  if (signal.size() != reference.size() || signal.size() != times.size())
    throw StructuralError("signal, reference and times must have equal length");
  SignalMetrics m;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < t0 || times[i] > t1) continue;
    const double e = std::abs(signal[i] - reference[i]);
    sum_sq += e * e;
    m.max_abs_err = std::max(m.max_abs_err, e);
    m.final_err = e;
    ++m.samples;
  }
  if (m.samples == 0) throw StructuralError("metrics window contains no samples");
  m.rmse = std::sqrt(sum_sq / static_cast<double>(m.samples));
  return m;
}

// Running trapezoidal integral, starting at 0.
inline std::vector<double> cumulative_trapezoid(std::span<const double> times, std::span<const double> values) {
  if (times.size() != values.size()) throw StructuralError("times and values must have equal length");
  std::vector<double> out(times.size(), 0.0);
  for (std::size_t i = 1; i < times.size(); ++i)
    out[i] = out[i - 1] + 0.5 * (times[i] - times[i - 1]) * (values[i] + values[i - 1]);
  return out;
}

// CSV: "time" then species in network order; shortest round-trip decimals.
inline void write_csv(std::ostream& os, const Trajectory& traj) {
  os << "time";
  for (const auto& s : traj.species) os << ',' << s;
  os << '\n';
  for (std::size_t i = 0; i < traj.rows(); ++i) {
    os << format_number(traj.times[i]);
    for (std::size_t j = 0; j < traj.cols(); ++j) os << ',' << format_number(traj.at(i, j));
    os << '\n';
  }
}

}  // namespace crnpid
