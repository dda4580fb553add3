#pragma once

// Controller building blocks as reaction-network fragments.
//
// Signals that may go negative travel in dual rail: the value is the
// concentration difference plus - minus, and each block carries an
// annihilation reaction plus + minus -> 0 that bounds both rails without
// changing the difference. Inputs are always read catalytically, so a block
// never perturbs the signal it observes.

#include <cmath>
#include <string>
#include <utility>

#include "crnpid/crn.hpp"
#include "crnpid/errors.hpp"

namespace crnpid {

struct BlockParams {
  double r = 1.0;  // multiplier (gain), may be 0
  double s = 1.0;  // fast rate
  double q = 1.0;  // annihilation rate
  double v = 1.0;  // tracking rate, derivative block only

  void validate() const {
    auto finite = [](double x) { return std::isfinite(x); };
    if (!finite(r) || r < 0.0) throw StructuralError("block multiplier r must be finite and >= 0");
    if (!finite(s) || !(s > 0.0)) throw StructuralError("block rate s must be finite and > 0");
    if (!finite(q) || !(q > 0.0)) throw StructuralError("block rate q must be finite and > 0");
    if (!finite(v) || !(v > 0.0)) throw StructuralError("block rate v must be finite and > 0");
  }

  friend bool operator==(const BlockParams&, const BlockParams&) = default;
};

struct DualRailSignal {
  std::string plus;
  std::string minus;

  // "E" -> {"E+", "E-"}
  static DualRailSignal named(const std::string& base) { return {base + "+", base + "-"}; }

  void validate() const {
    require_species_name(plus);
    require_species_name(minus);
    if (plus == minus) throw StructuralError("dual-rail signal needs two distinct species, got '" + plus + "' twice");
  }

  bool shares_species(const DualRailSignal& other) const {
    return plus == other.plus || plus == other.minus || minus == other.plus || minus == other.minus;
  }

  friend bool operator==(const DualRailSignal&, const DualRailSignal&) = default;
};

namespace detail {

// src -> src + dst
inline Reaction catalysis(const std::string& src, const std::string& dst, double k) {
  return Reaction(Complex{{src, 1}}, Complex{{src, 1}, {dst, 1}}, k);
}

inline Reaction decay(const std::string& x, double k) { return Reaction(Complex{{x, 1}}, Complex{}, k); }

inline Reaction annihilation(const std::string& a, const std::string& b, double k) {
  return Reaction(Complex{{a, 1}, {b, 1}}, Complex{}, k);
}

inline void require_disjoint(const DualRailSignal& a, const DualRailSignal& b, const char* what) {
  if (a.shares_species(b)) throw StructuralError(std::string(what) + " signals must not share species");
}

inline void register_signal(Crn& crn, const DualRailSignal& sig) {
  crn.add_species(sig.plus);
  crn.add_species(sig.minus);
}

}  // namespace detail

// E± -rs-> E± + P±, P+ + P- -q-> 0, P± -s-> 0. At r = 0 the two
// productions are dropped.
inline Crn proportional_block(const DualRailSignal& input, const DualRailSignal& output, const BlockParams& p) {
  p.validate();
  input.validate();
  output.validate();
  detail::require_disjoint(input, output, "input and output");
  Crn crn;
  if (p.r > 0.0) {
    crn.add_reaction(detail::catalysis(input.plus, output.plus, p.r * p.s));
    crn.add_reaction(detail::catalysis(input.minus, output.minus, p.r * p.s));
  }
  crn.add_reaction(detail::annihilation(output.plus, output.minus, p.q));
  crn.add_reaction(detail::decay(output.plus, p.s));
  crn.add_reaction(detail::decay(output.minus, p.s));
  detail::register_signal(crn, input);
  return crn;
}

// E± -r-> E± + I±, I+ + I- -q-> 0. Uses r and q only.
inline Crn integral_block(const DualRailSignal& input, const DualRailSignal& output, const BlockParams& p) {
  p.validate();
  input.validate();
  output.validate();
  detail::require_disjoint(input, output, "input and output");
  Crn crn;
  if (p.r > 0.0) {
    crn.add_reaction(detail::catalysis(input.plus, output.plus, p.r));
    crn.add_reaction(detail::catalysis(input.minus, output.minus, p.r));
  }
  crn.add_reaction(detail::annihilation(output.plus, output.minus, p.q));
  detail::register_signal(crn, input);
  return crn;
}

// aux± tracks r·E± with lag 1/v; out± tracks v·(r·E± + aux∓) with lag 1/s,
// so out+ - out- approximates r·d/dt(E+ - E-). At r = 0 the four r-scaled
// productions are dropped.
inline Crn derivative_block(const DualRailSignal& input, const DualRailSignal& aux, const DualRailSignal& output,
                            const BlockParams& p) {
  p.validate();
  input.validate();
  aux.validate();
  output.validate();
  detail::require_disjoint(input, aux, "input and auxiliary");
  detail::require_disjoint(input, output, "input and output");
  detail::require_disjoint(aux, output, "auxiliary and output");
  const double rv = p.r * p.v;
  const double rvs = p.r * p.v * p.s;
  const double vs = p.v * p.s;
  Crn crn;
  if (p.r > 0.0) {
    crn.add_reaction(detail::catalysis(input.plus, aux.plus, rv));
    crn.add_reaction(detail::catalysis(input.minus, aux.minus, rv));
    crn.add_reaction(detail::catalysis(input.plus, output.plus, rvs));
    crn.add_reaction(detail::catalysis(input.minus, output.minus, rvs));
  }
  crn.add_reaction(detail::decay(aux.plus, p.v));
  crn.add_reaction(detail::decay(aux.minus, p.v));
  crn.add_reaction(detail::catalysis(aux.plus, output.minus, vs));
  crn.add_reaction(detail::catalysis(aux.minus, output.plus, vs));
  crn.add_reaction(detail::decay(output.plus, p.s));
  crn.add_reaction(detail::decay(output.minus, p.s));
  crn.add_reaction(detail::annihilation(output.plus, output.minus, p.q));
  detail::register_signal(crn, input);
  return crn;
}

// out = a + b. Uses s and q.
inline Crn addition_block(const DualRailSignal& a, const DualRailSignal& b, const DualRailSignal& output,
                          const BlockParams& p) {
  p.validate();
  a.validate();
  b.validate();
  output.validate();
  detail::require_disjoint(a, output, "input and output");
  detail::require_disjoint(b, output, "input and output");
  Crn crn;
  crn.add_reaction(detail::catalysis(a.plus, output.plus, p.s));
  crn.add_reaction(detail::catalysis(b.plus, output.plus, p.s));
  crn.add_reaction(detail::catalysis(a.minus, output.minus, p.s));
  crn.add_reaction(detail::catalysis(b.minus, output.minus, p.s));
  crn.add_reaction(detail::annihilation(output.plus, output.minus, p.q));
  crn.add_reaction(detail::decay(output.plus, p.s));
  crn.add_reaction(detail::decay(output.minus, p.s));
  return crn;
}

// out = y - r: y+ and r- feed out+, y- and r+ feed out-. Uses s and q.
inline Crn subtraction_block(const DualRailSignal& y, const DualRailSignal& r, const DualRailSignal& output,
                             const BlockParams& p) {
  p.validate();
  y.validate();
  r.validate();
  output.validate();
  detail::require_disjoint(y, output, "input and output");
  detail::require_disjoint(r, output, "input and output");
  Crn crn;
  crn.add_reaction(detail::catalysis(y.plus, output.plus, p.s));
  crn.add_reaction(detail::catalysis(r.minus, output.plus, p.s));
  crn.add_reaction(detail::catalysis(y.minus, output.minus, p.s));
  crn.add_reaction(detail::catalysis(r.plus, output.minus, p.s));
  crn.add_reaction(detail::annihilation(output.plus, output.minus, p.q));
  crn.add_reaction(detail::decay(output.plus, p.s));
  crn.add_reaction(detail::decay(output.minus, p.s));
  return crn;
}

// Single rail Y to dual rail: out+ tracks Y, out- is never produced.
inline Crn dual_rail_converter(const std::string& input, const DualRailSignal& output, const BlockParams& p) {
  p.validate();
  require_species_name(input);
  output.validate();
  if (input == output.plus || input == output.minus)
    throw StructuralError("converter input must differ from its outputs");
  Crn crn;
  crn.add_reaction(detail::catalysis(input, output.plus, p.s));
  crn.add_reaction(detail::decay(output.plus, p.s));
  crn.add_reaction(detail::annihilation(output.plus, output.minus, p.q));
  return crn;
}

}  // namespace crnpid
