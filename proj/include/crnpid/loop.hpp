#pragma once

// Closed-loop assembly: plant + actuation + reference + PID controller.
//
//   Y --converter--> Y' ; (R, Y') --subtraction--> E = R - Y'
//   E --P--> P, E --I--> I, E --D--> D ; P + I --> B ; B + D --> U
//   U --actuation--> plant
//
// Controller species live under fixed instance prefixes so they can never
// collide with plant species. The controller output is the unprefixed pair
// U+ / U-, which is what actuation reactions refer to.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "crnpid/blocks.hpp"
#include "crnpid/crn.hpp"
#include "crnpid/dsl.hpp"
#include "crnpid/errors.hpp"

namespace crnpid {

enum class ActuationKind {
  Split,             // U+ -> U+ + up_target, U- -> U- + down_target
  AnnihilateMrna,    // U+ -> U+ + up_target, U- + up_target -> 0
  AnnihilateOutput,  // U+ -> U+ + Y, U- + Y -> 0
  Custom,
};

struct ActuationModel {
  ActuationKind kind = ActuationKind::Split;
  std::string up_target = "mRNA";
  std::string down_target = "microRNA";
  double rate = 1.0;
  CrnDocument custom;  // reactions over U± and plant species; only for Custom
};

struct Gains {
  double kp = 1.0;
  double ki = 1.0;
  double kd = 1.0;
};

// Per-block rates; the r field of P/I/D is replaced by the gains.
struct LoopRates {
  BlockParams converter{1.0, 1.0, 1.0, 1.0};
  BlockParams subtraction{1.0, 1.0, 1.0, 1.0};
  BlockParams proportional{1.0, 1.0, 1.0, 1.0};
  BlockParams integral{1.0, 1.0, 1.0, 1.0};
  BlockParams derivative{1.0, 10.0, 10.0, 1.0};
  BlockParams add_pi{1.0, 0.8, 0.3, 1.0};
  BlockParams add_pid{1.0, 1.1, 0.1, 1.0};
};

struct LoopSpec {
  CrnDocument plant;
  std::string output = "Pro";
  ActuationModel actuation;
  CrnDocument reference;
  DualRailSignal reference_signal{"R+", "R-"};
  Gains gains;
  LoopRates rates;
  // "lhs -> rhs" (names as they appear in the closed loop) -> rate.
  std::map<std::string, double> overrides;
  // Applied after all other initial conditions.
  std::map<std::string, double> initial;
};

// Species names of every signal in an assembled loop.
struct LoopSignals {
  std::string output;
  DualRailSignal reference;
  DualRailSignal converted{"conv.Y'+", "conv.Y'-"};
  DualRailSignal error{"sub.E+", "sub.E-"};
  DualRailSignal proportional{"P.P+", "P.P-"};
  DualRailSignal integral{"I.I+", "I.I-"};
  DualRailSignal derivative_aux{"D.A+", "D.A-"};
  DualRailSignal derivative{"D.D+", "D.D-"};
  DualRailSignal sum_pi{"addPI.B+", "addPI.B-"};
  DualRailSignal control{"U+", "U-"};
};

inline constexpr const char* kReferencePrefix = "ref.";

inline LoopSignals loop_signals(const LoopSpec& spec) {
  LoopSignals sig;
  sig.output = spec.output;
  sig.reference = {kReferencePrefix + spec.reference_signal.plus, kReferencePrefix + spec.reference_signal.minus};
  return sig;
}

inline Crn actuation_reactions(const ActuationModel& model, const std::string& output) {
  const DualRailSignal u{"U+", "U-"};
  Crn crn;
  switch (model.kind) {
    case ActuationKind::Split:
      crn.add_reaction(detail::catalysis(u.plus, model.up_target, model.rate));
      crn.add_reaction(detail::catalysis(u.minus, model.down_target, model.rate));
      break;
    case ActuationKind::AnnihilateMrna:
      crn.add_reaction(detail::catalysis(u.plus, model.up_target, model.rate));
      crn.add_reaction(detail::annihilation(u.minus, model.up_target, model.rate));
      break;
    case ActuationKind::AnnihilateOutput:
      crn.add_reaction(detail::catalysis(u.plus, output, model.rate));
      crn.add_reaction(detail::annihilation(u.minus, output, model.rate));
      break;
    case ActuationKind::Custom:
      crn = model.custom.crn;
      break;
  }
  return crn;
}

// Replaces the rate of the unique reaction matching each "lhs -> rhs" key.
inline Crn apply_rate_overrides(const Crn& crn, const std::map<std::string, double>& overrides) {
  std::vector<Reaction> reactions = crn.reactions();
  for (const auto& [equation, rate] : overrides) {
    auto [lhs, rhs] = parse_equation(equation);
    const Reaction probe(lhs, rhs, 1.0);
    std::optional<std::size_t> hit;
    for (std::size_t i = 0; i < reactions.size(); ++i) {
      if (!reactions[i].same_equation(probe)) continue;
      if (hit) throw StructuralError("rate override '" + equation + "' matches more than one reaction");
      hit = i;
    }
    if (!hit) throw StructuralError("rate override '" + equation + "' matches no reaction");
    reactions[*hit] = reactions[*hit].with_rate(rate);
  }
  Crn out;
  for (const auto& s : crn.species()) out.add_species(s);
  for (auto& r : reactions) out.add_reaction(std::move(r));
  return out;
}

inline CrnDocument build_closed_loop(const LoopSpec& spec) {
  if (!spec.plant.crn.contains(spec.output))
    throw StructuralError("output species '" + spec.output + "' is not a plant species");
  if (spec.gains.kp < 0.0 || spec.gains.ki < 0.0 || spec.gains.kd < 0.0)
    throw StructuralError("PID gains must be nonnegative");
  spec.reference_signal.validate();
  if (!spec.reference.crn.contains(spec.reference_signal.plus) ||
      !spec.reference.crn.contains(spec.reference_signal.minus))
    throw StructuralError("reference network does not contain '" + spec.reference_signal.plus + "' and '" +
                          spec.reference_signal.minus + "'");

  const LoopSignals sig = loop_signals(spec);
  const LoopRates& rates = spec.rates;

  BlockParams p = rates.proportional;
  p.r = spec.gains.kp;
  BlockParams i = rates.integral;
  i.r = spec.gains.ki;
  BlockParams d = rates.derivative;
  d.r = spec.gains.kd;

  const Crn reference = prefix_species(spec.reference.crn, kReferencePrefix);

  // The subtraction block computes first - second; feeding R first yields the
  // negative-feedback error R - Y'.
  Crn controller = reference;
  controller = merge(controller, dual_rail_converter(spec.output, sig.converted, rates.converter));
  controller = merge(controller, subtraction_block(sig.reference, sig.converted, sig.error, rates.subtraction));
  controller = merge(controller, proportional_block(sig.error, sig.proportional, p));
  controller = merge(controller, integral_block(sig.error, sig.integral, i));
  controller = merge(controller, derivative_block(sig.error, sig.derivative_aux, sig.derivative, d));
  controller = merge(controller, addition_block(sig.proportional, sig.integral, sig.sum_pi, rates.add_pi));
  controller = merge(controller, addition_block(sig.sum_pi, sig.derivative, sig.control, rates.add_pid));

  std::set<std::string> controller_species(controller.species().begin(), controller.species().end());
  controller_species.erase(spec.output);
  for (const auto& s : spec.plant.crn.species()) {
    if (controller_species.count(s))
      throw StructuralError("plant species '" + s + "' collides with a controller species");
  }

  const Crn actuation = actuation_reactions(spec.actuation, spec.output);
  for (const auto& s : actuation.species()) {
    if (s == sig.control.plus || s == sig.control.minus || spec.plant.crn.contains(s)) continue;
    if (controller_species.count(s))
      throw StructuralError("actuation species '" + s + "' collides with a controller species");
  }
  for (const auto& s : {sig.control.plus, sig.control.minus}) {
    if (!actuation.contains(s) && spec.actuation.kind != ActuationKind::Custom)
      throw StructuralError("actuation does not read '" + s + "'");
  }

  Crn loop = merge(spec.plant.crn, actuation);
  loop = merge(loop, controller);
  if (!spec.overrides.empty()) loop = apply_rate_overrides(loop, spec.overrides);

  CrnDocument doc;
  doc.crn = std::move(loop);
  for (const auto& [name, value] : spec.plant.initial) doc.set_initial(name, value);
  if (spec.actuation.kind == ActuationKind::Custom)
    for (const auto& [name, value] : spec.actuation.custom.initial) doc.set_initial(name, value);
  for (const auto& [name, value] : spec.reference.initial) doc.set_initial(kReferencePrefix + name, value);
  for (const auto& [name, value] : spec.initial) doc.set_initial(name, value);
  return doc;
}

}  // namespace crnpid
