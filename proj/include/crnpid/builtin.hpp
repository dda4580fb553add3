#pragma once

// Built-in networks: the microRNA-regulated gene-expression plant and the two
// reference generators, with their published initial conditions.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "crnpid/dsl.hpp"
#include "crnpid/loop.hpp"

namespace crnpid {

// mRNA catalyses Pro and is removed by microRNA; all rates 1.
inline CrnDocument gene_expression_plant() {
  return parse_crn(R"(# microRNA-regulated gene expression
0 ->{1} mRNA
mRNA ->{1} 0
mRNA ->{1} mRNA + Pro
Pro ->{1} 0
mRNA + microRNA ->{1} 0
microRNA ->{1} 0
0 ->{1} microRNA

init mRNA = 0
init Pro = 1
init microRNA = 0
)");
}

// R+ relaxes to production / decay; R- is inert and stays 0.
inline CrnDocument constant_reference(double production = 10.0, double decay = 1.0) {
  CrnDocument doc;
  doc.crn.add_reaction(Reaction(Complex{}, Complex{{"R+", 1}}, production));
  doc.crn.add_reaction(Reaction(Complex{{"R+", 1}}, Complex{}, decay));
  doc.crn.add_species("R-");
  doc.set_initial("R+", 0.0);
  doc.set_initial("R-", 0.0);
  return doc;
}

// Decoded R = amplitude * sin(rate * t): the rail differences of A and R form
// a harmonic oscillator with angular frequency `rate`.
inline CrnDocument sine_reference(double amplitude = 10.0, double rate = 0.01) {
  CrnDocument doc;
  auto cat = [&](const char* src, const char* dst) { doc.crn.add_reaction(detail::catalysis(src, dst, rate)); };
  cat("A+", "R+");
  cat("A-", "R-");
  cat("R+", "A-");
  cat("R-", "A+");
  doc.crn.add_reaction(detail::annihilation("A+", "A-", rate));
  doc.crn.add_reaction(detail::annihilation("R+", "R-", rate));
  doc.set_initial("A+", amplitude);
  doc.set_initial("A-", 0.0);
  doc.set_initial("R+", 0.0);
  doc.set_initial("R-", 0.0);
  return doc;
}

enum class ReferenceKind { Constant, Sine };

inline ActuationModel gene_expression_actuation(ActuationKind kind) {
  ActuationModel model;
  model.kind = kind;
  model.up_target = "mRNA";
  model.down_target = "microRNA";
  return model;
}

// The published experiment: controller rates as listed for every block,
// controller outputs starting at U+ = U- = 0.5.
inline LoopSpec gene_expression_loop(ActuationKind actuation, ReferenceKind reference, Gains gains = {}) {
  LoopSpec spec;
  spec.plant = gene_expression_plant();
  spec.output = "Pro";
  spec.actuation = gene_expression_actuation(actuation);
  spec.reference = reference == ReferenceKind::Constant ? constant_reference() : sine_reference();
  spec.gains = gains;
  spec.initial = {{"U+", 0.5}, {"U-", 0.5}};
  return spec;
}

inline const std::vector<std::string>& builtin_network_names() {
  static const std::vector<std::string> names{"gene-expression", "constant-reference", "sine-reference"};
  return names;
}

inline std::optional<CrnDocument> builtin_network(std::string_view name) {
  if (name == "gene-expression") return gene_expression_plant();
  if (name == "constant-reference") return constant_reference();
  if (name == "sine-reference") return sine_reference();
  return std::nullopt;
}

}  // namespace crnpid
