#pragma once

// Independent reference values for the tests: closed forms, hand-derived
// ODEs, and a direct evaluator of the reaction-rate equations that does not
// go through MassActionSystem.

#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "crnpid/crn.hpp"
#include "crnpid/dsl.hpp"

namespace oracle {

// Sum over reactions of (p - r) * k * prod x^r, with std::pow.
inline std::vector<double> direct_rhs(const crnpid::Crn& crn, const std::vector<double>& x) {
  std::map<std::string, double> conc;
  for (std::size_t i = 0; i < crn.size(); ++i) conc[crn.species()[i]] = x[i];
  std::map<std::string, double> d;
  for (const auto& r : crn.reactions()) {
    double flux = r.rate();
    for (const auto& t : r.reactants().terms()) flux *= std::pow(conc[t.species], t.multiplicity);
    for (const auto& t : r.reactants().terms()) d[t.species] -= t.multiplicity * flux;
    for (const auto& t : r.products().terms()) d[t.species] += t.multiplicity * flux;
  }
  std::vector<double> out;
  for (const auto& s : crn.species()) out.push_back(d[s]);
  return out;
}

// d(direct_rhs_i)/d(x_j), term by term with std::pow; row-major.
inline std::vector<double> direct_jacobian(const crnpid::Crn& crn, const std::vector<double>& x) {
  const std::size_t n = crn.size();
  std::vector<double> jac(n * n, 0.0);
  for (const auto& r : crn.reactions()) {
    for (const auto& wrt : r.reactants().terms()) {
      double partial = r.rate() * wrt.multiplicity * std::pow(x[crn.index_of(wrt.species)], wrt.multiplicity - 1);
      for (const auto& t : r.reactants().terms())
        if (t.species != wrt.species) partial *= std::pow(x[crn.index_of(t.species)], t.multiplicity);
      const std::size_t j = crn.index_of(wrt.species);
      for (const auto& t : r.reactants().terms()) jac[crn.index_of(t.species) * n + j] -= t.multiplicity * partial;
      for (const auto& t : r.products().terms()) jac[crn.index_of(t.species) * n + j] += t.multiplicity * partial;
    }
  }
  return jac;
}

// Gene-expression plant written out by hand (all rates 1):
//   d mRNA     = 1 - mRNA - mRNA * microRNA
//   d Pro      = mRNA - Pro
//   d microRNA = 1 - microRNA - mRNA * microRNA
struct PlantDerivative {
  double mrna, pro, microrna;
};

inline PlantDerivative plant_rhs(double mrna, double pro, double microrna) {
  return {1.0 - mrna - mrna * microrna, mrna - pro, 1.0 - microrna - mrna * microrna};
}

// Symmetric fixed point m = microRNA = mRNA solving 1 - m - m^2 = 0.
inline double plant_fixed_point() { return (std::sqrt(5.0) - 1.0) / 2.0; }

// 0 -k-> A, A -d-> 0, A(0) = 0.
inline double birth_death(double k, double d, double t) { return k / d * (1.0 - std::exp(-d * t)); }

// Derivative block (r, s, v) driven by E+ = c t, E- = 0, everything starting
// at 0: the rail difference D+ - D- obeys
//   A' = v (r c t - A),  z' = s (v (r c t - A) - z), giving
//   z(t) = r c [1 - (s e^{-vt} - v e^{-st}) / (s - v)]   for s != v.
inline double derivative_of_ramp(double r, double s, double v, double c, double t) {
  return r * c * (1.0 - (s * std::exp(-v * t) - v * std::exp(-s * t)) / (s - v));
}

// Same block with a step E+ = c from t = 0:
//   z(t) = r c s v / (s - v) (e^{-vt} - e^{-st}).
inline double derivative_of_step(double r, double s, double v, double c, double t) {
  return r * c * s * v / (s - v) * (std::exp(-v * t) - std::exp(-s * t));
}

// Exact steady state of the proportional block for constant inputs:
// P+ - P- = r (E+ - E-) and q P-^2 + (s + q d) P- - r s E- = 0.
struct ProportionalSteadyState {
  double plus, minus;
};

inline ProportionalSteadyState proportional_steady_state(double r, double s, double q, double ep, double em) {
  const double d = r * (ep - em);
  const double b = s + q * d;
  const double c = -r * s * em;
  const double pm = (-b + std::sqrt(b * b - 4.0 * q * c)) / (2.0 * q);
  return {pm + d, pm};
}

// Random network over at most `max_species` species and `max_reactions`
// reactions, with names exercising the full identifier alphabet.
inline crnpid::CrnDocument random_document(std::mt19937& rng, std::size_t max_species = 10,
                                           std::size_t max_reactions = 20) {
  static const std::vector<std::string> pool{"A",     "B",    "C'",  "E+",    "E-",   "Y'+",  "Y'-",     "mRNA",
                                             "blk.P+", "x_1",  "Pro", "u.v-w", "Z9",   "k'.+", "microRNA"};
  std::uniform_int_distribution<std::size_t> n_species(1, max_species);
  std::uniform_int_distribution<std::size_t> n_reactions(0, max_reactions);
  std::uniform_int_distribution<int> side_size(0, 3);
  std::uniform_int_distribution<int> mult(1, 3);
  std::uniform_real_distribution<double> exponent(-6.0, 6.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<std::string> names = pool;
  std::shuffle(names.begin(), names.end(), rng);
  names.resize(std::min(n_species(rng), names.size()));
  std::uniform_int_distribution<std::size_t> pick(0, names.size() - 1);

  crnpid::CrnDocument doc;
  // Sometimes declare species up front in shuffled order.
  if (unit(rng) < 0.3)
    for (const auto& s : names) doc.crn.add_species(s);
  const std::size_t reactions = n_reactions(rng);
  for (std::size_t k = 0; k < reactions; ++k) {
    crnpid::Complex lhs, rhs;
    for (int i = side_size(rng); i > 0; --i) lhs.add(names[pick(rng)], mult(rng));
    for (int i = side_size(rng); i > 0; --i) rhs.add(names[pick(rng)], mult(rng));
    const double rate = std::pow(10.0, exponent(rng)) * (1.0 + unit(rng));
    doc.crn.add_reaction(crnpid::Reaction(lhs, rhs, rate));
  }
  for (const auto& s : doc.crn.species())
    if (unit(rng) < 0.4) doc.initial[s] = unit(rng) < 0.2 ? 0.0 : unit(rng) * 100.0;
  return doc;
}

}  // namespace oracle
