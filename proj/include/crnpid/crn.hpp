#pragma once

// Chemical reaction networks under deterministic mass-action semantics.
//
// A Crn is an ordered species list plus an ordered reaction list. Species
// order defines the coordinate order of every state vector. Networks are
// wired together by name: two networks that mention the same species name
// share that species after merge().

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "crnpid/errors.hpp"

namespace crnpid {

inline constexpr int kMaxMultiplicity = 16;

// State entries in [-kNegativeTolerance, 0) are treated as 0 by rhs evaluation.
inline constexpr double kNegativeTolerance = 1e-9;

// [A-Za-z][A-Za-z0-9_'.+-]*
inline bool is_valid_species_name(std::string_view name) {
  if (name.empty()) return false;
  auto alpha = [](char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z'); };
  auto digit = [](char c) { return c >= '0' && c <= '9'; };
  if (!alpha(name.front())) return false;
  return std::all_of(name.begin() + 1, name.end(), [&](char c) {
    return alpha(c) || digit(c) || c == '_' || c == '\'' || c == '.' || c == '+' || c == '-';
  });
}

inline void require_species_name(std::string_view name) {
  if (!is_valid_species_name(name))
    throw StructuralError("invalid species name '" + std::string(name) + "'");
}

struct Term {
  std::string species;
  int multiplicity = 1;
};

// Multiset of species. Terms keep first-insertion order; equality ignores it.
class Complex {
 public:
  Complex() = default;
  Complex(std::initializer_list<Term> terms) {
    for (const auto& t : terms) add(t.species, t.multiplicity);
  }

  void add(const std::string& species, int multiplicity = 1) {
    require_species_name(species);
    if (multiplicity < 0) throw StructuralError("negative multiplicity for '" + species + "'");
    if (multiplicity == 0) return;
    auto it = std::find_if(terms_.begin(), terms_.end(),
                           [&](const Term& t) { return t.species == species; });
    if (it == terms_.end()) {
      check_cap(species, multiplicity);
      terms_.push_back({species, multiplicity});
    } else {
      check_cap(species, it->multiplicity + multiplicity);
      it->multiplicity += multiplicity;
    }
  }

  int multiplicity(std::string_view species) const {
    for (const auto& t : terms_)
      if (t.species == species) return t.multiplicity;
    return 0;
  }

  const std::vector<Term>& terms() const noexcept { return terms_; }
  bool empty() const noexcept { return terms_.empty(); }

  // Total molecularity.
  int order() const noexcept {
    int n = 0;
    for (const auto& t : terms_) n += t.multiplicity;
    return n;
  }

  friend bool operator==(const Complex& a, const Complex& b) {
    if (a.terms_.size() != b.terms_.size()) return false;
    return std::all_of(a.terms_.begin(), a.terms_.end(), [&](const Term& t) {
      return b.multiplicity(t.species) == t.multiplicity;
    });
  }

 private:
  static void check_cap(const std::string& species, int multiplicity) {
    if (multiplicity > kMaxMultiplicity)
      throw StructuralError("multiplicity " + std::to_string(multiplicity) + " of '" + species +
                            "' exceeds the cap of " + std::to_string(kMaxMultiplicity));
  }

  std::vector<Term> terms_;
};

class Reaction {
 public:
  Reaction(Complex reactants, Complex products, double rate)
      : reactants_(std::move(reactants)), products_(std::move(products)), rate_(rate) {
    if (!(rate_ > 0.0) || !std::isfinite(rate_))
      throw StructuralError("reaction rate must be positive and finite, got " +
                            std::to_string(rate_));
  }

  const Complex& reactants() const noexcept { return reactants_; }
  const Complex& products() const noexcept { return products_; }
  double rate() const noexcept { return rate_; }

  Reaction with_rate(double rate) const { return Reaction(reactants_, products_, rate); }

  // Every reactant reappears among the products with at least its multiplicity.
  bool is_catalytic() const {
    return std::all_of(reactants_.terms().begin(), reactants_.terms().end(), [&](const Term& t) {
      return products_.multiplicity(t.species) >= t.multiplicity;
    });
  }

  bool same_equation(const Reaction& other) const {
    return reactants_ == other.reactants_ && products_ == other.products_;
  }

  friend bool operator==(const Reaction& a, const Reaction& b) {
    return a.same_equation(b) && a.rate_ == b.rate_;
  }

 private:
  Complex reactants_;
  Complex products_;
  double rate_;
};

class Crn {
 public:
  Crn() = default;

  // Returns the coordinate of `name`, registering it if new.
  std::size_t add_species(const std::string& name) {
    if (auto it = index_.find(name); it != index_.end()) return it->second;
    require_species_name(name);
    index_.emplace(name, species_.size());
    species_.push_back(name);
    return species_.size() - 1;
  }

  void add_reaction(Reaction reaction) {
    for (const auto& t : reaction.reactants().terms()) add_species(t.species);
    for (const auto& t : reaction.products().terms()) add_species(t.species);
    reactions_.push_back(std::move(reaction));
  }

  const std::vector<std::string>& species() const noexcept { return species_; }
  const std::vector<Reaction>& reactions() const noexcept { return reactions_; }
  std::size_t size() const noexcept { return species_.size(); }

  bool contains(std::string_view name) const { return index_.count(std::string(name)) != 0; }

  std::optional<std::size_t> find(std::string_view name) const {
    if (auto it = index_.find(std::string(name)); it != index_.end()) return it->second;
    return std::nullopt;
  }

  std::size_t index_of(std::string_view name) const {
    if (auto i = find(name)) return *i;
    throw StructuralError("unknown species '" + std::string(name) + "'");
  }

  friend bool operator==(const Crn& a, const Crn& b) {
    return a.species_ == b.species_ && a.reactions_ == b.reactions_;
  }

 private:
  std::vector<std::string> species_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<Reaction> reactions_;
};

// p - r in the network's species order.
inline std::vector<int> state_change(const Reaction& reaction, const Crn& crn) {
  std::vector<int> change(crn.size(), 0);
  for (const auto& t : reaction.reactants().terms()) change[crn.index_of(t.species)] -= t.multiplicity;
  for (const auto& t : reaction.products().terms()) change[crn.index_of(t.species)] += t.multiplicity;
  return change;
}

namespace detail {

inline double ipow(double x, int n) {
  double result = 1.0;
  for (int i = 0; i < n; ++i) result *= x;
  return result;
}

}  // namespace detail

// Index-compiled form of a Crn used on the integrator hot path.
class MassActionSystem {
 public:
  explicit MassActionSystem(const Crn& crn) : dimension_(crn.size()) {
    reactions_.reserve(crn.reactions().size());
    for (const auto& r : crn.reactions()) {
      Compiled c;
      c.rate = r.rate();
      for (const auto& t : r.reactants().terms())
        c.reactants.push_back({static_cast<std::uint32_t>(crn.index_of(t.species)), t.multiplicity});
      for (const auto& [index, delta] : sparse_change(state_change(r, crn))) c.change.push_back({index, delta});
      reactions_.push_back(std::move(c));
    }
  }

  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t reaction_count() const noexcept { return reactions_.size(); }

  // Negative entries are read as 0.
  void rhs(std::span<const double> x, std::span<double> dxdt) const {
    check_dimension(x.size());
    check_dimension(dxdt.size());
    std::fill(dxdt.begin(), dxdt.end(), 0.0);
    for (const auto& r : reactions_) {
      double flux = r.rate;
      for (const auto& [i, m] : r.reactants) flux *= detail::ipow(std::max(x[i], 0.0), m);
      if (flux == 0.0) continue;
      for (const auto& [i, d] : r.change) dxdt[i] += d * flux;
    }
  }

  // Row-major dimension x dimension matrix d(rhs_i)/d(x_j).
  void jacobian(std::span<const double> x, std::span<double> jac) const {
    check_dimension(x.size());
    if (jac.size() != dimension_ * dimension_) throw StructuralError("jacobian buffer has wrong size");
    std::fill(jac.begin(), jac.end(), 0.0);
    for (const auto& r : reactions_) {
      for (std::size_t k = 0; k < r.reactants.size(); ++k) {
        const auto [j, mj] = r.reactants[k];
        double partial = r.rate * mj * detail::ipow(std::max(x[j], 0.0), mj - 1);
        for (std::size_t l = 0; l < r.reactants.size(); ++l) {
          if (l == k) continue;
          partial *= detail::ipow(std::max(x[r.reactants[l].first], 0.0), r.reactants[l].second);
        }
        if (partial == 0.0) continue;
        for (const auto& [i, d] : r.change) jac[i * dimension_ + j] += d * partial;
      }
    }
  }

 private:
  struct Compiled {
    std::vector<std::pair<std::uint32_t, int>> reactants;
    std::vector<std::pair<std::uint32_t, int>> change;
    double rate = 0.0;
  };

  static std::vector<std::pair<std::uint32_t, int>> sparse_change(const std::vector<int>& dense) {
    std::vector<std::pair<std::uint32_t, int>> out;
    for (std::size_t i = 0; i < dense.size(); ++i)
      if (dense[i] != 0) out.push_back({static_cast<std::uint32_t>(i), dense[i]});
    return out;
  }

  void check_dimension(std::size_t n) const {
    if (n != dimension_)
      throw StructuralError("state has dimension " + std::to_string(n) + ", network has " +
                            std::to_string(dimension_) + " species");
  }

  std::size_t dimension_;
  std::vector<Compiled> reactions_;
};

// Right-hand side of the reaction-rate equations at x. Entries in
// [-kNegativeTolerance, 0) are clamped to 0; anything more negative is rejected.
inline std::vector<double> mass_action_rhs(const Crn& crn, std::span<const double> x) {
  if (x.size() != crn.size())
    throw StructuralError("state has dimension " + std::to_string(x.size()) + ", network has " +
                          std::to_string(crn.size()) + " species");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || x[i] < -kNegativeTolerance)
      throw StructuralError("state entry for '" + crn.species()[i] + "' is outside the nonnegative orthant");
  }
  std::vector<double> dxdt(crn.size());
  MassActionSystem(crn).rhs(x, dxdt);
  return dxdt;
}

// Species of `a` followed by the new species of `b`; reactions concatenated.
// Shared names identify the same species.
inline Crn merge(const Crn& a, const Crn& b) {
  Crn out = a;
  for (const auto& s : b.species()) out.add_species(s);
  for (const auto& r : b.reactions()) out.add_reaction(r);
  return out;
}

// Species missing from `mapping` keep their names. The resulting names must
// be pairwise distinct.
inline Crn rename_species(const Crn& crn, const std::map<std::string, std::string>& mapping) {
  auto renamed = [&](const std::string& name) -> const std::string& {
    auto it = mapping.find(name);
    return it == mapping.end() ? name : it->second;
  };
  std::unordered_set<std::string> seen;
  for (const auto& s : crn.species()) {
    if (!seen.insert(renamed(s)).second)
      throw StructuralError("renaming is not injective: several species map to '" + renamed(s) + "'");
  }
  auto rename_complex = [&](const Complex& c) {
    Complex out;
    for (const auto& t : c.terms()) out.add(renamed(t.species), t.multiplicity);
    return out;
  };
  Crn out;
  for (const auto& s : crn.species()) out.add_species(renamed(s));
  for (const auto& r : crn.reactions())
    out.add_reaction(Reaction(rename_complex(r.reactants()), rename_complex(r.products()), r.rate()));
  return out;
}

// Prefixes every species except those listed in `keep`.
inline Crn prefix_species(const Crn& crn, const std::string& prefix,
                          const std::unordered_set<std::string>& keep = {}) {
  std::map<std::string, std::string> mapping;
  for (const auto& s : crn.species())
    if (!keep.count(s)) mapping.emplace(s, prefix + s);
  return rename_species(crn, mapping);
}

}  // namespace crnpid
