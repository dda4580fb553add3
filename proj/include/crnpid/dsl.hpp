#pragma once

// Text format for reaction networks (.crn).
//
//   # comment to end of line
//   species A B C              optional; fixes coordinate order, declares inert species
//   A + B ->{1.0} 2C           reactants ->{rate} products
//   ->{1} mRNA                 empty side (or "0") is the zero complex
//   init A = 0.5               initial concentration, 0 when absent
//
// Species names match [A-Za-z][A-Za-z0-9_'.+-]*, so the "+" joining two terms
// must stand alone between whitespace: "E+ + P+".

#include <charconv>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "crnpid/crn.hpp"
#include "crnpid/errors.hpp"

namespace crnpid {

struct CrnDocument {
  Crn crn;
  std::map<std::string, double> initial;

  // Concentrations in species order; unlisted species start at 0.
  std::vector<double> initial_state() const {
    std::vector<double> x(crn.size(), 0.0);
    for (const auto& [name, value] : initial) x[crn.index_of(name)] = value;
    return x;
  }

  void set_initial(const std::string& species, double value) {
    if (!crn.contains(species)) throw StructuralError("initial value for unknown species '" + species + "'");
    if (!(value >= 0.0) || !std::isfinite(value))
      throw StructuralError("initial value for '" + species + "' must be finite and nonnegative");
    initial[species] = value;
  }

  friend bool operator==(const CrnDocument&, const CrnDocument&) = default;
};

// Shortest decimal that parses back to the same double.
inline std::string format_number(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, end);
}

namespace detail {

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based
};

inline std::vector<Token> split_tokens(std::string_view text, std::size_t base_column) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
    if (i >= text.size()) break;
    std::size_t start = i;
    while (i < text.size() && text[i] != ' ' && text[i] != '\t') ++i;
    tokens.push_back({text.substr(start, i - start), base_column + start});
  }
  return tokens;
}

inline bool is_digit(char c) { return c >= '0' && c <= '9'; }

inline std::optional<double> parse_double(std::string_view text) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

inline void check_species_token(const Token& tok, std::size_t line) {
  if (!is_valid_species_name(tok.text))
    throw ParseError(line, tok.column, "invalid species name '" + std::string(tok.text) + "'");
}

inline Complex parse_side(std::string_view text, std::size_t base_column, std::size_t line) {
  auto tokens = split_tokens(text, base_column);
  Complex side;
  if (tokens.empty()) return side;
  if (tokens.size() == 1 && tokens[0].text == "0") return side;

  bool expect_term = true;
  for (std::size_t k = 0; k < tokens.size(); ++k) {
    const Token& tok = tokens[k];
    if (!expect_term) {
      if (tok.text != "+")
        throw ParseError(line, tok.column, "expected '+' between terms, got '" + std::string(tok.text) + "'");
      expect_term = true;
      continue;
    }
    if (tok.text == "+") throw ParseError(line, tok.column, "expected a species, got '+'");

    int multiplicity = 1;
    std::size_t digits = 0;
    while (digits < tok.text.size() && is_digit(tok.text[digits])) ++digits;
    Token species = tok;
    if (digits > 0) {
      std::string_view number = tok.text.substr(0, digits);
      if (digits > 3 || std::stoi(std::string(number)) > kMaxMultiplicity)
        throw ParseError(line, tok.column,
                         "multiplicity '" + std::string(number) + "' exceeds " + std::to_string(kMaxMultiplicity));
      multiplicity = std::stoi(std::string(number));
      if (multiplicity == 0) throw ParseError(line, tok.column, "multiplicity must be positive");
      if (digits < tok.text.size()) {
        species = {tok.text.substr(digits), tok.column + digits};
      } else {
        if (k + 1 >= tokens.size() || tokens[k + 1].text == "+")
          throw ParseError(line, tok.column, "multiplicity '" + std::string(number) + "' is not followed by a species");
        species = tokens[++k];
      }
    }
    check_species_token(species, line);
    std::string name(species.text);
    if (side.multiplicity(name) + multiplicity > kMaxMultiplicity)
      throw ParseError(line, species.column, "multiplicity of '" + name + "' exceeds " + std::to_string(kMaxMultiplicity));
    side.add(name, multiplicity);
    expect_term = false;
  }
  if (expect_term) throw ParseError(line, tokens.back().column, "dangling '+'");
  return side;
}

inline bool starts_with_keyword(std::string_view line, std::string_view keyword) {
  return line.size() > keyword.size() && line.substr(0, keyword.size()) == keyword &&
         (line[keyword.size()] == ' ' || line[keyword.size()] == '\t');
}

}  // namespace detail

// Parses one "lhs -> rhs" equation without a rate, as used for rate overrides.
inline std::pair<Complex, Complex> parse_equation(std::string_view text) {
  auto arrow = text.find("->");
  if (arrow == std::string_view::npos) throw ParseError(1, 1, "expected '->' in '" + std::string(text) + "'");
  return {detail::parse_side(text.substr(0, arrow), 1, 1),
          detail::parse_side(text.substr(arrow + 2), arrow + 3, 1)};
}

inline CrnDocument parse_crn(std::string_view text) {
  CrnDocument doc;
  struct PendingInit {
    std::string species;
    double value;
    std::size_t line, column;
  };
  std::vector<PendingInit> inits;
  std::map<std::string, std::size_t> init_lines;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view raw = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;

    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    std::size_t lead = 0;
    while (lead < raw.size() && (raw[lead] == ' ' || raw[lead] == '\t')) ++lead;
    std::string_view line = raw.substr(lead);
    while (!line.empty() && (line.back() == ' ' || line.back() == '\t')) line.remove_suffix(1);
    if (line.empty()) {
      if (eol == text.size()) break;
      continue;
    }
    const std::size_t col0 = lead + 1;
    const bool has_arrow = line.find("->{") != std::string_view::npos;

    if (!has_arrow && detail::starts_with_keyword(line, "species")) {
      for (const auto& tok : detail::split_tokens(line.substr(7), col0 + 7)) {
        detail::check_species_token(tok, line_no);
        doc.crn.add_species(std::string(tok.text));
      }
    } else if (!has_arrow && detail::starts_with_keyword(line, "init")) {
      // '=' need not be spaced; species names cannot contain it.
      const std::string_view body = line.substr(4);
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) throw ParseError(line_no, col0, "expected 'init <species> = <value>'");
      auto tokens = detail::split_tokens(body.substr(0, eq), col0 + 4);
      auto value_tokens = detail::split_tokens(body.substr(eq + 1), col0 + 4 + eq + 1);
      if (tokens.size() != 1 || value_tokens.size() != 1)
        throw ParseError(line_no, col0, "expected 'init <species> = <value>'");
      tokens.push_back({body.substr(eq, 1), col0 + 4 + eq});
      tokens.push_back(value_tokens[0]);
      detail::check_species_token(tokens[0], line_no);
      auto value = detail::parse_double(tokens[2].text);
      if (!value || !std::isfinite(*value) || *value < 0.0)
        throw ParseError(line_no, tokens[2].column,
                         "initial value '" + std::string(tokens[2].text) + "' is not a finite nonnegative number");
      std::string name(tokens[0].text);
      if (auto it = init_lines.find(name); it != init_lines.end())
        throw ParseError(line_no, tokens[0].column,
                         "duplicate init for '" + name + "' (first on line " + std::to_string(it->second) + ")");
      init_lines.emplace(name, line_no);
      inits.push_back({name, *value, line_no, tokens[0].column});
    } else {
      auto arrow = line.find("->{");
      if (arrow == std::string_view::npos) throw ParseError(line_no, col0, "expected '->{rate}' in reaction");
      if (line.find("->{", arrow + 3) != std::string_view::npos)
        throw ParseError(line_no, col0 + line.find("->{", arrow + 3), "more than one arrow in reaction");
      auto close = line.find('}', arrow + 3);
      if (close == std::string_view::npos) throw ParseError(line_no, col0 + arrow, "unterminated rate, expected '}'");
      std::string_view rate_text = line.substr(arrow + 3, close - arrow - 3);
      std::size_t rate_col = col0 + arrow + 3;
      while (!rate_text.empty() && rate_text.front() == ' ') {
        rate_text.remove_prefix(1);
        ++rate_col;
      }
      while (!rate_text.empty() && rate_text.back() == ' ') rate_text.remove_suffix(1);
      auto rate = detail::parse_double(rate_text);
      if (!rate) throw ParseError(line_no, rate_col, "invalid rate literal '" + std::string(rate_text) + "'");
      if (!(*rate > 0.0) || !std::isfinite(*rate))
        throw ParseError(line_no, rate_col, "rate literal '" + std::string(rate_text) + "' must be positive and finite");
      Complex lhs = detail::parse_side(line.substr(0, arrow), col0, line_no);
      Complex rhs = detail::parse_side(line.substr(close + 1), col0 + close + 1, line_no);
      doc.crn.add_reaction(Reaction(std::move(lhs), std::move(rhs), *rate));
    }
    if (eol == text.size()) break;
  }

  for (const auto& init : inits) {
    if (!doc.crn.contains(init.species))
      throw ParseError(init.line, init.column, "init names unknown species '" + init.species + "'");
    doc.initial[init.species] = init.value;
  }
  return doc;
}

namespace detail {

inline std::string format_side(const Complex& side) {
  if (side.empty()) return "0";
  std::string out;
  for (const auto& t : side.terms()) {
    if (!out.empty()) out += " + ";
    if (t.multiplicity > 1) out += std::to_string(t.multiplicity);
    out += t.species;
  }
  return out;
}

}  // namespace detail

inline std::string format_reaction(const Reaction& r) {
  return detail::format_side(r.reactants()) + " ->{" + format_number(r.rate()) + "} " +
         detail::format_side(r.products());
}

// Canonical text: an optional species line (only when the coordinate order is
// not implied by the reactions), one line per reaction, then init lines.
inline std::string format_crn(const CrnDocument& doc) {
  Crn implied;
  for (const auto& r : doc.crn.reactions()) implied.add_reaction(r);

  std::string out;
  if (implied.species() != doc.crn.species()) {
    out += "species";
    for (const auto& s : doc.crn.species()) out += " " + s;
    out += "\n";
  }
  for (const auto& r : doc.crn.reactions()) out += format_reaction(r) + "\n";

  std::string inits;
  for (const auto& s : doc.crn.species()) {
    if (auto it = doc.initial.find(s); it != doc.initial.end())
      inits += "init " + s + " = " + format_number(it->second) + "\n";
  }
  if (!inits.empty() && !out.empty()) out += "\n";
  return out + inits;
}

inline std::string format_crn(const Crn& crn) { return format_crn(CrnDocument{crn, {}}); }

}  // namespace crnpid
