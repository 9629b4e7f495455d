#include "kinetica/dsl.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include <fmt/format.h>

namespace kinetica {

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& message)
    : std::runtime_error(fmt::format("line {}, column {}: {}", line, column, message)),
      line_(line),
      column_(column),
      message_(message) {}

namespace {

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

struct Term {
  int coefficient = 1;
  std::string name;
};

struct ParsedReaction {
  std::vector<Term> lhs;
  std::vector<Term> rhs;
  bool reversible = false;
  std::vector<double> rates;
};

/// Cursor over a single line; columns are 1-based byte offsets.
class LineScanner {
 public:
  LineScanner(std::string_view text, std::size_t line_no) : text_(text), line_(line_no) {}

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool at_end() {
    skip_ws();
    return pos_ >= text_.size();
  }
  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }
  bool consume(std::string_view token) {
    skip_ws();
    if (text_.substr(pos_, token.size()) == token) {
      pos_ += token.size();
      return true;
    }
    return false;
  }
  std::size_t column() const { return pos_ + 1; }

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(line_, column(), msg); }

  std::string identifier() {
    skip_ws();
    if (pos_ >= text_.size() || !is_ident_start(text_[pos_])) {
      if (pos_ >= text_.size()) fail("expected species name, found end of line");
      fail(fmt::format("expected species name, found '{}'", text_[pos_]));
    }
    const std::size_t start = pos_;
    while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  std::optional<long long> integer() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ == start) return std::nullopt;
    long long value = 0;
    auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (ec != std::errc{} || value > 1000000) {
      pos_ = start;
      fail("integer out of range");
    }
    return value;
  }

  double number() {
    skip_ws();
    const std::size_t start = pos_;
    if (pos_ >= text_.size()) fail("expected a rate constant, found end of line");
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), value);
    if (ec != std::errc{} || ptr == text_.data() + pos_)
      fail(fmt::format("expected a rate constant, found '{}'", text_[pos_]));
    pos_ = static_cast<std::size_t>(ptr - text_.data());
    if (!(value > 0.0) || !std::isfinite(value)) {
      pos_ = start;
      fail("rate constant must be positive and finite");
    }
    return value;
  }

 private:
  std::string_view text_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

std::vector<Term> parse_side(LineScanner& in) {
  std::vector<Term> terms;
  for (;;) {
    Term t;
    if (auto k = in.integer()) {
      if (*k == 0) {
        // A bare zero is the empty complex.
        if (terms.empty() && !is_ident_start(in.peek())) return terms;
        in.fail("coefficient must be positive; use a bare 0 for the empty complex");
      }
      t.coefficient = static_cast<int>(*k);
    }
    t.name = in.identifier();
    terms.push_back(std::move(t));
    if (!in.consume("+")) break;
  }
  return terms;
}

ParsedReaction parse_reaction_line(std::string_view line, std::size_t line_no) {
  LineScanner in(line, line_no);
  ParsedReaction pr;
  pr.lhs = parse_side(in);
  if (in.consume("<=>"))
    pr.reversible = true;
  else if (!in.consume("->"))
    in.fail("expected '->' or '<=>'");
  pr.rhs = parse_side(in);
  if (!in.consume("@")) in.fail("expected '@' followed by the rate constant");
  pr.rates.push_back(in.number());
  if (pr.reversible) {
    if (!in.consume(",")) in.fail("'<=>' requires two rate constants '@ forward, backward'");
    pr.rates.push_back(in.number());
  }
  if (!in.at_end()) in.fail("unexpected trailing input");
  return pr;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

ReactionNetwork parse_network(std::string_view text) {
  std::vector<std::string> names;
  std::map<std::string, std::size_t, std::less<>> index;
  std::vector<ParsedReaction> parsed;

  struct AtomLine {
    std::size_t line;
    std::size_t column;
    std::string species;
    std::vector<std::pair<std::string, int>> counts;
  };
  std::vector<AtomLine> atom_lines;
  bool in_atoms = false;

  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') {
      if (end == text.size()) break;
      continue;
    }
    if (body == "atoms:") {
      if (in_atoms) throw ParseError(line_no, 1, "duplicate 'atoms:' block");
      in_atoms = true;
    } else if (in_atoms) {
      LineScanner in(line, line_no);
      AtomLine al;
      al.line = line_no;
      in.skip_ws();
      al.column = in.column();
      al.species = in.identifier();
      if (!in.consume(":")) in.fail("expected ':' after species name in atoms block");
      while (!in.at_end()) {
        std::string atom = in.identifier();
        if (!in.consume("=")) in.fail("expected '=' after atom type");
        auto k = in.integer();
        if (!k) in.fail("expected a non-negative atom count");
        al.counts.emplace_back(std::move(atom), static_cast<int>(*k));
      }
      atom_lines.push_back(std::move(al));
    } else {
      auto pr = parse_reaction_line(line, line_no);
      for (const auto* side : {&pr.lhs, &pr.rhs})
        for (const auto& t : *side)
          if (index.emplace(t.name, names.size()).second) names.push_back(t.name);
      parsed.push_back(std::move(pr));
    }
    if (end == text.size()) break;
  }

  const std::size_t V = names.size();
  std::vector<Reaction> reactions;
  std::vector<InversePair> pairs;
  for (const auto& pr : parsed) {
    std::vector<int> dm(V, 0), dp(V, 0);
    for (const auto& t : pr.lhs) dm[index.at(t.name)] += t.coefficient;
    for (const auto& t : pr.rhs) dp[index.at(t.name)] += t.coefficient;
    reactions.push_back(make_reaction(dm, dp, pr.rates[0]));
    if (pr.reversible) {
      reactions.push_back(make_reaction(dp, dm, pr.rates[1]));
      pairs.emplace_back(reactions.size() - 2, reactions.size() - 1);
    }
  }

  std::vector<Species> species(V);
  for (std::size_t v = 0; v < V; ++v) species[v].name = names[v];

  std::vector<std::string> atom_types;
  std::map<std::string, std::size_t> atom_index;
  for (const auto& al : atom_lines)
    for (const auto& [atom, k] : al.counts)
      if (atom_index.emplace(atom, atom_types.size()).second) atom_types.push_back(atom);
  for (const auto& al : atom_lines) {
    auto it = index.find(al.species);
    if (it == index.end())
      throw ParseError(al.line, al.column,
                       fmt::format("unknown species '{}' in atoms block", al.species));
    auto& target = species[it->second].atom_counts;
    if (target)
      throw ParseError(al.line, al.column,
                       fmt::format("duplicate species '{}' in atoms block", al.species));
    target = std::vector<int>(atom_types.size(), 0);
    for (const auto& [atom, k] : al.counts) (*target)[atom_index.at(atom)] = k;
  }

  try {
    return ReactionNetwork(std::move(species), std::move(reactions), std::move(pairs),
                           std::move(atom_types));
  } catch (const ValidationError& e) {
    throw ParseError(line_no, 1, e.what());
  }
}

namespace {

std::string format_complex(const ReactionNetwork& network, const std::vector<int>& complex) {
  std::string out;
  for (std::size_t v = 0; v < complex.size(); ++v) {
    if (complex[v] == 0) continue;
    if (!out.empty()) out += " + ";
    if (complex[v] != 1) out += fmt::format("{} ", complex[v]);
    out += network.species()[v].name;
  }
  return out.empty() ? "0" : out;
}

}  // namespace

std::string serialize_network(const ReactionNetwork& network) {
  std::string out;
  const auto& rx = network.reactions();
  for (std::size_t r = 0; r < rx.size(); ++r) {
    const auto inv = network.inverse_of(r);
    if (inv && *inv == r + 1) {
      out += fmt::format("{} <=> {} @ {:.17g}, {:.17g}\n", format_complex(network, rx[r].d_minus),
                         format_complex(network, rx[r].d_plus), rx[r].rate, rx[r + 1].rate);
      ++r;
      continue;
    }
    // Non-adjacent inverse pairs cannot be expressed with '<=>' and are
    // written as two one-way reactions.
    out += fmt::format("{} -> {} @ {:.17g}\n", format_complex(network, rx[r].d_minus),
                       format_complex(network, rx[r].d_plus), rx[r].rate);
  }
  bool header = false;
  for (const auto& s : network.species()) {
    if (!s.atom_counts) continue;
    if (!header) {
      out += "atoms:\n";
      header = true;
    }
    out += s.name + ":";
    for (std::size_t b = 0; b < network.atom_types().size(); ++b)
      out += fmt::format(" {}={}", network.atom_types()[b], (*s.atom_counts)[b]);
    out += "\n";
  }
  return out;
}

ReactionNetwork load_network(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot open network file '{}'", path));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_network(buf.str());
}

}  // namespace kinetica
