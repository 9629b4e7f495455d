#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include "kinetica/network.hpp"

namespace kinetica {

/// Syntax or semantic error in network text, with a 1-based position.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& message);

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  const std::string& message() const { return message_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::string message_;
};

/// Parses the line-oriented network language:
///
///     # comment
///     2 X -> 3 X @ 1.0
///     A + B <=> C @ 2.0, 0.5
///     0 -> A @ 1
///     atoms:
///     A: C=1 H=4
///
/// Species are numbered by first appearance. `<=>` expands into two
/// consecutive reactions declared as an inverse pair.
ReactionNetwork parse_network(std::string_view text);

/// Canonical text form; `parse_network(serialize_network(n)) == n` for every
/// network produced by the parser.
std::string serialize_network(const ReactionNetwork& network);

ReactionNetwork load_network(const std::string& path);

}  // namespace kinetica
