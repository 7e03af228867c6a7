#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pddlsynth::pddl {

// Byte range [begin, end) into the parsed text, plus the 1-based line and
// column of `begin`.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t line = 1;
  std::size_t column = 1;

  // Spans are provenance, not structure: AST equality never looks at them,
  // so a reparsed rendering compares equal to the original tree.
  friend bool operator==(const Span&, const Span&) { return true; }
};

// Positional total order used where diagnostics need a stable sort.
inline bool span_before(const Span& a, const Span& b) {
  if (a.begin != b.begin) return a.begin < b.begin;
  return a.end < b.end;
}

enum class ParseErrorCode {
  UnbalancedParens,
  UnexpectedEof,
  MalformedSection,
  UnsupportedConstruct,
  NotADomain,
  NotAProblem,
};

std::string_view to_string(ParseErrorCode code);

class ParseError : public std::runtime_error {
 public:
  ParseError(ParseErrorCode code, Span span, std::string message);

  ParseErrorCode code() const noexcept { return code_; }
  const Span& span() const noexcept { return span_; }
  // The bare message without the "CODE line:col" prefix that what() carries.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ParseErrorCode code_;
  Span span_;
  std::string detail_;
};

}  // namespace pddlsynth::pddl
