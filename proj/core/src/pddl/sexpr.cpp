#include "pddlsynth/pddl/sexpr.hpp"

#include <sstream>

namespace pddlsynth::pddl {

std::string_view to_string(ParseErrorCode code) {
  switch (code) {
    case ParseErrorCode::UnbalancedParens: return "UNBALANCED_PARENS";
    case ParseErrorCode::UnexpectedEof: return "UNEXPECTED_EOF";
    case ParseErrorCode::MalformedSection: return "MALFORMED_SECTION";
    case ParseErrorCode::UnsupportedConstruct: return "UNSUPPORTED_CONSTRUCT";
    case ParseErrorCode::NotADomain: return "NOT_A_DOMAIN";
    case ParseErrorCode::NotAProblem: return "NOT_A_PROBLEM";
  }
  return "UNKNOWN";
}

namespace {

// Recursive consumers (AST builders, destructors) stay well inside the
// default stack at this depth.
constexpr std::size_t kMaxDepth = 2048;

std::string format_error(ParseErrorCode code, const Span& span, const std::string& message) {
  std::ostringstream out;
  out << to_string(code) << ' ' << span.line << ':' << span.column << ' ' << message;
  return out.str();
}

}  // namespace

ParseError::ParseError(ParseErrorCode code, Span span, std::string message)
    : std::runtime_error(format_error(code, span, message)),
      code_(code),
      span_(span),
      detail_(std::move(message)) {}

SExprParse parse_sexpr(std::span<const Token> tokens) {
  if (tokens.empty()) {
    throw ParseError(ParseErrorCode::UnexpectedEof, Span{}, "empty input");
  }
  const Token& first = tokens.front();
  if (first.kind == TokenKind::RParen) {
    throw ParseError(ParseErrorCode::UnbalancedParens, first.span, "unmatched ')'");
  }
  if (first.kind == TokenKind::Atom) {
    SExprParse result{SExpr{false, first.text, {}, first.span}, std::nullopt};
    if (tokens.size() > 1) result.trailing = tokens[1].span;
    return result;
  }

  // Open lists, innermost last.
  std::vector<SExpr> stack;
  std::size_t i = 0;
  for (; i < tokens.size(); ++i) {
    const Token& tok = tokens[i];
    switch (tok.kind) {
      case TokenKind::LParen: {
        SExpr node;
        node.list = true;
        node.span = tok.span;
        if (stack.size() >= kMaxDepth) {
          throw ParseError(ParseErrorCode::MalformedSection, tok.span,
                           "nesting deeper than " + std::to_string(kMaxDepth) + " lists");
        }
        stack.push_back(std::move(node));
        break;
      }
      case TokenKind::Atom:
        stack.back().children.push_back(SExpr{false, tok.text, {}, tok.span});
        break;
      case TokenKind::RParen: {
        SExpr done = std::move(stack.back());
        stack.pop_back();
        done.span.end = tok.span.end;
        if (stack.empty()) {
          SExprParse result{std::move(done), std::nullopt};
          if (i + 1 < tokens.size()) result.trailing = tokens[i + 1].span;
          return result;
        }
        stack.back().children.push_back(std::move(done));
        break;
      }
    }
  }
  Span open = stack.back().span;
  throw ParseError(ParseErrorCode::UnexpectedEof, open,
                   "input ended with " + std::to_string(stack.size()) + " unclosed '('");
}

namespace {

void write(std::ostringstream& out, const SExpr& e) {
  if (e.is_atom()) {
    out << e.atom;
    return;
  }
  out << '(';
  for (std::size_t i = 0; i < e.children.size(); ++i) {
    if (i) out << ' ';
    write(out, e.children[i]);
  }
  out << ')';
}

}  // namespace

std::string to_string(const SExpr& expr) {
  std::ostringstream out;
  write(out, expr);
  return out.str();
}

}  // namespace pddlsynth::pddl
