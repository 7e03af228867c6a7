#include "pddlsynth/synthesis/extract.hpp"

#include <algorithm>
#include <cctype>

#include "pddlsynth/synthesis/types.hpp"

namespace pddlsynth::synthesis {

namespace {

struct Span {
  std::size_t begin;  // whole span removed from the thought
  std::size_t end;
  std::string artifact;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::size_t find_ci(std::string_view hay, std::string_view needle, std::size_t from) {
  if (needle.size() > hay.size()) return std::string_view::npos;
  for (std::size_t i = from; i + needle.size() <= hay.size(); ++i) {
    bool ok = true;
    for (std::size_t k = 0; k < needle.size() && ok; ++k) {
      ok = std::tolower(static_cast<unsigned char>(hay[i + k])) == std::tolower(static_cast<unsigned char>(needle[k]));
    }
    if (ok) return i;
  }
  return std::string_view::npos;
}

std::optional<Span> fenced(std::string_view text, std::size_t from) {
  const auto open = find_ci(text, "```pddl", from);
  if (open == std::string_view::npos) return std::nullopt;
  auto body = text.find('\n', open);
  body = body == std::string_view::npos ? text.size() : body + 1;
  auto close = text.find("```", body);
  const std::size_t body_end = close == std::string_view::npos ? text.size() : close;
  const std::size_t end = close == std::string_view::npos ? text.size() : close + 3;
  const auto content = trim(text.substr(body, body_end - body));
  if (content.empty()) return std::nullopt;
  return Span{open, end, std::string(content)};
}

// Balanced parentheses from the first "(define", skipping ';' comments.
std::optional<Span> define_form(std::string_view text, std::size_t from) {
  auto start = from;
  while (true) {
    start = find_ci(text, "(define", start);
    if (start == std::string_view::npos) return std::nullopt;
    int depth = 0;
    for (std::size_t i = start; i < text.size(); ++i) {
      const char c = text[i];
      if (c == ';') {
        while (i < text.size() && text[i] != '\n') ++i;
        continue;
      }
      if (c == '(') ++depth;
      if (c == ')' && --depth == 0) return Span{start, i + 1, std::string(text.substr(start, i + 1 - start))};
    }
    // Unbalanced: a later "(define" cannot close either, since it sits inside.
    return std::nullopt;
  }
}

std::string remove_header(std::string s, std::string_view header) {
  const auto at = find_ci(s, header, 0);
  if (at != std::string::npos) s.erase(at, header.size());
  return s;
}

}  // namespace

std::optional<SplitOutput> try_split_cot_output(std::string_view text, std::string_view marker) {
  std::optional<Span> span;
  const auto at = marker.empty() ? std::string_view::npos : text.find(marker);
  if (at != std::string_view::npos) {
    span = fenced(text, at);
    if (!span) span = define_form(text, at);
  }
  if (!span) span = fenced(text, 0);
  if (!span) span = define_form(text, 0);
  if (!span) return std::nullopt;

  auto clean = [&](std::string part) {
    if (!marker.empty()) part = remove_header(part, marker);
    return std::string(trim(remove_header(part, "### Thought:")));
  };
  const auto before = clean(std::string(text.substr(0, span->begin)));
  const auto after = clean(std::string(text.substr(span->end)));
  const auto sep = before.empty() || after.empty() ? "" : "\n\n";
  return SplitOutput{before + sep + after, std::move(span->artifact)};
}

SplitOutput split_cot_output(std::string_view text, std::string_view marker) {
  auto out = try_split_cot_output(text, marker);
  if (!out) throw SynthesisError(SynthesisErrorCode::NoDomainFound, "no fenced pddl block or (define ...) form in output");
  return std::move(*out);
}

}  // namespace pddlsynth::synthesis
