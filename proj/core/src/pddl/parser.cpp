#include "pddlsynth/pddl/parser.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>

namespace pddlsynth::pddl {

namespace {

using Code = ParseErrorCode;

constexpr std::array kSupportedRequirements{
    std::string_view{":strips"},   std::string_view{":typing"},
    std::string_view{":negative-preconditions"}, std::string_view{":equality"},
    std::string_view{":action-costs"},
};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

[[noreturn]] void fail(Code code, const Span& span, std::string message) {
  throw ParseError(code, span, std::move(message));
}

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '-' || c == '_';
}

// Letters first, then letters/digits/'-'/'_'; variables carry a leading '?'.
bool valid_identifier(std::string_view s, bool allow_variable) {
  if (allow_variable && !s.empty() && s.front() == '?') s.remove_prefix(1);
  if (s.empty() || std::isalpha(static_cast<unsigned char>(s.front())) == 0) return false;
  return std::all_of(s.begin(), s.end(), is_ident_char);
}

std::string identifier(const SExpr& e, std::string_view what, bool allow_variable) {
  if (!e.is_atom()) fail(Code::MalformedSection, e.span, "expected " + std::string(what) + ", found a list");
  if (!valid_identifier(e.atom, allow_variable)) {
    fail(Code::MalformedSection, e.span, "invalid " + std::string(what) + " '" + e.atom + "'");
  }
  return lower(e.atom);
}

bool is_keyword(const SExpr& e, std::string_view kw) { return e.is_atom() && lower(e.atom) == kw; }

std::string head_of(const SExpr& e) {
  if (!e.is_list() || e.children.empty() || !e.children.front().is_atom()) return {};
  return lower(e.children.front().atom);
}

bool parse_integer(std::string_view text, std::int64_t& out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec == std::errc{} && ptr == last) return true;
  // Accept integral decimals such as "5.0".
  double d = 0;
  auto [dptr, dec] = std::from_chars(first, last, d);
  if (dec != std::errc{} || dptr != last || d != static_cast<double>(static_cast<std::int64_t>(d))) return false;
  out = static_cast<std::int64_t>(d);
  return true;
}

// `a b - t c - u d` -> [(a,t), (b,t), (c,u), (d,object)]
std::vector<TypedName> parse_typed_list(std::span<const SExpr> items, std::string_view what,
                                        bool allow_variable) {
  std::vector<TypedName> out;
  std::size_t pending_from = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const SExpr& item = items[i];
    if (item.is_atom() && item.atom == "-") {
      if (i + 1 >= items.size()) fail(Code::MalformedSection, item.span, "'-' without a type name");
      const SExpr& type = items[i + 1];
      if (type.is_list()) {
        if (head_of(type) == "either") fail(Code::UnsupportedConstruct, type.span, "'either' types are not supported");
        fail(Code::MalformedSection, type.span, "expected a type name after '-'");
      }
      if (pending_from == out.size()) fail(Code::MalformedSection, item.span, "'-' with no names before it");
      const std::string type_name = identifier(type, "type name", false);
      for (std::size_t k = pending_from; k < out.size(); ++k) out[k].type = type_name;
      pending_from = out.size();
      ++i;
      continue;
    }
    TypedName tn;
    tn.name = identifier(item, what, allow_variable);
    tn.span = item.span;
    out.push_back(std::move(tn));
  }
  return out;
}

std::vector<Requirement> parse_requirements(const SExpr& section) {
  std::vector<Requirement> out;
  for (std::size_t i = 1; i < section.children.size(); ++i) {
    const SExpr& flag = section.children[i];
    if (!flag.is_atom() || flag.atom.size() < 2 || flag.atom.front() != ':') {
      fail(Code::MalformedSection, flag.span, "requirement flags must look like ':name'");
    }
    Requirement r;
    r.flag = lower(flag.atom);
    r.supported = is_supported_requirement(r.flag);
    r.span = flag.span;
    out.push_back(std::move(r));
  }
  return out;
}

Term parse_term(const SExpr& e) {
  if (e.is_list()) fail(Code::UnsupportedConstruct, e.span, "function terms are not supported");
  Term t;
  t.name = identifier(e, "term", true);
  t.span = e.span;
  return t;
}

AtomicFormula parse_atomic(const SExpr& e) {
  AtomicFormula a;
  a.predicate = identifier(e.children.front(), "predicate name", false);
  a.span = e.span;
  for (std::size_t i = 1; i < e.children.size(); ++i) a.args.push_back(parse_term(e.children[i]));
  return a;
}

enum class Context { Condition, Effect };

struct EffectAccumulator {
  std::optional<CostEffect> cost;
};

bool is_unsupported_operator(const std::string& head) {
  static constexpr std::array kOps{
      std::string_view{"or"},     std::string_view{"imply"},     std::string_view{"exists"},
      std::string_view{"forall"}, std::string_view{"when"},      std::string_view{"<"},
      std::string_view{">"},      std::string_view{"<="},        std::string_view{">="},
      std::string_view{"decrease"}, std::string_view{"assign"},  std::string_view{"scale-up"},
      std::string_view{"scale-down"}, std::string_view{"preference"}};
  return std::find(kOps.begin(), kOps.end(), head) != kOps.end();
}

void absorb_cost(const SExpr& e, EffectAccumulator& acc) {
  if (e.children.size() != 3) fail(Code::MalformedSection, e.span, "increase takes a function and an amount");
  const SExpr& fn = e.children[1];
  if (!fn.is_list() || fn.children.size() != 1 || !fn.children.front().is_atom()) {
    fail(Code::UnsupportedConstruct, fn.span, "only nullary functions such as (total-cost) are supported");
  }
  const SExpr& amount = e.children[2];
  std::int64_t value = 0;
  if (!amount.is_atom() || !parse_integer(amount.atom, value) || value < 0) {
    fail(Code::UnsupportedConstruct, amount.span, "cost increases must be non-negative integer constants");
  }
  const std::string name = identifier(fn.children.front(), "function name", false);
  if (acc.cost && acc.cost->function != name) {
    fail(Code::UnsupportedConstruct, e.span, "increases of more than one function are not supported");
  }
  if (!acc.cost) acc.cost = CostEffect{name, 0, e.span};
  acc.cost->amount += value;
}

Formula parse_formula(const SExpr& e, Context ctx, EffectAccumulator* acc, bool top_level);

void append_flat(std::vector<Formula>& into, Formula f) {
  if (f.kind == Formula::Kind::And) {
    for (auto& child : f.children) into.push_back(std::move(child));
  } else {
    into.push_back(std::move(f));
  }
}

Formula parse_formula(const SExpr& e, Context ctx, EffectAccumulator* acc, bool top_level) {
  if (e.is_atom()) {
    fail(Code::MalformedSection, e.span, "expected a parenthesised formula, found '" + e.atom + "'");
  }
  if (e.children.empty()) {
    Formula f = Formula::make_and();
    f.span = e.span;
    return f;
  }
  if (e.children.front().is_list()) {
    fail(Code::MalformedSection, e.span, "formula must start with an operator or predicate name");
  }
  const std::string head = lower(e.children.front().atom);

  if (head == "and") {
    Formula f = Formula::make_and();
    f.span = e.span;
    for (std::size_t i = 1; i < e.children.size(); ++i) {
      const SExpr& child = e.children[i];
      if (ctx == Context::Effect && top_level && head_of(child) == "increase") {
        absorb_cost(child, *acc);
        continue;
      }
      append_flat(f.children, parse_formula(child, ctx, acc, false));
    }
    return f;
  }
  if (head == "not") {
    if (e.children.size() != 2) fail(Code::MalformedSection, e.span, "'not' takes exactly one argument");
    Formula inner = parse_formula(e.children[1], ctx, acc, false);
    if (inner.kind == Formula::Kind::Not) {
      Formula unwrapped = std::move(inner.children.front());
      return unwrapped;
    }
    if (inner.kind == Formula::Kind::And && ctx == Context::Condition) {
      fail(Code::UnsupportedConstruct, e.span, "negated conjunctions are disjunctions, which are not supported");
    }
    Formula f = Formula::make_not(std::move(inner));
    f.span = e.span;
    return f;
  }
  if (head == "=") {
    if (e.children.size() != 3) fail(Code::MalformedSection, e.span, "'=' takes exactly two terms");
    return Formula::make_equality(parse_term(e.children[1]), parse_term(e.children[2]), e.span);
  }
  if (head == "increase") {
    if (ctx == Context::Effect && top_level) {
      absorb_cost(e, *acc);
      Formula f = Formula::make_and();
      f.span = e.span;
      return f;
    }
    fail(ctx == Context::Effect ? Code::UnsupportedConstruct : Code::MalformedSection, e.span,
         "'increase' is only allowed at the top level of an effect");
  }
  if (is_unsupported_operator(head)) {
    fail(Code::UnsupportedConstruct, e.span, "'" + head + "' is outside the supported STRIPS subset");
  }
  return Formula::make_atom(parse_atomic(e));
}

Formula parse_condition(const SExpr& e) { return parse_formula(e, Context::Condition, nullptr, true); }

Formula parse_effect(const SExpr& e, std::optional<CostEffect>& cost) {
  EffectAccumulator acc;
  Formula f = parse_formula(e, Context::Effect, &acc, true);
  cost = std::move(acc.cost);
  return f;
}

ActionSchema parse_action(const SExpr& section) {
  if (section.children.size() < 2) fail(Code::MalformedSection, section.span, ":action needs a name");
  ActionSchema action;
  action.name = identifier(section.children[1], "action name", false);
  action.span = section.span;
  action.precondition = Formula::make_and();
  action.effect = Formula::make_and();

  for (std::size_t i = 2; i < section.children.size(); i += 2) {
    const SExpr& key = section.children[i];
    if (!key.is_atom()) fail(Code::MalformedSection, key.span, "expected an action keyword");
    const std::string kw = lower(key.atom);
    if (i + 1 >= section.children.size()) fail(Code::MalformedSection, key.span, kw + " has no value");
    const SExpr& value = section.children[i + 1];
    if (kw == ":parameters") {
      if (!value.is_list()) fail(Code::MalformedSection, value.span, ":parameters must be a list");
      // Sigil-less names are accepted here and reported by the validator.
      action.params = parse_typed_list(value.children, "parameter", true);
    } else if (kw == ":precondition") {
      action.precondition = parse_condition(value);
    } else if (kw == ":effect") {
      action.effect = parse_effect(value, action.cost);
    } else if (kw == ":duration" || kw == ":condition") {
      fail(Code::UnsupportedConstruct, key.span, kw + " belongs to durative actions, which are not supported");
    } else {
      fail(Code::MalformedSection, key.span, "unknown action keyword " + kw);
    }
  }
  return action;
}

PredicateDecl parse_predicate_decl(const SExpr& e) {
  if (!e.is_list() || e.children.empty()) fail(Code::MalformedSection, e.span, "predicate declarations are lists");
  PredicateDecl p;
  p.name = identifier(e.children.front(), "predicate name", false);
  p.span = e.span;
  p.params = parse_typed_list(std::span(e.children).subspan(1), "predicate parameter", true);
  return p;
}

std::vector<FunctionDecl> parse_functions(const SExpr& section) {
  std::vector<FunctionDecl> out;
  for (std::size_t i = 1; i < section.children.size(); ++i) {
    const SExpr& item = section.children[i];
    if (item.is_atom() && item.atom == "-") {
      if (i + 1 >= section.children.size() || !is_keyword(section.children[i + 1], "number")) {
        fail(Code::UnsupportedConstruct, item.span, "only numeric functions are supported");
      }
      ++i;
      continue;
    }
    if (!item.is_list() || item.children.empty()) fail(Code::MalformedSection, item.span, "function declarations are lists");
    if (item.children.size() != 1) {
      fail(Code::UnsupportedConstruct, item.span, "only nullary functions such as (total-cost) are supported");
    }
    out.push_back(FunctionDecl{identifier(item.children.front(), "function name", false), item.span});
  }
  return out;
}

// Checks `(define (<kind> NAME) ...)` and returns NAME.
std::string define_header(const SExpr& root, std::string_view kind, Code wrong_kind) {
  const std::string what = kind == "domain" ? "a domain" : "a problem";
  if (!root.is_list() || root.children.size() < 2 || !is_keyword(root.children[0], "define")) {
    fail(wrong_kind, root.span, "not " + what + " definition: expected (define (" + std::string(kind) + " ...) ...)");
  }
  const SExpr& header = root.children[1];
  if (!header.is_list() || header.children.size() != 2 || !is_keyword(header.children[0], kind)) {
    fail(wrong_kind, header.span, "not " + what + " definition: expected (" + std::string(kind) + " NAME)");
  }
  return identifier(header.children[1], std::string(kind) + " name", false);
}

bool is_unsupported_section(const std::string& kw) {
  return kw == ":durative-action" || kw == ":derived" || kw == ":process" || kw == ":event" ||
         kw == ":constraints";
}

}  // namespace

bool is_supported_requirement(std::string_view flag) {
  return std::find(kSupportedRequirements.begin(), kSupportedRequirements.end(), flag) !=
         kSupportedRequirements.end();
}

Domain domain_from_sexpr(const SExpr& root) {
  Domain d;
  d.name = define_header(root, "domain", Code::NotADomain);
  d.span = root.span;
  for (std::size_t i = 2; i < root.children.size(); ++i) {
    const SExpr& section = root.children[i];
    const std::string kw = head_of(section);
    if (kw.empty() || kw.front() != ':') {
      fail(Code::MalformedSection, section.span, "expected a domain section such as (:predicates ...)");
    }
    auto rest = std::span(section.children).subspan(1);
    if (kw == ":requirements") {
      auto reqs = parse_requirements(section);
      d.requirements.insert(d.requirements.end(), reqs.begin(), reqs.end());
    } else if (kw == ":types") {
      for (auto& tn : parse_typed_list(rest, "type name", false)) {
        d.types.push_back(TypeDecl{std::move(tn.name), std::move(tn.type), tn.span});
      }
    } else if (kw == ":constants") {
      auto names = parse_typed_list(rest, "constant", false);
      d.constants.insert(d.constants.end(), names.begin(), names.end());
    } else if (kw == ":predicates") {
      for (const SExpr& decl : rest) d.predicates.push_back(parse_predicate_decl(decl));
    } else if (kw == ":functions") {
      auto fns = parse_functions(section);
      d.functions.insert(d.functions.end(), fns.begin(), fns.end());
    } else if (kw == ":action") {
      d.actions.push_back(parse_action(section));
    } else if (is_unsupported_section(kw)) {
      fail(Code::UnsupportedConstruct, section.span, kw + " is outside the supported STRIPS subset");
    } else {
      fail(Code::MalformedSection, section.span, "unknown domain section " + kw);
    }
  }
  return d;
}

Problem problem_from_sexpr(const SExpr& root) {
  Problem p;
  p.name = define_header(root, "problem", Code::NotAProblem);
  p.span = root.span;
  p.goal = Formula::make_and();
  for (std::size_t i = 2; i < root.children.size(); ++i) {
    const SExpr& section = root.children[i];
    const std::string kw = head_of(section);
    if (kw.empty() || kw.front() != ':') {
      fail(Code::MalformedSection, section.span, "expected a problem section such as (:init ...)");
    }
    auto rest = std::span(section.children).subspan(1);
    if (kw == ":domain") {
      if (rest.size() != 1) fail(Code::MalformedSection, section.span, ":domain takes exactly one name");
      p.domain_name = identifier(rest.front(), "domain name", false);
    } else if (kw == ":requirements") {
      auto reqs = parse_requirements(section);
      p.requirements.insert(p.requirements.end(), reqs.begin(), reqs.end());
    } else if (kw == ":objects") {
      auto names = parse_typed_list(rest, "object", false);
      p.objects.insert(p.objects.end(), names.begin(), names.end());
    } else if (kw == ":init") {
      for (const SExpr& fact : rest) {
        const std::string head = head_of(fact);
        if (head.empty()) fail(Code::MalformedSection, fact.span, "init entries are (predicate args...) lists");
        if (head == "=") {
          if (fact.children.size() != 3 || !fact.children[1].is_list() || fact.children[1].children.size() != 1) {
            fail(Code::UnsupportedConstruct, fact.span, "only (= (function) value) numeric init is supported");
          }
          NumericAssignment na;
          na.function = identifier(fact.children[1].children.front(), "function name", false);
          if (!fact.children[2].is_atom() || !parse_integer(fact.children[2].atom, na.value)) {
            fail(Code::UnsupportedConstruct, fact.children[2].span, "numeric init values must be integers");
          }
          na.span = fact.span;
          p.numeric_init.push_back(std::move(na));
          continue;
        }
        if (head == "not") fail(Code::MalformedSection, fact.span, "negative literals are implicit in :init (closed world)");
        if (is_unsupported_operator(head)) fail(Code::UnsupportedConstruct, fact.span, "'" + head + "' in :init is not supported");
        AtomicFormula atom = parse_atomic(fact);
        for (const Term& t : atom.args) {
          if (t.is_variable()) fail(Code::MalformedSection, t.span, "init atoms must be ground, found " + t.name);
        }
        p.init.push_back(std::move(atom));
      }
    } else if (kw == ":goal") {
      if (rest.size() != 1) fail(Code::MalformedSection, section.span, ":goal takes exactly one formula");
      p.goal = parse_condition(rest.front());
    } else if (kw == ":metric") {
      if (rest.size() != 2) fail(Code::MalformedSection, section.span, ":metric takes a direction and an expression");
      const std::string dir = rest[0].is_atom() ? lower(rest[0].atom) : std::string{};
      if (dir == "maximize") fail(Code::UnsupportedConstruct, rest[0].span, "only minimize metrics are supported");
      if (dir != "minimize") fail(Code::MalformedSection, rest[0].span, "metric direction must be minimize");
      const SExpr& expr = rest[1];
      if (!expr.is_list() || expr.children.size() != 1) {
        fail(Code::UnsupportedConstruct, expr.span, "metric must be a single nullary function such as (total-cost)");
      }
      p.metric = Metric{true, identifier(expr.children.front(), "function name", false), section.span};
    } else if (is_unsupported_section(kw)) {
      fail(Code::UnsupportedConstruct, section.span, kw + " is outside the supported STRIPS subset");
    } else {
      fail(Code::MalformedSection, section.span, "unknown problem section " + kw);
    }
  }
  return p;
}

Domain parse_domain(std::string_view text) {
  const auto tokens = tokenize(text);
  const SExprParse parsed = parse_sexpr(tokens);
  if (parsed.trailing) fail(Code::MalformedSection, *parsed.trailing, "unexpected text after the domain definition");
  return domain_from_sexpr(parsed.root);
}

Problem parse_problem(std::string_view text) {
  const auto tokens = tokenize(text);
  const SExprParse parsed = parse_sexpr(tokens);
  if (parsed.trailing) fail(Code::MalformedSection, *parsed.trailing, "unexpected text after the problem definition");
  return problem_from_sexpr(parsed.root);
}

bool looks_like_problem(std::string_view text) {
  const auto tokens = tokenize(text);
  // ( define ( problem
  return tokens.size() >= 4 && tokens[0].kind == TokenKind::LParen && tokens[1].kind == TokenKind::Atom &&
         lower(tokens[1].text) == "define" && tokens[2].kind == TokenKind::LParen &&
         tokens[3].kind == TokenKind::Atom && lower(tokens[3].text) == "problem";
}

}  // namespace pddlsynth::pddl
