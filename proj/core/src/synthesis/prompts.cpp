#include "pddlsynth/synthesis/prompts.hpp"

#include <stdexcept>

namespace pddlsynth::synthesis {

namespace {

constexpr std::string_view kNl2Domain = R"TPL(You will be given a natural language description of a planning problem. Your task is to translate this description into PDDL domain code. This includes defining predicates and actions based on the information provided.

Information about the AI agent will be provided in the natural language description. Note that individual conditions in preconditions and effects should be listed separately. For example, “object1 is washed and heated” should be considered as two separate conditions “object1 is washed” and “object1 is heated”. Also, in PDDL, two predicates cannot have the same name even if they have different parameters. Each predicate in PDDL must have a unique name, and its parameters must be explicitly defined in the predicate definition. It is recommended to define predicate names in an intuitive and readable way. Remember: Ignore the information that you think is not helpful for the planning task.

You are only responsible for domain generation.
Before you generate the concrete domain code, you should first generate a natural language thought about the meaning of each variable, and the step-by-step explaination of the domain code.
Even if I didn't provide the exact name of the predicates and actions, you should generate them based on the information provided in the natural language description.

Template is:

### Thought:

predicates1: the name of predicate1, explanation of predictate1

...

predicaten: the name of predicaten, explanation of predictaten

action1: the name of action1, explanation of action

...

actionn: the name of action, explanation of action

<thought>

### Domain:
```pddl

The concrete pddl code for domain.pddl 

Now its your time to generate the solution, you have to follow the format I provided above.

NL_Description: {G})TPL";

// Same as kNl2Domain with the framing sentence and the input label swapped.
constexpr std::string_view kProb2Domain = R"TPL(You will be given a PDDL problem file of a planning problem. Your task is to write the PDDL domain code that this problem file uses. This includes defining predicates and actions based on the information provided.

Information about the AI agent will be provided in the natural language description. Note that individual conditions in preconditions and effects should be listed separately. For example, “object1 is washed and heated” should be considered as two separate conditions “object1 is washed” and “object1 is heated”. Also, in PDDL, two predicates cannot have the same name even if they have different parameters. Each predicate in PDDL must have a unique name, and its parameters must be explicitly defined in the predicate definition. It is recommended to define predicate names in an intuitive and readable way. Remember: Ignore the information that you think is not helpful for the planning task.

You are only responsible for domain generation.
Before you generate the concrete domain code, you should first generate a natural language thought about the meaning of each variable, and the step-by-step explaination of the domain code.
Even if I didn't provide the exact name of the predicates and actions, you should generate them based on the information provided in the natural language description.

Template is:

### Thought:

predicates1: the name of predicate1, explanation of predictate1

...

predicaten: the name of predicaten, explanation of predictaten

action1: the name of action1, explanation of action

...

actionn: the name of action, explanation of action

<thought>

### Domain:
```pddl

The concrete pddl code for domain.pddl 

Now its your time to generate the solution, you have to follow the format I provided above.

PDDL_Problem: {G})TPL";

// The domain variant adapted to problem output: framing sentences, thought
// skeleton and the "### Problem:" section marker. The domain is supplied too.
constexpr std::string_view kNl2Problem = R"TPL(You will be given a natural language description of a planning problem and the PDDL domain it uses. Your task is to translate this description into PDDL problem code. This includes defining objects, the initial state and the goal based on the information provided.

Information about the AI agent will be provided in the natural language description. Note that individual conditions in preconditions and effects should be listed separately. For example, “object1 is washed and heated” should be considered as two separate conditions “object1 is washed” and “object1 is heated”. Also, in PDDL, two predicates cannot have the same name even if they have different parameters. Each predicate in PDDL must have a unique name, and its parameters must be explicitly defined in the predicate definition. It is recommended to define predicate names in an intuitive and readable way. Remember: Ignore the information that you think is not helpful for the planning task.

You are only responsible for problem generation.
Before you generate the concrete problem code, you should first generate a natural language thought about the meaning of each object, and the step-by-step explaination of the problem code.
Even if I didn't provide the exact name of the objects, you should generate them based on the information provided in the natural language description.

Template is:

### Thought:

objects: the objects and their types

init: the facts that hold initially

goal: the facts that must hold at the end

<thought>

### Problem:
```pddl

The concrete pddl code for problem.pddl 

Now its your time to generate the solution, you have to follow the format I provided above.

PDDL_Domain:
```pddl
{DOMAIN}
```

NL_Description: {G})TPL";

constexpr std::string_view kOptimizer = R"TPL(You will be provided a natural language description of a planning domain, and its corresponding PDDL domain code with intermediate thoughts explaining each predicate and action. Your task is to generate critical feedback on the PDDL domain code based on the natural language description. 
You should evaluate the grammar and logic of the PDDL domain codes, and the logic error in the intermediate thoughts.

PDDL synthesis problem: {G}
natural language chain of thoughts: {T}
Generated PDDL domain: {D})TPL";

constexpr std::string_view kUpdate = R"TPL(You will be provided a PDDL domain code and critical feedback on the PDDL domain code based on the natural language description.
Your task is to generate a new PDDL domain code that is more consistent with the natural language description.

PDDL synthesis problem: {G}
Natural language chain of thoughts at the previous turn: {T}
Generated PDDL domain at the previous turn: {D}
The error of the PDDL domain {F})TPL";

}  // namespace

std::string_view cot_template(TaskKind kind) {
  switch (kind) {
    case TaskKind::NL2Domain: return kNl2Domain;
    case TaskKind::Prob2Domain: return kProb2Domain;
    case TaskKind::NL2Problem: return kNl2Problem;
  }
  return kNl2Domain;
}

std::string_view optimizer_template() { return kOptimizer; }
std::string_view update_template() { return kUpdate; }

std::string instantiate(std::string_view tmpl, const std::map<std::string, std::string, std::less<>>& values) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      const auto close = tmpl.find('}', i + 1);
      if (close != std::string_view::npos) {
        const auto name = tmpl.substr(i + 1, close - i - 1);
        if (!name.empty() && name.find_first_of("{ \n") == std::string_view::npos) {
          const auto it = values.find(name);
          if (it == values.end()) throw std::invalid_argument("no value for placeholder {" + std::string(name) + "}");
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += tmpl[i++];
  }
  return out;
}

std::string_view artifact_marker(TaskKind kind) {
  return kind == TaskKind::NL2Problem ? "### Problem:" : "### Domain:";
}

std::vector<llm::ChatMessage> build_cot_prompt(const SynthesisTask& task) {
  std::map<std::string, std::string, std::less<>> values{{"G", task.g_text}};
  if (task.kind == TaskKind::NL2Problem) values["DOMAIN"] = task.domain_text;
  return {{llm::Role::User, instantiate(cot_template(task.kind), values)}};
}

std::vector<llm::ChatMessage> build_opt_prompt(const SynthesisTask& task, const SolutionState& state) {
  return {{llm::Role::User,
           instantiate(kOptimizer, {{"G", task.g_text}, {"T", state.thought}, {"D", state.artifact}})}};
}

std::vector<llm::ChatMessage> build_update_prompt(const SynthesisTask& task, const SolutionState& state,
                                                  const Feedback& feedback) {
  return {{llm::Role::User, instantiate(kUpdate, {{"G", task.g_text},
                                                  {"T", state.thought},
                                                  {"D", state.artifact},
                                                  {"F", feedback.text}})}};
}

}  // namespace pddlsynth::synthesis
