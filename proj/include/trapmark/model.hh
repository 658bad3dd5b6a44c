#pragma once

// Static description of a parametric component-based system: component
// types replicated over a shared index domain [n], the interaction formula,
// the properties to check and the Ashcroft window declarations.

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "trapmark/formula.hh"

namespace trapmark {

class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A port and the unique transition it labels.  A port without a rule is
/// legal; its pre/post atoms read as falsity.
struct PortDecl {
    std::string name;
    std::optional<std::string> source;
    std::optional<std::string> target;
    SourceSpan span;

    bool has_rule() const { return source.has_value(); }
};

struct ComponentType {
    std::string name;
    std::vector<std::string> states;
    std::string initial;
    std::vector<PortDecl> ports;
    SourceSpan span;
};

enum class PropertyKind { Deadlock, BadStates };

struct PropertySpec {
    PropertyKind kind = PropertyKind::Deadlock;
    std::string name = "deadlock";
    std::optional<Formula> bad_states;  // present iff kind == BadStates
    SourceSpan span;
};

struct WindowConstant {
    std::string name;
    std::string type;
};

struct WindowSpec {
    std::string name;
    std::vector<WindowConstant> constants;
    Formula constraint;
    SourceSpan span;
};

struct SystemModel {
    std::vector<ComponentType> types;
    Formula interaction = Formula::falsity();
    SourceSpan interaction_span;
    std::vector<PropertySpec> properties;
    std::vector<WindowSpec> windows;
};

bool structurally_equal(const SystemModel& a, const SystemModel& b);

struct Diagnostic {
    enum class Severity { Error, Warning };
    Severity severity = Severity::Error;
    std::string rule;
    std::string message;
    SourceSpan span;

    bool is_error() const { return severity == Severity::Error; }
};

std::string format_diagnostic(const Diagnostic& d);
bool has_errors(const std::vector<Diagnostic>& ds);

std::vector<Diagnostic> validate_system(const SystemModel& model);

// ---------------------------------------------------------------------------
// Lookups.  State predicates are qualified as Type.state.

std::string qualified_state(const std::string& type, const std::string& state);
/// All state predicates in declaration order.
std::vector<std::string> state_predicates(const SystemModel& model);
std::vector<std::string> port_names(const SystemModel& model);

const ComponentType* find_type(const SystemModel& model, const std::string& name);
/// Index of the component type owning `port`, or nullopt.
std::optional<std::size_t> port_type_index(const SystemModel& model, const std::string& port);
/// Index of the component type owning a qualified state predicate.
std::optional<std::size_t> state_type_index(const SystemModel& model, const std::string& qualified);

/// Qualified source and target of the transition labelled by `port`;
/// nullopt when the port has no rule.  Throws ModelError for unknown ports.
std::optional<std::pair<std::string, std::string>> port_pre_post(const SystemModel& model,
                                                                 const std::string& port);

// ---------------------------------------------------------------------------
// Interaction clauses:
//   exists x1..xl. guard & p1(t1) & ... & pl(tl) & forall y. psi -> q(y) & ...

struct PortAtom {
    std::string port;
    Term term;
};

struct Broadcast {
    std::string var;
    Formula guard;
    std::string port;
};

struct InteractionClause {
    std::vector<std::string> vars;
    Formula guard;
    std::vector<PortAtom> rendezvous;
    std::vector<Broadcast> broadcasts;
    SourceSpan span;
};

/// Decomposes the interaction into clauses; throws ModelError when a
/// disjunct is not of the clause shape.
std::vector<InteractionClause> interaction_clauses(const SystemModel& model);

}  // namespace trapmark
