#include "trapmark/model.hh"

#include <map>
#include <set>
#include <sstream>

namespace trapmark {

namespace {

bool equal_types(const ComponentType& a, const ComponentType& b) {
    if (a.name != b.name || a.states != b.states || a.initial != b.initial) return false;
    if (a.ports.size() != b.ports.size()) return false;
    for (std::size_t i = 0; i < a.ports.size(); ++i) {
        const auto& p = a.ports[i];
        const auto& q = b.ports[i];
        if (p.name != q.name || p.source != q.source || p.target != q.target) return false;
    }
    return true;
}

bool equal_properties(const PropertySpec& a, const PropertySpec& b) {
    if (a.kind != b.kind || a.name != b.name) return false;
    if (a.bad_states.has_value() != b.bad_states.has_value()) return false;
    return !a.bad_states || structurally_equal(*a.bad_states, *b.bad_states);
}

bool equal_windows(const WindowSpec& a, const WindowSpec& b) {
    if (a.name != b.name || a.constants.size() != b.constants.size()) return false;
    for (std::size_t i = 0; i < a.constants.size(); ++i)
        if (a.constants[i].name != b.constants[i].name || a.constants[i].type != b.constants[i].type) return false;
    return structurally_equal(a.constraint, b.constraint);
}

template <typename T, typename Eq>
bool equal_lists(const std::vector<T>& a, const std::vector<T>& b, Eq eq) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!eq(a[i], b[i])) return false;
    return true;
}

}  // namespace

bool structurally_equal(const SystemModel& a, const SystemModel& b) {
    return equal_lists(a.types, b.types, equal_types) && structurally_equal(a.interaction, b.interaction) &&
           equal_lists(a.properties, b.properties, equal_properties) &&
           equal_lists(a.windows, b.windows, equal_windows);
}

std::string format_diagnostic(const Diagnostic& d) {
    std::ostringstream os;
    os << (d.span.file.empty() ? "<input>" : d.span.file) << ':' << d.span.line << ':' << d.span.column << ": "
       << (d.is_error() ? "error" : "warning") << ": " << d.message;
    if (!d.rule.empty()) os << " [" << d.rule << ']';
    return os.str();
}

bool has_errors(const std::vector<Diagnostic>& ds) {
    for (const auto& d : ds)
        if (d.is_error()) return true;
    return false;
}

// ---------------------------------------------------------------------------

std::string qualified_state(const std::string& type, const std::string& state) { return type + "." + state; }

std::vector<std::string> state_predicates(const SystemModel& model) {
    std::vector<std::string> out;
    for (const auto& t : model.types)
        for (const auto& s : t.states) out.push_back(qualified_state(t.name, s));
    return out;
}

std::vector<std::string> port_names(const SystemModel& model) {
    std::vector<std::string> out;
    for (const auto& t : model.types)
        for (const auto& p : t.ports) out.push_back(p.name);
    return out;
}

const ComponentType* find_type(const SystemModel& model, const std::string& name) {
    for (const auto& t : model.types)
        if (t.name == name) return &t;
    return nullptr;
}

std::optional<std::size_t> port_type_index(const SystemModel& model, const std::string& port) {
    for (std::size_t k = 0; k < model.types.size(); ++k)
        for (const auto& p : model.types[k].ports)
            if (p.name == port) return k;
    return std::nullopt;
}

std::optional<std::size_t> state_type_index(const SystemModel& model, const std::string& qualified) {
    for (std::size_t k = 0; k < model.types.size(); ++k)
        for (const auto& s : model.types[k].states)
            if (qualified_state(model.types[k].name, s) == qualified) return k;
    return std::nullopt;
}

std::optional<std::pair<std::string, std::string>> port_pre_post(const SystemModel& model,
                                                                 const std::string& port) {
    for (const auto& t : model.types)
        for (const auto& p : t.ports)
            if (p.name == port) {
                if (!p.has_rule()) return std::nullopt;
                return std::make_pair(qualified_state(t.name, *p.source), qualified_state(t.name, *p.target));
            }
    throw ModelError("unknown port '" + port + "'");
}

// ---------------------------------------------------------------------------
// Clause extraction

namespace {

void flatten_and(const Formula& f, std::vector<Formula>& out) {
    if (f.op() == Op::And) {
        flatten_and(f.kid(0), out);
        flatten_and(f.kid(1), out);
    } else if (f.op() != Op::True) {
        out.push_back(f);
    }
}

void split_disjuncts(const Formula& f, std::vector<std::string> prefix,
                     std::vector<std::pair<std::vector<std::string>, Formula>>& out) {
    if (f.op() == Op::Or) {
        split_disjuncts(f.kid(0), prefix, out);
        split_disjuncts(f.kid(1), prefix, out);
    } else if (f.op() == Op::Exists) {
        prefix.push_back(f.name());
        split_disjuncts(f.kid(0), std::move(prefix), out);
    } else if (f.op() == Op::False) {
        // the empty disjunction contributes no clause
    } else {
        out.emplace_back(std::move(prefix), f);
    }
}

std::set<std::string> port_set(const SystemModel& model) {
    auto ps = port_names(model);
    return {ps.begin(), ps.end()};
}

// forall y. psi -> q(y), forall y. q(y), forall y. !psi | q(y)
std::optional<Broadcast> as_broadcast(const Formula& f, const std::set<std::string>& ports) {
    if (f.op() != Op::Forall) return std::nullopt;
    const std::string& y = f.name();
    const Formula& body = f.kid(0);
    auto is_recv = [&](const Formula& a) {
        return a.op() == Op::Pred && ports.count(a.name()) && a.terms()[0] == Term::var(y);
    };
    if (is_recv(body)) return Broadcast{y, Formula::truth(), body.name()};
    if (body.op() == Op::Implies && is_recv(body.kid(1)) && !mentions_predicates(body.kid(0)))
        return Broadcast{y, body.kid(0), body.kid(1).name()};
    if (body.op() == Op::Or && is_recv(body.kid(1)) && body.kid(0).op() == Op::Not &&
        !mentions_predicates(body.kid(0)))
        return Broadcast{y, body.kid(0).kid(0), body.kid(1).name()};
    return std::nullopt;
}

}  // namespace

std::vector<InteractionClause> interaction_clauses(const SystemModel& model) {
    const auto ports = port_set(model);
    std::vector<std::pair<std::vector<std::string>, Formula>> parts;
    split_disjuncts(model.interaction, {}, parts);
    std::vector<InteractionClause> out;
    for (auto& [vars, body] : parts) {
        InteractionClause c;
        c.vars = vars;
        c.span = body.span();
        std::vector<Formula> conjuncts, guards;
        flatten_and(body, conjuncts);
        for (const auto& g : conjuncts) {
            if (g.op() == Op::Pred && ports.count(g.name())) {
                c.rendezvous.push_back({g.name(), g.terms()[0]});
            } else if (!mentions_predicates(g)) {
                guards.push_back(g);
            } else if (auto b = as_broadcast(g, ports)) {
                c.broadcasts.push_back(*b);
            } else {
                throw ModelError("interaction conjunct '" + to_string(g) +
                                 "' is neither a port atom, a port-free guard nor a guarded broadcast");
            }
        }
        if (c.rendezvous.empty() && c.broadcasts.empty())
            throw ModelError("interaction disjunct '" + to_string(body) + "' has no port atom");
        c.guard = Formula::conj_all(guards);
        out.push_back(std::move(c));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

struct Validator {
    const SystemModel& model;
    std::vector<Diagnostic> out;

    void error(std::string rule, std::string message, const SourceSpan& span) {
        out.push_back({Diagnostic::Severity::Error, std::move(rule), std::move(message), span});
    }
    void warning(std::string rule, std::string message, const SourceSpan& span) {
        out.push_back({Diagnostic::Severity::Warning, std::move(rule), std::move(message), span});
    }

    void check_types() {
        std::set<std::string> type_names, ports;
        for (const auto& t : model.types) {
            if (!type_names.insert(t.name).second)
                error("duplicate component type", "component type '" + t.name + "' declared twice", t.span);
            std::set<std::string> states(t.states.begin(), t.states.end());
            if (states.size() != t.states.size())
                error("duplicate state", "component type '" + t.name + "' repeats a state name", t.span);
            if (t.states.empty()) error("empty state set", "component type '" + t.name + "' has no states", t.span);
            if (!states.count(t.initial))
                error("initial state undeclared",
                      "initial state '" + t.initial + "' of '" + t.name + "' is not a declared state", t.span);
            for (const auto& p : t.ports) {
                if (!ports.insert(p.name).second)
                    error("duplicate port", "port '" + p.name + "' is declared more than once", p.span);
                if (!p.has_rule()) {
                    warning("port without transition",
                            "port '" + p.name + "' labels no transition; its interactions can never fire", p.span);
                    continue;
                }
                if (!states.count(*p.source) || !states.count(*p.target))
                    error("transition state undeclared",
                          "transition of port '" + p.name + "' uses a state not declared in '" + t.name + "'",
                          p.span);
            }
        }
        if (model.types.empty()) error("no component type", "the system declares no component type", {});
        std::set<std::string> states;
        for (const auto& t : model.types)
            for (const auto& s : t.states) states.insert(s);
        for (const auto& p : ports)
            if (type_names.count(p))
                error("name clash", "port '" + p + "' has the name of a component type", model.interaction_span);
    }

    // Every atom comparing succ^i(x) with succ^j(x), i != j.
    void check_same_variable(const Formula& f, const SourceSpan& fallback) {
        if (f.op() == Op::Leq || f.op() == Op::Lt || f.op() == Op::Eq) {
            const auto& a = f.terms()[0];
            const auto& b = f.terms()[1];
            if (a.same_base(b) && a.succs != b.succs)
                error("same-variable comparison",
                      "atom '" + to_string(f) + "' compares two terms over the same variable",
                      f.span().line > 0 && !f.span().file.empty() ? f.span() : fallback);
        }
        for (const auto& k : f.kids()) check_same_variable(k, fallback);
    }

    void check_predicates(const Formula& f, const std::set<std::string>& allowed, const std::string& what,
                          const std::string& rule, const SourceSpan& span) {
        for (const auto& p : free_symbols(f).preds)
            if (!allowed.count(p)) error(rule, what + " mentions '" + p + "'", span);
    }

    static bool distinct_literal(const Formula& g, const Term& a, const Term& b) {
        if (g.op() == Op::Lt) {
            const auto& t = g.terms();
            return (t[0] == a && t[1] == b) || (t[0] == b && t[1] == a);
        }
        if (g.op() == Op::Not && g.kid(0).op() == Op::Eq) {
            const auto& t = g.kid(0).terms();
            return (t[0] == a && t[1] == b) || (t[0] == b && t[1] == a);
        }
        return false;
    }

    static bool forced_distinct(const Formula& guard, const Term& a, const Term& b) {
        std::vector<Formula> cs;
        flatten_and(guard, cs);
        for (const auto& g : cs)
            if (distinct_literal(g, a, b)) return true;
        return false;
    }

    void check_clauses() {
        std::vector<InteractionClause> clauses;
        try {
            clauses = interaction_clauses(model);
        } catch (const ModelError& e) {
            error("interaction shape", e.what(), model.interaction_span);
            return;
        }
        for (const auto& c : clauses) {
            const SourceSpan& span = c.span.file.empty() ? model.interaction_span : c.span;
            std::set<std::string> vars(c.vars.begin(), c.vars.end());
            auto type_of = [&](const std::string& p) { return port_type_index(model, p); };
            for (const auto& r : c.rendezvous) {
                if (r.term.base == TermBase::Var && !vars.count(r.term.name))
                    error("interaction shape", "port atom over unbound variable '" + r.term.name + "'", span);
                if (r.term.base != TermBase::Var)
                    error("interaction shape", "port atom '" + r.port + "' must be applied to a variable term",
                          span);
            }
            // two ports of one type: rendezvous pairs
            for (std::size_t i = 0; i < c.rendezvous.size(); ++i)
                for (std::size_t j = i + 1; j < c.rendezvous.size(); ++j) {
                    const auto& a = c.rendezvous[i];
                    const auto& b = c.rendezvous[j];
                    if (a.port == b.port || type_of(a.port) != type_of(b.port)) continue;
                    if (forced_distinct(c.guard, a.term, b.term)) continue;
                    error("two ports of one component type in one clause",
                          "ports '" + a.port + "' and '" + b.port + "' of one component type meet in one clause",
                          span);
                }
            for (const auto& bc : c.broadcasts) {
                for (const auto& r : c.rendezvous) {
                    if (r.port == bc.port || type_of(r.port) != type_of(bc.port)) continue;
                    if (forced_distinct(bc.guard, Term::var(bc.var), r.term)) continue;
                    error("two ports of one component type in one clause",
                          "ports '" + r.port + "' and '" + bc.port + "' of one component type meet in one clause",
                          span);
                }
            }
            for (std::size_t i = 0; i < c.broadcasts.size(); ++i)
                for (std::size_t j = i + 1; j < c.broadcasts.size(); ++j)
                    if (c.broadcasts[i].port != c.broadcasts[j].port &&
                        type_of(c.broadcasts[i].port) == type_of(c.broadcasts[j].port))
                        error("two ports of one component type in one clause",
                              "broadcasts '" + c.broadcasts[i].port + "' and '" + c.broadcasts[j].port +
                                  "' of one component type meet in one clause",
                              span);
        }
    }

    void run() {
        check_types();
        const auto ports = port_set(model);
        auto sp = state_predicates(model);
        std::set<std::string> states(sp.begin(), sp.end());

        auto fs = free_symbols(model.interaction);
        if (!is_sentence(model.interaction) || !fs.consts.empty())
            error("interaction not a sentence", "the interaction formula has free variables or constants",
                  model.interaction_span);
        check_predicates(model.interaction, ports, "the interaction formula", "interaction mentions non-port",
                         model.interaction_span);
        if (!fs.sets.empty())
            error("second-order interaction", "the interaction formula uses set variables", model.interaction_span);
        check_same_variable(model.interaction, model.interaction_span);
        check_clauses();

        std::set<std::string> prop_names;
        for (const auto& p : model.properties) {
            if (!prop_names.insert(p.name).second)
                error("duplicate property", "property '" + p.name + "' declared twice", p.span);
            if (p.kind == PropertyKind::BadStates) {
                if (!p.bad_states) {
                    error("missing bad-state formula", "property '" + p.name + "' has no formula", p.span);
                    continue;
                }
                check_predicates(*p.bad_states, states, "property '" + p.name + "'", "property mentions non-state",
                                 p.span);
                if (!is_sentence(*p.bad_states) || !free_symbols(*p.bad_states).consts.empty())
                    error("property not a sentence", "property '" + p.name + "' has free variables or constants",
                          p.span);
                check_same_variable(*p.bad_states, p.span);
            } else if (p.bad_states) {
                error("unexpected bad-state formula", "deadlock property carries a formula", p.span);
            }
        }

        std::set<std::string> window_names;
        for (const auto& w : model.windows) {
            if (!window_names.insert(w.name).second)
                error("duplicate window", "window '" + w.name + "' declared twice", w.span);
            std::set<std::string> consts;
            for (const auto& c : w.constants) {
                if (!consts.insert(c.name).second)
                    error("duplicate window constant", "window '" + w.name + "' repeats constant '" + c.name + "'",
                          w.span);
                if (!find_type(model, c.type))
                    error("unknown component type", "window constant '" + c.name + "' has unknown type '" +
                                                        c.type + "'",
                          w.span);
            }
            auto wf = free_symbols(w.constraint);
            if (!wf.preds.empty())
                error("window constraint mentions predicates",
                      "window '" + w.name + "' constraint may only use order and successor atoms", w.span);
            for (const auto& c : wf.consts)
                if (!consts.count(c))
                    error("undeclared window constant", "window '" + w.name + "' uses undeclared constant '" + c +
                                                            "'",
                          w.span);
            if (!wf.vars.empty() || !wf.sets.empty())
                error("window constraint not closed", "window '" + w.name + "' constraint has free variables",
                      w.span);
        }
    }
};

}  // namespace

std::vector<Diagnostic> validate_system(const SystemModel& model) {
    Validator v{model, {}};
    v.run();
    return v.out;
}

}  // namespace trapmark
