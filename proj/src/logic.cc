#include "trapmark/logic.hh"

#include <vector>

namespace trapmark {

std::string constant_variable(const std::string& c) { return "_c_" + c; }

namespace {

bool plain_var(const Term& t) { return t.base == TermBase::Var && t.succs == 0; }
bool plain_zero(const Term& t) { return t.base == TermBase::Zero && t.succs == 0; }

bool flat_atom(const Formula& f) {
    const auto& ts = f.terms();
    switch (f.op()) {
        case Op::True:
        case Op::False:
            return true;
        case Op::Pred:
        case Op::SetMem:
        case Op::Mod:
            return plain_var(ts[0]);
        case Op::Leq:
        case Op::Lt:
            return plain_var(ts[0]) && plain_var(ts[1]);
        case Op::Eq: {
            const Term& a = ts[0];
            const Term& b = ts[1];
            if (plain_var(a) && plain_var(b)) return true;
            if ((plain_var(a) && plain_zero(b)) || (plain_zero(a) && plain_var(b))) return true;
            auto succ1 = [](const Term& t) { return t.base == TermBase::Var && t.succs == 1; };
            return (succ1(a) && plain_var(b)) || (plain_var(a) && succ1(b));
        }
        default:
            return false;
    }
}

Term without_constant(const Term& t) {
    if (t.base != TermBase::Const) return t;
    return Term::var(constant_variable(t.name), t.succs);
}

class Flattener {
public:
    explicit Flattener(const Formula& f) : names_("_f") {
        names_.avoid(all_names(f));
        for (const auto& c : free_symbols(f).consts) names_.avoid(constant_variable(c));
    }

    Formula run(const Formula& f) {
        if (f.is_atom()) return atom(f);
        std::vector<Formula> kids;
        kids.reserve(f.kids().size());
        for (const auto& k : f.kids()) kids.push_back(run(k));
        switch (f.op()) {
            case Op::Not:
                return Formula::negate(kids[0]);
            case Op::And:
                return Formula::conj(kids[0], kids[1]);
            case Op::Or:
                return Formula::disj(kids[0], kids[1]);
            case Op::Implies:
                return Formula::implies(kids[0], kids[1]);
            case Op::Iff:
                return Formula::iff(kids[0], kids[1]);
            case Op::Exists:
                return Formula::exists(f.name(), kids[0]);
            case Op::Forall:
                return Formula::forall(f.name(), kids[0]);
            case Op::ExistsSet:
                return Formula::exists_set(f.name(), kids[0]);
            case Op::ForallSet:
                return Formula::forall_set(f.name(), kids[0]);
            default:
                return f;
        }
    }

private:
    // Introduces variables for the chain base, succ(base), ..., up to
    // succ^(k-1)(base), recording one definition per link.  Returns the name
    // of the last variable.
    std::string chain(const Term& t, int links, std::vector<std::string>& vars, std::vector<Formula>& defs) {
        std::string cur;
        if (t.base == TermBase::Zero) {
            cur = names_.fresh();
            vars.push_back(cur);
            defs.push_back(Formula::eq(Term::var(cur), Term::zero()));
        } else {
            cur = t.name;
        }
        for (int i = 0; i < links; ++i) {
            std::string next = names_.fresh();
            vars.push_back(next);
            defs.push_back(Formula::eq(Term::var(next), Term::var(cur).succ()));
            cur = next;
        }
        return cur;
    }

    Formula atom(const Formula& f) {
        std::vector<Term> ts;
        for (const auto& t : f.terms()) ts.push_back(without_constant(t));
        Formula g = rebuild(f, ts);
        if (flat_atom(g)) return g;

        if (g.op() == Op::Eq) {
            const bool left_simple = ts[0].succs == 0;
            const bool right_simple = ts[1].succs == 0;
            if (left_simple && right_simple) {
                if (plain_zero(ts[0]) && plain_zero(ts[1])) return Formula::truth();
            } else if (left_simple != right_simple) {
                // succ^k(b) = s  ~>  forall chain. defs -> succ(last) = s
                const std::size_t ci = left_simple ? 1 : 0;
                const Term& complex = ts[ci];
                Term simple = ts[1 - ci];
                std::vector<std::string> vars;
                std::vector<Formula> defs;
                const std::string last = chain(complex, complex.succs - 1, vars, defs);
                if (simple.base == TermBase::Zero) {
                    std::string z = names_.fresh();
                    vars.push_back(z);
                    defs.push_back(Formula::eq(Term::var(z), Term::zero()));
                    simple = Term::var(z);
                }
                Term head = Term::var(last).succ();
                Formula concl = ci == 0 ? Formula::eq(head, simple) : Formula::eq(simple, head);
                return Formula::forall_all(vars, Formula::implies(Formula::conj_all(defs), concl));
            }
        }

        // General case: name every non-plain term existentially.
        std::vector<std::string> vars;
        std::vector<Formula> defs;
        for (auto& t : ts) {
            if (plain_var(t)) continue;
            if (plain_zero(t) && g.op() == Op::Eq) continue;
            t = Term::var(chain(t, t.succs, vars, defs));
        }
        Formula body = rebuild(f, ts);
        if (!flat_atom(body)) body = atom(body);
        defs.push_back(body);
        return Formula::exists_all(vars, Formula::conj_all(defs));
    }

    static Formula rebuild(const Formula& f, const std::vector<Term>& ts) {
        switch (f.op()) {
            case Op::Leq:
                return Formula::leq(ts[0], ts[1]);
            case Op::Lt:
                return Formula::lt(ts[0], ts[1]);
            case Op::Eq:
                return Formula::eq(ts[0], ts[1]);
            case Op::Pred:
                return Formula::pred(f.name(), ts[0]);
            case Op::SetMem:
                return Formula::member(f.name(), ts[0]);
            case Op::Mod:
                return Formula::mod(ts[0], f.modulus(), f.residue());
            default:
                return f;
        }
    }

    NameSupply names_;
};

bool is_flat_rec(const Formula& f) {
    if (f.is_atom()) return flat_atom(f);
    for (const auto& k : f.kids())
        if (!is_flat_rec(k)) return false;
    return true;
}

}  // namespace

bool is_flat(const Formula& f) { return is_flat_rec(f); }

Formula flatten(const Formula& f) {
    Flattener fl(f);
    return fl.run(f);
}

// ---------------------------------------------------------------------------

namespace {

Formula tr(const Formula& f, const std::string& xi) {
    if (f.op() == Op::Eq) {
        const auto& ts = f.terms();
        for (int side = 0; side < 2; ++side) {
            if (ts[side].succs != 1) continue;
            const Term x = Term::var(ts[side].name);
            const Term& y = ts[1 - side];
            Formula inner = Formula::conj(Formula::lt(x, Term::var(xi)), f);
            Formula wrap = Formula::conj(Formula::eq(x, Term::var(xi)), Formula::eq(y, Term::zero()));
            return Formula::disj(inner, wrap);
        }
        return f;
    }
    if (f.is_atom()) return f;
    std::vector<Formula> kids;
    for (const auto& k : f.kids()) kids.push_back(tr(k, xi));
    auto node = std::make_shared<FormulaNode>(*f.get());
    node->kids = std::move(kids);
    return Formula(std::move(node));
}

}  // namespace

Formula translate_tr(const Formula& phi) {
    if (!is_flat(phi)) throw LogicError("Tr expects a flat formula");
    const auto names = all_names(phi);
    if (names.count(kLastPositionVar)) throw LogicError("formula already uses the reserved name " + kLastPositionVar);
    NameSupply ns("_y");
    ns.avoid(names);
    ns.avoid(kLastPositionVar);
    const std::string y = ns.fresh();
    Formula last = Formula::forall(y, Formula::leq(Term::var(y), Term::var(kLastPositionVar)));
    return Formula::exists(kLastPositionVar, Formula::conj(last, tr(phi, kLastPositionVar)));
}

// ---------------------------------------------------------------------------

namespace {

Formula nnf(const Formula& f, bool neg) {
    switch (f.op()) {
        case Op::True:
            return neg ? Formula::falsity() : f;
        case Op::False:
            return neg ? Formula::truth() : f;
        case Op::Not:
            return nnf(f.kid(0), !neg);
        case Op::And:
        case Op::Or: {
            Formula a = nnf(f.kid(0), neg);
            Formula b = nnf(f.kid(1), neg);
            return (f.op() == Op::And) != neg ? Formula::conj(a, b) : Formula::disj(a, b);
        }
        case Op::Implies: {
            Formula a = nnf(f.kid(0), !neg);
            Formula b = nnf(f.kid(1), neg);
            return neg ? Formula::conj(a, b) : Formula::disj(a, b);
        }
        case Op::Iff: {
            Formula a = nnf(f.kid(0), false);
            Formula na = nnf(f.kid(0), true);
            Formula b = nnf(f.kid(1), neg);
            Formula nb = nnf(f.kid(1), !neg);
            return Formula::disj(Formula::conj(a, b), Formula::conj(na, nb));
        }
        case Op::Exists:
            return neg ? Formula::forall(f.name(), nnf(f.kid(0), true)) : Formula::exists(f.name(), nnf(f.kid(0), false));
        case Op::Forall:
            return neg ? Formula::exists(f.name(), nnf(f.kid(0), true)) : Formula::forall(f.name(), nnf(f.kid(0), false));
        case Op::ExistsSet:
            return neg ? Formula::forall_set(f.name(), nnf(f.kid(0), true))
                       : Formula::exists_set(f.name(), nnf(f.kid(0), false));
        case Op::ForallSet:
            return neg ? Formula::exists_set(f.name(), nnf(f.kid(0), true))
                       : Formula::forall_set(f.name(), nnf(f.kid(0), false));
        default:
            return neg ? Formula::negate(f) : f;
    }
}

Formula dual(const Formula& f) {
    switch (f.op()) {
        case Op::True:
            return Formula::falsity();
        case Op::False:
            return Formula::truth();
        case Op::Pred:
            return f;
        case Op::Not:
            return f.kid(0).op() == Op::Pred ? f : f.kid(0);
        case Op::And:
            return Formula::disj(dual(f.kid(0)), dual(f.kid(1)));
        case Op::Or:
            return Formula::conj(dual(f.kid(0)), dual(f.kid(1)));
        case Op::Exists:
            return Formula::forall(f.name(), dual(f.kid(0)));
        case Op::Forall:
            return Formula::exists(f.name(), dual(f.kid(0)));
        case Op::ExistsSet:
            return Formula::forall_set(f.name(), dual(f.kid(0)));
        case Op::ForallSet:
            return Formula::exists_set(f.name(), dual(f.kid(0)));
        default:
            return Formula::negate(f);
    }
}

}  // namespace

Formula to_nnf(const Formula& f) { return nnf(f, false); }

Formula dualize(const Formula& f) { return dual(to_nnf(f)); }

Formula and_simplified(const Formula& a, const Formula& b) {
    if (a.op() == Op::False || b.op() == Op::False) return Formula::falsity();
    if (a.op() == Op::True) return b;
    if (b.op() == Op::True) return a;
    return Formula::conj(a, b);
}

Formula or_simplified(const Formula& a, const Formula& b) {
    if (a.op() == Op::True || b.op() == Op::True) return Formula::truth();
    if (a.op() == Op::False) return b;
    if (b.op() == Op::False) return a;
    return Formula::disj(a, b);
}

// ---------------------------------------------------------------------------

namespace {

Formula and_all(const std::vector<Formula>& fs) {
    Formula acc = Formula::truth();
    for (const auto& f : fs) acc = and_simplified(acc, f);
    return acc;
}

Formula or_all(const std::vector<Formula>& fs) {
    Formula acc = Formula::falsity();
    for (const auto& f : fs) acc = or_simplified(acc, f);
    return acc;
}

// pre/post atom of a port, falsity when the port labels no transition
Formula port_atom(const SystemModel& m, const std::string& port, const Term& t, bool post) {
    auto pp = port_pre_post(m, port);
    if (!pp) return Formula::falsity();
    return Formula::pred(post ? pp->second : pp->first, t);
}

Formula guarded_exists(const std::string& y, const Formula& guard, const Formula& body) {
    Formula b = and_simplified(guard, body);
    if (b.op() == Op::False) return b;
    return Formula::exists(y, b);
}

std::vector<InteractionClause> clauses_or_throw(const SystemModel& m) {
    try {
        return interaction_clauses(m);
    } catch (const ModelError& e) {
        throw LogicError(e.what());
    }
}

}  // namespace

Formula build_trap_constraint(const SystemModel& model) {
    std::vector<Formula> parts;
    for (const auto& c : clauses_or_throw(model)) {
        std::vector<Formula> pre, post;
        for (const auto& r : c.rendezvous) {
            pre.push_back(port_atom(model, r.port, r.term, false));
            post.push_back(port_atom(model, r.port, r.term, true));
        }
        for (const auto& b : c.broadcasts) {
            const Term y = Term::var(b.var);
            pre.push_back(guarded_exists(b.var, b.guard, port_atom(model, b.port, y, false)));
            post.push_back(guarded_exists(b.var, b.guard, port_atom(model, b.port, y, true)));
        }
        Formula lhs = and_simplified(c.guard, or_all(pre));
        parts.push_back(Formula::forall_all(c.vars, Formula::implies(lhs, or_all(post))));
    }
    return and_all(parts);
}

Formula build_deadlock_formula(const SystemModel& model) {
    std::vector<Formula> enabled;
    for (const auto& c : clauses_or_throw(model)) {
        std::vector<Formula> conj{c.guard};
        for (const auto& r : c.rendezvous) conj.push_back(port_atom(model, r.port, r.term, false));
        for (const auto& b : c.broadcasts) {
            Formula pre = port_atom(model, b.port, Term::var(b.var), false);
            conj.push_back(Formula::forall(b.var, Formula::implies(b.guard, pre)));
        }
        Formula body = and_all(conj);
        if (body.op() == Op::False) continue;
        enabled.push_back(Formula::exists_all(c.vars, body));
    }
    return to_nnf(Formula::negate(or_all(enabled)));
}

Formula build_init_formula(const SystemModel& model) {
    std::vector<Formula> inits;
    const Term x = Term::var("x");
    for (const auto& t : model.types) inits.push_back(Formula::pred(qualified_state(t.name, t.initial), x));
    return Formula::exists("x", Formula::disj_all(inits));
}

Formula build_decomposability_formula(const SystemModel& model) {
    const Term x = Term::var("x");
    std::vector<Formula> per_type;
    for (const auto& t : model.types) {
        std::vector<Formula> some, exclusive;
        for (std::size_t i = 0; i < t.states.size(); ++i) {
            some.push_back(Formula::pred(qualified_state(t.name, t.states[i]), x));
            for (std::size_t j = i + 1; j < t.states.size(); ++j)
                exclusive.push_back(Formula::disj(Formula::negate(Formula::pred(qualified_state(t.name, t.states[i]), x)),
                                                  Formula::negate(Formula::pred(qualified_state(t.name, t.states[j]), x))));
        }
        std::vector<Formula> all{Formula::disj_all(some)};
        all.insert(all.end(), exclusive.begin(), exclusive.end());
        per_type.push_back(Formula::conj_all(all));
    }
    return Formula::forall("x", Formula::conj_all(per_type));
}

Formula build_min_size_formula(int m) {
    if (m <= 1) return Formula::truth();
    std::vector<std::string> vars;
    std::vector<Formula> chain;
    for (int i = 1; i <= m; ++i) vars.push_back("_m" + std::to_string(i));
    for (int i = 0; i + 1 < m; ++i) chain.push_back(Formula::lt(Term::var(vars[i]), Term::var(vars[i + 1])));
    return Formula::exists_all(vars, Formula::conj_all(chain));
}

}  // namespace trapmark
