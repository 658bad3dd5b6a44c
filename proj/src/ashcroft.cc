#include "trapmark/ashcroft.hh"

#include <algorithm>
#include <set>

#include "trapmark/frontend.hh"
#include "trapmark/logic.hh"
#include "trapmark/wss_compile.hh"

namespace trapmark {

namespace {

bool unsatisfiable(const Formula& f) { return is_empty(compile(translate_tr(flatten(f)))); }

std::string render_instance(const SystemModel& model, const InteractionClause& c, const InstanceCheck& ic) {
    std::string s = "clause " + std::to_string(ic.clause + 1) + " [";
    for (std::size_t j = 0; j < c.rendezvous.size(); ++j) {
        if (j) s += ", ";
        s += c.rendezvous[j].port + "(" + to_string(c.rendezvous[j].term) + ") -> " +
             (ic.placement[j].empty() ? "outside" : ic.placement[j]);
    }
    return s + "]: " + print_formula(ic.instance, model);
}

}  // namespace

Formula substitute_constants(const Formula& f, const std::map<std::string, std::string>& names) {
    auto term = [&](const Term& t) {
        if (t.base != TermBase::Const) return t;
        auto it = names.find(t.name);
        return it == names.end() ? t : Term::var(it->second, t.succs);
    };
    auto kid = [&](std::size_t i) { return substitute_constants(f.kid(i), names); };
    switch (f.op()) {
        case Op::True:
        case Op::False:
            return f;
        case Op::Leq:
            return Formula::leq(term(f.terms()[0]), term(f.terms()[1]));
        case Op::Lt:
            return Formula::lt(term(f.terms()[0]), term(f.terms()[1]));
        case Op::Eq:
            return Formula::eq(term(f.terms()[0]), term(f.terms()[1]));
        case Op::Pred:
            return Formula::pred(f.name(), term(f.terms()[0]));
        case Op::Mod:
            return Formula::mod(term(f.terms()[0]), f.modulus(), f.residue());
        case Op::SetMem:
            return Formula::member(f.name(), term(f.terms()[0]));
        case Op::Not:
            return Formula::negate(kid(0));
        case Op::And:
            return Formula::conj(kid(0), kid(1));
        case Op::Or:
            return Formula::disj(kid(0), kid(1));
        case Op::Implies:
            return Formula::implies(kid(0), kid(1));
        case Op::Iff:
            return Formula::iff(kid(0), kid(1));
        case Op::Exists:
            return Formula::exists(f.name(), kid(0));
        case Op::Forall:
            return Formula::forall(f.name(), kid(0));
        case Op::ExistsSet:
            return Formula::exists_set(f.name(), kid(0));
        case Op::ForallSet:
            return Formula::forall_set(f.name(), kid(0));
    }
    return f;
}

WindowCheck check_window(const SystemModel& model, const WindowSpec& w) {
    const auto clauses = interaction_clauses(model);
    WindowCheck out;
    for (std::size_t ci = 0; ci < clauses.size(); ++ci) {
        const auto& c = clauses[ci];
        if (!c.broadcasts.empty())
            throw AshcroftError("windows need an existential interaction; clause " + std::to_string(ci + 1) +
                                " has a broadcast");
        // Candidate constants per atom: same component type, plus "outside".
        std::vector<std::vector<std::string>> options;
        std::vector<std::string> atom_type;
        for (const auto& a : c.rendezvous) {
            const auto ti = port_type_index(model, a.port);
            if (!ti) throw AshcroftError("unknown port '" + a.port + "'");
            atom_type.push_back(model.types[*ti].name);
            std::vector<std::string> opts{""};
            for (const auto& k : w.constants)
                if (k.type == atom_type.back()) opts.push_back(k.name);
            options.push_back(std::move(opts));
        }
        std::vector<std::size_t> pick(c.rendezvous.size(), 0);
        for (;;) {
            InstanceCheck ic;
            ic.clause = static_cast<int>(ci);
            std::vector<Formula> parts{c.guard};
            for (std::size_t j = 0; j < pick.size(); ++j) {
                const std::string& where = options[j][pick[j]];
                ic.placement.push_back(where);
                const Term& t = c.rendezvous[j].term;
                if (!where.empty()) {
                    parts.push_back(Formula::eq(t, Term::constant(where)));
                } else {
                    for (const auto& k : w.constants)
                        if (k.type == atom_type[j]) parts.push_back(Formula::neq(t, Term::constant(k.name)));
                }
            }
            ic.instance = Formula::exists_all(c.vars, Formula::conj_all(parts));
            const bool all_outside =
                std::all_of(ic.placement.begin(), ic.placement.end(), [](const auto& s) { return s.empty(); });
            ic.entailed = unsatisfiable(Formula::conj(w.constraint, Formula::negate(ic.instance)));
            ic.refuted = unsatisfiable(Formula::conj(w.constraint, ic.instance));
            // Nothing inside the window: such an instance never reaches the view.
            if (!all_outside && !ic.entailed && !ic.refuted && out.non_overlapping) {
                out.non_overlapping = false;
                out.offending = render_instance(model, c, ic);
            }
            out.table.push_back(std::move(ic));
            std::size_t j = 0;
            while (j < pick.size() && ++pick[j] == options[j].size()) pick[j++] = 0;
            if (j == pick.size()) break;
        }
    }
    return out;
}

View build_view(const SystemModel& model, const WindowSpec& w) {
    const WindowCheck wc = check_window(model, w);
    if (!wc.non_overlapping)
        throw AshcroftError("window '" + w.name + "' overlaps " + wc.offending);
    const auto clauses = interaction_clauses(model);
    std::set<std::vector<GroundAtom>> seen;
    View v;
    for (const auto& ic : wc.table) {
        if (!ic.entailed) continue;
        std::set<GroundAtom> atoms;
        for (std::size_t j = 0; j < ic.placement.size(); ++j)
            if (!ic.placement[j].empty()) atoms.insert({clauses[ic.clause].rendezvous[j].port, ic.placement[j]});
        if (atoms.empty()) continue;
        std::vector<GroundAtom> d(atoms.begin(), atoms.end());
        if (seen.insert(d).second) v.disjuncts.push_back(std::move(d));
    }
    return v;
}

Formula view_formula(const View& v) {
    std::vector<Formula> ds;
    for (const auto& d : v.disjuncts) {
        std::vector<Formula> cs;
        for (const auto& a : d) cs.push_back(Formula::pred(a.port, Term::constant(a.constant)));
        ds.push_back(Formula::conj_all(cs));
    }
    return Formula::disj_all(ds);
}

MarkedPetriNet view_net(const SystemModel& model, const WindowSpec& w, const View& v) {
    MarkedPetriNet net;
    std::map<std::pair<std::string, std::string>, int> place_of;  // (qualified state, constant)
    for (const auto& k : w.constants) {
        const ComponentType* t = find_type(model, k.type);
        if (!t) throw AshcroftError("window '" + w.name + "' uses unknown type '" + k.type + "'");
        for (const auto& s : t->states) {
            const std::string q = qualified_state(t->name, s);
            const int id = net.num_places();
            if (id >= 64) throw AshcroftError("window net has more than 64 places");
            place_of[{q, k.name}] = id;
            net.places.push_back(q + "(" + k.name + ")");
            if (s == t->initial) net.initial |= PlaceSet{1} << id;
        }
    }
    for (const auto& d : v.disjuncts) {
        PnTransition t;
        bool fireable = true;
        for (const auto& a : d) {
            const auto pp = port_pre_post(model, a.port);
            if (!pp) {
                fireable = false;
                break;
            }
            t.pre |= PlaceSet{1} << place_of.at({pp->first, a.constant});
            t.post |= PlaceSet{1} << place_of.at({pp->second, a.constant});
            t.label += (t.label.empty() ? "" : " & ") + a.port + "(" + a.constant + ")";
        }
        if (fireable) net.transitions.push_back(std::move(t));
    }
    return net;
}

Formula view_reach_formula(const SystemModel& model, const WindowSpec& w, const View& v, const Caps& caps) {
    const MarkedPetriNet net = view_net(model, w, v);
    // Place names are "Type.state(c)"; rebuild the atoms from the layout.
    std::vector<std::pair<std::string, std::string>> atom_of;
    for (const auto& k : w.constants)
        for (const auto& s : find_type(model, k.type)->states) atom_of.push_back({qualified_state(k.type, s), k.name});
    std::vector<Formula> ds;
    for (Marking m : reachable_markings(net, caps).markings) {
        std::vector<Formula> cs;
        for (int p = 0; p < net.num_places(); ++p)
            if ((m >> p) & 1u) cs.push_back(Formula::pred(atom_of[p].first, Term::constant(atom_of[p].second)));
        ds.push_back(Formula::conj_all(cs));
    }
    return Formula::disj_all(ds);
}

Formula ashcroft_invariant(const WindowSpec& w, const Formula& reach) {
    NameSupply names("_x");
    names.avoid(all_names(w.constraint));
    names.avoid(all_names(reach));
    std::map<std::string, std::string> sub;
    std::vector<std::string> vars;
    for (const auto& k : w.constants) {
        vars.push_back(names.fresh());
        sub[k.name] = vars.back();
    }
    return Formula::forall_all(vars, Formula::implies(substitute_constants(w.constraint, sub),
                                                      substitute_constants(reach, sub)));
}

std::vector<WindowSpec> auto_windows(const SystemModel& model) {
    // (A, B): A at x next to B at succ(x).  (B, C): B and C on the same term.
    std::set<std::pair<std::string, std::string>> next, same;
    for (const auto& c : interaction_clauses(model)) {
        for (const auto& a : c.rendezvous)
            for (const auto& b : c.rendezvous) {
                if (a.term.base != TermBase::Var || !a.term.same_base(b.term)) continue;
                const auto ta = port_type_index(model, a.port);
                const auto tb = port_type_index(model, b.port);
                if (!ta || !tb || *ta == *tb) continue;
                if (a.term.succs == 0 && b.term.succs == 1) next.insert({model.types[*ta].name, model.types[*tb].name});
                if (a.term.succs == b.term.succs) same.insert({model.types[*ta].name, model.types[*tb].name});
            }
    }
    const Term c1 = Term::constant("c1"), c2 = Term::constant("c2"), c3 = Term::constant("c3");
    const Term z = Term::var("z"), v = Term::var("v");
    const Formula least_c2 = Formula::forall("v", Formula::leq(c2, v));
    const Formula greatest_c1 = Formula::forall("v", Formula::leq(v, c1));
    const Formula not_least_c1 =
        Formula::exists("z", Formula::conj(Formula::forall("v", Formula::leq(z, v)), Formula::lt(z, c1)));
    std::vector<WindowSpec> out;
    auto try_add = [&](const std::string& name, const std::vector<WindowConstant>& cs,
                       const std::vector<Formula>& candidates) {
        for (const Formula& psi : candidates) {
            WindowSpec w;
            w.name = name;
            w.constants = cs;
            w.constraint = psi;
            if (check_window(model, w).non_overlapping) {
                out.push_back(std::move(w));
                return;
            }
        }
    };
    for (const auto& [A, B] : next) {
        // Interior triple: B between the A on its left and the A at its own index.
        const Formula adjacent = Formula::conj_all({Formula::lt(c1, c2), Formula::eq(c2, c1.succ()), Formula::eq(c2, c3)});
        try_add("auto:" + A + "/" + B, {{"c1", A}, {"c2", B}, {"c3", A}},
                {adjacent, Formula::conj(not_least_c1, adjacent)});
        // Wrap-around triple: the B at index 0 with the A at the last index.
        for (const auto& [B2, C] : same) {
            if (B2 != B) continue;
            try_add("auto-wrap:" + A + "/" + B + "/" + C, {{"c1", A}, {"c2", B}, {"c3", C}},
                    {Formula::conj_all({greatest_c1, least_c2, Formula::lt(c2, c1), Formula::eq(c3, c2)})});
        }
    }
    return out;
}

VerificationReport strengthen_and_check(const SystemModel& model, const InvariantBundle& bundle,
                                        const PropertySpec& property, const std::vector<WindowSpec>& windows,
                                        int min_size, const Caps& caps) {
    std::vector<Formula> extras;
    std::vector<std::pair<std::string, std::string>> reach;
    for (const auto& w : windows) {
        const View v = build_view(model, w);
        const Formula r = view_reach_formula(model, w, v, caps);
        reach.push_back({w.name, print_formula(r, model)});
        extras.push_back(ashcroft_invariant(w, r));
    }
    VerificationReport rep = check_safety(model, bundle, property, min_size, extras);
    for (const auto& w : windows) rep.windows.push_back(w.name);
    rep.reach = std::move(reach);
    return rep;
}

}  // namespace trapmark
