#include "trapmark/petri.hh"

#include <algorithm>
#include <bit>
#include <deque>
#include <sstream>
#include <unordered_set>

#include "trapmark/logic.hh"

namespace trapmark {

void Caps::apply(const std::string& spec) {
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        auto eq = item.find('=');
        if (eq == std::string::npos) throw PetriError("cap '" + item + "' is not key=value");
        const std::string key = item.substr(0, eq);
        long long v = 0;
        try {
            std::size_t used = 0;
            v = std::stoll(item.substr(eq + 1), &used);
            if (used != item.size() - eq - 1) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw PetriError("cap '" + key + "' needs an integer value");
        }
        if (v <= 0) throw PetriError("cap '" + key + "' must be positive");
        if (key == "net_size") net_size = static_cast<int>(v);
        else if (key == "markings") markings = static_cast<std::size_t>(v);
        else if (key == "dnf") dnf = static_cast<std::size_t>(v);
        else if (key == "trap_places") trap_places = static_cast<int>(v);
        else if (key == "bool_sets") bool_sets = static_cast<int>(v);
        else throw PetriError("unknown cap '" + key + "'");
    }
}

// ---------------------------------------------------------------------------
// Minimal models

namespace {

std::vector<PortInterpretation> keep_minimal(std::vector<PortInterpretation> ms) {
    std::sort(ms.begin(), ms.end(), [](const auto& a, const auto& b) {
        if (a.size() != b.size()) return a.size() < b.size();
        return a < b;
    });
    ms.erase(std::unique(ms.begin(), ms.end()), ms.end());
    std::vector<PortInterpretation> out;
    for (const auto& m : ms) {
        bool dominated = false;
        for (const auto& k : out)
            if (k.size() < m.size() && std::includes(m.begin(), m.end(), k.begin(), k.end())) {
                dominated = true;
                break;
            }
        if (!dominated) out.push_back(m);
    }
    return out;
}

int circular(const Term& t, const std::map<std::string, int>& env, int n) {
    return static_cast<int>((env.at(t.name) + t.succs) % n);
}

}  // namespace

std::vector<PortInterpretation> minimal_models(const SystemModel& model, int n) {
    if (n < 1) throw PetriError("size must be positive");
    std::vector<PortInterpretation> found;
    for (const auto& c : interaction_clauses(model)) {
        const int l = static_cast<int>(c.vars.size());
        std::vector<int> x(l, 0);
        for (;;) {
            Structure s;
            s.n = n;
            for (int j = 0; j < l; ++j) s.vars[c.vars[j]] = x[j];
            if (eval_ils(c.guard, s)) {
                PortInterpretation I;
                for (const auto& r : c.rendezvous) I.emplace(r.port, circular(r.term, s.vars, n));
                for (const auto& b : c.broadcasts) {
                    Structure sb = s;
                    for (int y = 0; y < n; ++y) {
                        sb.vars[b.var] = y;
                        if (eval_ils(b.guard, sb)) I.emplace(b.port, y);
                    }
                }
                if (!I.empty()) found.push_back(std::move(I));
            }
            int j = 0;
            while (j < l && ++x[j] == n) x[j++] = 0;
            if (j == l) break;
        }
    }
    return keep_minimal(std::move(found));
}

std::vector<PortInterpretation> minimal_models_bruteforce(const SystemModel& model, int n) {
    const auto ports = port_names(model);
    const int bits = static_cast<int>(ports.size()) * n;
    if (bits > 22) throw PetriError("too many port atoms for brute-force enumeration");
    std::vector<PortInterpretation> sat;
    for (std::uint64_t m = 1; m < (std::uint64_t{1} << bits); ++m) {
        Structure s;
        s.n = n;
        for (std::size_t p = 0; p < ports.size(); ++p)
            s.preds[ports[p]] = (m >> (p * n)) & ((std::uint64_t{1} << n) - 1);
        if (!eval_ils(model.interaction, s)) continue;
        PortInterpretation I;
        for (std::size_t p = 0; p < ports.size(); ++p)
            for (int i = 0; i < n; ++i)
                if ((m >> (p * n + i)) & 1u) I.emplace(ports[p], i);
        sat.push_back(std::move(I));
    }
    return keep_minimal(std::move(sat));
}

// ---------------------------------------------------------------------------
// Nets

MarkedPetriNet instantiate_net(const SystemModel& model, int n, const Caps& caps) {
    if (n < 1) throw PetriError("size must be positive");
    if (n > caps.net_size) throw PetriError("size " + std::to_string(n) + " exceeds the net_size cap");
    MarkedPetriNet net;
    net.n = n;
    net.predicates = state_predicates(model);
    const int P = static_cast<int>(net.predicates.size());
    if (P * n > 64) throw PetriError("more than 64 places");
    std::map<std::string, int> pred_pos;
    for (int k = 0; k < P; ++k) pred_pos[net.predicates[k]] = k;
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < P; ++k) net.places.push_back(net.predicates[k] + "@" + std::to_string(i));
    for (int i = 0; i < n; ++i)
        for (const auto& t : model.types)
            net.initial |= PlaceSet{1} << net.place(i, pred_pos[qualified_state(t.name, t.initial)]);

    std::set<std::pair<PlaceSet, PlaceSet>> seen;
    for (const auto& I : minimal_models(model, n)) {
        PnTransition t;
        bool fireable = true;
        std::string label;
        for (const auto& [port, i] : I) {
            auto pp = port_pre_post(model, port);
            if (!pp) {
                fireable = false;
                break;
            }
            t.pre |= PlaceSet{1} << net.place(i, pred_pos[pp->first]);
            t.post |= PlaceSet{1} << net.place(i, pred_pos[pp->second]);
            label += (label.empty() ? "" : ", ") + port + "@" + std::to_string(i);
        }
        if (!fireable) continue;
        if (!seen.insert({t.pre, t.post}).second) continue;
        t.label = "{" + label + "}";
        net.transitions.push_back(std::move(t));
    }
    return net;
}

bool enabled(const PnTransition& t, Marking m) { return (m & t.pre) == t.pre; }

Marking fire(const PnTransition& t, Marking m) {
    if (!enabled(t, m)) throw PetriError("transition not enabled");
    if (t.post & ~t.pre & m) throw PetriError("firing " + t.label + " violates 1-safety");
    return (m & ~t.pre) | t.post;
}

ReachResult reachable_markings(const MarkedPetriNet& net, const Caps& caps) {
    ReachResult r;
    std::unordered_set<Marking> seen{net.initial};
    r.markings.push_back(net.initial);
    for (std::size_t i = 0; i < r.markings.size(); ++i) {
        const Marking m = r.markings[i];
        for (const auto& t : net.transitions) {
            if (!enabled(t, m)) continue;
            Marking m2 = fire(t, m);
            if (seen.insert(m2).second) {
                if (r.markings.size() >= caps.markings) throw PetriError("reachable-marking cap exceeded");
                r.markings.push_back(m2);
            }
        }
    }
    return r;
}

bool is_trap(const MarkedPetriNet& net, PlaceSet w) {
    for (const auto& t : net.transitions)
        if ((t.pre & w) && !(t.post & w)) return false;
    return true;
}

PlaceSet maximal_trap(const MarkedPetriNet& net, PlaceSet within) {
    PlaceSet w = within;
    for (bool changed = true; changed;) {
        changed = false;
        for (const auto& t : net.transitions)
            if ((t.pre & w) && !(t.post & w)) {
                w &= ~t.pre;
                changed = true;
            }
    }
    return w;
}

PlaceSet active_places(const MarkedPetriNet& net) {
    PlaceSet a = 0;
    for (const auto& t : net.transitions) a |= t.pre | t.post;
    return a;
}

namespace {

std::vector<PlaceSet> minimal_sets(std::vector<PlaceSet> sets) {
    std::sort(sets.begin(), sets.end(), [](PlaceSet a, PlaceSet b) {
        const int pa = std::popcount(a), pb = std::popcount(b);
        return pa != pb ? pa < pb : a < b;
    });
    sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
    std::vector<PlaceSet> out;
    for (PlaceSet s : sets) {
        bool dominated = false;
        for (PlaceSet k : out)
            if ((k & s) == k) {
                dominated = true;
                break;
            }
        if (!dominated) out.push_back(s);
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

std::vector<PlaceSet> enumerate_min_imts(const MarkedPetriNet& net, const Caps& caps) {
    if (net.num_places() > 64) throw PetriError("too many places");
    const PlaceSet feasible = maximal_trap(net, ~PlaceSet{0} >> (64 - net.num_places()));
    std::vector<PlaceSet> found;
    std::unordered_set<PlaceSet> visited;
    std::size_t budget = caps.markings;
    std::function<void(PlaceSet)> search = [&](PlaceSet w) {
        if ((w & feasible) != w) return;
        if (!visited.insert(w).second) return;
        if (visited.size() > budget) throw PetriError("trap search cap exceeded");
        for (PlaceSet f : found)
            if ((f & w) == f) return;
        for (const auto& t : net.transitions) {
            if ((t.pre & w) && !(t.post & w)) {
                for (PlaceSet rest = t.post & feasible; rest; rest &= rest - 1) search(w | (rest & (~rest + 1)));
                return;
            }
        }
        found.push_back(w);
    };
    for (PlaceSet rest = net.initial; rest; rest &= rest - 1) search(rest & (~rest + 1));
    return minimal_sets(found);
}

std::vector<PlaceSet> enumerate_min_imts_bruteforce(const MarkedPetriNet& net) {
    if (net.num_places() > 22) throw PetriError("too many places for subset enumeration");
    std::vector<PlaceSet> imts;
    for (PlaceSet w = 1; w < (PlaceSet{1} << net.num_places()); ++w)
        if ((w & net.initial) && is_trap(net, w)) imts.push_back(w);
    return minimal_sets(imts);
}

bool marks_all(const std::vector<PlaceSet>& traps, Marking m) {
    for (PlaceSet t : traps)
        if (!(t & m)) return false;
    return true;
}

std::string place_set_to_string(const MarkedPetriNet& net, PlaceSet w) {
    std::string s = "{";
    bool first = true;
    for (int p = 0; p < net.num_places(); ++p)
        if ((w >> p) & 1u) {
            s += (first ? "" : ", ") + net.places[p];
            first = false;
        }
    return s + "}";
}

std::string to_dot(const MarkedPetriNet& net, const std::string& title) {
    std::ostringstream os;
    os << "digraph \"" << title << "\" {\n  rankdir=LR;\n";
    for (int p = 0; p < net.num_places(); ++p)
        os << "  p" << p << " [shape=circle, label=\"" << net.places[p] << "\""
           << (((net.initial >> p) & 1u) ? ", style=bold" : "") << "];\n";
    for (std::size_t i = 0; i < net.transitions.size(); ++i) {
        const auto& t = net.transitions[i];
        os << "  t" << i << " [shape=box, label=\"" << t.label << "\"];\n";
        for (int p = 0; p < net.num_places(); ++p) {
            if ((t.pre >> p) & 1u) os << "  p" << p << " -> t" << i << ";\n";
            if ((t.post >> p) & 1u) os << "  t" << i << " -> p" << p << ";\n";
        }
    }
    os << "}\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// Propositional layer

Prop Prop::truth() {
    static const Prop t(std::make_shared<const Node>(Node{Kind::True, 0, {}}));
    return t;
}

Prop Prop::falsity() {
    static const Prop f(std::make_shared<const Node>(Node{Kind::False, 0, {}}));
    return f;
}

Prop Prop::var(int v) {
    if (v < 0 || v >= 64) throw PetriError("propositional variable out of range");
    return Prop(std::make_shared<const Node>(Node{Kind::Var, v, {}}));
}

Prop Prop::negate(const Prop& p) {
    if (p.kind() == Kind::True) return falsity();
    if (p.kind() == Kind::False) return truth();
    if (p.kind() == Kind::Not) return p.kids()[0];
    return Prop(std::make_shared<const Node>(Node{Kind::Not, 0, {p}}));
}

Prop Prop::conj(std::vector<Prop> ps) {
    std::vector<Prop> flat;
    for (auto& p : ps) {
        if (p.kind() == Kind::False) return falsity();
        if (p.kind() == Kind::True) continue;
        if (p.kind() == Kind::And) flat.insert(flat.end(), p.kids().begin(), p.kids().end());
        else flat.push_back(std::move(p));
    }
    if (flat.empty()) return truth();
    if (flat.size() == 1) return flat[0];
    return Prop(std::make_shared<const Node>(Node{Kind::And, 0, std::move(flat)}));
}

Prop Prop::disj(std::vector<Prop> ps) {
    std::vector<Prop> flat;
    for (auto& p : ps) {
        if (p.kind() == Kind::True) return truth();
        if (p.kind() == Kind::False) continue;
        if (p.kind() == Kind::Or) flat.insert(flat.end(), p.kids().begin(), p.kids().end());
        else flat.push_back(std::move(p));
    }
    if (flat.empty()) return falsity();
    if (flat.size() == 1) return flat[0];
    return Prop(std::make_shared<const Node>(Node{Kind::Or, 0, std::move(flat)}));
}

bool Prop::eval(std::uint64_t v) const {
    switch (kind()) {
        case Kind::True:
            return true;
        case Kind::False:
            return false;
        case Kind::Var:
            return (v >> var_index()) & 1u;
        case Kind::Not:
            return !kids()[0].eval(v);
        case Kind::And:
            for (const auto& k : kids())
                if (!k.eval(v)) return false;
            return true;
        case Kind::Or:
            for (const auto& k : kids())
                if (k.eval(v)) return true;
            return false;
    }
    return false;
}

std::string Prop::to_string(const std::vector<std::string>& names) const {
    switch (kind()) {
        case Kind::True:
            return "true";
        case Kind::False:
            return "false";
        case Kind::Var:
            return var_index() < static_cast<int>(names.size()) ? names[var_index()]
                                                                 : "v" + std::to_string(var_index());
        case Kind::Not:
            return "!" + kids()[0].to_string(names);
        case Kind::And:
        case Kind::Or: {
            std::string s = "(";
            for (std::size_t i = 0; i < kids().size(); ++i)
                s += (i ? (kind() == Kind::And ? " & " : " | ") : "") + kids()[i].to_string(names);
            return s + ")";
        }
    }
    return "";
}

namespace {

class Grounder {
public:
    Grounder(int n, const std::vector<std::string>& preds, Successor mode, const Caps& caps)
        : n_(n), mode_(mode), caps_(caps) {
        for (std::size_t k = 0; k < preds.size(); ++k) pred_pos_[preds[k]] = static_cast<int>(k);
        P_ = static_cast<int>(preds.size());
        if (P_ * n > 64) throw PetriError("more than 64 propositional variables");
    }

    Prop run(const Formula& f) {
        switch (f.op()) {
            case Op::True:
                return Prop::truth();
            case Op::False:
                return Prop::falsity();
            case Op::Leq:
                return constant(value(f.terms()[0]) <= value(f.terms()[1]));
            case Op::Lt:
                return constant(value(f.terms()[0]) < value(f.terms()[1]));
            case Op::Eq:
                return constant(value(f.terms()[0]) == value(f.terms()[1]));
            case Op::Mod:
                return constant(value(f.terms()[0]) % f.modulus() == f.residue());
            case Op::Pred: {
                auto it = pred_pos_.find(f.name());
                if (it == pred_pos_.end()) throw PetriError("unknown predicate '" + f.name() + "'");
                return Prop::var(value(f.terms()[0]) * P_ + it->second);
            }
            case Op::SetMem: {
                auto it = sets_.find(f.name());
                if (it == sets_.end()) throw PetriError("unbound set variable '" + f.name() + "'");
                return constant((it->second >> value(f.terms()[0])) & 1u);
            }
            case Op::Not:
                return Prop::negate(run(f.kid(0)));
            case Op::And:
                return Prop::conj({run(f.kid(0)), run(f.kid(1))});
            case Op::Or:
                return Prop::disj({run(f.kid(0)), run(f.kid(1))});
            case Op::Implies:
                return Prop::disj({Prop::negate(run(f.kid(0))), run(f.kid(1))});
            case Op::Iff: {
                Prop a = run(f.kid(0));
                Prop b = run(f.kid(1));
                return Prop::disj({Prop::conj({a, b}), Prop::conj({Prop::negate(a), Prop::negate(b)})});
            }
            case Op::Exists:
            case Op::Forall: {
                std::vector<Prop> parts;
                const auto saved = vars_;
                for (int i = 0; i < n_; ++i) {
                    vars_[f.name()] = i;
                    parts.push_back(run(f.kid(0)));
                }
                vars_ = saved;
                return f.op() == Op::Exists ? Prop::disj(std::move(parts)) : Prop::conj(std::move(parts));
            }
            case Op::ExistsSet:
            case Op::ForallSet: {
                if (n_ > caps_.bool_sets) throw PetriError("set quantifier grounding beyond the bool_sets cap");
                std::vector<Prop> parts;
                const auto saved = sets_;
                for (std::uint64_t m = 0; m < (std::uint64_t{1} << n_); ++m) {
                    sets_[f.name()] = m;
                    parts.push_back(run(f.kid(0)));
                }
                sets_ = saved;
                return f.op() == Op::ExistsSet ? Prop::disj(std::move(parts)) : Prop::conj(std::move(parts));
            }
        }
        return Prop::falsity();
    }

private:
    static Prop constant(bool b) { return b ? Prop::truth() : Prop::falsity(); }

    int value(const Term& t) const {
        int v = 0;
        if (t.base == TermBase::Var) {
            auto it = vars_.find(t.name);
            if (it == vars_.end()) throw PetriError("unbound variable '" + t.name + "'");
            v = it->second;
        } else if (t.base == TermBase::Const) {
            throw PetriError("constant '" + t.name + "' in a grounded formula");
        }
        if (mode_ == Successor::Circular) return (v + t.succs) % n_;
        return std::min(v + t.succs, n_ - 1);
    }

    int n_;
    Successor mode_;
    const Caps& caps_;
    int P_ = 0;
    std::map<std::string, int> pred_pos_;
    std::map<std::string, int> vars_;
    std::map<std::string, std::uint64_t> sets_;
};

}  // namespace

Prop booleanize(const Formula& phi, int n, const std::vector<std::string>& preds, Successor mode, const Caps& caps) {
    if (n < 1) throw PetriError("size must be positive");
    Grounder g(n, preds, mode, caps);
    return g.run(phi);
}

Prop prop_nnf(const Prop& p) {
    std::function<Prop(const Prop&, bool)> go = [&](const Prop& q, bool neg) -> Prop {
        switch (q.kind()) {
            case Prop::Kind::True:
                return neg ? Prop::falsity() : Prop::truth();
            case Prop::Kind::False:
                return neg ? Prop::truth() : Prop::falsity();
            case Prop::Kind::Var:
                return neg ? Prop::negate(q) : q;
            case Prop::Kind::Not:
                return go(q.kids()[0], !neg);
            case Prop::Kind::And:
            case Prop::Kind::Or: {
                std::vector<Prop> ks;
                for (const auto& k : q.kids()) ks.push_back(go(k, neg));
                const bool is_and = (q.kind() == Prop::Kind::And) != neg;
                return is_and ? Prop::conj(std::move(ks)) : Prop::disj(std::move(ks));
            }
        }
        return q;
    };
    return go(p, false);
}

Prop prop_dual(const Prop& p) {
    std::function<Prop(const Prop&)> go = [&](const Prop& q) -> Prop {
        switch (q.kind()) {
            case Prop::Kind::True:
                return Prop::falsity();
            case Prop::Kind::False:
                return Prop::truth();
            case Prop::Kind::Var:
            case Prop::Kind::Not:
                return q;
            case Prop::Kind::And:
            case Prop::Kind::Or: {
                std::vector<Prop> ks;
                for (const auto& k : q.kids()) ks.push_back(go(k));
                return q.kind() == Prop::Kind::And ? Prop::disj(std::move(ks)) : Prop::conj(std::move(ks));
            }
        }
        return q;
    };
    return go(prop_nnf(p));
}

std::vector<std::pair<std::uint64_t, std::uint64_t>> prop_dnf(const Prop& p, const Caps& caps) {
    using Cube = std::pair<std::uint64_t, std::uint64_t>;
    auto absorb = [](std::vector<Cube> cs) {
        std::sort(cs.begin(), cs.end(), [](const Cube& a, const Cube& b) {
            const int pa = std::popcount(a.first) + std::popcount(a.second);
            const int pb = std::popcount(b.first) + std::popcount(b.second);
            return pa != pb ? pa < pb : a < b;
        });
        cs.erase(std::unique(cs.begin(), cs.end()), cs.end());
        std::vector<Cube> out;
        for (const auto& c : cs) {
            bool dominated = false;
            for (const auto& k : out)
                if ((k.first & c.first) == k.first && (k.second & c.second) == k.second) {
                    dominated = true;
                    break;
                }
            if (!dominated) out.push_back(c);
        }
        return out;
    };
    std::function<std::vector<Cube>(const Prop&)> go = [&](const Prop& q) -> std::vector<Cube> {
        switch (q.kind()) {
            case Prop::Kind::True:
                return {{0, 0}};
            case Prop::Kind::False:
                return {};
            case Prop::Kind::Var:
                return {{std::uint64_t{1} << q.var_index(), 0}};
            case Prop::Kind::Not:
                if (q.kids()[0].kind() != Prop::Kind::Var) throw PetriError("DNF expects NNF");
                return {{0, std::uint64_t{1} << q.kids()[0].var_index()}};
            case Prop::Kind::Or: {
                std::vector<Cube> out;
                for (const auto& k : q.kids()) {
                    auto ks = go(k);
                    out.insert(out.end(), ks.begin(), ks.end());
                    if (out.size() > caps.dnf) throw PetriError("DNF cap exceeded");
                }
                return absorb(std::move(out));
            }
            case Prop::Kind::And: {
                std::vector<Cube> acc{{0, 0}};
                for (const auto& k : q.kids()) {
                    auto ks = go(k);
                    std::vector<Cube> next;
                    for (const auto& a : acc)
                        for (const auto& b : ks) {
                            Cube c{a.first | b.first, a.second | b.second};
                            if (c.first & c.second) continue;
                            next.push_back(c);
                            if (next.size() > caps.dnf) throw PetriError("DNF cap exceeded");
                        }
                    acc = absorb(std::move(next));
                    if (acc.empty()) break;
                }
                return acc;
            }
        }
        return {};
    };
    return go(prop_nnf(p));
}

Prop prop_pos(const Prop& p, const Caps& caps) {
    std::vector<PlaceSet> cubes;
    for (const auto& [pos, neg] : prop_dnf(p, caps)) cubes.push_back(pos);
    std::vector<Prop> ds;
    for (PlaceSet c : minimal_sets(cubes)) {
        std::vector<Prop> vs;
        for (PlaceSet r = c; r; r &= r - 1) vs.push_back(Prop::var(std::countr_zero(r)));
        ds.push_back(Prop::conj(std::move(vs)));
    }
    return Prop::disj(std::move(ds));
}

Prop net_trap_constraint(const MarkedPetriNet& net) {
    auto any = [](PlaceSet s) {
        std::vector<Prop> vs;
        for (PlaceSet r = s; r; r &= r - 1) vs.push_back(Prop::var(std::countr_zero(r)));
        return Prop::disj(std::move(vs));
    };
    std::vector<Prop> parts;
    for (const auto& t : net.transitions) parts.push_back(Prop::disj({Prop::negate(any(t.pre)), any(t.post)}));
    return Prop::conj(std::move(parts));
}

Prop net_initial_constraint(const MarkedPetriNet& net) {
    std::vector<Prop> vs;
    for (PlaceSet r = net.initial; r; r &= r - 1) vs.push_back(Prop::var(std::countr_zero(r)));
    return Prop::disj(std::move(vs));
}

}  // namespace trapmark
