#include "trapmark/wss_compile.hh"

#include <functional>
#include <map>

#include "trapmark/logic.hh"

namespace trapmark {

TrackRegistry default_layout(const Formula& phi) {
    FreeSymbols fs = free_symbols(phi);
    TrackRegistry reg;
    for (const auto& v : fs.vars) reg.add(v, TrackKind::FirstOrder);
    for (const auto& c : fs.consts) reg.add(constant_variable(c), TrackKind::FirstOrder);
    for (const auto& p : fs.preds) reg.add(p, TrackKind::Predicate);
    for (const auto& s : fs.sets) reg.add(s, TrackKind::SetVar);
    return reg;
}

namespace {

const char* op_name(Op op) {
    switch (op) {
        case Op::True: return "true";
        case Op::False: return "false";
        case Op::Leq: return "<=";
        case Op::Lt: return "<";
        case Op::Eq: return "=";
        case Op::Pred: return "pred";
        case Op::Mod: return "mod";
        case Op::SetMem: return "member";
        case Op::Not: return "not";
        case Op::And: return "and";
        case Op::Or: return "or";
        case Op::Implies: return "implies";
        case Op::Iff: return "iff";
        case Op::Exists: return "exists";
        case Op::Forall: return "forall";
        case Op::ExistsSet: return "exists2";
        case Op::ForallSet: return "forall2";
    }
    return "?";
}

void max_depth(const Formula& f, int depth, int& fo, int& so) {
    if (f.op() == Op::Exists || f.op() == Op::Forall) fo = std::max(fo, depth + 1);
    if (f.op() == Op::ExistsSet || f.op() == Op::ForallSet) so = std::max(so, depth + 1);
    const int d = f.is_quantifier() ? depth + 1 : depth;
    for (const auto& k : f.kids()) max_depth(k, d, fo, so);
}

class Compiler {
public:
    Compiler(const TrackRegistry& layout, std::shared_ptr<Mtbdd> mgr, CompilationTrace* trace, int fo_depth,
             int so_depth)
        : mgr_(std::move(mgr)), trace_(trace) {
        // bound tracks first, then the caller's layout
        for (int d = 0; d < fo_depth; ++d) fo_bound_.push_back(work_.add("#v" + std::to_string(d), TrackKind::FirstOrder));
        for (int d = 0; d < so_depth; ++d) so_bound_.push_back(work_.add("#S" + std::to_string(d), TrackKind::SetVar));
        offset_ = work_.width();
        for (const auto& t : layout.tracks) work_.add(t.name, t.kind);
        if (work_.width() > 64) throw AutomatonError("more than 64 tracks needed");
    }

    struct Result {
        SymDfa dfa;
        std::uint64_t fo = 0;  // free first-order tracks, guaranteed singletons
    };

    Result run(const Formula& f, int depth) {
        Result r = step(f, depth);
        const int before = r.dfa.size();
        r.dfa = sym::minimize(r.dfa);
        if (trace_) trace_->entries.push_back({op_name(f.op()), before, r.dfa.size(), sym::count_transitions(r.dfa)});
        return r;
    }

    SymDfa finish(const SymDfa& d) const {
        std::vector<int> idx(work_.width(), -1);
        for (int i = offset_; i < work_.width(); ++i) idx[i] = i - offset_;
        return sym::reindex(d, idx, work_.width() - offset_);
    }

private:
    int width() const { return work_.width(); }

    int fo_track(const std::string& name) const {
        for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
            if (it->first == name) return it->second;
        auto i = work_.index_of(name);
        if (!i || *i < offset_ || work_.tracks[*i].kind != TrackKind::FirstOrder)
            throw AutomatonError("no track for variable '" + name + "'");
        return *i;
    }

    int so_track(const std::string& name) const {
        for (auto it = set_scope_.rbegin(); it != set_scope_.rend(); ++it)
            if (it->first == name) return it->second;
        auto i = work_.index_of(name);
        if (!i || *i < offset_ || work_.tracks[*i].kind != TrackKind::SetVar)
            throw AutomatonError("no track for set variable '" + name + "'");
        return *i;
    }

    int pred_track(const std::string& name) const {
        auto i = work_.index_of(name);
        if (!i || *i < offset_ || work_.tracks[*i].kind != TrackKind::Predicate)
            throw AutomatonError("no track for predicate '" + name + "'");
        return *i;
    }

    int term_track(const Term& t) const {
        if (t.base != TermBase::Var || t.succs > 1) throw AutomatonError("unexpected term " + to_string(t));
        return fo_track(t.name);
    }

    static constexpr int kDead = -1;

    // explicit_dfa with a dead state appended for transitions returning kDead
    SymDfa small(const std::vector<int>& tracks, int states, const std::vector<int>& finals,
                 const std::function<int(int, std::uint64_t)>& next) {
        const int dead = states;
        return sym::explicit_dfa(mgr_, width(), tracks, states + 1, finals, [&](int s, std::uint64_t bits) {
            if (s == dead) return dead;
            int t = next(s, bits);
            return t == kDead ? dead : t;
        });
    }

    SymDfa validity(int track) {
        // 0: not seen, 1: seen
        return small({track}, 2, {1}, [](int s, std::uint64_t b) {
            if (s == 0) return b ? 1 : 0;
            return b ? kDead : 1;
        });
    }

    SymDfa validity_mask(std::uint64_t mask) {
        if (auto it = validity_cache_.find(mask); it != validity_cache_.end()) return it->second;
        SymDfa acc = sym::universal(mgr_, width());
        for (int t = 0; t < 64; ++t)
            if ((mask >> t) & 1u) acc = sym::minimize(sym::product(acc, validity(t), sym::BoolOp::And));
        validity_cache_.emplace(mask, acc);
        return acc;
    }

    Result atom(const Formula& f) {
        const auto& ts = f.terms();
        auto bit = [](std::uint64_t b, int i) { return static_cast<int>((b >> i) & 1u); };
        switch (f.op()) {
            case Op::True:
                return {sym::universal(mgr_, width()), 0};
            case Op::False:
                return {sym::empty(mgr_, width()), 0};
            case Op::Pred:
            case Op::SetMem: {
                const int x = term_track(ts[0]);
                const int p = f.op() == Op::Pred ? pred_track(f.name()) : so_track(f.name());
                SymDfa d = small({x, p}, 2, {1}, [&](int s, std::uint64_t b) {
                    if (!bit(b, 0)) return s;
                    return s == 0 && bit(b, 1) ? 1 : kDead;
                });
                return {d, std::uint64_t{1} << x};
            }
            case Op::Mod: {
                const int x = term_track(ts[0]);
                const int k = f.modulus();
                const int l = f.residue();
                // states 0..k-1: position counter; k: matched
                SymDfa d = small({x}, k + 1, {k}, [&](int s, std::uint64_t b) {
                    if (s == k) return b ? kDead : k;
                    if (b) return s == l ? k : kDead;
                    return (s + 1) % k;
                });
                return {d, std::uint64_t{1} << x};
            }
            case Op::Leq:
            case Op::Lt: {
                const int x = term_track(ts[0]);
                const int y = term_track(ts[1]);
                if (x == y) {
                    if (f.op() == Op::Lt) return {sym::empty(mgr_, width()), std::uint64_t{1} << x};
                    return {validity(x), std::uint64_t{1} << x};
                }
                const bool strict = f.op() == Op::Lt;
                // 0: none, 1: x seen, 2: both
                SymDfa d = small({x, y}, 3, {2}, [&](int s, std::uint64_t b) {
                    const int bx = bit(b, 0), by = bit(b, 1);
                    if (s == 0) {
                        if (!bx && !by) return 0;
                        if (bx && !by) return 1;
                        if (bx && by && !strict) return 2;
                        return kDead;
                    }
                    if (s == 1) {
                        if (bx) return kDead;
                        return by ? 2 : 1;
                    }
                    return (bx || by) ? kDead : 2;
                });
                return {d, (std::uint64_t{1} << x) | (std::uint64_t{1} << y)};
            }
            case Op::Eq: {
                const Term& a = ts[0];
                const Term& b = ts[1];
                if (a.base == TermBase::Zero || b.base == TermBase::Zero) {
                    const Term& v = a.base == TermBase::Zero ? b : a;
                    if (v.base == TermBase::Zero) return {sym::universal(mgr_, width()), 0};
                    const int x = term_track(v);
                    SymDfa d = small({x}, 2, {1}, [](int s, std::uint64_t bx) {
                        if (s == 0) return bx ? 1 : kDead;
                        return bx ? kDead : 1;
                    });
                    return {d, std::uint64_t{1} << x};
                }
                if (a.succs == 0 && b.succs == 0) {
                    const int x = term_track(a);
                    const int y = term_track(b);
                    if (x == y) return {validity(x), std::uint64_t{1} << x};
                    SymDfa d = small({x, y}, 2, {1}, [&](int s, std::uint64_t bb) {
                        const int bx = bit(bb, 0), by = bit(bb, 1);
                        if (bx != by) return kDead;
                        if (s == 0) return bx ? 1 : 0;
                        return bx ? kDead : 1;
                    });
                    return {d, (std::uint64_t{1} << x) | (std::uint64_t{1} << y)};
                }
                // succ(x) = y with the successor fixed at the last position
                const Term& sx = a.succs == 1 ? a : b;
                const Term& ty = a.succs == 1 ? b : a;
                if (ty.succs != 0) throw AutomatonError("unexpected atom " + to_string(f));
                const int x = term_track(sx);
                const int y = term_track(ty);
                if (x == y) {
                    // x is the last position
                    SymDfa d = small({x}, 2, {1}, [](int s, std::uint64_t bx) {
                        if (s == 0) return bx ? 1 : 0;
                        return kDead;
                    });
                    return {d, std::uint64_t{1} << x};
                }
                // 0: none, 1: x just seen, 2: done, 3: x = y at a position that must be last
                SymDfa d = small({x, y}, 4, {2, 3}, [&](int s, std::uint64_t bb) {
                    const int bx = bit(bb, 0), by = bit(bb, 1);
                    switch (s) {
                        case 0:
                            if (!bx && !by) return 0;
                            if (bx && !by) return 1;
                            if (bx && by) return 3;
                            return kDead;
                        case 1:
                            return (!bx && by) ? 2 : kDead;
                        case 2:
                            return (bx || by) ? kDead : 2;
                        default:
                            return kDead;
                    }
                });
                return {d, (std::uint64_t{1} << x) | (std::uint64_t{1} << y)};
            }
            default:
                throw AutomatonError("not an atom");
        }
    }

    Result negate(Result r) {
        SymDfa c = sym::complement(r.dfa);
        if (r.fo) c = sym::product(c, validity_mask(r.fo), sym::BoolOp::And);
        return {c, r.fo};
    }

    Result binary(Result a, Result b, sym::BoolOp op) {
        SymDfa d = sym::product(a.dfa, b.dfa, op);
        const std::uint64_t fo = a.fo | b.fo;
        if (op != sym::BoolOp::And && fo) d = sym::product(sym::minimize(d), validity_mask(fo), sym::BoolOp::And);
        return {d, fo};
    }

    Result step(const Formula& f, int depth) {
        if (f.is_atom()) return atom(f);
        switch (f.op()) {
            case Op::Not:
                return negate(run(f.kid(0), depth));
            case Op::And:
                return binary(run(f.kid(0), depth), run(f.kid(1), depth), sym::BoolOp::And);
            case Op::Or:
                return binary(run(f.kid(0), depth), run(f.kid(1), depth), sym::BoolOp::Or);
            case Op::Implies:
                return binary(run(f.kid(0), depth), run(f.kid(1), depth), sym::BoolOp::Implies);
            case Op::Iff:
                return binary(run(f.kid(0), depth), run(f.kid(1), depth), sym::BoolOp::Iff);
            case Op::Exists:
            case Op::Forall: {
                const int t = fo_bound_.at(depth);
                scope_.emplace_back(f.name(), t);
                Result body = run(f.kid(0), depth + 1);
                scope_.pop_back();
                const std::uint64_t bit = std::uint64_t{1} << t;
                if (f.op() == Op::Exists) {
                    // the body guarantees a singleton track for t only if t is free in it
                    if (!(body.fo & bit)) body.dfa = sym::product(body.dfa, validity(t), sym::BoolOp::And);
                    return {sym::project(sym::minimize(body.dfa), t), body.fo & ~bit};
                }
                Result neg = negate(body);
                if (!(neg.fo & bit)) neg.dfa = sym::product(neg.dfa, validity(t), sym::BoolOp::And);
                Result ex{sym::minimize(sym::project(sym::minimize(neg.dfa), t)), neg.fo & ~bit};
                return negate(ex);
            }
            case Op::ExistsSet:
            case Op::ForallSet: {
                const int t = so_bound_.at(depth);
                set_scope_.emplace_back(f.name(), t);
                Result body = run(f.kid(0), depth + 1);
                set_scope_.pop_back();
                if (f.op() == Op::ExistsSet) return {sym::project(body.dfa, t), body.fo};
                Result neg = negate(body);
                Result ex{sym::minimize(sym::project(neg.dfa, t)), neg.fo};
                return negate(ex);
            }
            default:
                throw AutomatonError("unexpected formula node");
        }
    }

    std::shared_ptr<Mtbdd> mgr_;
    CompilationTrace* trace_;
    TrackRegistry work_;
    int offset_ = 0;
    std::vector<int> fo_bound_, so_bound_;
    std::vector<std::pair<std::string, int>> scope_, set_scope_;
    std::map<std::uint64_t, SymDfa> validity_cache_;
};

}  // namespace

CompiledFormula compile_symbolic(const Formula& phi, const TrackRegistry& layout, const std::shared_ptr<Mtbdd>& mgr,
                                 CompilationTrace* trace) {
    Formula f = is_flat(phi) ? phi : flatten(phi);
    FreeSymbols fs = free_symbols(f);
    for (const auto& v : fs.vars)
        if (!layout.index_of(v)) throw AutomatonError("layout lacks a track for variable '" + v + "'");
    for (const auto& p : fs.preds)
        if (!layout.index_of(p)) throw AutomatonError("layout lacks a track for predicate '" + p + "'");
    for (const auto& s : fs.sets)
        if (!layout.index_of(s)) throw AutomatonError("layout lacks a track for set '" + s + "'");
    int fo = 0, so = 0;
    max_depth(f, 0, fo, so);
    Compiler c(layout, mgr, trace, fo, so);
    auto r = c.run(f, 0);
    // free first-order tracks of the layout not mentioned by f still have to be singletons
    SymDfa d = r.dfa;
    CompiledFormula out{sym::minimize(c.finish(d)), layout};
    std::uint64_t rest = 0;
    for (int i = 0; i < layout.width(); ++i)
        if (layout.tracks[i].kind == TrackKind::FirstOrder && !fs.vars.count(layout.tracks[i].name))
            rest |= std::uint64_t{1} << i;
    if (rest) {
        SymDfa acc = out.dfa;
        for (int i = 0; i < layout.width(); ++i) {
            if (!((rest >> i) & 1u)) continue;
            SymDfa v = sym::explicit_dfa(mgr, layout.width(), {i}, 3, {1}, [](int s, std::uint64_t b) {
                if (s == 2) return 2;
                if (s == 0) return b ? 1 : 0;
                return b ? 2 : 1;
            });
            acc = sym::minimize(sym::product(acc, v, sym::BoolOp::And));
        }
        out.dfa = acc;
    }
    return out;
}

TrackNfa compile(const Formula& phi, const TrackRegistry& layout, CompilationTrace* trace) {
    auto mgr = std::make_shared<Mtbdd>();
    CompiledFormula c = compile_symbolic(phi, layout, mgr, trace);
    return sym::to_nfa(c.dfa, c.registry);
}

TrackNfa compile(const Formula& phi) {
    Formula f = is_flat(phi) ? phi : flatten(phi);
    return compile(f, default_layout(f));
}

// ---------------------------------------------------------------------------

Formula positive_formula_of(const TrackNfa& a) {
    for (const auto& t : a.registry.tracks)
        if (t.kind != TrackKind::Predicate)
            throw AutomatonError("positive formulas are only built for predicate-track automata");
    const int q = a.num_states;
    std::vector<std::string> sets;
    for (int i = 0; i < q; ++i) sets.push_back("_Q" + std::to_string(i));
    auto label = [&](int s, const std::string& x) { return Formula::member(sets[s], Term::var(x)); };
    auto lit = [&](const Cube& c, const std::string& x) {
        std::vector<Formula> ps;
        for (int i = 0; i < a.registry.width(); ++i)
            if ((c.mask >> i) & (c.value >> i) & 1u) ps.push_back(Formula::pred(a.registry.tracks[i].name, Term::var(x)));
        return Formula::conj_all(ps);
    };
    const Term x = Term::var("x");
    const Term y = Term::var("y");

    std::vector<Formula> cover_some, cover_excl;
    for (int i = 0; i < q; ++i) {
        cover_some.push_back(label(i, "x"));
        for (int j = i + 1; j < q; ++j)
            cover_excl.push_back(Formula::negate(label(i, "x")) || Formula::negate(label(j, "x")));
    }
    std::vector<Formula> cover{Formula::disj_all(cover_some)};
    cover.insert(cover.end(), cover_excl.begin(), cover_excl.end());
    Formula psi_cover = Formula::forall("x", Formula::conj_all(cover));

    std::vector<bool> is_init(q, false);
    for (int s : a.initial) is_init[s] = true;
    std::vector<Formula> first;
    for (const auto& t : a.transitions)
        if (is_init[t.from]) first.push_back(label(t.to, "x") && lit(t.cube, "x"));
    Formula psi_i = Formula::forall("x", Formula::implies(Formula::eq(x, Term::zero()), Formula::disj_all(first)));

    std::vector<Formula> steps;
    for (const auto& t : a.transitions) steps.push_back(label(t.from, "x") && label(t.to, "y") && lit(t.cube, "y"));
    Formula psi_d = Formula::forall(
        "x", Formula::forall("y", Formula::implies(Formula::eq(x.succ(), y) && Formula::lt(x, y),
                                                   Formula::disj_all(steps))));

    std::vector<Formula> finals;
    for (int s = 0; s < q; ++s)
        if (a.final[s]) finals.push_back(label(s, "x"));
    Formula last = Formula::forall("z", Formula::leq(Term::var("z"), x));
    Formula psi_f = Formula::forall("x", Formula::implies(last, Formula::disj_all(finals)));

    Formula body = Formula::conj_all({psi_cover, psi_i, psi_d, psi_f});
    for (int i = q - 1; i >= 0; --i) body = Formula::exists_set(sets[i], body);
    return body;
}

}  // namespace trapmark
