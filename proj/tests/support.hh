#pragma once

// Shared helpers for the unit tests and the acceptance runner: seeded
// formula/automaton generators and brute-force reference implementations
// that do not go through the library code under test.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "trapmark/automata.hh"
#include "trapmark/formula.hh"
#include "trapmark/frontend.hh"
#include "trapmark/model.hh"
#include "trapmark/petri.hh"

#ifndef TRAPMARK_MODELS_DIR
#define TRAPMARK_MODELS_DIR "models"
#endif

namespace tm_test {

using namespace trapmark;

inline SystemModel load_model(const std::string& name) {
    const std::string path = std::string(TRAPMARK_MODELS_DIR) + "/" + name;
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    ParseResult pr = parse_model(ss.str(), path);
    if (!pr.ok()) {
        std::string msg = "cannot load " + path;
        for (const auto& d : pr.diagnostics) msg += "\n" + format_diagnostic(d);
        throw std::runtime_error(msg);
    }
    return *pr.model;
}

inline SystemModel parse_or_throw(const std::string& text) {
    ParseResult pr = parse_model(text, "<test>");
    if (!pr.ok()) {
        std::string msg = "parse failed";
        for (const auto& d : pr.diagnostics) msg += "\n" + format_diagnostic(d);
        throw std::runtime_error(msg);
    }
    return *pr.model;
}

// ---------------------------------------------------------------------------
// Structures

/// Every structure over `preds` with universe size n (2^(|preds| n) of them).
inline void for_each_structure(int n, const std::vector<std::string>& preds,
                               const std::function<void(const Structure&)>& f) {
    const int bits = static_cast<int>(preds.size()) * n;
    for (std::uint64_t v = 0; v < (std::uint64_t{1} << bits); ++v) {
        Structure s;
        s.n = n;
        for (std::size_t k = 0; k < preds.size(); ++k) {
            std::uint64_t mask = 0;
            for (int i = 0; i < n; ++i)
                if ((v >> (i * preds.size() + k)) & 1u) mask |= std::uint64_t{1} << i;
            s.preds[preds[k]] = mask;
        }
        f(s);
    }
}

/// Valuation bit i*P+k <-> predicate k holds at i.
inline std::uint64_t valuation_of(const Structure& s, const std::vector<std::string>& preds) {
    std::uint64_t v = 0;
    for (std::size_t k = 0; k < preds.size(); ++k)
        for (int i = 0; i < s.n; ++i)
            if (s.holds(preds[k], i)) v |= std::uint64_t{1} << (i * preds.size() + k);
    return v;
}

// ---------------------------------------------------------------------------
// Formula generators

struct FormulaGen {
    std::mt19937 rng;
    std::vector<std::string> preds{"p", "q"};
    std::vector<std::string> consts;      // IL1S constants
    bool second_order = false;            // WS1S: set quantifiers and s^i(0) terms
    bool order_atoms = true;
    int max_succ = 2;
    int counter = 0;

    explicit FormulaGen(unsigned seed) : rng(seed) {}

    int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }
    bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

    Term term(const std::vector<std::string>& vars) {
        const int k = pick(max_succ + 1);
        const int options = static_cast<int>(vars.size() + consts.size()) + (second_order ? 1 : 0);
        const int c = pick(options);
        if (c < static_cast<int>(vars.size())) return Term::var(vars[c], k);
        if (c < static_cast<int>(vars.size() + consts.size())) return Term::constant(consts[c - vars.size()], k);
        return Term::zero(k);
    }

    Formula atom(const std::vector<std::string>& vars, const std::vector<std::string>& sets) {
        const int kind = pick(order_atoms ? 5 : 3);
        switch (kind) {
            case 0:
            case 1:
                if (!sets.empty() && coin(0.4)) return Formula::member(sets[pick(sets.size())], term(vars));
                return Formula::pred(preds[pick(preds.size())], term(vars));
            case 2:
                return Formula::eq(term(vars), term(vars));
            case 3:
                return Formula::leq(term(vars), term(vars));
            default:
                return Formula::lt(term(vars), term(vars));
        }
    }

    /// A sentence (no free variables or set variables).
    Formula sentence(int depth) { return gen(depth, {}, {}); }

    Formula gen(int depth, std::vector<std::string> vars, std::vector<std::string> sets) {
        const bool need_binder = vars.empty() && consts.empty() && !second_order;
        if (depth <= 0 && !need_binder) return atom(vars, sets);
        const int choice = need_binder ? 6 + pick(second_order ? 4 : 2) : pick(second_order ? 10 : 8);
        switch (choice) {
            case 0:
                return Formula::negate(gen(depth - 1, vars, sets));
            case 1:
            case 2:
                return Formula::conj(gen(depth - 1, vars, sets), gen(depth - 1, vars, sets));
            case 3:
                return Formula::disj(gen(depth - 1, vars, sets), gen(depth - 1, vars, sets));
            case 4:
                return Formula::implies(gen(depth - 1, vars, sets), gen(depth - 1, vars, sets));
            case 5:
                return Formula::iff(gen(depth - 1, vars, sets), gen(depth - 1, vars, sets));
            case 6:
            case 7: {
                const std::string v = "x" + std::to_string(counter++);
                vars.push_back(v);
                Formula body = gen(depth - 1, vars, sets);
                return choice == 6 ? Formula::exists(v, body) : Formula::forall(v, body);
            }
            default: {
                const std::string s = "X" + std::to_string(counter++);
                sets.push_back(s);
                Formula body = gen(depth - 1, vars, sets);
                return choice == 8 ? Formula::exists_set(s, body) : Formula::forall_set(s, body);
            }
        }
    }
};

/// Negation normal form computed here, independently of the library.
inline Formula nnf_reference(const Formula& f, bool neg = false) {
    switch (f.op()) {
        case Op::Not:
            return nnf_reference(f.kid(0), !neg);
        case Op::And:
        case Op::Or: {
            const bool is_and = (f.op() == Op::And) != neg;
            Formula a = nnf_reference(f.kid(0), neg), b = nnf_reference(f.kid(1), neg);
            return is_and ? Formula::conj(a, b) : Formula::disj(a, b);
        }
        case Op::Implies:
            return nnf_reference(Formula::disj(Formula::negate(f.kid(0)), f.kid(1)), neg);
        case Op::Iff: {
            const Formula& a = f.kid(0);
            const Formula& b = f.kid(1);
            return nnf_reference(Formula::conj(Formula::implies(a, b), Formula::implies(b, a)), neg);
        }
        case Op::Exists:
        case Op::Forall: {
            const bool ex = (f.op() == Op::Exists) != neg;
            Formula body = nnf_reference(f.kid(0), neg);
            return ex ? Formula::exists(f.name(), body) : Formula::forall(f.name(), body);
        }
        case Op::ExistsSet:
        case Op::ForallSet: {
            const bool ex = (f.op() == Op::ExistsSet) != neg;
            Formula body = nnf_reference(f.kid(0), neg);
            return ex ? Formula::exists_set(f.name(), body) : Formula::forall_set(f.name(), body);
        }
        case Op::True:
            return neg ? Formula::falsity() : f;
        case Op::False:
            return neg ? Formula::truth() : f;
        default:
            return neg ? Formula::negate(f) : f;
    }
}

// ---------------------------------------------------------------------------
// Automata

inline TrackRegistry predicate_registry(int width) {
    TrackRegistry reg;
    for (int i = 0; i < width; ++i) reg.add("r" + std::to_string(i), TrackKind::Predicate);
    return reg;
}

/// Random NFA with cube-labelled transitions.
inline TrackNfa random_nfa(std::mt19937& rng, int width, int states, double density = 0.25) {
    TrackNfa a;
    a.registry = predicate_registry(width);
    a.num_states = states;
    a.final.assign(states, false);
    std::bernoulli_distribution flip(0.5), dense(density);
    std::uniform_int_distribution<int> st(0, states - 1);
    a.initial.push_back(st(rng));
    if (flip(rng)) a.initial.push_back(st(rng));
    std::sort(a.initial.begin(), a.initial.end());
    a.initial.erase(std::unique(a.initial.begin(), a.initial.end()), a.initial.end());
    for (int s = 0; s < states; ++s) a.final[s] = flip(rng) && flip(rng) ? true : (s == states - 1);
    const std::uint64_t full = (std::uint64_t{1} << width) - 1;
    for (int s = 0; s < states; ++s)
        for (int t = 0; t < states; ++t)
            if (dense(rng)) {
                Cube c;
                c.mask = std::uniform_int_distribution<std::uint64_t>(0, full)(rng);
                c.value = std::uniform_int_distribution<std::uint64_t>(0, full)(rng) & c.mask;
                a.transitions.push_back({s, c, t});
            }
    return a;
}

/// Reference NFA membership by direct simulation over the transition list.
inline bool nfa_accepts_reference(const TrackNfa& a, const Word& w) {
    if (w.empty()) return false;
    std::set<int> cur(a.initial.begin(), a.initial.end());
    for (std::uint64_t letter : w) {
        std::set<int> next;
        for (const auto& t : a.transitions)
            if (cur.count(t.from) && t.cube.contains(letter)) next.insert(t.to);
        cur = std::move(next);
    }
    for (int s : cur)
        if (a.final[s]) return true;
    return false;
}

/// All words of length len over width tracks, in lexicographic order
/// (track 0 most significant).
inline void for_each_word(int width, int len, const std::function<void(const Word&)>& f) {
    const int letters = 1 << width;
    std::vector<std::uint64_t> order(letters);
    for (int i = 0; i < letters; ++i) order[i] = static_cast<std::uint64_t>(i);
    std::sort(order.begin(), order.end(), [](std::uint64_t a, std::uint64_t b) { return letter_less(a, b); });
    Word w(len);
    std::function<void(int)> rec = [&](int i) {
        if (i == len) {
            f(w);
            return;
        }
        for (std::uint64_t l : order) {
            w[i] = l;
            rec(i + 1);
        }
    };
    rec(0);
}

/// Pointwise order on same-length words.
inline bool word_leq(const Word& a, const Word& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if ((a[i] & ~b[i]) != 0) return false;
    return true;
}

inline std::vector<Word> minimal_words(const std::vector<Word>& ws) {
    std::vector<Word> out;
    for (const auto& w : ws) {
        bool minimal = true;
        for (const auto& u : ws)
            if (u != w && word_leq(u, w)) {
                minimal = false;
                break;
            }
        if (minimal) out.push_back(w);
    }
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Petri nets

/// post(W) subset of pre(W), checked directly on the transition list.
inline bool is_trap_reference(const MarkedPetriNet& net, std::uint64_t w) {
    for (const auto& t : net.transitions)
        if ((t.pre & w) && !(t.post & w)) return false;
    return true;
}

/// All minimal initially marked traps by subset enumeration.
inline std::vector<std::uint64_t> min_imts_reference(const MarkedPetriNet& net) {
    const int p = net.num_places();
    if (p > 22) throw std::runtime_error("too many places for subset enumeration");
    std::vector<std::uint64_t> imts;
    for (std::uint64_t w = 1; w < (std::uint64_t{1} << p); ++w)
        if ((w & net.initial) && is_trap_reference(net, w)) imts.push_back(w);
    std::sort(imts.begin(), imts.end(), [](std::uint64_t a, std::uint64_t b) {
        const int pa = __builtin_popcountll(a), pb = __builtin_popcountll(b);
        return pa != pb ? pa < pb : a < b;
    });
    std::vector<std::uint64_t> minimal;
    for (std::uint64_t w : imts) {
        bool keep = true;
        for (std::uint64_t m : minimal)
            if ((m & w) == m) {
                keep = false;
                break;
            }
        if (keep) minimal.push_back(w);
    }
    std::sort(minimal.begin(), minimal.end());
    return minimal;
}

inline int place_id(const MarkedPetriNet& net, const std::string& name) {
    for (int i = 0; i < net.num_places(); ++i)
        if (net.places[i] == name) return i;
    throw std::runtime_error("no place " + name);
}

inline std::uint64_t place_set(const MarkedPetriNet& net, const std::vector<std::string>& names) {
    std::uint64_t w = 0;
    for (const auto& n : names) w |= std::uint64_t{1} << place_id(net, n);
    return w;
}

/// Structure at size net.n whose predicates are the marked places.
inline Structure marking_structure(const MarkedPetriNet& net, Marking m) {
    Structure s;
    s.n = net.n;
    const int P = static_cast<int>(net.predicates.size());
    for (int k = 0; k < P; ++k) {
        s.preds[net.predicates[k]] = 0;
        for (int i = 0; i < net.n; ++i)
            if ((m >> net.place(i, k)) & 1u) s.preds[net.predicates[k]] |= std::uint64_t{1} << i;
    }
    return s;
}

/// Valuations marking every minimal IMT of the net, by subset enumeration.
inline std::vector<std::uint64_t> trap_invariant_reference(const MarkedPetriNet& net) {
    const auto traps = min_imts_reference(net);
    std::vector<std::uint64_t> out;
    for (std::uint64_t v = 0; v < (std::uint64_t{1} << net.num_places()); ++v) {
        bool ok = true;
        for (auto t : traps)
            if (!(t & v)) {
                ok = false;
                break;
            }
        if (ok) out.push_back(v);
    }
    return out;
}

/// A disjunction of conjunctions of ground atoms p(c) as a set of atom sets.
/// Throws on anything else (in particular negative literals).
using GroundDnf = std::set<std::set<std::string>>;

inline void collect_conjuncts(const Formula& f, std::set<std::string>& out) {
    if (f.op() == Op::And) {
        for (const auto& k : f.kids()) collect_conjuncts(k, out);
        return;
    }
    if (f.op() == Op::True) return;
    if (f.op() != Op::Pred || f.terms().at(0).base != TermBase::Const || f.terms()[0].succs != 0)
        throw std::runtime_error("not a ground positive atom: " + to_string(f));
    out.insert(f.name() + "(" + f.terms()[0].name + ")");
}

inline void collect_disjuncts(const Formula& f, GroundDnf& out) {
    if (f.op() == Op::Or) {
        for (const auto& k : f.kids()) collect_disjuncts(k, out);
        return;
    }
    if (f.op() == Op::False) return;
    std::set<std::string> c;
    collect_conjuncts(f, c);
    out.insert(c);
}

inline GroundDnf ground_dnf(const Formula& f) {
    GroundDnf out;
    collect_disjuncts(f, out);
    return out;
}

}  // namespace tm_test
