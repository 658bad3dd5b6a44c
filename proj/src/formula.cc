#include "trapmark/formula.hh"

#include <algorithm>
#include <functional>
#include <optional>
#include <sstream>

namespace trapmark {

namespace {

Formula make(Op op, std::vector<Term> terms = {}, std::string name = {}, std::vector<Formula> kids = {},
             int modulus = 0, int residue = 0) {
    auto node = std::make_shared<FormulaNode>();
    node->op = op;
    node->terms = std::move(terms);
    node->name = std::move(name);
    node->kids = std::move(kids);
    node->modulus = modulus;
    node->residue = residue;
    return Formula(std::move(node));
}

const Formula& true_formula() {
    static const Formula t = make(Op::True);
    return t;
}

}  // namespace

Formula::Formula() : node_(true_formula().node_) {}

Formula Formula::truth() { return true_formula(); }
Formula Formula::falsity() { return make(Op::False); }
Formula Formula::leq(Term a, Term b) { return make(Op::Leq, {std::move(a), std::move(b)}); }
Formula Formula::lt(Term a, Term b) { return make(Op::Lt, {std::move(a), std::move(b)}); }
Formula Formula::eq(Term a, Term b) { return make(Op::Eq, {std::move(a), std::move(b)}); }
Formula Formula::neq(Term a, Term b) { return negate(eq(std::move(a), std::move(b))); }
Formula Formula::pred(std::string name, Term t) { return make(Op::Pred, {std::move(t)}, std::move(name)); }
Formula Formula::member(std::string set, Term t) { return make(Op::SetMem, {std::move(t)}, std::move(set)); }

Formula Formula::mod(Term t, int modulus, int residue) {
    if (modulus < 1 || residue < 0 || residue >= modulus)
        throw std::invalid_argument("mod atom requires 0 <= residue < modulus");
    return make(Op::Mod, {std::move(t)}, {}, {}, modulus, residue);
}

Formula Formula::negate(Formula f) { return make(Op::Not, {}, {}, {std::move(f)}); }
Formula Formula::conj(Formula a, Formula b) { return make(Op::And, {}, {}, {std::move(a), std::move(b)}); }
Formula Formula::disj(Formula a, Formula b) { return make(Op::Or, {}, {}, {std::move(a), std::move(b)}); }
Formula Formula::implies(Formula a, Formula b) { return make(Op::Implies, {}, {}, {std::move(a), std::move(b)}); }
Formula Formula::iff(Formula a, Formula b) { return make(Op::Iff, {}, {}, {std::move(a), std::move(b)}); }
Formula Formula::exists(std::string v, Formula body) { return make(Op::Exists, {}, std::move(v), {std::move(body)}); }
Formula Formula::forall(std::string v, Formula body) { return make(Op::Forall, {}, std::move(v), {std::move(body)}); }
Formula Formula::exists_set(std::string v, Formula body) {
    return make(Op::ExistsSet, {}, std::move(v), {std::move(body)});
}
Formula Formula::forall_set(std::string v, Formula body) {
    return make(Op::ForallSet, {}, std::move(v), {std::move(body)});
}

Formula Formula::conj_all(const std::vector<Formula>& fs) {
    if (fs.empty()) return truth();
    Formula acc = fs.front();
    for (std::size_t i = 1; i < fs.size(); ++i) acc = conj(acc, fs[i]);
    return acc;
}

Formula Formula::disj_all(const std::vector<Formula>& fs) {
    if (fs.empty()) return falsity();
    Formula acc = fs.front();
    for (std::size_t i = 1; i < fs.size(); ++i) acc = disj(acc, fs[i]);
    return acc;
}

Formula Formula::exists_all(const std::vector<std::string>& vars, Formula body) {
    for (auto it = vars.rbegin(); it != vars.rend(); ++it) body = exists(*it, body);
    return body;
}

Formula Formula::forall_all(const std::vector<std::string>& vars, Formula body) {
    for (auto it = vars.rbegin(); it != vars.rend(); ++it) body = forall(*it, body);
    return body;
}

Op Formula::op() const { return node_->op; }
const std::vector<Term>& Formula::terms() const { return node_->terms; }
const std::string& Formula::name() const { return node_->name; }
int Formula::modulus() const { return node_->modulus; }
int Formula::residue() const { return node_->residue; }
const std::vector<Formula>& Formula::kids() const { return node_->kids; }
const SourceSpan& Formula::span() const { return node_->span; }

Formula Formula::with_span(SourceSpan span) const {
    auto node = std::make_shared<FormulaNode>(*node_);
    node->span = std::move(span);
    return Formula(std::move(node));
}

bool Formula::is_atom() const {
    switch (op()) {
        case Op::True:
        case Op::False:
        case Op::Leq:
        case Op::Lt:
        case Op::Eq:
        case Op::Pred:
        case Op::Mod:
        case Op::SetMem:
            return true;
        default:
            return false;
    }
}

bool Formula::is_quantifier() const {
    return op() == Op::Exists || op() == Op::Forall || op() == Op::ExistsSet || op() == Op::ForallSet;
}

bool structurally_equal(const Formula& a, const Formula& b) {
    if (a.get() == b.get()) return true;
    if (a.op() != b.op() || a.name() != b.name() || a.terms() != b.terms() || a.modulus() != b.modulus() ||
        a.residue() != b.residue() || a.kids().size() != b.kids().size())
        return false;
    for (std::size_t i = 0; i < a.kids().size(); ++i)
        if (!structurally_equal(a.kids()[i], b.kids()[i])) return false;
    return true;
}

namespace {

void collect_free(const Formula& f, std::set<std::string>& bound_vars, std::set<std::string>& bound_sets,
                  FreeSymbols& out) {
    for (const Term& t : f.terms()) {
        if (t.base == TermBase::Var && !bound_vars.count(t.name)) out.vars.insert(t.name);
        if (t.base == TermBase::Const) out.consts.insert(t.name);
    }
    switch (f.op()) {
        case Op::Pred:
            out.preds.insert(f.name());
            return;
        case Op::SetMem:
            if (!bound_sets.count(f.name())) out.sets.insert(f.name());
            return;
        case Op::Exists:
        case Op::Forall: {
            bool fresh = bound_vars.insert(f.name()).second;
            collect_free(f.kid(0), bound_vars, bound_sets, out);
            if (fresh) bound_vars.erase(f.name());
            return;
        }
        case Op::ExistsSet:
        case Op::ForallSet: {
            bool fresh = bound_sets.insert(f.name()).second;
            collect_free(f.kid(0), bound_vars, bound_sets, out);
            if (fresh) bound_sets.erase(f.name());
            return;
        }
        default:
            for (const Formula& k : f.kids()) collect_free(k, bound_vars, bound_sets, out);
    }
}

}  // namespace

FreeSymbols free_symbols(const Formula& f) {
    FreeSymbols out;
    std::set<std::string> bv, bs;
    collect_free(f, bv, bs, out);
    return out;
}

std::set<std::string> all_names(const Formula& f) {
    std::set<std::string> out;
    std::function<void(const Formula&)> walk = [&](const Formula& g) {
        for (const Term& t : g.terms())
            if (t.base != TermBase::Zero) out.insert(t.name);
        if (!g.name().empty()) out.insert(g.name());
        for (const Formula& k : g.kids()) walk(k);
    };
    walk(f);
    return out;
}

bool mentions_predicates(const Formula& f, const std::set<std::string>& names) {
    if (f.op() == Op::Pred) return names.empty() || names.count(f.name()) > 0;
    for (const Formula& k : f.kids())
        if (mentions_predicates(k, names)) return true;
    return false;
}

bool is_sentence(const Formula& f) {
    FreeSymbols fs = free_symbols(f);
    return fs.vars.empty() && fs.sets.empty() && fs.consts.empty();
}

std::string to_string(const Term& t) {
    std::string base = t.base == TermBase::Zero ? "0" : t.name;
    for (int i = 0; i < t.succs; ++i) base = "succ(" + base + ")";
    return base;
}

namespace {

// Binding strength for the printer; higher binds tighter.
int precedence(const Formula& f) {
    switch (f.op()) {
        case Op::Exists:
        case Op::Forall:
        case Op::ExistsSet:
        case Op::ForallSet:
            return 0;
        case Op::Iff:
            return 1;
        case Op::Implies:
            return 2;
        case Op::Or:
            return 3;
        case Op::And:
            return 4;
        case Op::Not:
            return f.kid(0).op() == Op::Eq ? 6 : 5;
        default:
            return 6;
    }
}

void print(const Formula& f, std::ostream& os);

void print_child(const Formula& f, int min_prec, std::ostream& os) {
    if (precedence(f) < min_prec) {
        os << '(';
        print(f, os);
        os << ')';
    } else {
        print(f, os);
    }
}

void print(const Formula& f, std::ostream& os) {
    const auto& ts = f.terms();
    switch (f.op()) {
        case Op::True:
            os << "true";
            return;
        case Op::False:
            os << "false";
            return;
        case Op::Leq:
            os << to_string(ts[0]) << " <= " << to_string(ts[1]);
            return;
        case Op::Lt:
            os << to_string(ts[0]) << " < " << to_string(ts[1]);
            return;
        case Op::Eq:
            os << to_string(ts[0]) << " = " << to_string(ts[1]);
            return;
        case Op::Pred:
        case Op::SetMem:
            os << f.name() << '(' << to_string(ts[0]) << ')';
            return;
        case Op::Mod:
            os << "mod(" << to_string(ts[0]) << ", " << f.modulus() << ", " << f.residue() << ')';
            return;
        case Op::Not:
            if (f.kid(0).op() == Op::Eq) {
                const auto& et = f.kid(0).terms();
                os << to_string(et[0]) << " != " << to_string(et[1]);
                return;
            }
            os << '!';
            print_child(f.kid(0), 5, os);
            return;
        case Op::And:
            print_child(f.kid(0), 4, os);
            os << " & ";
            print_child(f.kid(1), 5, os);
            return;
        case Op::Or:
            print_child(f.kid(0), 3, os);
            os << " | ";
            print_child(f.kid(1), 4, os);
            return;
        case Op::Implies:
            print_child(f.kid(0), 3, os);
            os << " -> ";
            print_child(f.kid(1), 2, os);
            return;
        case Op::Iff:
            print_child(f.kid(0), 2, os);
            os << " <-> ";
            print_child(f.kid(1), 2, os);
            return;
        case Op::Exists:
            os << "exists " << f.name() << ". ";
            print(f.kid(0), os);
            return;
        case Op::Forall:
            os << "forall " << f.name() << ". ";
            print(f.kid(0), os);
            return;
        case Op::ExistsSet:
            os << "exists2 " << f.name() << ". ";
            print(f.kid(0), os);
            return;
        case Op::ForallSet:
            os << "forall2 " << f.name() << ". ";
            print(f.kid(0), os);
            return;
    }
}

}  // namespace

std::string to_string(const Formula& f) {
    std::ostringstream os;
    print(f, os);
    return os.str();
}

std::string NameSupply::fresh() {
    for (;;) {
        std::string candidate = stem_ + std::to_string(++counter_);
        if (taken_.insert(candidate).second) return candidate;
    }
}

// ---------------------------------------------------------------------------

bool Structure::holds(const std::string& pr, int i) const {
    auto it = preds.find(pr);
    if (it == preds.end()) throw EvalError("uninterpreted predicate '" + pr + "'");
    return (it->second >> i) & 1u;
}

Structure Structure::complemented() const {
    Structure out = *this;
    const std::uint64_t all = n >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1);
    for (auto& [name, bits] : out.preds) bits = ~bits & all;
    return out;
}

namespace {

class Evaluator {
public:
    Evaluator(const Structure& s, Successor mode) : s_(s), mode_(mode), vars_(s.vars), sets_(s.sets) {}

    bool eval(const Formula& f) {
        switch (f.op()) {
            case Op::True:
                return true;
            case Op::False:
                return false;
            case Op::Leq:
                return value(f.terms()[0]) <= value(f.terms()[1]);
            case Op::Lt:
                return value(f.terms()[0]) < value(f.terms()[1]);
            case Op::Eq:
                return value(f.terms()[0]) == value(f.terms()[1]);
            case Op::Pred:
                return s_.holds(f.name(), value(f.terms()[0]));
            case Op::Mod:
                return value(f.terms()[0]) % f.modulus() == f.residue();
            case Op::SetMem: {
                auto it = sets_.find(f.name());
                if (it == sets_.end()) throw EvalError("uninterpreted set variable '" + f.name() + "'");
                return (it->second >> value(f.terms()[0])) & 1u;
            }
            case Op::Not:
                return !eval(f.kid(0));
            case Op::And:
                return eval(f.kid(0)) && eval(f.kid(1));
            case Op::Or:
                return eval(f.kid(0)) || eval(f.kid(1));
            case Op::Implies:
                return !eval(f.kid(0)) || eval(f.kid(1));
            case Op::Iff:
                return eval(f.kid(0)) == eval(f.kid(1));
            case Op::Exists:
            case Op::Forall: {
                const bool want = f.op() == Op::Exists;
                auto saved = save_var(f.name());
                bool result = !want;
                for (int i = 0; i < s_.n && result != want; ++i) {
                    vars_[f.name()] = i;
                    if (eval(f.kid(0)) == want) result = want;
                }
                restore_var(f.name(), saved);
                return result;
            }
            case Op::ExistsSet:
            case Op::ForallSet: {
                if (s_.n > 20) throw EvalError("set quantifier over a universe too large to enumerate");
                const bool want = f.op() == Op::ExistsSet;
                std::optional<std::uint64_t> saved;
                if (auto it = sets_.find(f.name()); it != sets_.end()) saved = it->second;
                bool result = !want;
                const std::uint64_t count = std::uint64_t{1} << s_.n;
                for (std::uint64_t m = 0; m < count && result != want; ++m) {
                    sets_[f.name()] = m;
                    if (eval(f.kid(0)) == want) result = want;
                }
                if (saved) sets_[f.name()] = *saved;
                else sets_.erase(f.name());
                return result;
            }
        }
        return false;
    }

private:
    int value(const Term& t) const {
        int v = 0;
        switch (t.base) {
            case TermBase::Zero:
                v = 0;
                break;
            case TermBase::Var: {
                auto it = vars_.find(t.name);
                if (it == vars_.end()) throw EvalError("unbound variable '" + t.name + "'");
                v = it->second;
                break;
            }
            case TermBase::Const: {
                auto it = s_.consts.find(t.name);
                if (it == s_.consts.end()) throw EvalError("uninterpreted constant '" + t.name + "'");
                v = it->second;
                break;
            }
        }
        if (mode_ == Successor::Circular) return static_cast<int>((static_cast<long>(v) + t.succs) % s_.n);
        return std::min(v + t.succs, s_.n - 1);
    }

    std::optional<int> save_var(const std::string& name) const {
        auto it = vars_.find(name);
        if (it == vars_.end()) return std::nullopt;
        return it->second;
    }

    void restore_var(const std::string& name, std::optional<int> saved) {
        if (saved) vars_[name] = *saved;
        else vars_.erase(name);
    }

    const Structure& s_;
    Successor mode_;
    std::map<std::string, int> vars_;
    std::map<std::string, std::uint64_t> sets_;
};

}  // namespace

bool evaluate(const Formula& f, const Structure& s, Successor mode) {
    if (s.n < 1 || s.n > 64) throw EvalError("universe size must be in [1, 64]");
    Evaluator ev(s, mode);
    return ev.eval(f);
}

}  // namespace trapmark
