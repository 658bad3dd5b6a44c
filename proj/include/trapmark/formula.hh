#pragma once

// Formula ASTs shared by the interaction logic (IL1S) and its second-order
// extension (WS1S).  Nodes are immutable and shared; a Formula is a cheap
// handle to a node.

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace trapmark {

struct SourceSpan {
    std::string file;
    int line = 1;
    int column = 1;
    int length = 0;
};

enum class TermBase { Var, Const, Zero };

/// succ^succs(base).  Zero only occurs in WS1S formulas.
struct Term {
    TermBase base = TermBase::Var;
    std::string name;
    int succs = 0;

    static Term var(std::string n, int k = 0) { return {TermBase::Var, std::move(n), k}; }
    static Term constant(std::string n, int k = 0) { return {TermBase::Const, std::move(n), k}; }
    static Term zero(int k = 0) { return {TermBase::Zero, {}, k}; }

    Term succ(int k = 1) const { return {base, name, succs + k}; }
    bool same_base(const Term& o) const { return base == o.base && name == o.name; }
    bool operator==(const Term& o) const = default;
};

enum class Op {
    True,
    False,
    Leq,     // t1 <= t2
    Lt,      // t1 < t2
    Eq,      // t1 = t2
    Pred,    // pr(t)
    Mod,     // t = residue (mod modulus)
    SetMem,  // X(t)
    Not,
    And,
    Or,
    Implies,
    Iff,
    Exists,
    Forall,
    ExistsSet,
    ForallSet,
};

struct FormulaNode;

class Formula {
public:
    Formula();  // true
    explicit Formula(std::shared_ptr<const FormulaNode> node) : node_(std::move(node)) {}

    static Formula truth();
    static Formula falsity();
    static Formula leq(Term a, Term b);
    static Formula lt(Term a, Term b);
    static Formula eq(Term a, Term b);
    static Formula neq(Term a, Term b);
    static Formula pred(std::string name, Term t);
    static Formula mod(Term t, int modulus, int residue);
    static Formula member(std::string set, Term t);
    static Formula negate(Formula f);
    static Formula conj(Formula a, Formula b);
    static Formula disj(Formula a, Formula b);
    static Formula implies(Formula a, Formula b);
    static Formula iff(Formula a, Formula b);
    static Formula exists(std::string var, Formula body);
    static Formula forall(std::string var, Formula body);
    static Formula exists_set(std::string var, Formula body);
    static Formula forall_set(std::string var, Formula body);

    /// n-ary helpers; the empty conjunction is true, the empty disjunction false.
    static Formula conj_all(const std::vector<Formula>& fs);
    static Formula disj_all(const std::vector<Formula>& fs);
    static Formula exists_all(const std::vector<std::string>& vars, Formula body);
    static Formula forall_all(const std::vector<std::string>& vars, Formula body);

    Op op() const;
    const std::vector<Term>& terms() const;
    const std::string& name() const;
    int modulus() const;
    int residue() const;
    const std::vector<Formula>& kids() const;
    const Formula& kid(std::size_t i) const { return kids().at(i); }
    const SourceSpan& span() const;

    Formula with_span(SourceSpan span) const;

    bool is_atom() const;
    bool is_quantifier() const;

    const FormulaNode* get() const { return node_.get(); }

private:
    std::shared_ptr<const FormulaNode> node_;
};

struct FormulaNode {
    Op op = Op::True;
    std::vector<Term> terms;
    std::string name;
    int modulus = 0;
    int residue = 0;
    std::vector<Formula> kids;
    SourceSpan span;
};

inline Formula operator&&(Formula a, Formula b) { return Formula::conj(std::move(a), std::move(b)); }
inline Formula operator||(Formula a, Formula b) { return Formula::disj(std::move(a), std::move(b)); }
inline Formula operator!(Formula a) { return Formula::negate(std::move(a)); }

/// Equality of syntax trees, ignoring source spans.
bool structurally_equal(const Formula& a, const Formula& b);

struct FreeSymbols {
    std::set<std::string> vars;
    std::set<std::string> consts;
    std::set<std::string> preds;
    std::set<std::string> sets;
};

FreeSymbols free_symbols(const Formula& f);
/// Every name occurring in f, bound or free, of any kind.
std::set<std::string> all_names(const Formula& f);

/// Whether f contains any pr(t) atom whose predicate is in `names` (all
/// predicates when `names` is empty).
bool mentions_predicates(const Formula& f, const std::set<std::string>& names = {});

bool is_sentence(const Formula& f);

/// Plain infix rendering; the frontend printer adds model-aware naming.
std::string to_string(const Term& t);
std::string to_string(const Formula& f);

/// Deterministic fresh-name generator.  Names carry the reserved `_` prefix
/// and never collide with names registered through `avoid`.
class NameSupply {
public:
    explicit NameSupply(std::string stem = "_v") : stem_(std::move(stem)) {}
    void avoid(const std::set<std::string>& names) { taken_.insert(names.begin(), names.end()); }
    void avoid(const std::string& name) { taken_.insert(name); }
    std::string fresh();

private:
    std::string stem_;
    std::set<std::string> taken_;
    int counter_ = 0;
};

/// Reserved name of the last-position variable introduced by the Tr embedding.
inline const std::string kLastPositionVar = "_xi";

// ---------------------------------------------------------------------------
// Structures and evaluation

class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A finite structure over the universe [n].  Sets are bit masks, so n <= 64.
struct Structure {
    int n = 1;
    std::map<std::string, std::uint64_t> preds;
    std::map<std::string, int> consts;
    std::map<std::string, int> vars;
    std::map<std::string, std::uint64_t> sets;

    bool holds(const std::string& pr, int i) const;
    /// Complements every predicate interpretation (constants, variables and
    /// set variables untouched).
    Structure complemented() const;
};

enum class Successor {
    Circular,  // (x + 1) mod n, the interaction-logic reading
    Looping,   // x + 1, fixed at n - 1
};

bool evaluate(const Formula& f, const Structure& s, Successor mode);
inline bool eval_ils(const Formula& f, const Structure& s) { return evaluate(f, s, Successor::Circular); }
inline bool eval_wss(const Formula& f, const Structure& s) { return evaluate(f, s, Successor::Looping); }

}  // namespace trapmark
