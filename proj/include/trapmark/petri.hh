#pragma once

// Fixed-size semantics: the 1-safe marked Petri net of a system at size n,
// explicit reachability, traps, and a small propositional layer used to
// ground formulas at fixed n.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "trapmark/formula.hh"
#include "trapmark/model.hh"

namespace trapmark {

class PetriError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Caps {
    int net_size = 6;                  // largest n for instantiate_net
    std::size_t markings = 1000000;    // reachable markings explored
    std::size_t dnf = 200000;          // cubes in propositional DNF
    int trap_places = 24;              // exhaustive trap search
    int bool_sets = 4;                 // largest n for grounding set quantifiers

    /// Reads TRAPMARK_CAPS-style "key=value,..." overrides; throws on bad input.
    void apply(const std::string& spec);
};

/// Places are numbered index-major: place(i, k) = i * P + k where k is the
/// position of the state predicate in state_predicates(model).
using PlaceSet = std::uint64_t;

struct PnTransition {
    PlaceSet pre = 0;
    PlaceSet post = 0;
    std::string label;  // the minimal model or view disjunct it comes from
};

struct MarkedPetriNet {
    std::vector<std::string> places;  // "Type.state@i"
    std::vector<PnTransition> transitions;
    PlaceSet initial = 0;
    int n = 0;                         // instances per type; 0 for non-indexed nets
    std::vector<std::string> predicates;  // state predicates, P = size()

    int num_places() const { return static_cast<int>(places.size()); }
    int place(int index, int pred) const { return index * static_cast<int>(predicates.size()) + pred; }
};

using Marking = PlaceSet;

/// One port-predicate interpretation: (port, index) pairs.
using PortInterpretation = std::set<std::pair<std::string, int>>;

/// Minimal models of the interaction at size n, from the clause structure.
std::vector<PortInterpretation> minimal_models(const SystemModel& model, int n);
/// Reference enumeration over all port interpretations (small P*n only).
std::vector<PortInterpretation> minimal_models_bruteforce(const SystemModel& model, int n);

MarkedPetriNet instantiate_net(const SystemModel& model, int n, const Caps& caps = {});

struct ReachResult {
    std::vector<Marking> markings;  // breadth-first order, initial first
};
ReachResult reachable_markings(const MarkedPetriNet& net, const Caps& caps = {});

bool enabled(const PnTransition& t, Marking m);
Marking fire(const PnTransition& t, Marking m);  // throws on 1-safety violation

bool is_trap(const MarkedPetriNet& net, PlaceSet w);
/// Largest trap contained in `within`.
PlaceSet maximal_trap(const MarkedPetriNet& net, PlaceSet within);
std::vector<PlaceSet> enumerate_min_imts(const MarkedPetriNet& net, const Caps& caps = {});
/// Reference enumeration over all subsets.
std::vector<PlaceSet> enumerate_min_imts_bruteforce(const MarkedPetriNet& net);
/// Places touched by some transition.
PlaceSet active_places(const MarkedPetriNet& net);

/// Markings that mark every minimal IMT.
bool marks_all(const std::vector<PlaceSet>& traps, Marking m);

std::string place_set_to_string(const MarkedPetriNet& net, PlaceSet w);
std::string to_dot(const MarkedPetriNet& net, const std::string& title = "N");

// ---------------------------------------------------------------------------
// Propositional formulas over variables 0..63

class Prop {
public:
    enum class Kind { True, False, Var, Not, And, Or };

    static Prop truth();
    static Prop falsity();
    static Prop var(int v);
    static Prop negate(const Prop& p);
    static Prop conj(std::vector<Prop> ps);
    static Prop disj(std::vector<Prop> ps);

    Kind kind() const { return node_->kind; }
    int var_index() const { return node_->var; }
    const std::vector<Prop>& kids() const { return node_->kids; }

    bool eval(std::uint64_t valuation) const;
    std::string to_string(const std::vector<std::string>& names = {}) const;

private:
    struct Node {
        Kind kind = Kind::True;
        int var = 0;
        std::vector<Prop> kids;
    };
    explicit Prop(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const Node> node_;
};

/// Grounds a sentence at size n.  Predicate `preds[k]` at position i becomes
/// variable i * preds.size() + k.
Prop booleanize(const Formula& phi, int n, const std::vector<std::string>& preds,
                Successor mode = Successor::Looping, const Caps& caps = {});

Prop prop_nnf(const Prop& p);
/// Variables kept, constants negated, and/or swapped (after NNF).
Prop prop_dual(const Prop& p);
/// Minimal-model preserving positive DNF.
Prop prop_pos(const Prop& p, const Caps& caps = {});
/// Cubes of a DNF as (positive vars, negative vars) masks.
std::vector<std::pair<std::uint64_t, std::uint64_t>> prop_dnf(const Prop& p, const Caps& caps = {});

/// Trap constraint and "some initially marked place" of a fixed net.
Prop net_trap_constraint(const MarkedPetriNet& net);
Prop net_initial_constraint(const MarkedPetriNet& net);

}  // namespace trapmark
