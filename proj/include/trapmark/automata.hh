#pragma once

// Finite automata over track alphabets {0,1}^width.  A letter is a bit
// vector with bit i holding track i.  Languages only contain nonempty words:
// a structure always has at least one element, so the empty word is never
// accepted and complement is taken relative to the nonempty words.
//
// TrackNfa is the exchange format (cube-labelled transitions).  SymDfa is
// the working representation: complete deterministic automata whose
// per-state transition function is an MTBDD over the tracks.

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "trapmark/bdd.hh"
#include "trapmark/formula.hh"

namespace trapmark {

class AutomatonError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class TrackKind { FirstOrder, Predicate, SetVar };

struct Track {
    std::string name;
    TrackKind kind = TrackKind::Predicate;
    bool operator==(const Track&) const = default;
};

struct TrackRegistry {
    std::vector<Track> tracks;

    int width() const { return static_cast<int>(tracks.size()); }
    std::optional<int> index_of(const std::string& name) const;
    int add(std::string name, TrackKind kind);
    std::uint64_t mask_of(TrackKind kind) const;
    std::uint64_t full_mask() const;
    bool operator==(const TrackRegistry&) const = default;
};

/// Symbols whose cared bits equal `value`.
struct Cube {
    std::uint64_t value = 0;
    std::uint64_t mask = 0;

    bool contains(std::uint64_t symbol) const { return (symbol & mask) == value; }
    bool operator==(const Cube&) const = default;
};

std::string cube_to_string(const Cube& c, int width);

using Word = std::vector<std::uint64_t>;

/// Lexicographic order on letters with track 0 most significant.
bool letter_less(std::uint64_t a, std::uint64_t b);
bool word_less(const Word& a, const Word& b);

struct NfaTransition {
    int from = 0;
    Cube cube;
    int to = 0;
};

struct TrackNfa {
    TrackRegistry registry;
    int num_states = 0;
    std::vector<int> initial;
    std::vector<bool> final;
    std::vector<NfaTransition> transitions;

    void check() const;
    std::size_t num_transitions() const { return transitions.size(); }
};

// ---------------------------------------------------------------------------
// Encoding

Word encode_structure(const Structure& s, const TrackRegistry& reg);
Structure decode_word(const Word& w, const TrackRegistry& reg);

// ---------------------------------------------------------------------------
// Language operations on TrackNfa

TrackNfa universal_nfa(const TrackRegistry& reg);
TrackNfa empty_nfa(const TrackRegistry& reg);

bool accepts(const TrackNfa& a, const Word& w);
bool is_empty(const TrackNfa& a);
TrackNfa product(const TrackNfa& a, const TrackNfa& b);
TrackNfa unite(const TrackNfa& a, const TrackNfa& b);
TrackNfa complement(const TrackNfa& a);
TrackNfa project_track(const TrackNfa& a, const std::string& name);
TrackNfa determinize(const TrackNfa& a);
TrackNfa minimize(const TrackNfa& a);
/// Drops states that are unreachable or cannot reach a final state.
TrackNfa trim(const TrackNfa& a);

/// Adds every transition whose predicate-track bits dominate an existing one.
TrackNfa saturate(const TrackNfa& a, std::uint64_t predicate_tracks);
/// Complements the predicate-track bits of every transition.
TrackNfa flip_predicate_tracks(const TrackNfa& a, std::uint64_t predicate_tracks);
/// Same automaton over a registry whose tracks are a superset of a's,
/// extra tracks unconstrained.
TrackNfa widen(const TrackNfa& a, const TrackRegistry& target);

struct InclusionResult {
    bool included = true;
    Word witness;                     // in L(a) \ L(b) when not included
    std::uint64_t steps = 0;          // macro-states explored
};

/// L(a) subset of L(b), by on-the-fly subset construction over b with
/// antichain pruning.  Witnesses are shortest, then lexicographically least.
InclusionResult antichain_included(const TrackNfa& a, const TrackNfa& b);

std::string to_dot(const TrackNfa& a, const std::string& title = "A");

// ---------------------------------------------------------------------------
// Symbolic DFAs

struct SymDfa {
    std::shared_ptr<Mtbdd> mgr;
    int width = 0;
    std::vector<Mtbdd::Ref> delta;  // leaves are state ids
    std::vector<char> final;
    int init = 0;

    int size() const { return static_cast<int>(delta.size()); }
};

/// Nondeterministic counterpart: leaves index successor sets in `sets`.
struct SymNfa {
    std::shared_ptr<Mtbdd> mgr;
    int width = 0;
    std::vector<Mtbdd::Ref> delta;
    std::vector<std::vector<int>> sets;
    std::vector<char> final;
    std::vector<int> initial;

    int size() const { return static_cast<int>(delta.size()); }
};

namespace sym {

SymDfa universal(const std::shared_ptr<Mtbdd>& mgr, int width);
SymDfa empty(const std::shared_ptr<Mtbdd>& mgr, int width);

/// Complete DFA of `states` states from a transition function on the bits of
/// the given tracks (at most ~10 of them).
SymDfa explicit_dfa(const std::shared_ptr<Mtbdd>& mgr, int width, const std::vector<int>& tracks, int states,
                    const std::vector<int>& finals, const std::function<int(int, std::uint64_t)>& next);

enum class BoolOp { And, Or, Implies, Iff };
SymDfa product(const SymDfa& a, const SymDfa& b, BoolOp op);
SymDfa complement(const SymDfa& a);
/// Existential projection of track v; v is left unconstrained.
SymDfa project(const SymDfa& a, int v);
SymDfa minimize(const SymDfa& a);
bool is_empty(const SymDfa& a);
bool accepts(const SymDfa& a, const Word& w);
/// Moves track i to new_index[i]; must be order preserving on the tracks the
/// automaton depends on.
SymDfa reindex(const SymDfa& a, const std::vector<int>& new_index, int new_width);
std::uint64_t count_transitions(const SymDfa& a);

SymDfa from_nfa(const TrackNfa& a, const std::shared_ptr<Mtbdd>& mgr);
/// Throws AutomatonError when the cube count exceeds `max_transitions`.
TrackNfa to_nfa(const SymDfa& a, const TrackRegistry& reg, std::uint64_t max_transitions = UINT64_MAX);

SymNfa as_nfa(const SymDfa& a);
SymNfa saturate(const SymNfa& a, std::uint64_t predicate_tracks);
SymNfa flip_predicate_tracks(const SymNfa& a, std::uint64_t predicate_tracks);
bool accepts(const SymNfa& a, const Word& w);
SymDfa determinize(const SymNfa& a);
TrackNfa to_nfa(const SymNfa& a, const TrackRegistry& reg, std::uint64_t max_transitions = UINT64_MAX);
std::uint64_t count_transitions(const SymNfa& a);
/// Antichain inclusion L(a) in L(b); same witness contract as the cube version.
InclusionResult included(const SymDfa& a, const SymNfa& b);
/// L(a) included in flip(saturate(L(b))) without building the saturation: a
/// word w is in the right-hand side iff some u in L(b) of the same length has
/// u <= ~w on the predicate tracks and u = w elsewhere.  Letters of `a` are
/// enumerated per path, taking don't-care bits as 1 (the hardest case).
InclusionResult included_in_dual(const SymDfa& a, const SymDfa& b, std::uint64_t predicate_tracks);
/// Membership in flip(saturate(L(b))), same reading as above.
bool accepts_dual(const SymDfa& b, const Word& w, std::uint64_t predicate_tracks);

}  // namespace sym

}  // namespace trapmark
