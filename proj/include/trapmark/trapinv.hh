#pragma once

// Trap invariants of a parametric system and the inclusion-based safety
// check built on them.

#include <optional>
#include <string>
#include <vector>

#include "trapmark/automata.hh"
#include "trapmark/formula.hh"
#include "trapmark/model.hh"
#include "trapmark/wss_compile.hh"

namespace trapmark {

/// One track per state predicate, in state_predicates() order.
TrackRegistry state_layout(const SystemModel& model);

struct InvariantBundle {
    Formula phi;              // Tr(flatten(Init & trap constraint))
    TrackRegistry registry;   // state predicates only
    std::shared_ptr<Mtbdd> mgr;
    SymDfa a_phi;
    // Saturation and its flip; only materialized on request since the
    // checks work on a_phi directly.
    SymNfa a_sat;
    SymNfa a_tilde;           // the invariant is the complement of this language
    CompilationTrace trace;
};

InvariantBundle build_invariant(const SystemModel& model, bool saturate = false);

/// Words of length n outside L(a_tilde), as valuations (bit i*P+k is
/// predicate k at position i).
std::vector<std::uint64_t> invariant_valuations(const InvariantBundle& b, int n);

struct WitnessEntry {
    int index = 0;
    std::string type;
    std::string state;
    bool operator==(const WitnessEntry&) const = default;
};

struct ReportStats {
    int states = 0;             // states of the bad-state automaton
    std::uint64_t transitions = 0;
    std::uint64_t inclusion_steps = 0;
};

struct VerificationReport {
    bool safe = false;
    std::string property;
    int min_size = 2;
    std::vector<WitnessEntry> witness;  // empty when safe
    Word witness_word;
    ReportStats stats;
    std::vector<std::string> assumptions;
    std::vector<std::string> windows;
    bool heuristic_windows = false;
    std::vector<std::pair<std::string, std::string>> reach;  // window name, formula text

    std::string verdict() const { return safe ? "SAFE" : "INCONCLUSIVE"; }
};

/// The sentence describing bad states for a property.
Formula property_formula(const SystemModel& model, const PropertySpec& property);

/// compile(Tr(flatten(D & size >= minSize & bad & extras))) over the state layout.
SymDfa bad_automaton(const SystemModel& model, const std::shared_ptr<Mtbdd>& mgr, const PropertySpec& property,
                     int min_size, const std::vector<Formula>& extras = {});

VerificationReport check_safety(const SystemModel& model, const InvariantBundle& bundle,
                                const PropertySpec& property, int min_size,
                                const std::vector<Formula>& extras = {});

/// Per-index global state read off a word over the state layout.
std::vector<WitnessEntry> decode_witness(const SystemModel& model, const Word& w);

}  // namespace trapmark
