#pragma once

// WS1S over finite words (the word length is the universe size) to
// automata, and back to positive formulas.

#include <memory>
#include <string>
#include <vector>

#include "trapmark/automata.hh"
#include "trapmark/formula.hh"

namespace trapmark {

struct TraceEntry {
    std::string node;
    int states_before = 0;  // before minimization
    int states_after = 0;
    std::uint64_t transitions = 0;
};

struct CompilationTrace {
    std::vector<TraceEntry> entries;
};

/// Free first-order variables, then predicates, then set variables, each
/// in name order.
TrackRegistry default_layout(const Formula& phi);

struct CompiledFormula {
    SymDfa dfa;
    TrackRegistry registry;
};

/// Compiles phi (flattened first if needed) over `layout`, which must hold
/// every free symbol; extra tracks are left unconstrained.
CompiledFormula compile_symbolic(const Formula& phi, const TrackRegistry& layout,
                                 const std::shared_ptr<Mtbdd>& mgr, CompilationTrace* trace = nullptr);

TrackNfa compile(const Formula& phi, const TrackRegistry& layout, CompilationTrace* trace = nullptr);
TrackNfa compile(const Formula& phi);

/// A formula whose models are the words accepted by the saturation of `a`.
/// Positive in predicates; one set variable per state labels the state
/// reached after each position.
Formula positive_formula_of(const TrackNfa& a);

}  // namespace trapmark
