#pragma once

// Ashcroft invariants: windows over a few typed constants, the ground view
// of the interaction through a window, the reachable markings of the
// resulting fixed net, and the strengthened safety check.

#include <stdexcept>
#include <string>
#include <vector>

#include "trapmark/formula.hh"
#include "trapmark/model.hh"
#include "trapmark/petri.hh"
#include "trapmark/trapinv.hh"

namespace trapmark {

class AshcroftError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One way of placing the port atoms of a clause: atom j goes to window
/// constant placement[j], or stays outside the window when it is empty.
struct InstanceCheck {
    int clause = 0;
    std::vector<std::string> placement;
    Formula instance;   // exists x. guard & placement equalities/disequalities
    bool entailed = false;  // psi |= instance
    bool refuted = false;   // psi |= !instance
};

struct WindowCheck {
    bool non_overlapping = true;
    std::vector<InstanceCheck> table;
    std::string offending;  // first undecided instance, rendered
};

WindowCheck check_window(const SystemModel& model, const WindowSpec& w);

struct GroundAtom {
    std::string port;
    std::string constant;
    auto operator<=>(const GroundAtom&) const = default;
};

struct View {
    std::vector<std::vector<GroundAtom>> disjuncts;  // each sorted, no duplicates
};

View build_view(const SystemModel& model, const WindowSpec& w);
Formula view_formula(const View& v);

/// Places s(c) for every constant c and state s of type(c); one transition
/// per view disjunct.
MarkedPetriNet view_net(const SystemModel& model, const WindowSpec& w, const View& v);

/// Disjunction over reachable markings of the view net, positive literals only.
Formula view_reach_formula(const SystemModel& model, const WindowSpec& w, const View& v, const Caps& caps = {});

/// forall x. psi(x) -> reach(x), constants replaced by fresh variables.
Formula ashcroft_invariant(const WindowSpec& w, const Formula& reach);

/// Replaces constants by variables according to `names`.
Formula substitute_constants(const Formula& f, const std::map<std::string, std::string>& names);

/// Heuristic adjacent-triple windows (c1: A, c2: B, c3: A) for every clause
/// in which a component of type A interacts with a B at the next index.
std::vector<WindowSpec> auto_windows(const SystemModel& model);

VerificationReport strengthen_and_check(const SystemModel& model, const InvariantBundle& bundle,
                                        const PropertySpec& property, const std::vector<WindowSpec>& windows,
                                        int min_size, const Caps& caps = {});

}  // namespace trapmark
