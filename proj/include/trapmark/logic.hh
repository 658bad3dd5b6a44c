#pragma once

// Formula-to-formula transformations: flattening, the WS1S embedding of the
// circular successor, negation normal form, dualization, and the formulas a
// system gives rise to (trap constraint, deadlock, initial states,
// decomposability).

#include <stdexcept>
#include <string>

#include "trapmark/formula.hh"
#include "trapmark/model.hh"

namespace trapmark {

class LogicError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Name of the free variable that stands for constant `c` after flattening.
std::string constant_variable(const std::string& c);

/// Successor only inside succ(x) = y atoms (either orientation), no
/// constants, and no successor applied to zero.
bool is_flat(const Formula& f);

/// Equivalent flat formula; constants become free variables named by
/// constant_variable().
Formula flatten(const Formula& f);

/// Tr(phi) = exists _xi. (forall y. y <= _xi) & tr(phi).  Throws LogicError
/// unless phi is flat.
Formula translate_tr(const Formula& phi);

/// Negations on atoms only; no implications or biconditionals.
Formula to_nnf(const Formula& f);

/// The dual formula: predicate literals kept, every other literal negated,
/// and/or and exists/forall swapped.
Formula dualize(const Formula& f);

/// Conjunction/disjunction that fold away true and false.
Formula and_simplified(const Formula& a, const Formula& b);
Formula or_simplified(const Formula& a, const Formula& b);

Formula build_trap_constraint(const SystemModel& model);
Formula build_deadlock_formula(const SystemModel& model);
Formula build_init_formula(const SystemModel& model);
Formula build_decomposability_formula(const SystemModel& model);
/// At least m distinct positions: exists x1 < ... < xm.
Formula build_min_size_formula(int m);

}  // namespace trapmark
