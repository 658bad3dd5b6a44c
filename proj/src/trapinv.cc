#include "trapmark/trapinv.hh"

#include <algorithm>

#include "trapmark/logic.hh"

namespace trapmark {

TrackRegistry state_layout(const SystemModel& model) {
    TrackRegistry reg;
    for (const auto& p : state_predicates(model)) reg.add(p, TrackKind::Predicate);
    return reg;
}

namespace {

Formula to_automaton_input(const Formula& f) { return translate_tr(flatten(f)); }

}  // namespace

InvariantBundle build_invariant(const SystemModel& model, bool saturate) {
    InvariantBundle b;
    b.registry = state_layout(model);
    b.phi = to_automaton_input(Formula::conj(build_init_formula(model), build_trap_constraint(model)));
    b.mgr = std::make_shared<Mtbdd>();
    b.a_phi = compile_symbolic(b.phi, b.registry, b.mgr, &b.trace).dfa;
    if (!saturate) return b;
    const std::uint64_t preds = b.registry.mask_of(TrackKind::Predicate);
    b.a_sat = sym::saturate(sym::as_nfa(b.a_phi), preds);
    b.a_tilde = sym::flip_predicate_tracks(b.a_sat, preds);
    return b;
}

std::vector<std::uint64_t> invariant_valuations(const InvariantBundle& b, int n) {
    const int P = b.registry.width();
    if (P * n > 24) throw AutomatonError("too many valuations to enumerate");
    const std::uint64_t preds = b.registry.mask_of(TrackKind::Predicate);
    std::vector<std::uint64_t> out;
    for (std::uint64_t v = 0; v < (std::uint64_t{1} << (P * n)); ++v) {
        Word w(n);
        for (int i = 0; i < n; ++i) w[i] = (v >> (i * P)) & ((std::uint64_t{1} << P) - 1);
        if (!sym::accepts_dual(b.a_phi, w, preds)) out.push_back(v);
    }
    return out;
}

Formula property_formula(const SystemModel& model, const PropertySpec& property) {
    if (property.kind == PropertyKind::Deadlock) return build_deadlock_formula(model);
    if (!property.bad_states) throw LogicError("property '" + property.name + "' has no bad-state formula");
    const auto preds = state_predicates(model);
    for (const auto& name : free_symbols(*property.bad_states).preds)
        if (std::find(preds.begin(), preds.end(), name) == preds.end())
            throw LogicError("property '" + property.name + "' mentions unknown state predicate '" + name + "'");
    if (!is_sentence(*property.bad_states))
        throw LogicError("bad-state formula of '" + property.name + "' is not a sentence");
    return *property.bad_states;
}

SymDfa bad_automaton(const SystemModel& model, const std::shared_ptr<Mtbdd>& mgr, const PropertySpec& property,
                     int min_size, const std::vector<Formula>& extras) {
    std::vector<Formula> parts{build_decomposability_formula(model), build_min_size_formula(min_size),
                               property_formula(model, property)};
    parts.insert(parts.end(), extras.begin(), extras.end());
    return compile_symbolic(to_automaton_input(Formula::conj_all(parts)), state_layout(model), mgr).dfa;
}

std::vector<WitnessEntry> decode_witness(const SystemModel& model, const Word& w) {
    const auto layout = state_layout(model);
    std::vector<WitnessEntry> out;
    for (int i = 0; i < static_cast<int>(w.size()); ++i)
        for (const auto& t : model.types)
            for (const auto& s : t.states) {
                const int k = *layout.index_of(qualified_state(t.name, s));
                if ((w[i] >> k) & 1u) out.push_back({i, t.name, s});
            }
    return out;
}

VerificationReport check_safety(const SystemModel& model, const InvariantBundle& bundle,
                                const PropertySpec& property, int min_size, const std::vector<Formula>& extras) {
    VerificationReport r;
    r.property = property.name;
    r.min_size = min_size;
    r.assumptions.push_back("verdicts hold for every system size n >= " + std::to_string(std::max(min_size, 1)));
    r.assumptions.push_back("an interaction with broadcast receivers is enabled only if every selected receiver is enabled");
    r.assumptions.push_back("INCONCLUSIVE means the invariant intersects the bad states; it is not a proof of unsafety");
    const SymDfa bad = bad_automaton(model, bundle.mgr, property, min_size, extras);
    r.stats.states = bad.size();
    r.stats.transitions = sym::count_transitions(bad);
    const InclusionResult inc = sym::included_in_dual(bad, bundle.a_phi, bundle.registry.mask_of(TrackKind::Predicate));
    r.stats.inclusion_steps = inc.steps;
    r.safe = inc.included;
    if (!r.safe) {
        r.witness_word = inc.witness;
        r.witness = decode_witness(model, inc.witness);
    }
    return r;
}

}  // namespace trapmark
