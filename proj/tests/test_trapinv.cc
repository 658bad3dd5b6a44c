#include "doctest.h"
#include "support.hh"
#include "trapmark/ashcroft.hh"
#include "trapmark/logic.hh"
#include "trapmark/trapinv.hh"
#include "trapmark/wss_compile.hh"

using namespace tm_test;

namespace {

PropertySpec bad(const std::string& name, const Formula& f) {
    PropertySpec p;
    p.kind = PropertyKind::BadStates;
    p.name = name;
    p.bad_states = f;
    return p;
}

}  // namespace

TEST_CASE("automaton-side invariant equals the net trap invariant") {
    for (const char* name : {"philosophers.pbip", "exclusive_tasks.pbip", "alt_philosophers.pbip"}) {
        CAPTURE(name);
        const SystemModel m = load_model(name);
        const InvariantBundle b = build_invariant(m);
        for (int n = 1; n <= 3; ++n) {
            const MarkedPetriNet net = instantiate_net(m, n);
            if (net.num_places() > 18) break;
            CAPTURE(n);
            auto got = invariant_valuations(b, n);
            std::sort(got.begin(), got.end());
            CHECK(got == trap_invariant_reference(net));
        }
    }
}

TEST_CASE("self-loops: each {s_i} is an initially marked trap") {
    const SystemModel m = parse_or_throw(R"(
component A { states s, u init s; port a: s -> s; port b: u -> u; }
interaction exists x. a(x) | b(x);
)");
    const InvariantBundle b = build_invariant(m);
    // P = 2 (s, u): bit 2i is s at index i; s must be marked at every index
    for (int n = 1; n <= 3; ++n) {
        std::vector<std::uint64_t> want;
        for (std::uint64_t v = 0; v < (std::uint64_t{1} << (2 * n)); ++v) {
            bool every_s = true;
            for (int i = 0; i < n; ++i) every_s = every_s && ((v >> (2 * i)) & 1u);
            if (every_s) want.push_back(v);
        }
        auto got = invariant_valuations(b, n);
        std::sort(got.begin(), got.end());
        CHECK(got == want);
    }
}

TEST_CASE("philosophers n = 2: valuations missing trap {w0, b0, w1} are excluded") {
    const SystemModel m = load_model("philosophers.pbip");
    const InvariantBundle b = build_invariant(m);
    const MarkedPetriNet net = instantiate_net(m, 2);
    const PlaceSet trap = place_set(net, {"Philosopher.w@0", "Fork.b@0", "Philosopher.w@1"});
    CHECK(is_trap_reference(net, trap));
    const auto inv = invariant_valuations(b, 2);
    for (auto v : inv) CHECK((v & trap) != 0);
    // marks every other minimal IMT but not this one
    const PlaceSet v =
        place_set(net, {"Fork.f@0", "Philosopher.e@0", "Fork.f@1", "Fork.b@1", "Philosopher.e@1"});
    for (auto t : min_imts_reference(net))
        if (t != trap) CHECK((v & t) != 0);
    CHECK(std::find(inv.begin(), inv.end(), v) == inv.end());
}

TEST_CASE("safety verdicts") {
    const SystemModel philo = load_model("philosophers.pbip");
    const InvariantBundle pb = build_invariant(philo);
    const VerificationReport safe = check_safety(philo, pb, PropertySpec{}, 2);
    CHECK(safe.safe);
    CHECK(safe.verdict() == "SAFE");
    CHECK(safe.witness.empty());
    CHECK_FALSE(safe.assumptions.empty());

    // an empty bad language is always safe
    const VerificationReport none = check_safety(philo, pb, bad("nothing", Formula::falsity()), 2);
    CHECK(none.safe);

    // something reachable is never proven safe
    FormulaParse eating = parse_formula("exists x. e(x)", &philo);
    REQUIRE(eating.formula);
    const VerificationReport reach = check_safety(philo, pb, bad("eating", *eating.formula), 2);
    CHECK_FALSE(reach.safe);

    const SystemModel alt = load_model("alt_philosophers.pbip");
    const InvariantBundle ab = build_invariant(alt);
    const VerificationReport r = check_safety(alt, ab, PropertySpec{}, 2);
    CHECK_FALSE(r.safe);
    CHECK(r.verdict() == "INCONCLUSIVE");
    REQUIRE_FALSE(r.witness_word.empty());
    // witness in Bad and outside the flipped saturation
    const SymDfa badA = bad_automaton(alt, ab.mgr, PropertySpec{}, 2);
    CHECK(sym::accepts(badA, r.witness_word));
    CHECK_FALSE(sym::accepts_dual(ab.a_phi, r.witness_word, ab.registry.mask_of(TrackKind::Predicate)));
    // and it decodes to one state per type and index
    const auto entries = decode_witness(alt, r.witness_word);
    CHECK(entries.size() == 3 * r.witness_word.size());
    CHECK(entries == r.witness);
}

TEST_CASE("the witness is a deadlocked, trap-consistent marking of the fixed-size net") {
    const SystemModel alt = load_model("alt_philosophers.pbip");
    const InvariantBundle ab = build_invariant(alt);
    const VerificationReport r = check_safety(alt, ab, PropertySpec{}, 2);
    REQUIRE_FALSE(r.safe);
    const int n = static_cast<int>(r.witness_word.size());
    const MarkedPetriNet net = instantiate_net(alt, n);
    Marking mk = 0;
    for (const auto& e : r.witness) mk |= std::uint64_t{1} << place_id(net, e.type + "." + e.state + "@" + std::to_string(e.index));
    for (const auto& t : net.transitions) CHECK_FALSE(enabled(t, mk));
    // marks every initially marked trap iff the largest trap avoiding it is unmarked initially
    PlaceSet w = ((std::uint64_t{1} << net.num_places()) - 1) & ~mk;
    for (bool changed = true; changed;) {
        changed = false;
        for (const auto& t : net.transitions)
            if ((t.pre & w) && !(t.post & w)) {
                w &= ~t.pre;
                changed = true;
            }
    }
    CHECK((w & net.initial) == 0);
    const auto reach = reachable_markings(net).markings;
    CHECK(std::find(reach.begin(), reach.end(), mk) == reach.end());
}

TEST_CASE("saturated automata are optional and agree with the direct check") {
    const SystemModel m = load_model("philosophers.pbip");
    const InvariantBundle lazy = build_invariant(m);
    CHECK(lazy.a_sat.size() == 0);
    const InvariantBundle full = build_invariant(m, true);
    REQUIRE(full.a_tilde.size() > 0);
    const std::uint64_t preds = full.registry.mask_of(TrackKind::Predicate);
    for (int n = 1; n <= 3; ++n)
        for_each_word(full.registry.width(), n, [&](const Word& w) {
            CHECK(sym::accepts(full.a_tilde, w) == sym::accepts_dual(full.a_phi, w, preds));
        });
}

TEST_CASE("minimum size is honored") {
    const SystemModel m = load_model("philosophers.pbip");
    const InvariantBundle b = build_invariant(m);
    FormulaParse lone = parse_formula("forall x. forall y. x = y", &m);
    REQUIRE(lone.formula);
    CHECK(check_safety(m, b, bad("single", *lone.formula), 2).safe);
    CHECK_FALSE(check_safety(m, b, bad("single", *lone.formula), 1).safe);
}
