#include "doctest.h"
#include "support.hh"
#include "trapmark/ashcroft.hh"
#include "trapmark/logic.hh"
#include "trapmark/trapinv.hh"

using namespace tm_test;

namespace {

const WindowSpec& window(const SystemModel& m, const std::string& name) {
    for (const auto& w : m.windows)
        if (w.name == name) return w;
    throw std::runtime_error("no window " + name);
}

std::set<std::string> atoms_of(const std::vector<GroundAtom>& d) {
    std::set<std::string> out;
    for (const auto& a : d) out.insert(a.port + "(" + a.constant + ")");
    return out;
}

GroundDnf view_dnf(const View& v) {
    GroundDnf out;
    for (const auto& d : v.disjuncts) out.insert(atoms_of(d));
    return out;
}

// Every reachable marking of the size-n net satisfies the window invariant.
void check_inductive(const SystemModel& m, const WindowSpec& w, int n) {
    const View v = build_view(m, w);
    const Formula ai = ashcroft_invariant(w, view_reach_formula(m, w, v));
    const MarkedPetriNet net = instantiate_net(m, n);
    for (Marking mk : reachable_markings(net).markings) CHECK(eval_ils(ai, marking_structure(net, mk)));
}

}  // namespace

TEST_CASE("window checks") {
    const SystemModel alt = load_model("alt_philosophers.pbip");
    const WindowCheck w1 = check_window(alt, window(alt, "w1"));
    CHECK(w1.non_overlapping);
    CHECK(w1.offending.empty());
    REQUIRE_FALSE(w1.table.empty());
    // instances placing every atom outside the window are exempt
    for (const auto& row : w1.table) {
        const bool outside = std::all_of(row.placement.begin(), row.placement.end(),
                                         [](const std::string& c) { return c.empty(); });
        if (!outside) CHECK(row.entailed != row.refuted);
    }
    // psi entails that the get-right of c1 reaches the fork c2
    bool found = false;
    for (const auto& row : w1.table)
        if (row.entailed && row.placement == std::vector<std::string>{"c1", "c2"}) found = true;
    CHECK(found);

    const SystemModel vac = parse_or_throw(R"(
component A { states s, u init s; port a: s -> u; }
component B { states r init r; port b: r -> r; }
interaction exists x. exists y. x = y & a(x) & b(y);
window "never" (c1: A, c2: B) where c1 < c2 & c2 < c1;
window "loose" (c1: A, c2: B) where c1 <= c2;
window "apart" (c1: A, c2: B) where c1 < c2;
)");
    // psi = false entails every instance: vacuously non-overlapping
    CHECK(check_window(vac, window(vac, "never")).non_overlapping);
    // c1 < c2 refutes the joint placement; each side alone is a partial interaction
    const View apart = build_view(vac, window(vac, "apart"));
    const GroundDnf want_apart{{"a(c1)"}, {"b(c2)"}};
    CHECK(view_dnf(apart) == want_apart);
    const WindowCheck loose = check_window(vac, window(vac, "loose"));
    CHECK_FALSE(loose.non_overlapping);
    CHECK_FALSE(loose.offending.empty());
    CHECK_THROWS_AS(build_view(vac, window(vac, "loose")), AshcroftError);

    CHECK(ground_dnf(view_reach_formula(vac, window(vac, "apart"), apart)) ==
          GroundDnf{{"A.s(c1)", "B.r(c2)"}, {"A.u(c1)", "B.r(c2)"}});

    // no interaction touches the window: empty view, reach is the initial marking
    const SystemModel idle = parse_or_throw(R"(
component A { states s, u init s; port a: s -> u; }
component B { states r init r; port b: r -> r; }
interaction exists x. a(x);
window "b" (c1: B) where c1 = c1;
)");
    const WindowSpec& bw = window(idle, "b");
    const View empty = build_view(idle, bw);
    CHECK(empty.disjuncts.empty());
    CHECK(ground_dnf(view_reach_formula(idle, bw, empty)) == GroundDnf{{"B.r(c1)"}});
}

TEST_CASE("view of the alternating philosophers window") {
    const SystemModel alt = load_model("alt_philosophers.pbip");
    const WindowSpec& w = window(alt, "w1");
    const View v = build_view(alt, w);
    // one p(c1) & l(c2) and one p(c3) & l(c2): the release of c1 and of c3
    // share fork c2 but are separate interactions
    const GroundDnf want{{"gr(c1)", "g(c2)"}, {"p(c1)", "l(c2)"}, {"gl(c3)", "g(c2)"},
                         {"gl(c1)"},          {"gr(c3)"},         {"p(c3)", "l(c2)"}};
    CHECK(view_dnf(v) == want);

    const Formula reach = view_reach_formula(alt, w, v);
    const GroundDnf want_reach{
        {"Phil_lr.w(c1)", "Fork.f(c2)", "Phil_lr.w(c3)"}, {"Phil_lr.h(c1)", "Fork.f(c2)", "Phil_lr.w(c3)"},
        {"Phil_lr.w(c1)", "Fork.b(c2)", "Phil_lr.h(c3)"}, {"Phil_lr.e(c1)", "Fork.b(c2)", "Phil_lr.w(c3)"},
        {"Phil_lr.h(c1)", "Fork.b(c2)", "Phil_lr.h(c3)"}, {"Phil_lr.w(c1)", "Fork.b(c2)", "Phil_lr.e(c3)"},
        {"Phil_lr.h(c1)", "Fork.b(c2)", "Phil_lr.e(c3)"}};
    CHECK(ground_dnf(reach) == want_reach);

    // the window net: one place per constant and state, one transition per disjunct
    const MarkedPetriNet net = view_net(alt, w, v);
    CHECK(net.num_places() == 8);
    CHECK(net.transitions.size() == 6);
}

TEST_CASE("window invariants hold on every reachable marking") {
    const SystemModel alt = load_model("alt_philosophers.pbip");
    for (const auto& w : alt.windows) {
        CAPTURE(w.name);
        for (int n = 2; n <= 4; ++n) check_inductive(alt, w, n);
    }
    for (const auto& w : auto_windows(alt)) {
        CAPTURE(w.name);
        CHECK(check_window(alt, w).non_overlapping);
        for (int n = 2; n <= 3; ++n) check_inductive(alt, w, n);
    }
    const SystemModel philo = load_model("philosophers.pbip");
    const auto aw = auto_windows(philo);
    CHECK_FALSE(aw.empty());
    for (const auto& w : aw)
        for (int n = 2; n <= 4; ++n) check_inductive(philo, w, n);
}

TEST_CASE("strengthening") {
    const SystemModel alt = load_model("alt_philosophers.pbip");
    const InvariantBundle b = build_invariant(alt);
    const VerificationReport both = strengthen_and_check(alt, b, PropertySpec{}, alt.windows, 2);
    CHECK(both.safe);
    CHECK(both.windows == std::vector<std::string>{"w1", "wrap"});
    // w1 alone leaves a spurious deadlock around fork 0
    const VerificationReport only = strengthen_and_check(alt, b, PropertySpec{}, {window(alt, "w1")}, 2);
    CHECK_FALSE(only.safe);
    bool fork0_free = false;
    for (const auto& e : only.witness) fork0_free = fork0_free || (e.index == 0 && e.type == "Fork");
    CHECK(fork0_free);
    CHECK(strengthen_and_check(alt, b, PropertySpec{}, auto_windows(alt), 2).safe);

    // never turns SAFE into INCONCLUSIVE
    const SystemModel philo = load_model("philosophers.pbip");
    const InvariantBundle pb = build_invariant(philo);
    CHECK(strengthen_and_check(philo, pb, PropertySpec{}, auto_windows(philo), 2).safe);
}
