#include <deque>

#include "doctest.h"
#include "support.hh"
#include "trapmark/logic.hh"
#include "trapmark/petri.hh"

using namespace tm_test;

namespace {

// Breadth-first reachability straight off the transition list.
std::set<Marking> reach_reference(const MarkedPetriNet& net) {
    std::set<Marking> seen{net.initial};
    std::deque<Marking> todo{net.initial};
    while (!todo.empty()) {
        const Marking m = todo.front();
        todo.pop_front();
        for (const auto& t : net.transitions)
            if ((m & t.pre) == t.pre) {
                const Marking next = (m & ~t.pre) | t.post;
                if (seen.insert(next).second) todo.push_back(next);
            }
    }
    return seen;
}

}  // namespace

TEST_CASE("philosophers net at n = 2") {
    const SystemModel m = load_model("philosophers.pbip");
    const MarkedPetriNet net = instantiate_net(m, 2);
    CHECK(net.num_places() == 8);
    CHECK(net.transitions.size() == 4);
    CHECK(net.initial == place_set(net, {"Fork.f@0", "Fork.f@1", "Philosopher.w@0", "Philosopher.w@1"}));
    // philosopher 1 eats with forks 1 and 0
    const PlaceSet pre = place_set(net, {"Philosopher.w@1", "Fork.f@1", "Fork.f@0"});
    const PlaceSet post = place_set(net, {"Philosopher.e@1", "Fork.b@1", "Fork.b@0"});
    bool found = false;
    for (const auto& t : net.transitions) found = found || (t.pre == pre && t.post == post);
    CHECK(found);
    CHECK(reachable_markings(net).markings.size() == 3);
    CHECK(enumerate_min_imts(net).size() == 10);
}

TEST_CASE("minimal models: clause construction against brute force") {
    for (const char* name : {"philosophers.pbip", "alt_philosophers.pbip", "exclusive_tasks.pbip",
                             "philosophers3.pbip"}) {
        CAPTURE(name);
        const SystemModel m = load_model(name);
        for (int n = 1; n <= 3; ++n) {
            CAPTURE(n);
            // brute force is exponential in ports * n
            int ports = 0;
            for (const auto& t : m.types) ports += static_cast<int>(t.ports.size());
            if (ports * n > 20) continue;
            auto a = minimal_models(m, n), b = minimal_models_bruteforce(m, n);
            std::sort(a.begin(), a.end());
            std::sort(b.begin(), b.end());
            CHECK(a == b);
        }
    }
}

TEST_CASE("nets: reachability, traps and minimal IMTs against references") {
    for (const char* name : {"philosophers.pbip", "alt_philosophers.pbip", "exclusive_tasks.pbip",
                             "philosophers3.pbip", "szymanski.pbip"}) {
        CAPTURE(name);
        const SystemModel m = load_model(name);
        for (int n = 1; n <= 4; ++n) {
            const MarkedPetriNet net = instantiate_net(m, n);
            if (net.num_places() > 20) break;
            CAPTURE(n);
            const auto reach = reachable_markings(net);
            CHECK(std::set<Marking>(reach.markings.begin(), reach.markings.end()) == reach_reference(net));
            CHECK(reach.markings.front() == net.initial);

            auto fast = enumerate_min_imts(net);
            std::sort(fast.begin(), fast.end());
            const auto ref = min_imts_reference(net);
            CHECK(fast == ref);
            auto brute = enumerate_min_imts_bruteforce(net);
            std::sort(brute.begin(), brute.end());
            CHECK(brute == ref);

            // every reachable marking marks every initially marked trap
            for (Marking r : reach.markings) CHECK(marks_all(ref, r));

            const Prop trap = net_trap_constraint(net);
            for (std::uint64_t w = 0; w < (std::uint64_t{1} << net.num_places()); w += 1 + (w % 7)) {
                CHECK(trap.eval(w) == is_trap_reference(net, w));
                CHECK(is_trap(net, w) == is_trap_reference(net, w));
                const PlaceSet mt = maximal_trap(net, w);
                CHECK((mt & ~w) == 0);
                CHECK(is_trap_reference(net, mt));
            }
        }
    }
}

TEST_CASE("firing keeps nets one-safe or throws") {
    MarkedPetriNet net;
    net.places = {"a", "b"};
    net.initial = 0b11;
    PnTransition t{0b01, 0b10, "t"};
    net.transitions.push_back(t);
    CHECK(enabled(t, 0b01));
    CHECK(fire(t, 0b01) == 0b10);
    CHECK_THROWS_AS(fire(t, 0b11), PetriError);
    CHECK_FALSE(enabled(t, 0b10));
}

TEST_CASE("caps bound the work") {
    Caps caps;
    caps.apply("net_size=2,markings=2");
    CHECK(caps.net_size == 2);
    const SystemModel m = load_model("philosophers.pbip");
    CHECK_THROWS_AS(instantiate_net(m, 3, caps), PetriError);
    CHECK_THROWS_AS(reachable_markings(instantiate_net(m, 2, caps), caps), PetriError);
    CHECK_THROWS(caps.apply("nonsense=1"));
    CHECK_THROWS(caps.apply("markings=x"));
}

TEST_CASE("booleanization examples") {
    const std::vector<std::string> preds{"p"};
    FormulaParse f = parse_formula("exists x. p(x) & p(succ(x))");
    REQUIRE(f.formula);
    // n = 2 under looping successor: p(0)&p(1) | p(1)&p(1)
    const Prop b = booleanize(*f.formula, 2, preds);
    CHECK(b.eval(0b10));
    CHECK_FALSE(b.eval(0b01));
    CHECK(b.eval(0b11));
    FormulaParse g = parse_formula("forall2 X. exists x. X(x) | p(x)");
    REQUIRE(g.formula);
    const Prop c = booleanize(*g.formula, 2, preds);
    CHECK(c.eval(0b01));
    CHECK_FALSE(c.eval(0b00));
    // dual and positive forms
    const Prop d = prop_dual(b);
    for (std::uint64_t v = 0; v < 4; ++v) CHECK(d.eval(v) == !b.eval(~v & 3u));
    const Prop pos = prop_pos(Prop::conj({Prop::var(0), Prop::negate(Prop::var(1))}));
    CHECK(pos.eval(0b01));
    CHECK(pos.eval(0b11));
    CHECK_FALSE(pos.eval(0b10));
    const auto dnf = prop_dnf(Prop::disj({Prop::var(0), Prop::conj({Prop::var(1), Prop::negate(Prop::var(0))})}));
    CHECK_FALSE(dnf.empty());
}
