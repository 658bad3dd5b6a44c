#include <random>

#include "doctest.h"
#include "support.hh"
#include "trapmark/automata.hh"

using namespace tm_test;

namespace {

// Every word of length <= max_len (bounded by width * len <= 12).
void for_each_short_word(int width, int max_len, const std::function<void(const Word&)>& f) {
    for (int len = 1; len <= max_len && width * len <= 12; ++len) for_each_word(width, len, f);
}

// Shortest, then lexicographically least word in L(a) \ L(b), by enumeration.
std::optional<Word> reference_difference(const TrackNfa& a, const TrackNfa& b, int max_len) {
    std::optional<Word> out;
    for (int len = 1; len <= max_len && !out; ++len) {
        if (a.registry.width() * len > 12) break;
        for_each_word(a.registry.width(), len, [&](const Word& w) {
            if (!out && nfa_accepts_reference(a, w) && !nfa_accepts_reference(b, w)) out = w;
        });
    }
    return out;
}

}  // namespace

TEST_CASE("language operations agree with direct simulation") {
    std::mt19937 rng(21);
    for (int round = 0; round < 60; ++round) {
        const int width = 1 + static_cast<int>(rng() % 3);
        const TrackNfa a = random_nfa(rng, width, 1 + static_cast<int>(rng() % 4));
        const TrackNfa b = random_nfa(rng, width, 1 + static_cast<int>(rng() % 4));
        const TrackNfa prod = product(a, b), uni = unite(a, b), comp = complement(a);
        const TrackNfa det = determinize(a), mini = minimize(a), tr = trim(a);
        for_each_short_word(width, 4, [&](const Word& w) {
            const bool ia = nfa_accepts_reference(a, w), ib = nfa_accepts_reference(b, w);
            CHECK(accepts(a, w) == ia);
            CHECK(accepts(prod, w) == (ia && ib));
            CHECK(accepts(uni, w) == (ia || ib));
            CHECK(accepts(comp, w) == !ia);
            CHECK(accepts(det, w) == ia);
            CHECK(accepts(mini, w) == ia);
            CHECK(accepts(tr, w) == ia);
        });
        CHECK_FALSE(accepts(comp, Word{}));
    }
}

TEST_CASE("projection is existential over the dropped track") {
    std::mt19937 rng(22);
    for (int round = 0; round < 40; ++round) {
        const TrackNfa a = random_nfa(rng, 3, 1 + static_cast<int>(rng() % 4));
        const TrackNfa p = project_track(a, "r1");
        REQUIRE(p.registry.width() == 2);
        for_each_short_word(2, 3, [&](const Word& w) {
            // remaining tracks r0, r2 sit at bits 0 and 1; try every r1 column
            bool want = false;
            for (std::uint64_t m = 0; m < (std::uint64_t{1} << w.size()) && !want; ++m) {
                Word u(w.size());
                for (std::size_t i = 0; i < u.size(); ++i)
                    u[i] = (w[i] & 1u) | ((w[i] >> 1 & 1u) << 2) | (((m >> i) & 1u) << 1);
                want = nfa_accepts_reference(a, u);
            }
            CHECK(accepts(p, w) == want);
        });
    }
}

TEST_CASE("empty, universal and emptiness") {
    const TrackRegistry reg = predicate_registry(2);
    CHECK(is_empty(empty_nfa(reg)));
    CHECK_FALSE(is_empty(universal_nfa(reg)));
    CHECK_FALSE(accepts(universal_nfa(reg), Word{}));
    CHECK(accepts(universal_nfa(reg), Word{3, 0}));
    std::mt19937 rng(23);
    for (int round = 0; round < 40; ++round) {
        const TrackNfa a = random_nfa(rng, 2, 3, 0.15);
        bool any = false;
        for_each_short_word(2, 6, [&](const Word& w) { any = any || nfa_accepts_reference(a, w); });
        // three states: a shortest word, if any, has length <= 3
        CHECK(is_empty(a) == !any);
    }
}

TEST_CASE("antichain inclusion against enumeration, with least witnesses") {
    std::mt19937 rng(24);
    for (int round = 0; round < 150; ++round) {
        const int width = 1 + static_cast<int>(rng() % 3);
        const TrackNfa a = random_nfa(rng, width, 1 + static_cast<int>(rng() % 4));
        const TrackNfa b = random_nfa(rng, width, 1 + static_cast<int>(rng() % 4));
        const InclusionResult r = antichain_included(a, b);
        // a difference, if any, is found within |a| * 2^|b| <= 64 letters; the
        // cross-check with the complement product covers the long ones.
        const bool diff_empty = is_empty(product(a, complement(b)));
        CHECK(r.included == diff_empty);
        if (!r.included) {
            CHECK(nfa_accepts_reference(a, r.witness));
            CHECK_FALSE(nfa_accepts_reference(b, r.witness));
            if (static_cast<int>(r.witness.size()) * width <= 12) {
                const auto ref = reference_difference(a, b, static_cast<int>(r.witness.size()));
                REQUIRE(ref.has_value());
                CHECK(*ref == r.witness);
            }
        }
    }
}

TEST_CASE("saturation and flip") {
    std::mt19937 rng(25);
    for (int round = 0; round < 40; ++round) {
        const int width = 1 + static_cast<int>(rng() % 3);
        const TrackNfa a = random_nfa(rng, width, 1 + static_cast<int>(rng() % 4));
        const std::uint64_t preds = a.registry.mask_of(TrackKind::Predicate);
        const TrackNfa s = saturate(a, preds);
        const TrackNfa f = flip_predicate_tracks(a, preds);
        const std::uint64_t full = (std::uint64_t{1} << width) - 1;
        for_each_short_word(width, 3, [&](const Word& w) {
            bool up = false;
            for_each_word(width, static_cast<int>(w.size()), [&](const Word& u) {
                up = up || (word_leq(u, w) && nfa_accepts_reference(a, u));
            });
            CHECK(accepts(s, w) == up);
            Word nw = w;
            for (auto& l : nw) l = ~l & full;
            CHECK(accepts(f, w) == nfa_accepts_reference(a, nw));
        });
    }
}

TEST_CASE("symbolic automata agree with the cube automata") {
    auto mgr = std::make_shared<Mtbdd>();
    std::mt19937 rng(26);
    for (int round = 0; round < 60; ++round) {
        const int width = 1 + static_cast<int>(rng() % 3);
        const TrackNfa a = random_nfa(rng, width, 1 + static_cast<int>(rng() % 5));
        const TrackNfa b = random_nfa(rng, width, 1 + static_cast<int>(rng() % 5));
        const std::uint64_t preds = a.registry.mask_of(TrackKind::Predicate);
        const SymDfa sa = sym::from_nfa(a, mgr), sb = sym::from_nfa(b, mgr);
        const SymDfa conj = sym::product(sa, sb, sym::BoolOp::And);
        const SymDfa iff = sym::product(sa, sb, sym::BoolOp::Iff);
        const SymDfa neg = sym::complement(sa), mini = sym::minimize(sa);
        const SymNfa sat = sym::saturate(sym::as_nfa(sb), preds);
        const TrackNfa sat_ref = saturate(b, preds);
        const TrackNfa back = sym::to_nfa(sa, a.registry);
        for_each_short_word(width, 4, [&](const Word& w) {
            const bool ia = nfa_accepts_reference(a, w), ib = nfa_accepts_reference(b, w);
            CHECK(sym::accepts(sa, w) == ia);
            CHECK(sym::accepts(conj, w) == (ia && ib));
            CHECK(sym::accepts(iff, w) == (ia == ib));
            CHECK(sym::accepts(neg, w) == !ia);
            CHECK(sym::accepts(mini, w) == ia);
            CHECK(sym::accepts(sat, w) == accepts(sat_ref, w));
            CHECK(accepts(back, w) == ia);
            CHECK(sym::accepts_dual(sb, w, preds) == accepts(flip_predicate_tracks(sat_ref, preds), w));
        });
        CHECK(sym::is_empty(sa) == is_empty(a));
        CHECK(sym::minimize(mini).size() == mini.size());
        CHECK(minimize(sym::to_nfa(mini, a.registry)).num_states == minimize(a).num_states);
    }
}

TEST_CASE("symbolic projection") {
    auto mgr = std::make_shared<Mtbdd>();
    std::mt19937 rng(27);
    for (int round = 0; round < 30; ++round) {
        const TrackNfa a = random_nfa(rng, 3, 1 + static_cast<int>(rng() % 4));
        const SymDfa p = sym::project(sym::from_nfa(a, mgr), 2);
        const TrackNfa ref = project_track(a, "r2");
        for_each_short_word(3, 3, [&](const Word& w) { CHECK(sym::accepts(p, w) == accepts(ref, w)); });
    }
}

TEST_CASE("dual inclusion without saturation matches the saturated check") {
    auto mgr = std::make_shared<Mtbdd>();
    std::mt19937 rng(28);
    int not_included = 0;
    for (int round = 0; round < 200; ++round) {
        const int width = 1 + static_cast<int>(rng() % 3);
        const TrackNfa a = random_nfa(rng, width, 1 + static_cast<int>(rng() % 4));
        const TrackNfa b = random_nfa(rng, width, 1 + static_cast<int>(rng() % 4));
        const std::uint64_t preds = a.registry.mask_of(TrackKind::Predicate);
        const TrackNfa rhs = flip_predicate_tracks(saturate(b, preds), preds);
        const InclusionResult ref = antichain_included(a, rhs);
        const InclusionResult got =
            sym::included_in_dual(sym::from_nfa(a, mgr), sym::from_nfa(b, mgr), preds);
        CHECK(got.included == ref.included);
        if (!got.included) {
            ++not_included;
            CHECK(nfa_accepts_reference(a, got.witness));
            CHECK_FALSE(accepts(rhs, got.witness));
            CHECK(got.witness.size() == ref.witness.size());
        }
    }
    CHECK(not_included > 20);
}

TEST_CASE("structure encoding round trip") {
    TrackRegistry reg;
    reg.add("x", TrackKind::FirstOrder);
    reg.add("p", TrackKind::Predicate);
    reg.add("X", TrackKind::SetVar);
    Structure s;
    s.n = 3;
    s.vars["x"] = 2;
    s.preds["p"] = 0b101;
    s.sets["X"] = 0b010;
    const Word w = encode_structure(s, reg);
    REQUIRE(w.size() == 3);
    const Structure t = decode_word(w, reg);
    CHECK(t.n == 3);
    CHECK(t.vars.at("x") == 2);
    CHECK(t.preds.at("p") == 0b101u);
    CHECK(t.sets.at("X") == 0b010u);
    // track 0 (bit 0) is the most significant position
    CHECK(letter_less(0b110, 0b001));
    CHECK_FALSE(letter_less(0b001, 0b110));
}
