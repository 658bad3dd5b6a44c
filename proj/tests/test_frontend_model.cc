#include "doctest.h"
#include "support.hh"
#include "trapmark/logic.hh"

using namespace tm_test;

namespace {

const char* kPhilosophers = R"(
component Fork { states f, b init f; port t: f -> b; port l: b -> f; }
component Philosopher { states w, e init w; port g: w -> e; port p: e -> w; }
interaction exists i. g(i) & t(i) & t(succ(i)) | p(i) & l(i) & l(succ(i));
property deadlock;
)";

bool has_rule(const std::vector<Diagnostic>& ds, const std::string& rule) {
    for (const auto& d : ds)
        if (d.rule == rule) return true;
    return false;
}

std::vector<Diagnostic> diagnostics_of(const std::string& text) {
    ParseResult pr = parse_model(text, "t.pbip");
    if (!pr.ok()) return pr.diagnostics;
    auto ds = validate_system(*pr.model);
    ds.insert(ds.end(), pr.diagnostics.begin(), pr.diagnostics.end());
    return ds;
}

}  // namespace

TEST_CASE("philosophers parse into two types and the expected interaction") {
    const SystemModel m = parse_or_throw(kPhilosophers);
    REQUIRE(m.types.size() == 2);
    CHECK(m.types[0].name == "Fork");
    CHECK(m.types[1].initial == "w");
    CHECK(validate_system(m).empty());
    // Gamma_philo evaluated on g = {0}, t = {0, 1} at n = 2
    Structure s;
    s.n = 2;
    s.preds = {{"g", 0b01}, {"t", 0b11}, {"p", 0}, {"l", 0}};
    CHECK(eval_ils(m.interaction, s));
    s.preds["t"] = 0b01;
    CHECK_FALSE(eval_ils(m.interaction, s));
}

TEST_CASE("port_pre_post") {
    const SystemModel m = parse_or_throw(kPhilosophers);
    CHECK(*port_pre_post(m, "g") == std::make_pair(std::string("Philosopher.w"), std::string("Philosopher.e")));
    CHECK(*port_pre_post(m, "t") == std::make_pair(std::string("Fork.f"), std::string("Fork.b")));
    CHECK_THROWS_AS(port_pre_post(m, "q"), ModelError);
    const SystemModel norule = parse_or_throw(R"(
component A { states s init s; port a: s -> s; port idle; }
interaction exists x. a(x) | idle(x);
)");
    CHECK_FALSE(port_pre_post(norule, "idle").has_value());
}

TEST_CASE("pretty_print round trips") {
    for (const char* name : {"philosophers.pbip", "alt_philosophers.pbip", "exclusive_tasks.pbip",
                             "philosophers3.pbip", "szymanski.pbip", "szymanski_flags.pbip"}) {
        CAPTURE(name);
        const SystemModel m = load_model(name);
        const std::string text = pretty_print(m);
        ParseResult again = parse_model(text);
        REQUIRE(again.ok());
        CHECK(structurally_equal(m, *again.model));
        CHECK(pretty_print(*again.model) == text);
    }
    const SystemModel even = parse_or_throw(R"(
component A { states s, u init s; port a: s -> u; port b: u -> s; }
interaction exists x. even(x) & a(x) | !even(x) & b(x) | exists y. mod(y, 3, 1) & a(y);
)");
    ParseResult again = parse_model(pretty_print(even));
    REQUIRE(again.ok());
    CHECK(structurally_equal(even, *again.model));
}

TEST_CASE("syntax errors are located") {
    ParseResult empty = parse_model("", "e.pbip");
    REQUIRE_FALSE(empty.ok());
    REQUIRE(empty.diagnostics.size() == 1);
    CHECK(empty.diagnostics[0].message.find("expected component declaration") != std::string::npos);

    ParseResult paren = parse_model(R"(component A { states s init s; port a: s -> s; }
interaction exists x. (a(x) & a(x);
)",
                                    "p.pbip");
    REQUIRE_FALSE(paren.ok());
    REQUIRE(paren.diagnostics.size() == 1);
    CHECK(paren.diagnostics[0].span.line == 2);
    CHECK(paren.diagnostics[0].span.file == "p.pbip");
}

TEST_CASE("validation rules") {
    CHECK(has_rule(diagnostics_of(R"(
component A { states s, u init s; port a: s -> u; port b: u -> s; }
interaction exists x. a(x) & succ(x) <= succ(succ(x));
)"),
                   "same-variable comparison"));
    CHECK(has_rule(diagnostics_of(R"(
component Philosopher { states w, e init w; port g: w -> e; port p: e -> w; }
interaction exists x1. exists x2. g(x1) & p(x2);
)"),
                   "two ports of one component type in one clause"));
    // distinct by the guard: allowed
    CHECK(diagnostics_of(R"(
component Philosopher { states w, e init w; port g: w -> e; port p: e -> w; }
interaction exists x1. exists x2. x1 < x2 & g(x1) & p(x2);
)")
              .empty());
    CHECK(has_rule(diagnostics_of(R"(
component A { states s init u; port a: s -> s; }
interaction exists x. a(x);
)"),
                   "initial state undeclared"));
    CHECK(has_rule(diagnostics_of(R"(
component A { states s init s; port a: s -> v; }
interaction exists x. a(x);
)"),
                   "transition state undeclared"));
    CHECK(has_rule(diagnostics_of(R"(
component A { states s init s; port a: s -> s; }
component B { states r init r; port a: r -> r; }
interaction exists x. a(x);
)"),
                   "duplicate port"));
    CHECK(has_rule(diagnostics_of(R"(
component A { states s init s; port a: s -> s; }
interaction exists x. a(x);
property bad "m": exists x. s(x) & a(x);
)"),
                   "property mentions non-state"));
}

TEST_CASE("state predicates are qualified and shortened when unambiguous") {
    const SystemModel m = load_model("alt_philosophers.pbip");
    const auto preds = state_predicates(m);
    CHECK(preds.front() == "Fork.f");
    FormulaParse f = parse_formula("exists x. f(x) & w(x)", &m);
    REQUIRE(f.formula);
    CHECK(free_symbols(*f.formula).preds == std::set<std::string>{"Fork.f", "Phil_lr.w"});
    CHECK(print_formula(*f.formula, m) == "exists x. f(x) & w(x)");
}

TEST_CASE("inf and sup expand to order constraints") {
    FormulaParse f = parse_formula("exists x. inf(x) & p(x)");
    REQUIRE(f.formula);
    Structure s;
    s.n = 3;
    s.preds["p"] = 0b001;
    CHECK(eval_ils(*f.formula, s));
    s.preds["p"] = 0b010;
    CHECK_FALSE(eval_ils(*f.formula, s));
    FormulaParse g = parse_formula("exists x. sup(x) & p(x)");
    s.preds["p"] = 0b100;
    CHECK(eval_ils(*g.formula, s));
}
