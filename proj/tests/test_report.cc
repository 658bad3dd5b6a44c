#include "doctest.h"
#include "json.hpp"
#include "support.hh"
#include "trapmark/report.hh"
#include "trapmark/trapinv.hh"

using namespace tm_test;
using nlohmann::json;

TEST_CASE("JSON reports: schema and determinism") {
    const SystemModel alt = load_model("alt_philosophers.pbip");
    const InvariantBundle b = build_invariant(alt);
    const VerificationReport r = check_safety(alt, b, PropertySpec{}, 2);
    const std::string text = report_json(r);
    CHECK(text == report_json(check_safety(alt, build_invariant(alt), PropertySpec{}, 2)));

    const json j = json::parse(text);
    CHECK(j.at("verdict") == "INCONCLUSIVE");
    CHECK(j.at("property") == "deadlock");
    CHECK(j.at("minSize") == 2);
    REQUIRE(j.at("witness").is_array());
    CHECK(j.at("witness").size() == r.witness.size());
    for (const auto& e : j.at("witness")) {
        CHECK(e.at("index").is_number_integer());
        CHECK(e.at("type").is_string());
        CHECK(e.at("state").is_string());
    }
    for (const char* k : {"states", "transitions", "inclusionSteps"}) CHECK(j.at("stats").at(k).is_number_integer());
    CHECK(j.at("assumptions").is_array());
    CHECK(j.at("windows").is_array());
    CHECK_FALSE(j.contains("reach"));

    const SystemModel philo = load_model("philosophers.pbip");
    const VerificationReport s = check_safety(philo, build_invariant(philo), PropertySpec{}, 2);
    const json js = json::parse(report_json(s));
    CHECK(js.at("verdict") == "SAFE");
    CHECK_FALSE(js.contains("witness"));

    CHECK(json::parse(reports_json({s})).is_object());
    const json both = json::parse(reports_json({s, r}));
    REQUIRE(both.is_array());
    CHECK(both.size() == 2);
}

TEST_CASE("text reports") {
    const SystemModel alt = load_model("alt_philosophers.pbip");
    const VerificationReport r = check_safety(alt, build_invariant(alt), PropertySpec{}, 2);
    const std::string t = report_text(r);
    CHECK(t.find("INCONCLUSIVE") != std::string::npos);
    CHECK(t.find("Fork") != std::string::npos);
}
