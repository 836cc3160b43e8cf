#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "closure/io.hpp"
#include "closure/report.hpp"
#include "closure/scenarios.hpp"

using namespace closure;
using nlohmann::json;

namespace {

json parse(const std::string& text) { return json::parse(text); }

}  // namespace

TEST_CASE("distribution files", "[io]") {
    SECTION("round trip") {
        JointDistribution d = JointDistribution::from_outcomes(
            {Variable{"x", {"0", "1"}}, Variable{"y", {"a", "b", "c"}}},
            {{{"0", "a"}, 0.5}, {{"1", "c"}, 0.25}, {{"1", "b"}, 0.25}});
        json j = io::distribution_to_json(d);
        JointDistribution loaded = io::distribution_from_json(j, "test");
        for (std::size_t i = 0; i < d.size(); ++i) {
            REQUIRE(loaded.masses()[i] == Catch::Approx(d.masses()[i]).margin(1e-15));
        }
    }
    SECTION("unlisted outcomes read as zero") {
        json j = parse(R"({"variables":[{"name":"x","alphabet":["0","1"]}],"mass":[{"outcome":["0"],"p":1.0}]})");
        JointDistribution d = io::distribution_from_json(j, "test");
        CHECK(d.probability_of({"1"}) == 0.0);
    }
    SECTION("slight denormalization is renormalized, large is rejected") {
        json ok = parse(R"({"variables":[{"name":"x","alphabet":["0","1"]}],
                           "mass":[{"outcome":["0"],"p":0.5},{"outcome":["1"],"p":0.5000000001}]})");
        JointDistribution d = io::distribution_from_json(ok, "test");
        double total = 0.0;
        for (double p : d.masses()) total += p;
        CHECK(total == Catch::Approx(1.0).margin(1e-15));

        json bad = parse(R"({"variables":[{"name":"x","alphabet":["0","1"]}],
                            "mass":[{"outcome":["0"],"p":0.5},{"outcome":["1"],"p":0.52}]})");
        CHECK_THROWS_AS(io::distribution_from_json(bad, "test"), SchemaError);
    }
    SECTION("schema violations carry the context") {
        json dup = parse(R"({"variables":[{"name":"x","alphabet":["0","1"]}],
                            "mass":[{"outcome":["0"],"p":0.5},{"outcome":["0"],"p":0.5}]})");
        CHECK_THROWS_WITH(io::distribution_from_json(dup, "fixture.json"),
                          Catch::Matchers::ContainsSubstring("fixture.json"));
        json unknown_symbol = parse(R"({"variables":[{"name":"x","alphabet":["0","1"]}],
                                       "mass":[{"outcome":["9"],"p":1.0}]})");
        CHECK_THROWS_AS(io::distribution_from_json(unknown_symbol, "test"), SchemaError);
        json negative = parse(R"({"variables":[{"name":"x","alphabet":["0","1"]}],
                                 "mass":[{"outcome":["0"],"p":-0.5},{"outcome":["1"],"p":1.5}]})");
        CHECK_THROWS_AS(io::distribution_from_json(negative, "test"), SchemaError);
        CHECK_THROWS_AS(io::load_distribution("/nonexistent/path.json"), SchemaError);
    }
}

TEST_CASE("scenario files", "[io]") {
    SECTION("round trip through JSON preserves the dump bytes") {
        for (const auto& name : builtin_scenario_names()) {
            MarkovScenario scenario = *builtin_scenario(name);
            json j = io::scenario_to_json(scenario);
            MarkovScenario loaded = io::scenario_from_json(j, name);
            CHECK(io::scenario_to_json(loaded).dump() == j.dump());
            CHECK(io::fingerprint(loaded) == io::fingerprint(scenario));
        }
    }
    SECTION("factored-only files compose their context kernel") {
        MarkovScenario decoupled = decoupled_scenario();
        json j = io::scenario_to_json(decoupled);
        j.erase("context_kernel");
        MarkovScenario loaded = io::scenario_from_json(j, "factored-only");
        REQUIRE(loaded.has_factored_context());
        for (std::size_t i = 0; i < decoupled.context_kernel().table().size(); ++i) {
            REQUIRE(loaded.context_kernel().table()[i] ==
                    Catch::Approx(decoupled.context_kernel().table()[i]).margin(1e-15));
        }
    }
    SECTION("schema violations") {
        json base = io::scenario_to_json(copy_scenario());

        json missing = base;
        missing.erase("initial");
        CHECK_THROWS_AS(io::scenario_from_json(missing, "test"), SchemaError);

        json unknown = base;
        unknown["extra_key"] = 1;
        CHECK_THROWS_WITH(io::scenario_from_json(unknown, "test"),
                          Catch::Matchers::ContainsSubstring("unknown key"));

        json missing_row = base;
        missing_row["context_kernel"].erase(0);
        CHECK_THROWS_WITH(io::scenario_from_json(missing_row, "test"),
                          Catch::Matchers::ContainsSubstring("missing row"));

        json bad_row = base;
        bad_row["context_kernel"][0]["next"][0]["p"] = 0.25;
        CHECK_THROWS_AS(io::scenario_from_json(bad_row, "test"), SchemaError);

        json neither = base;
        neither.erase("context_kernel");
        CHECK_THROWS_WITH(io::scenario_from_json(neither, "test"),
                          Catch::Matchers::ContainsSubstring("context_kernel"));
    }
    SECTION("fingerprints separate different scenarios") {
        CHECK(io::fingerprint(copy_scenario()) != io::fingerprint(decoupled_scenario()));
        CHECK(io::fingerprint(copy_scenario()) == io::fingerprint(copy_scenario()));
        CHECK(io::fingerprint(copy_scenario()).size() == 16);
    }
}

TEST_CASE("function table CSV", "[io]") {
    SECTION("loads a total table") {
        std::istringstream in("x1,x2,y\n0,0,0\n0,1,1\n1,0,1\n1,1,0\n");
        FunctionTable t = io::function_table_from_csv(in, "xor.csv");
        CHECK(t.arity() == 2);
        CHECK(t.output_at({"1", "0"}) == 1);
        CHECK(t.output_at({"1", "1"}) == 0);
    }
    SECTION("windows line endings are accepted") {
        std::istringstream in("x1,y\r\n0,0\r\n1,1\r\n");
        FunctionTable t = io::function_table_from_csv(in, "crlf.csv");
        CHECK(t.output_at({"1"}) == 1);
    }
    SECTION("totality is strict") {
        std::istringstream missing("x1,x2,y\n0,0,0\n0,1,1\n1,0,1\n");
        CHECK_THROWS_WITH(io::function_table_from_csv(missing, "partial.csv"),
                          Catch::Matchers::ContainsSubstring("not total"));
        std::istringstream dup("x1,y\n0,0\n0,1\n");
        CHECK_THROWS_AS(io::function_table_from_csv(dup, "dup.csv"), SchemaError);
        std::istringstream ragged("x1,x2,y\n0,0\n");
        CHECK_THROWS_AS(io::function_table_from_csv(ragged, "ragged.csv"), SchemaError);
        std::istringstream header_only("x1,x2,y\n");
        CHECK_THROWS_AS(io::function_table_from_csv(header_only, "empty.csv"), SchemaError);
    }
}

TEST_CASE("report JSON round trips byte-identically", "[io]") {
    StepAnalysis analysis = analyze_step(copy_scenario(), 1, 1e-9, 0.5);
    auto report = report::build_closure_report("analyze", "copy", io::fingerprint(copy_scenario()), "exact", 1e-9,
                                               0.5, {analysis});
    std::string rendered = report::render_json(report::closure_report_to_json(report));
    json parsed = json::parse(rendered);
    CHECK(report::render_json(parsed) == rendered);

    // a sweep report with summary round trips too
    std::vector<StepAnalysis> steps;
    for (std::size_t n = 0; n <= 3; ++n) steps.push_back(analyze_step(copy_scenario(), n, 1e-9, std::nullopt));
    auto sweep = report::build_closure_report("sweep", "copy", io::fingerprint(copy_scenario()), "exact", 1e-9,
                                              std::nullopt, steps);
    std::string sweep_rendered = report::render_json(report::closure_report_to_json(sweep));
    CHECK(report::render_json(json::parse(sweep_rendered)) == sweep_rendered);
}

TEST_CASE("report content matches the wire format", "[io]") {
    StepAnalysis analysis = analyze_step(copy_scenario(), 2, 1e-9, std::nullopt);
    json j = report::step_to_json(analysis);
    CHECK(j["step"] == 2);
    CHECK(j["measures"].contains("info_closure"));
    CHECK(j["measures"].contains("func_closure"));
    CHECK(j["measures"].contains("env_coupling"));
    CHECK(j["theorem"].contains("lhs"));
    CHECK(j["theorem"].contains("rhs"));
    CHECK(j["theorem"].contains("slack"));
    CHECK(j["theorem"].contains("satisfied"));
    // hypotheses fail at the open step: propositions render as "n/a"
    CHECK(j["propositions"]["p1"] == "n/a");
    CHECK(j["propositions"]["p2"] == "n/a");

    StepAnalysis closed = analyze_step(copy_scenario(), 1, 1e-9, std::nullopt);
    json jc = report::step_to_json(closed);
    CHECK(jc["propositions"]["p1"].is_number());
    CHECK(jc["propositions"]["p2"].is_number());
    CHECK(jc["verdict"]["informationally_closed"] == true);
}
