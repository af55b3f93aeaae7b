#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "ncorb/matrix_io.hpp"
#include "ncorb/scenario.hpp"

using namespace ncorb;

namespace {

std::string scenario_path(const std::string& name) {
    return std::string(SCENARIO_DIR) + "/" + name;
}

std::string csv_text(const TaskResult& t) {
    std::ostringstream out;
    write_task_csv(out, t);
    return out.str();
}

}  // namespace

TEST_CASE("parse and serialize form a stable round trip") {
    std::string text = R"({
        "name": "roundtrip",
        "convention": "normalized",
        "seed": 9,
        "tolerance": 1e-9,
        "graph": {"kind": "circle", "vertices": 8, "circumference": 6.283185307179586},
        "action": {"kind": "rotation", "sectors": 2},
        "dirac": {"kind": "circle", "rank": 2},
        "bitorsor": {"kind": "quotient"},
        "tasks": ["validate", "morita"]
    })";
    Scenario s = parse_scenario(text);
    CHECK(s.name == "roundtrip");
    CHECK(s.haar == HaarConvention::Normalized);
    CHECK(s.seed == 9);
    CHECK(s.tolerance == 1e-9);
    REQUIRE(s.graph.has_value());
    CHECK(s.graph->vertices == 8);
    std::string once = serialize_scenario(s);
    std::string twice = serialize_scenario(parse_scenario(once));
    CHECK(once == twice);
}

TEST_CASE("every shipped scenario parses, serializes, and round trips") {
    std::vector<std::string> names;
    for (const auto& entry : std::filesystem::directory_iterator(SCENARIO_DIR))
        if (entry.path().extension() == ".json") names.push_back(entry.path().string());
    CHECK(names.size() >= 10);
    for (const std::string& path : names) {
        INFO(path);
        Scenario s = load_scenario(path);
        CHECK(!s.name.empty());
        CHECK(!s.tasks.empty());
        std::string once = serialize_scenario(s);
        CHECK(serialize_scenario(parse_scenario(once)) == once);
    }
}

TEST_CASE("unknown fields and malformed values are rejected by name") {
    CHECK_THROWS_AS(parse_scenario("{\"name\": \"x\", \"bogus\": 1, \"tasks\": []}"),
                    StructuralError);
    CHECK_THROWS_AS(parse_scenario("{\"tasks\": [\"validate\"]}"), StructuralError);
    CHECK_THROWS_AS(
        parse_scenario("{\"name\": \"x\", \"convention\": \"weighted\", \"tasks\": []}"),
        StructuralError);
    CHECK_THROWS_AS(parse_scenario("not json at all"), StructuralError);
    CHECK_THROWS_AS(
        parse_scenario("{\"name\": \"x\", \"tolerance\": -1.0, \"tasks\": []}"),
        StructuralError);
}

TEST_CASE("building a scenario validates the described objects") {
    CHECK_THROWS_AS(build_scenario(load_scenario(scenario_path("malformed_graph.json"))),
                    StructuralError);
    CHECK_THROWS_AS(build_scenario(load_scenario(scenario_path("malformed_action.json"))),
                    StructuralError);
    BuiltScenario good =
        build_scenario(load_scenario(scenario_path("rotation_c6_quotient.json")));
    CHECK(good.graph != nullptr);
    CHECK(good.groupoid != nullptr);
    CHECK(good.triple.has_value());
    CHECK(good.bitorsor != nullptr);
}

TEST_CASE("validation reports a witness for the corrupted bitorsor") {
    Scenario s = load_scenario(scenario_path("corrupted_bitorsor.json"));
    TaskResult r = run_task(s, "validate");
    CHECK(!r.passed);
    CHECK(!r.failure.empty());
    bool witnessed = false;
    for (const auto& [key, value] : r.details)
        if (key.rfind("bitorsor.", 0) == 0 && value.find("sigma") != std::string::npos)
            witnessed = true;
    CHECK(witnessed);
}

TEST_CASE("task dispatch rejects unknown tasks and missing prerequisites") {
    Scenario s = load_scenario(scenario_path("rotation_c6_quotient.json"));
    CHECK_THROWS_AS(run_task(s, "frobnicate"), StructuralError);
    Scenario nonfree = load_scenario(scenario_path("s3_c6.json"));
    CHECK_THROWS_AS(run_task(nonfree, "theorem3"), ContractError);
    Scenario graphless = load_scenario(scenario_path("s3_translation.json"));
    CHECK_THROWS_AS(run_task(graphless, "spectrum"), ContractError);
}

TEST_CASE("scenario runs are deterministic including their tables") {
    Scenario s = load_scenario(scenario_path("rotation_c6_quotient.json"));
    TaskResult a = run_task(s, "distance");
    TaskResult b = run_task(s, "distance");
    CHECK(a.passed);
    CHECK(csv_text(a) == csv_text(b));
    CHECK(a.details == b.details);
    TaskResult m1 = run_task(s, "morita");
    TaskResult m2 = run_task(s, "morita");
    CHECK(m1.passed);
    CHECK(csv_text(m1) == csv_text(m2));
}

TEST_CASE("the validate task passes on every well formed shipped scenario") {
    for (const char* name :
         {"rotation_c6_quotient.json", "reflection_c6.json", "identity_c6.json",
          "s3_c6.json", "s3_translation.json", "rotation_rank2.json",
          "circle_c64.json"}) {
        INFO(name);
        Scenario s = load_scenario(scenario_path(name));
        TaskResult r = run_task(s, "validate");
        INFO(r.failure);
        CHECK(r.passed);
    }
}

TEST_CASE("run_scenario aggregates task verdicts into the report") {
    Scenario s = load_scenario(scenario_path("identity_c6.json"));
    RunResult r = run_scenario(s);
    CHECK(r.passed);
    CHECK(r.tasks.size() == s.tasks.size());
    std::ostringstream out;
    write_report(out, s, r);
    std::string report = out.str();
    CHECK(report.find("\"ncorb-report/1\"") != std::string::npos);
    CHECK(report.find("\"identity_c6\"") != std::string::npos);
    CHECK(report.find("\"passed\"") != std::string::npos);

    Scenario corrupted = load_scenario(scenario_path("corrupted_bitorsor.json"));
    RunResult bad = run_scenario(corrupted);
    CHECK(!bad.passed);
}

TEST_CASE("the family study task passes on the shipped family scenario") {
    Scenario s = load_scenario(scenario_path("prop5_family.json"));
    TaskResult r = run_task(s, "prop5");
    INFO(r.failure);
    CHECK(r.passed);
    CHECK(!r.csv_rows.empty());
    std::string csv = csv_text(r);
    CHECK(csv.find("size") != std::string::npos);
}

TEST_CASE("matrix files round trip exactly and reject malformed headers") {
    Matrix m(2, 3);
    m << Complex(1.5, -2.25), Complex(0, 1), Complex(3, 0), Complex(-0.125, 0.5),
        Complex(2, -2), Complex(1e-8, 1e8);
    std::ostringstream out;
    write_matrix(out, m);
    std::istringstream in(out.str());
    Matrix back = read_matrix(in);
    REQUIRE(back.rows() == 2);
    REQUIRE(back.cols() == 3);
    CHECK((back - m).cwiseAbs().maxCoeff() == 0.0);
    std::istringstream bad("2 x 3\n1 2 3\n");
    CHECK_THROWS_AS(read_matrix(bad), StructuralError);
}
