#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "dimest/pipeline.hpp"

using namespace dimest;

namespace {

Json minimal_ladder_spec() {
    return Json{{"input", Json{{"ladder", Json{{"valuation", Json{{"kind", "real"}}},
                                               {"generator", Json{{"type", "power"},
                                                                  {"k_step", 1},
                                                                  {"scale", 0.5},
                                                                  {"ratio", 1.0}}}}}}},
                {"varpi", 0.9}};
}

Json delay_spec() {
    Json sys{{"tau", 1.0},
             {"d", 1},
             {"terms", Json::array({Json{{"A", Json::array({Json::array({-1.0})})},
                                         {"sigma", 1.0}}})},
             {"majorant", 1.0},
             {"label", "x' = -x(t-1)"}};
    return Json{{"input", Json{{"delay_system", sys}}},
                {"varpi", 0.95},
                {"varrho", 1.0},
                {"p_max", 2},
                {"s_max", 5},
                {"seed", 42},
                {"crosscheck", Json{{"horizon", 4.0},
                                    {"step", 0.001},
                                    {"restricted_level", 2},
                                    {"restricted_samples", 40},
                                    {"restricted_step", 0.03125},
                                    {"embed_dim", 4},
                                    {"embed_stride", 0.01}}}};
}

} // namespace

TEST_CASE("spec parsing") {
    SUBCASE("defaults are filled in") {
        PipelineSpec spec = parse_spec_json(minimal_ladder_spec(), "");
        CHECK(spec.search.p_max == 8);
        CHECK(spec.search.s_max == 12);
        CHECK(spec.search.varrho == 1.0);
        CHECK(spec.seed == 0);
        CHECK(spec.ladder.has_value());
        CHECK_FALSE(spec.delay_system.has_value());
    }
    SUBCASE("violations name the offending field") {
        Json bad = minimal_ladder_spec();
        bad["varpi"] = -1.0;
        CHECK_THROWS_WITH_AS(parse_spec_json(bad, ""), doctest::Contains("$.varpi"),
                             std::invalid_argument);
        Json bad2 = minimal_ladder_spec();
        bad2["varrho"] = 1.5;
        CHECK_THROWS_WITH_AS(parse_spec_json(bad2, ""), doctest::Contains("$.varrho"),
                             std::invalid_argument);
        Json bad3 = minimal_ladder_spec();
        bad3.erase("varpi");
        CHECK_THROWS_WITH_AS(parse_spec_json(bad3, ""), doctest::Contains("$.varpi"),
                             std::invalid_argument);
        Json bad4 = minimal_ladder_spec();
        bad4["input"] = Json::object();
        CHECK_THROWS_WITH_AS(parse_spec_json(bad4, ""), doctest::Contains("$.input"),
                             std::invalid_argument);
    }
    SUBCASE("undeclared Lipschitz mass is rejected") {
        Json sys{{"tau", 1.0},
                 {"d", 1},
                 {"terms", Json::array({Json{{"A", Json::array({Json::array({-3.0})})},
                                             {"sigma", 1.0}}})},
                 {"majorant", 1.0}};
        CHECK_THROWS_WITH_AS(delay_system_from_json(sys), doctest::Contains("$.majorant"),
                             std::invalid_argument);
    }
    SUBCASE("delay specs route through the delay ladder") {
        PipelineSpec spec = parse_spec_json(delay_spec(), "");
        REQUIRE(spec.delay_system.has_value());
        CHECK(spec.delay_system->tau == 1.0);
        CHECK_FALSE(spec.ladder.has_value());
    }
}

TEST_CASE("pipeline runs") {
    SUBCASE("ladder-only spec: certificate and bound, no crosscheck") {
        PipelineSpec spec = parse_spec_json(minimal_ladder_spec(), "");
        PipelineResult res = run_pipeline(spec);
        CHECK(res.exit_code == 0);
        CHECK(res.report.contains("certificate"));
        CHECK(res.report.contains("dimension_bound"));
        CHECK_FALSE(res.report.contains("crosscheck"));
        CHECK(res.bound_csv.find("grid,") != std::string::npos);
        CHECK(res.bound_csv.find("bound,") != std::string::npos);
    }
    SUBCASE("delay spec produces the full crosscheck report") {
        PipelineSpec spec = parse_spec_json(delay_spec(), "");
        PipelineResult res = run_pipeline(spec);
        CHECK(res.exit_code == 0);
        REQUIRE(res.report.contains("crosscheck"));
        const Json& cc = res.report["crosscheck"];
        CHECK(cc.contains("simulation"));
        CHECK(cc.contains("restricted_norm"));
        CHECK(cc.contains("rescale"));
        CHECK(cc.contains("boxdim"));
        // bound = m - 1 for varrho = 1
        double bound = res.report["dimension_bound"]["value"].get<double>();
        long long m = res.report["certificate"]["m"].get<long long>();
        CHECK(bound == double(m - 1));
    }
    SUBCASE("unreachable varpi exits 2 with diagnostics") {
        Json spec = minimal_ladder_spec();
        spec["varpi"] = 0.3;  // below the constant-profile limit 0.5
        PipelineResult res = run_pipeline(parse_spec_json(spec, ""));
        CHECK(res.exit_code == 2);
        CHECK_FALSE(res.violations.empty());
        CHECK(res.report["search"]["status"] == "failed");
    }
}

TEST_CASE("pipeline artifacts are byte-identical across runs") {
    PipelineSpec spec = parse_spec_json(delay_spec(), "");
    auto tmp = std::filesystem::temp_directory_path();
    std::string dir_a = (tmp / "dimest_test_run_a").string();
    std::string dir_b = (tmp / "dimest_test_run_b").string();
    write_pipeline_artifacts(run_pipeline(spec), dir_a);
    write_pipeline_artifacts(run_pipeline(spec), dir_b);
    for (const char* name : {"report.json", "certificate.json", "bound.csv"}) {
        std::ifstream fa(std::filesystem::path(dir_a) / name, std::ios::binary);
        std::ifstream fb(std::filesystem::path(dir_b) / name, std::ios::binary);
        REQUIRE(fa.good());
        REQUIRE(fb.good());
        std::string sa((std::istreambuf_iterator<char>(fa)),
                       std::istreambuf_iterator<char>());
        std::string sb((std::istreambuf_iterator<char>(fb)),
                       std::istreambuf_iterator<char>());
        CHECK(sa == sb);
        CHECK_FALSE(sa.empty());
    }
    std::filesystem::remove_all(dir_a);
    std::filesystem::remove_all(dir_b);
}

TEST_CASE("property suite passes") {
    std::vector<CheckResult> results = run_property_suite(1, 0.1);
    CHECK(results.size() >= 18);
    for (const CheckResult& r : results) {
        INFO(r.name, ": ", r.detail);
        CHECK(r.pass);
    }
}
