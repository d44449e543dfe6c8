#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dimest/json_io.hpp"

namespace dimest {

// Pipeline orchestration: ladder -> certificate -> bound -> empirical
// cross-checks, plus the property-suite runner behind `verify`.

struct CrosscheckParams {
    double horizon = 10.0;
    double step = 1e-3;
    int restricted_level = 2;
    int restricted_samples = 100;
    double restricted_step = 1.0 / 64.0;
    int embed_dim = 8;
    double embed_stride = 0.005;
};

struct PipelineSpec {
    std::optional<CompactnessLadder> ladder;
    std::optional<DelaySystem> delay_system;
    SearchParams search;
    double iota = 1.0;
    std::uint64_t seed = 0;
    std::string output_dir;
    CrosscheckParams crosscheck;
    Json echo;
};

// Parse and validate a pipeline spec; schema violations report JSON paths.
PipelineSpec parse_spec(const std::string& path);
PipelineSpec parse_spec_json(const Json& j, const std::string& base_dir);

struct PipelineResult {
    int exit_code = 0;  // 0 ok, 2 property violation
    std::vector<std::string> violations;
    Json report;
    Json certificate;
    std::string bound_csv;
};

PipelineResult run_pipeline(const PipelineSpec& spec, Exec exec = Exec::parallel);

// Write report.json, certificate.json and bound.csv under out_dir.
void write_pipeline_artifacts(const PipelineResult& result, const std::string& out_dir);

// ---- property suite ---------------------------------------------------------

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

// The module invariants as named checks; `verify` prints one line per
// check and exits 2 on any failure.
std::vector<CheckResult> run_property_suite(std::uint64_t seed, double tolerance,
                                            Exec exec = Exec::parallel);

} // namespace dimest
