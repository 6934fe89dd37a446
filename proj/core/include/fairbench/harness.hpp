#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fairbench/german.hpp"
#include "fairbench/multistage.hpp"
#include "fairbench/simulation.hpp"

namespace fairbench {

struct GermanRun {
    GermanConfig config;
    std::uint64_t seed = 1;
    int replicates = 1;  // re-splits with replicate-indexed seeds when > 1
};

struct SplitFractions {
    double train = 0.6;
    double val = 0.2;
    double test = 0.2;
};

struct ExperimentConfig {
    std::variant<SimConfig, GermanRun> dataset;
    std::vector<std::string> scenarios = {"single", "or", "and", "xor"};
    std::vector<PreSpec> pres;
    std::vector<InSpec> ins;
    std::vector<PostSpec> posts;
    SplitFractions split;
    std::string out_dir;
    int parallelism = 1;
    std::array<std::string, 2> radar_pair = {"adversarial", "platt"};

    std::uint64_t base_seed() const;
    int replicates() const;
};

// Round-trip with the on-disk config document; unknown keys are errors.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);
std::string experiment_config_to_json(const ExperimentConfig& cfg);

struct CellResult {
    bool failed = false;
    std::string error;
    EvaluationReport report;
};

// Median-aggregated metrics of one pipeline in one scenario. Metrics
// undefined in every replicate stay undefined.
struct AggregateRow {
    std::string scenario;
    std::string pipeline_id;
    std::string combination_class;
    std::optional<double> accuracy;
    std::optional<double> balanced_accuracy;
    std::optional<double> ind;
    std::optional<double> sp;
    std::optional<double> sp_abs;
    std::optional<double> sf;
    int replicates_ok = 0;
    int replicates_failed = 0;
};

struct ExperimentResults {
    ExperimentConfig config;
    std::vector<std::string> scenarios;
    std::vector<std::vector<PipelineSpec>> specs;          // [scenario][spec]
    std::vector<std::vector<std::vector<CellResult>>> cells;  // [scenario][spec][replicate]
    std::vector<AggregateRow> aggregates;                  // scenario-major, spec order
};

// Runs every scenario x pipeline x replicate, aggregates medians (lower
// median for even counts) and, when out_dir is set, persists all report
// files. Individual pipeline failures are recorded per cell.
ExperimentResults run_experiment(const ExperimentConfig& cfg);

struct ParetoPoint {
    double accuracy = 0.0;
    double sp = 0.0;
    std::string pipeline_id;
};

// Maximal set under (accuracy up, separation down) dominance, sorted by
// accuracy descending; equal points are kept and ordered by pipeline id.
std::vector<ParetoPoint> pareto_frontier(const std::vector<ParetoPoint>& points);
std::vector<ParetoPoint> pareto_frontier(const std::vector<AggregateRow>& rows,
                                         const std::string& scenario);

// Emits matrix/graph/replicates/radar/pareto files plus run_metadata.json
// into out_dir. Deterministic byte-for-byte given identical results.
void emit_reports(const ExperimentResults& results, const std::string& out_dir);

// Long-format per-replicate rows, as persisted in replicates_<scenario>.csv.
struct ReplicateRecord {
    std::string scenario;
    std::string pipeline_id;
    int replicate = 0;
    std::string metric;
    std::optional<double> value;
};
std::vector<ReplicateRecord> read_replicates_csv(const std::string& path);

// Median aggregation used across the harness: lower median of the defined
// values; empty input stays undefined.
std::optional<double> lower_median(std::vector<double> values);

}  // namespace fairbench
