#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fairbench/dataset.hpp"
#include "fairbench/inprocess.hpp"
#include "fairbench/logic.hpp"
#include "fairbench/metrics.hpp"
#include "fairbench/postprocess.hpp"
#include "fairbench/preprocess.hpp"

namespace fairbench {

struct ReweighSpec {};
struct DiRemoverSpec {
    RepairParams params;
};
using PreSpec = std::variant<ReweighSpec, DiRemoverSpec>;

struct LogisticSpec {
    LogisticParams params;
};
struct AdversarialSpec {
    LogisticParams clf;
    AdversaryParams adv;
};
struct PiRegSpec {
    LogisticParams clf;
    double eta = 1.0;
};
struct MetaFairSpec {
    MetaFairParams params;
};
using InSpec = std::variant<LogisticSpec, AdversarialSpec, PiRegSpec, MetaFairSpec>;

struct RejectOptionSpec {
    RejectOptionParams params;
};
struct EqOddsSpec {};
struct PlattSpec {};
using PostSpec = std::variant<RejectOptionSpec, EqOddsSpec, PlattSpec>;

std::string stage_id(const PreSpec& s);
std::string stage_id(const InSpec& s);
std::string stage_id(const PostSpec& s);

// One pipeline: optional logical processor, at most one processor per
// stage, a seed, and the column fairness is evaluated against (defaults to
// the first sensitive column, matching the single-variable protocol).
struct PipelineSpec {
    std::optional<LogicalProcessor> lp;
    std::optional<PreSpec> pre;
    std::optional<InSpec> in;  // absent = baseline logistic with defaults
    std::optional<PostSpec> post;
    std::uint64_t seed = 0;
    std::string eval_column;

    std::string id() const;
    std::string scenario() const;           // "single" or the LP name
    std::string combination_class() const;  // baseline | single | PI | PP | IP
};

struct EvaluationReport {
    std::optional<double> accuracy;
    std::optional<double> balanced_accuracy;
    std::optional<double> ind;
    std::optional<double> sp;       // signed-sum form (default)
    std::optional<double> sp_abs;   // per-term absolute variant
    std::optional<double> sf;
    std::optional<double> independence_quotient;
    std::optional<GroupConfusion> confusion;
    std::string scenario;
    std::string pipeline_id;
    std::uint64_t prediction_fingerprint = 0;  // hash of the test predictions
    std::map<std::string, std::string> metadata;
};

// Fixed stage order: logical processor on every split, pre-processor fit on
// train, in-processor (or baseline) trained, threshold selected on
// validation, post-processor fit on validation, metrics on test. Test
// labels are only read in the final step.
EvaluationReport run_pipeline(const PipelineSpec& spec, const Dataset& train,
                              const Dataset& val, const Dataset& test);

// All singleton pipelines plus the PI / PP / IP pairs, crossed with each
// scenario. Deterministic ordering: per scenario, pre / in / post
// singletons, then PI (pre-major), PP, IP pairs.
std::vector<PipelineSpec> enumerate_grid(const std::vector<PreSpec>& pres,
                                         const std::vector<InSpec>& ins,
                                         const std::vector<PostSpec>& posts,
                                         const std::vector<std::optional<LogicalProcessor>>& lps);

}  // namespace fairbench
