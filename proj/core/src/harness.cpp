#include "fairbench/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "fairbench/errors.hpp"
#include "fairbench/rng.hpp"

namespace fairbench {

namespace {

using nlohmann::json;

std::string fmt(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

std::string fmt_opt(const std::optional<double>& v) {
    return v ? fmt(*v) : std::string("NA");
}

json opt_to_json(const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
}

struct MethodEntry {
    std::string id;
    int stage = 0;  // 0 pre, 1 in, 2 post
};

std::vector<MethodEntry> method_axis(const ExperimentConfig& cfg) {
    std::vector<MethodEntry> out;
    for (const auto& p : cfg.pres) out.push_back({stage_id(p), 0});
    for (const auto& p : cfg.ins) out.push_back({stage_id(p), 1});
    for (const auto& p : cfg.posts) out.push_back({stage_id(p), 2});
    return out;
}

// Canonical pipeline id of an unordered method pair, empty when the pair is
// structurally invalid (same stage, or not a PI/PP/IP combination).
std::string pair_id(const MethodEntry& a, const MethodEntry& b) {
    if (a.stage == b.stage) return {};
    const MethodEntry& first = a.stage < b.stage ? a : b;
    const MethodEntry& second = a.stage < b.stage ? b : a;
    return first.id + "+" + second.id;
}

std::optional<double> metric_value(const AggregateRow& row, const std::string& metric) {
    if (metric == "accuracy") return row.accuracy;
    if (metric == "balanced_accuracy") return row.balanced_accuracy;
    if (metric == "ind") return row.ind;
    if (metric == "sp") return row.sp;
    if (metric == "sp_abs") return row.sp_abs;
    if (metric == "sf") return row.sf;
    throw std::invalid_argument("unknown metric '" + metric + "'");
}

const std::vector<std::string> kMatrixMetrics = {"accuracy", "balanced_accuracy", "ind", "sp", "sf"};
const std::vector<std::string> kReplicateMetrics = {"accuracy", "balanced_accuracy", "ind", "sp", "sp_abs", "sf"};

std::optional<double> report_metric(const EvaluationReport& r, const std::string& metric) {
    if (metric == "accuracy") return r.accuracy;
    if (metric == "balanced_accuracy") return r.balanced_accuracy;
    if (metric == "ind") return r.ind;
    if (metric == "sp") return r.sp;
    if (metric == "sp_abs") return r.sp_abs;
    if (metric == "sf") return r.sf;
    throw std::invalid_argument("unknown metric '" + metric + "'");
}

}  // namespace

std::optional<double> lower_median(std::vector<double> values) {
    if (values.empty()) return std::nullopt;
    std::sort(values.begin(), values.end());
    return values[(values.size() - 1) / 2];
}

// ---------------------------------------------------------------------------
// experiment execution

ExperimentResults run_experiment(const ExperimentConfig& cfg) {
    if (cfg.scenarios.empty()) throw ConfigError("experiment: scenarios must be nonempty");
    if (cfg.parallelism < 1) throw ConfigError("experiment: parallelism must be >= 1");
    const int replicates = cfg.replicates();
    if (replicates < 1) throw ConfigError("experiment: replicates must be >= 1");

    ExperimentResults results;
    results.config = cfg;
    results.scenarios = cfg.scenarios;

    // Data: one split triple per replicate, shared by every pipeline.
    std::vector<SplitResult> splits;
    splits.reserve(replicates);
    const std::uint64_t base_seed = cfg.base_seed();
    if (const auto* sim = std::get_if<SimConfig>(&cfg.dataset)) {
        for (int r = 0; r < replicates; ++r) {
            const Dataset data = generate_simulation(*sim, r);
            splits.push_back(split(data, cfg.split.train, cfg.split.val, cfg.split.test,
                                   rng::mix_key(base_seed, 0x73706cULL, static_cast<std::uint64_t>(r))));
        }
    } else {
        const auto& run = std::get<GermanRun>(cfg.dataset);
        const Dataset data = load_german(run.config);
        for (int r = 0; r < replicates; ++r) {
            splits.push_back(split(data, cfg.split.train, cfg.split.val, cfg.split.test,
                                   rng::mix_key(base_seed, 0x73706cULL, static_cast<std::uint64_t>(r))));
        }
    }

    // Pipelines per scenario.
    results.specs.resize(cfg.scenarios.size());
    for (std::size_t s = 0; s < cfg.scenarios.size(); ++s) {
        std::optional<LogicalProcessor> lp;
        if (cfg.scenarios[s] != "single") lp = LogicalProcessor::by_name(cfg.scenarios[s]);
        results.specs[s] = enumerate_grid(cfg.pres, cfg.ins, cfg.posts, {lp});
        for (std::size_t p = 0; p < results.specs[s].size(); ++p) {
            results.specs[s][p].seed = rng::mix_key(base_seed, s, p, 0xabcdULL);
        }
    }

    results.cells.resize(cfg.scenarios.size());
    struct Task {
        std::size_t scenario;
        std::size_t spec;
        int replicate;
    };
    std::vector<Task> tasks;
    for (std::size_t s = 0; s < cfg.scenarios.size(); ++s) {
        results.cells[s].resize(results.specs[s].size());
        for (std::size_t p = 0; p < results.specs[s].size(); ++p) {
            results.cells[s][p].resize(replicates);
            for (int r = 0; r < replicates; ++r) tasks.push_back({s, p, r});
        }
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t t = next.fetch_add(1);
            if (t >= tasks.size()) break;
            const Task& task = tasks[t];
            PipelineSpec spec = results.specs[task.scenario][task.spec];
            spec.seed = rng::mix_key(spec.seed, static_cast<std::uint64_t>(task.replicate));
            CellResult& cell = results.cells[task.scenario][task.spec][task.replicate];
            try {
                const auto& sp = splits[static_cast<std::size_t>(task.replicate)];
                cell.report = run_pipeline(spec, sp.train, sp.val, sp.test);
            } catch (const std::exception& e) {
                cell.failed = true;
                cell.error = e.what();
            }
        }
    };
    const int threads_n = std::min<int>(cfg.parallelism, static_cast<int>(tasks.size()) > 0 ? static_cast<int>(tasks.size()) : 1);
    std::vector<std::thread> pool;
    for (int i = 1; i < threads_n; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    // Median aggregation.
    for (std::size_t s = 0; s < cfg.scenarios.size(); ++s) {
        for (std::size_t p = 0; p < results.specs[s].size(); ++p) {
            AggregateRow row;
            row.scenario = cfg.scenarios[s];
            row.pipeline_id = results.specs[s][p].id();
            row.combination_class = results.specs[s][p].combination_class();
            std::map<std::string, std::vector<double>> values;
            for (const auto& cell : results.cells[s][p]) {
                if (cell.failed) {
                    ++row.replicates_failed;
                    continue;
                }
                ++row.replicates_ok;
                for (const auto& metric : kReplicateMetrics) {
                    const auto v = report_metric(cell.report, metric);
                    if (v) values[metric].push_back(*v);
                }
            }
            row.accuracy = lower_median(values["accuracy"]);
            row.balanced_accuracy = lower_median(values["balanced_accuracy"]);
            row.ind = lower_median(values["ind"]);
            row.sp = lower_median(values["sp"]);
            row.sp_abs = lower_median(values["sp_abs"]);
            row.sf = lower_median(values["sf"]);
            results.aggregates.push_back(std::move(row));
        }
    }

    if (!cfg.out_dir.empty()) emit_reports(results, cfg.out_dir);
    return results;
}

// ---------------------------------------------------------------------------
// Pareto frontier

std::vector<ParetoPoint> pareto_frontier(const std::vector<ParetoPoint>& points) {
    std::vector<ParetoPoint> frontier;
    for (const auto& p : points) {
        bool dominated = false;
        for (const auto& q : points) {
            if (q.accuracy >= p.accuracy && q.sp <= p.sp &&
                (q.accuracy > p.accuracy || q.sp < p.sp)) {
                dominated = true;
                break;
            }
        }
        if (!dominated) frontier.push_back(p);
    }
    std::sort(frontier.begin(), frontier.end(), [](const ParetoPoint& a, const ParetoPoint& b) {
        if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
        if (a.sp != b.sp) return a.sp < b.sp;
        return a.pipeline_id < b.pipeline_id;
    });
    return frontier;
}

std::vector<ParetoPoint> pareto_frontier(const std::vector<AggregateRow>& rows, const std::string& scenario) {
    std::vector<ParetoPoint> points;
    for (const auto& row : rows) {
        if (row.scenario != scenario || !row.accuracy || !row.sp) continue;
        points.push_back({*row.accuracy, *row.sp, row.pipeline_id});
    }
    return pareto_frontier(points);
}

// ---------------------------------------------------------------------------
// report emission

void emit_reports(const ExperimentResults& results, const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (!fs::is_directory(out_dir)) throw DataError("emit_reports: cannot create directory '" + out_dir + "'");
    const fs::path dir(out_dir);

    const auto axis = method_axis(results.config);
    std::map<std::string, const AggregateRow*> by_key;  // scenario|id
    for (const auto& row : results.aggregates) by_key[row.scenario + "|" + row.pipeline_id] = &row;
    auto lookup = [&](const std::string& scenario, const std::string& id) -> const AggregateRow* {
        auto it = by_key.find(scenario + "|" + id);
        return it == by_key.end() ? nullptr : it->second;
    };

    auto open_out = [&](const std::string& name) {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) throw DataError("emit_reports: cannot write '" + (dir / name).string() + "'");
        return out;
    };

    for (const auto& scenario : results.scenarios) {
        // (a) heatmap matrices: diagonal singletons, off-diagonal pairs.
        for (const auto& metric : kMatrixMetrics) {
            auto out = open_out("matrix_" + metric + "_" + scenario + ".csv");
            out << "processor";
            for (const auto& m : axis) out << ',' << m.id;
            out << '\n';
            for (const auto& r : axis) {
                out << r.id;
                for (const auto& c : axis) {
                    std::string id;
                    if (r.id == c.id && r.stage == c.stage) {
                        id = r.id;
                    } else {
                        id = pair_id(r, c);
                    }
                    out << ',';
                    if (id.empty()) continue;  // structurally absent
                    const auto* row = lookup(scenario, id);
                    out << (row ? fmt_opt(metric_value(*row, metric)) : "NA");
                }
                out << '\n';
            }
        }

        // (b) node/edge graphs.
        for (const auto& metric : kMatrixMetrics) {
            json graph;
            graph["scenario"] = scenario;
            graph["metric"] = metric;
            graph["nodes"] = json::array();
            graph["edges"] = json::array();
            for (const auto& m : axis) {
                const auto* row = lookup(scenario, m.id);
                graph["nodes"].push_back(json{{"id", m.id},
                                              {"value", row ? opt_to_json(metric_value(*row, metric)) : json(nullptr)}});
            }
            for (std::size_t i = 0; i < axis.size(); ++i) {
                for (std::size_t j = i + 1; j < axis.size(); ++j) {
                    const std::string id = pair_id(axis[i], axis[j]);
                    if (id.empty()) continue;
                    const auto* row = lookup(scenario, id);
                    graph["edges"].push_back(json{{"source", axis[i].id},
                                                  {"target", axis[j].id},
                                                  {"value", row ? opt_to_json(metric_value(*row, metric)) : json(nullptr)}});
                }
            }
            auto out = open_out("graph_" + metric + "_" + scenario + ".json");
            out << graph.dump(2) << '\n';
        }
    }

    // (c) long-format per-replicate rows.
    for (std::size_t s = 0; s < results.scenarios.size(); ++s) {
        auto out = open_out("replicates_" + results.scenarios[s] + ".csv");
        out << "scenario,pipeline,replicate,metric,value\n";
        for (std::size_t p = 0; p < results.specs[s].size(); ++p) {
            const std::string id = results.specs[s][p].id();
            for (std::size_t r = 0; r < results.cells[s][p].size(); ++r) {
                const auto& cell = results.cells[s][p][r];
                if (cell.failed) continue;
                for (const auto& metric : kReplicateMetrics) {
                    out << results.scenarios[s] << ',' << id << ',' << r << ',' << metric << ','
                        << fmt_opt(report_metric(cell.report, metric)) << '\n';
                }
            }
        }
    }

    // (d) radar data: all metrics for the chosen pair and its constituents.
    {
        const auto& pair = results.config.radar_pair;
        const MethodEntry* first = nullptr;
        const MethodEntry* second = nullptr;
        for (const auto& m : axis) {
            if (m.id == pair[0] && !first) first = &m;
            if (m.id == pair[1] && !second) second = &m;
        }
        if (first && second && !pair_id(*first, *second).empty()) {
            const std::string combined = pair_id(*first, *second);
            for (const auto& scenario : results.scenarios) {
                auto out = open_out("radar_" + combined + "_" + scenario + ".csv");
                out << "pipeline,accuracy,balanced_accuracy,ind,sp,sf\n";
                for (const std::string& id : {first->id, second->id, combined}) {
                    const auto* row = lookup(scenario, id);
                    out << id;
                    for (const auto& metric : kMatrixMetrics) {
                        out << ',' << (row ? fmt_opt(metric_value(*row, metric)) : "NA");
                    }
                    out << '\n';
                }
            }
        }
    }

    // (e) Pareto frontiers.
    for (const auto& scenario : results.scenarios) {
        const auto frontier = pareto_frontier(results.aggregates, scenario);
        auto out = open_out("pareto_" + scenario + ".csv");
        out << "pipeline,accuracy,sp\n";
        for (const auto& pt : frontier) {
            out << pt.pipeline_id << ',' << fmt(pt.accuracy) << ',' << fmt(pt.sp) << '\n';
        }
    }

    // (f) resolved configuration, decision flags, seeds and failures.
    {
        json meta;
        meta["config"] = json::parse(experiment_config_to_json(results.config));
        // Parallelism and the output location are execution knobs with no
        // effect on results; the recorded config stays identical across
        // thread counts and destinations.
        meta["config"].erase("parallelism");
        meta["config"].erase("output");
        meta["flags"] = json{
            {"threshold_rule", "positive iff score > tau (ties negative)"},
            {"sp_form", "absolute value around the summed rate gaps; sp_abs reported alongside"},
            {"reweigh_mechanism", "weight multipliers (resampling variant available in the library)"},
            {"di_interpolation", "value-space interpolation between group and median quantile functions"},
            {"di_out_of_range", "test values clamped to the group's training support"},
            {"di_lambda_semantics", "lambda=0 identity, lambda=1 full repair"},
            {"pi_gradient", "group/marginal probability ratios frozen within each epoch"},
            {"adversary_inputs", "prediction probability, plus the label in separation mode"},
            {"metafair_solver", "exhaustive per-group threshold search over an even grid"},
            {"metafair_infeasible", "largest-quotient pair returned and flagged"},
            {"postprocessor_fit_split", "validation"},
            {"reject_recentering", "scores remapped so the selected threshold sits at 0.5"},
            {"threshold_selection_column", "scenario's mitigation column"},
            {"median", "lower median for even replicate counts"},
            {"trainer_standardization", "weighted train-split mean/variance, undone at scoring"},
        };
        meta["seeds"] = json{
            {"base", static_cast<std::int64_t>(results.config.base_seed())},
            {"split", "mix(base, replicate)"},
            {"pipeline", "mix(base, scenario_index, spec_index, replicate)"},
        };
        meta["aggregation"] =
            results.config.replicates() > 1 ? "median_over_replicates" : "single_run";
        meta["replicates"] = results.config.replicates();
        json errors = json::array();
        for (std::size_t s = 0; s < results.scenarios.size(); ++s) {
            for (std::size_t p = 0; p < results.specs[s].size(); ++p) {
                for (std::size_t r = 0; r < results.cells[s][p].size(); ++r) {
                    const auto& cell = results.cells[s][p][r];
                    if (!cell.failed) continue;
                    errors.push_back(json{{"scenario", results.scenarios[s]},
                                          {"pipeline", results.specs[s][p].id()},
                                          {"replicate", r},
                                          {"error", cell.error}});
                }
            }
        }
        meta["errors"] = errors;

        if (const auto* run = std::get_if<GermanRun>(&results.config.dataset)) {
            const auto summary = load_german_detailed(run->config).second;
            meta["data_summary"] = json{
                {"rows", summary.rows},
                {"feature_count", summary.feature_count},
                {"measured", json{{"default_rate", summary.default_rate},
                                  {"a1_rate", summary.a1_rate},
                                  {"a2_rate", summary.a2_rate},
                                  {"or_rate", summary.or_rate},
                                  {"and_rate", summary.and_rate},
                                  {"xor_rate", summary.xor_rate}}},
                {"reference", json{{"default_rate", kGermanReferenceDefaultRate},
                                   {"a1_rate", kGermanReferenceA1Rate},
                                   {"a2_rate", kGermanReferenceA2Rate},
                                   {"or_rate", kGermanReferenceOrRate},
                                   {"and_rate", kGermanReferenceAndRate},
                                   {"xor_rate", kGermanReferenceXorRate},
                                   {"feature_count", kGermanReferenceFeatureCount}}},
            };
        } else {
            meta["data_summary"] = json{{"analytic_default_rate", simulation_default_rate()}};
        }

        auto out = open_out("run_metadata.json");
        out << meta.dump(2) << '\n';
    }
}

std::vector<ReplicateRecord> read_replicates_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw DataError("replicates csv: empty file '" + path + "'");
    std::vector<ReplicateRecord> out;
    std::size_t row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::string cur;
        for (char ch : line) {
            if (ch == ',') {
                fields.push_back(cur);
                cur.clear();
            } else if (ch != '\r') {
                cur.push_back(ch);
            }
        }
        fields.push_back(cur);
        if (fields.size() != 5) {
            throw DataError("replicates csv: row " + std::to_string(row_no) + " has " +
                            std::to_string(fields.size()) + " fields, expected 5");
        }
        ReplicateRecord rec;
        rec.scenario = fields[0];
        rec.pipeline_id = fields[1];
        rec.replicate = std::stoi(fields[2]);
        rec.metric = fields[3];
        if (fields[4] != "NA") {
            double v = 0.0;
            auto [ptr, pec] = std::from_chars(fields[4].data(), fields[4].data() + fields[4].size(), v);
            if (pec != std::errc() || ptr != fields[4].data() + fields[4].size()) {
                throw DataError("replicates csv: bad value '" + fields[4] + "' at row " + std::to_string(row_no));
            }
            rec.value = v;
        }
        out.push_back(std::move(rec));
    }
    return out;
}

}  // namespace fairbench
