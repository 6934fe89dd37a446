#include <CLI11.hpp>

#include <charconv>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "fairbench/errors.hpp"
#include "fairbench/harness.hpp"

namespace {

using namespace fairbench;

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : csv) {
        if (ch == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

struct StageFlags {
    std::string pre = "reweigh,diremover";
    std::string in = "adversarial,pireg,metafair";
    std::string post = "reject,eqodds,platt";
    std::string scenario = "all";
    double di_lambda = 1.0;
    double ro_theta = 0.6;
    int parallelism = static_cast<int>(std::thread::hardware_concurrency());
};

void add_stage_flags(CLI::App* cmd, StageFlags& flags) {
    cmd->add_option("--pre", flags.pre, "Comma list of pre-processors (reweigh,diremover); 'none' for empty");
    cmd->add_option("--in", flags.in, "Comma list of in-processors (logistic,adversarial,pireg,metafair); 'none' for empty");
    cmd->add_option("--post", flags.post, "Comma list of post-processors (reject,eqodds,platt); 'none' for empty");
    cmd->add_option("--scenario", flags.scenario, "single|or|and|xor|all");
    cmd->add_option("--di-lambda", flags.di_lambda, "Disparate-impact repair strength in [0,1]")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--ro-theta", flags.ro_theta, "Reject-option band parameter in (0.5,1]");
    cmd->add_option("--parallelism", flags.parallelism, "Max concurrent pipelines");
}

void apply_stage_flags(ExperimentConfig& cfg, const StageFlags& flags) {
    cfg.pres.clear();
    cfg.ins.clear();
    cfg.posts.clear();
    for (const auto& id : split_list(flags.pre)) {
        if (id == "none") continue;
        if (id == "reweigh") {
            cfg.pres.push_back(ReweighSpec{});
        } else if (id == "diremover") {
            DiRemoverSpec s;
            s.params.lambda = flags.di_lambda;
            cfg.pres.push_back(s);
        } else {
            throw ConfigError("unknown pre-processor '" + id + "'");
        }
    }
    for (const auto& id : split_list(flags.in)) {
        if (id == "none") continue;
        if (id == "logistic") {
            cfg.ins.push_back(LogisticSpec{});
        } else if (id == "adversarial") {
            cfg.ins.push_back(AdversarialSpec{});
        } else if (id == "pireg") {
            cfg.ins.push_back(PiRegSpec{});
        } else if (id == "metafair") {
            cfg.ins.push_back(MetaFairSpec{});
        } else {
            throw ConfigError("unknown in-processor '" + id + "'");
        }
    }
    for (const auto& id : split_list(flags.post)) {
        if (id == "none") continue;
        if (id == "reject") {
            RejectOptionSpec s;
            s.params.theta = flags.ro_theta;
            cfg.posts.push_back(s);
        } else if (id == "eqodds") {
            cfg.posts.push_back(EqOddsSpec{});
        } else if (id == "platt") {
            cfg.posts.push_back(PlattSpec{});
        } else {
            throw ConfigError("unknown post-processor '" + id + "'");
        }
    }
    if (flags.scenario == "all") {
        cfg.scenarios = {"single", "or", "and", "xor"};
    } else {
        cfg.scenarios = split_list(flags.scenario);
        if (cfg.scenarios.empty()) throw ConfigError("scenario list is empty");
        for (const auto& s : cfg.scenarios) {
            if (s != "single" && s != "or" && s != "and" && s != "xor") {
                throw ConfigError("unknown scenario '" + s + "'");
            }
        }
    }
    cfg.parallelism = std::max(1, flags.parallelism);
}

void print_summary(const ExperimentResults& results) {
    std::cout << "pipelines per scenario: " << (results.specs.empty() ? 0 : results.specs[0].size()) << "\n";
    for (const auto& row : results.aggregates) {
        std::cout << row.scenario << "  " << row.pipeline_id << "  acc=";
        std::cout << (row.accuracy ? std::to_string(*row.accuracy).substr(0, 6) : "NA");
        std::cout << "  sp=" << (row.sp ? std::to_string(*row.sp).substr(0, 6) : "NA") << "\n";
    }
}

int run_pareto(const std::string& in_dir, const std::string& scenario) {
    namespace fs = std::filesystem;
    std::vector<std::string> scenarios;
    if (scenario == "all") {
        for (const auto& s : {"single", "or", "and", "xor"}) {
            if (fs::exists(fs::path(in_dir) / ("replicates_" + std::string(s) + ".csv"))) scenarios.push_back(s);
        }
        if (scenarios.empty()) throw DataError("no replicates_<scenario>.csv files in '" + in_dir + "'");
    } else {
        scenarios.push_back(scenario);
    }
    for (const auto& sc : scenarios) {
        const auto records = read_replicates_csv((fs::path(in_dir) / ("replicates_" + sc + ".csv")).string());
        std::map<std::string, std::map<std::string, std::vector<double>>> per_pipeline;
        for (const auto& rec : records) {
            if (rec.value) per_pipeline[rec.pipeline_id][rec.metric].push_back(*rec.value);
        }
        std::vector<ParetoPoint> points;
        for (auto& [id, metrics] : per_pipeline) {
            const auto acc = lower_median(metrics["accuracy"]);
            const auto sp = lower_median(metrics["sp"]);
            if (acc && sp) points.push_back({*acc, *sp, id});
        }
        std::cout << "# scenario: " << sc << "\npipeline,accuracy,sp\n";
        for (const auto& pt : pareto_frontier(points)) {
            std::cout << pt.pipeline_id << ',' << pt.accuracy << ',' << pt.sp << '\n';
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fair credit scoring benchmark: logical and multistage bias-mitigation pipelines"};
    app.require_subcommand(1);

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Run the simulation study grid");
    int sim_n = 5000, sim_replicates = 50;
    std::uint64_t sim_seed = 1;
    std::string sim_out;
    StageFlags sim_flags;
    simulate->add_option("--n", sim_n, "Rows per replicate");
    simulate->add_option("--replicates", sim_replicates, "Simulation replicates");
    simulate->add_option("--seed", sim_seed, "Base seed");
    simulate->add_option("--out", sim_out, "Output directory")->required();
    add_stage_flags(simulate, sim_flags);

    // german
    auto* german = app.add_subcommand("german", "Run the credit data case study grid");
    std::string german_data, german_out;
    int german_cutoff = 25, german_replicates = 1;
    std::uint64_t german_seed = 1;
    StageFlags german_flags;
    german->add_option("--data", german_data, "Path to the UCI statlog credit file")->required();
    german->add_option("--out", german_out, "Output directory")->required();
    german->add_option("--age-cutoff", german_cutoff, "Unprivileged when age <= cutoff");
    german->add_option("--replicates", german_replicates, "Re-split replicates");
    german->add_option("--seed", german_seed, "Base seed");
    add_stage_flags(german, german_flags);

    // run
    auto* run = app.add_subcommand("run", "Run an experiment from a config file");
    std::string config_path;
    run->add_option("--config", config_path, "Experiment config (JSON)")->required();

    // pareto
    auto* pareto = app.add_subcommand("pareto", "Recompute the Pareto frontier from an output directory");
    std::string pareto_in, pareto_scenario = "all";
    pareto->add_option("--in", pareto_in, "Directory with replicates_<scenario>.csv files")->required();
    pareto->add_option("--scenario", pareto_scenario, "single|or|and|xor|all");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (simulate->parsed()) {
            ExperimentConfig cfg;
            SimConfig sim;
            sim.n = sim_n;
            sim.seed = sim_seed;
            sim.replicates = sim_replicates;
            cfg.dataset = sim;
            cfg.out_dir = sim_out;
            apply_stage_flags(cfg, sim_flags);
            print_summary(run_experiment(cfg));
        } else if (german->parsed()) {
            ExperimentConfig cfg;
            GermanRun gr;
            gr.config.path = german_data;
            gr.config.age_cutoff = german_cutoff;
            gr.seed = german_seed;
            gr.replicates = german_replicates;
            cfg.dataset = gr;
            cfg.out_dir = german_out;
            apply_stage_flags(cfg, german_flags);
            print_summary(run_experiment(cfg));
        } else if (run->parsed()) {
            const auto cfg = load_experiment_config(config_path);
            print_summary(run_experiment(cfg));
        } else if (pareto->parsed()) {
            return run_pareto(pareto_in, pareto_scenario);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
