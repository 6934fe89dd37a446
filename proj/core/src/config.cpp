#include <json.hpp>

#include "fairbench/errors.hpp"
#include "fairbench/harness.hpp"

#include <fstream>
#include <set>

// Config document <-> ExperimentConfig. Parsing is strict: unknown keys are
// configuration errors, and every omitted field lands on the documented
// default so run_metadata.json always shows fully resolved values.

namespace fairbench {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key())) {
            throw ConfigError("config: unknown key '" + it.key() + "' in " + where);
        }
    }
}

double get_number(const json& obj, const char* key, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) throw ConfigError(std::string("config: '") + key + "' must be a number");
    return obj[key].get<double>();
}

int get_int(const json& obj, const char* key, int fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number_integer()) throw ConfigError(std::string("config: '") + key + "' must be an integer");
    return obj[key].get<int>();
}

bool get_bool(const json& obj, const char* key, bool fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_boolean()) throw ConfigError(std::string("config: '") + key + "' must be a boolean");
    return obj[key].get<bool>();
}

std::string get_string(const json& obj, const char* key, const std::string& fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_string()) throw ConfigError(std::string("config: '") + key + "' must be a string");
    return obj[key].get<std::string>();
}

LogisticParams parse_logistic_params(const json& obj) {
    LogisticParams p;
    p.l2 = get_number(obj, "l2", p.l2);
    p.learning_rate = get_number(obj, "learning_rate", p.learning_rate);
    p.max_epochs = get_int(obj, "max_epochs", p.max_epochs);
    p.tol = get_number(obj, "tol", p.tol);
    return p;
}

const std::set<std::string> kLogisticKeys = {"id", "l2", "learning_rate", "max_epochs", "tol"};

PreSpec parse_pre(const json& obj) {
    const std::string id = get_string(obj, "id", "");
    if (id == "reweigh") {
        check_keys(obj, {"id"}, "pre processor 'reweigh'");
        return ReweighSpec{};
    }
    if (id == "diremover") {
        check_keys(obj, {"id", "lambda", "quantile_grid", "columns", "include_binary"}, "pre processor 'diremover'");
        DiRemoverSpec s;
        s.params.lambda = get_number(obj, "lambda", s.params.lambda);
        s.params.quantile_grid = get_int(obj, "quantile_grid", s.params.quantile_grid);
        s.params.include_binary = get_bool(obj, "include_binary", s.params.include_binary);
        if (obj.contains("columns")) {
            for (const auto& c : obj["columns"]) s.params.columns.push_back(c.get<std::string>());
        }
        return s;
    }
    throw ConfigError("config: unknown pre-processor '" + id + "'");
}

InSpec parse_in(const json& obj) {
    const std::string id = get_string(obj, "id", "");
    if (id == "logistic") {
        check_keys(obj, kLogisticKeys, "in processor 'logistic'");
        return LogisticSpec{parse_logistic_params(obj)};
    }
    if (id == "adversarial") {
        auto keys = kLogisticKeys;
        keys.insert({"alpha", "decay_alpha", "projection", "inputs", "adversary_learning_rate"});
        check_keys(obj, keys, "in processor 'adversarial'");
        AdversarialSpec s;
        s.clf = parse_logistic_params(obj);
        s.adv.alpha = get_number(obj, "alpha", s.adv.alpha);
        s.adv.decay_alpha = get_bool(obj, "decay_alpha", s.adv.decay_alpha);
        s.adv.projection = get_bool(obj, "projection", s.adv.projection);
        s.adv.adversary_learning_rate = get_number(obj, "adversary_learning_rate", s.adv.adversary_learning_rate);
        const std::string mode = get_string(obj, "inputs", "prediction_only");
        if (mode == "prediction_only") {
            s.adv.inputs = AdvInput::kPredictionOnly;
        } else if (mode == "prediction_and_label") {
            s.adv.inputs = AdvInput::kPredictionAndLabel;
        } else {
            throw ConfigError("config: adversarial inputs must be prediction_only or prediction_and_label");
        }
        return s;
    }
    if (id == "pireg") {
        auto keys = kLogisticKeys;
        keys.insert("eta");
        check_keys(obj, keys, "in processor 'pireg'");
        PiRegSpec s;
        s.clf = parse_logistic_params(obj);
        s.eta = get_number(obj, "eta", s.eta);
        return s;
    }
    if (id == "metafair") {
        auto keys = kLogisticKeys;
        keys.insert({"metric", "tau_rule", "group_threshold_grid", "penalty_grid"});
        check_keys(obj, keys, "in processor 'metafair'");
        MetaFairSpec s;
        s.params.base = parse_logistic_params(obj);
        s.params.metric = fairness_metric_by_name(get_string(obj, "metric", "separation"));
        s.params.tau_rule = get_number(obj, "tau_rule", s.params.tau_rule);
        s.params.group_threshold_grid = get_int(obj, "group_threshold_grid", s.params.group_threshold_grid);
        if (obj.contains("penalty_grid")) {
            for (const auto& v : obj["penalty_grid"]) s.params.penalty_grid.push_back(v.get<double>());
        }
        return s;
    }
    throw ConfigError("config: unknown in-processor '" + id + "'");
}

PostSpec parse_post(const json& obj) {
    const std::string id = get_string(obj, "id", "");
    if (id == "reject") {
        check_keys(obj, {"id", "theta"}, "post processor 'reject'");
        RejectOptionSpec s;
        s.params.theta = get_number(obj, "theta", s.params.theta);
        return s;
    }
    if (id == "eqodds") {
        check_keys(obj, {"id"}, "post processor 'eqodds'");
        return EqOddsSpec{};
    }
    if (id == "platt") {
        check_keys(obj, {"id"}, "post processor 'platt'");
        return PlattSpec{};
    }
    throw ConfigError("config: unknown post-processor '" + id + "'");
}

json logistic_to_json(const LogisticParams& p) {
    return json{{"l2", p.l2}, {"learning_rate", p.learning_rate}, {"max_epochs", p.max_epochs}, {"tol", p.tol}};
}

json pre_to_json(const PreSpec& s) {
    if (std::holds_alternative<ReweighSpec>(s)) return json{{"id", "reweigh"}};
    const auto& di = std::get<DiRemoverSpec>(s);
    json j{{"id", "diremover"},
           {"lambda", di.params.lambda},
           {"quantile_grid", di.params.quantile_grid},
           {"include_binary", di.params.include_binary}};
    if (!di.params.columns.empty()) j["columns"] = di.params.columns;
    return j;
}

json in_to_json(const InSpec& s) {
    if (const auto* p = std::get_if<LogisticSpec>(&s)) {
        json j = logistic_to_json(p->params);
        j["id"] = "logistic";
        return j;
    }
    if (const auto* p = std::get_if<AdversarialSpec>(&s)) {
        json j = logistic_to_json(p->clf);
        j["id"] = "adversarial";
        j["alpha"] = p->adv.alpha;
        j["decay_alpha"] = p->adv.decay_alpha;
        j["projection"] = p->adv.projection;
        j["adversary_learning_rate"] = p->adv.adversary_learning_rate;
        j["inputs"] = p->adv.inputs == AdvInput::kPredictionAndLabel ? "prediction_and_label" : "prediction_only";
        return j;
    }
    if (const auto* p = std::get_if<PiRegSpec>(&s)) {
        json j = logistic_to_json(p->clf);
        j["id"] = "pireg";
        j["eta"] = p->eta;
        return j;
    }
    const auto& mf = std::get<MetaFairSpec>(s);
    json j = logistic_to_json(mf.params.base);
    j["id"] = "metafair";
    j["metric"] = fairness_metric_name(mf.params.metric);
    j["tau_rule"] = mf.params.tau_rule;
    j["group_threshold_grid"] = mf.params.group_threshold_grid;
    if (!mf.params.penalty_grid.empty()) j["penalty_grid"] = mf.params.penalty_grid;
    return j;
}

json post_to_json(const PostSpec& s) {
    if (const auto* p = std::get_if<RejectOptionSpec>(&s)) {
        return json{{"id", "reject"}, {"theta", p->params.theta}};
    }
    if (std::holds_alternative<EqOddsSpec>(s)) return json{{"id", "eqodds"}};
    return json{{"id", "platt"}};
}

}  // namespace

std::uint64_t ExperimentConfig::base_seed() const {
    if (const auto* sim = std::get_if<SimConfig>(&dataset)) return sim->seed;
    return std::get<GermanRun>(dataset).seed;
}

int ExperimentConfig::replicates() const {
    if (const auto* sim = std::get_if<SimConfig>(&dataset)) return sim->replicates;
    return std::get<GermanRun>(dataset).replicates;
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    check_keys(root, {"dataset", "scenarios", "pre", "in", "post", "split", "output", "parallelism", "radar_pair"},
               "the top level");

    ExperimentConfig cfg;
    if (!root.contains("dataset") || !root["dataset"].is_object()) {
        throw ConfigError("config: 'dataset' object is required");
    }
    const json& ds = root["dataset"];
    const std::string kind = get_string(ds, "kind", "");
    if (kind == "simulation") {
        check_keys(ds, {"kind", "n", "seed", "replicates"}, "dataset");
        SimConfig sim;
        sim.n = get_int(ds, "n", sim.n);
        sim.seed = static_cast<std::uint64_t>(get_int(ds, "seed", static_cast<int>(sim.seed)));
        sim.replicates = get_int(ds, "replicates", sim.replicates);
        cfg.dataset = sim;
    } else if (kind == "german") {
        check_keys(ds, {"kind", "path", "age_cutoff", "seed", "replicates"}, "dataset");
        GermanRun run;
        run.config.path = get_string(ds, "path", "");
        if (run.config.path.empty()) throw ConfigError("config: german dataset requires 'path'");
        run.config.age_cutoff = get_int(ds, "age_cutoff", run.config.age_cutoff);
        run.seed = static_cast<std::uint64_t>(get_int(ds, "seed", static_cast<int>(run.seed)));
        run.replicates = get_int(ds, "replicates", run.replicates);
        cfg.dataset = run;
    } else {
        throw ConfigError("config: dataset kind must be 'simulation' or 'german'");
    }

    if (root.contains("scenarios")) {
        cfg.scenarios.clear();
        for (const auto& s : root["scenarios"]) {
            const std::string name = s.get<std::string>();
            if (name != "single" && name != "or" && name != "and" && name != "xor") {
                throw ConfigError("config: unknown scenario '" + name + "'");
            }
            cfg.scenarios.push_back(name);
        }
        if (cfg.scenarios.empty()) throw ConfigError("config: scenarios must be nonempty");
    }
    if (root.contains("pre")) {
        for (const auto& p : root["pre"]) cfg.pres.push_back(parse_pre(p));
    }
    if (root.contains("in")) {
        for (const auto& p : root["in"]) cfg.ins.push_back(parse_in(p));
    }
    if (root.contains("post")) {
        for (const auto& p : root["post"]) cfg.posts.push_back(parse_post(p));
    }
    if (root.contains("split")) {
        check_keys(root["split"], {"train", "val", "test"}, "split");
        cfg.split.train = get_number(root["split"], "train", cfg.split.train);
        cfg.split.val = get_number(root["split"], "val", cfg.split.val);
        cfg.split.test = get_number(root["split"], "test", cfg.split.test);
    }
    cfg.out_dir = get_string(root, "output", "");
    cfg.parallelism = get_int(root, "parallelism", 1);
    if (cfg.parallelism < 1) throw ConfigError("config: parallelism must be >= 1");
    if (root.contains("radar_pair")) {
        const auto& rp = root["radar_pair"];
        if (!rp.is_array() || rp.size() != 2) throw ConfigError("config: radar_pair must list two processor ids");
        cfg.radar_pair = {rp[0].get<std::string>(), rp[1].get<std::string>()};
    }
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_experiment_config(text);
}

std::string experiment_config_to_json(const ExperimentConfig& cfg) {
    json root;
    if (const auto* sim = std::get_if<SimConfig>(&cfg.dataset)) {
        root["dataset"] = json{{"kind", "simulation"},
                               {"n", sim->n},
                               {"seed", static_cast<std::int64_t>(sim->seed)},
                               {"replicates", sim->replicates}};
    } else {
        const auto& run = std::get<GermanRun>(cfg.dataset);
        root["dataset"] = json{{"kind", "german"},
                               {"path", run.config.path},
                               {"age_cutoff", run.config.age_cutoff},
                               {"seed", static_cast<std::int64_t>(run.seed)},
                               {"replicates", run.replicates}};
    }
    root["scenarios"] = cfg.scenarios;
    root["pre"] = json::array();
    for (const auto& p : cfg.pres) root["pre"].push_back(pre_to_json(p));
    root["in"] = json::array();
    for (const auto& p : cfg.ins) root["in"].push_back(in_to_json(p));
    root["post"] = json::array();
    for (const auto& p : cfg.posts) root["post"].push_back(post_to_json(p));
    root["split"] = json{{"train", cfg.split.train}, {"val", cfg.split.val}, {"test", cfg.split.test}};
    root["output"] = cfg.out_dir;
    root["parallelism"] = cfg.parallelism;
    root["radar_pair"] = cfg.radar_pair;
    return root.dump(2);
}

}  // namespace fairbench
