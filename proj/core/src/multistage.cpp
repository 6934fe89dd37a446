#include "fairbench/multistage.hpp"

#include <cmath>
#include <sstream>

#include "fairbench/rng.hpp"

namespace fairbench {

std::string stage_id(const PreSpec& s) {
    return std::holds_alternative<ReweighSpec>(s) ? "reweigh" : "diremover";
}

std::string stage_id(const InSpec& s) {
    if (std::holds_alternative<LogisticSpec>(s)) return "logistic";
    if (std::holds_alternative<AdversarialSpec>(s)) return "adversarial";
    if (std::holds_alternative<PiRegSpec>(s)) return "pireg";
    return "metafair";
}

std::string stage_id(const PostSpec& s) {
    if (std::holds_alternative<RejectOptionSpec>(s)) return "reject";
    if (std::holds_alternative<EqOddsSpec>(s)) return "eqodds";
    return "platt";
}

std::string PipelineSpec::id() const {
    std::string out;
    auto add = [&out](const std::string& part) {
        if (!out.empty()) out += '+';
        out += part;
    };
    if (pre) add(stage_id(*pre));
    if (in) add(stage_id(*in));
    if (post) add(stage_id(*post));
    if (out.empty()) out = "baseline";
    return out;
}

std::string PipelineSpec::scenario() const {
    return lp ? lp->name() : "single";
}

std::string PipelineSpec::combination_class() const {
    const bool has_in = in && !std::holds_alternative<LogisticSpec>(*in);
    const int stages = (pre ? 1 : 0) + (has_in ? 1 : 0) + (post ? 1 : 0);
    if (stages == 0) return "baseline";
    if (stages == 1) return "single";
    if (pre && has_in && !post) return "PI";
    if (pre && post && !has_in) return "PP";
    if (has_in && post && !pre) return "IP";
    return "invalid";
}

namespace {

std::uint64_t fingerprint_labels(const std::vector<int>& labels) {
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    for (int v : labels) {
        h ^= static_cast<std::uint64_t>(v) + 0x9eULL;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

EvaluationReport run_pipeline(const PipelineSpec& spec, const Dataset& train0,
                              const Dataset& val0, const Dataset& test0) {
    if (spec.combination_class() == "invalid") {
        throw std::invalid_argument("pipeline: at most two stages may carry a fairness processor");
    }
    EvaluationReport report;
    report.pipeline_id = spec.id();
    report.scenario = spec.scenario();
    auto& meta = report.metadata;
    meta["combination_class"] = spec.combination_class();
    meta["seed"] = std::to_string(spec.seed);

    const std::string eval_col =
        spec.eval_column.empty() ? train0.sensitive_names().front() : spec.eval_column;
    meta["eval_column"] = eval_col;

    // Stage 1: logical processor on every split.
    Dataset train = train0, val = val0, test = test0;
    std::string mitigation_col = eval_col;
    if (spec.lp) {
        if (train.sensitive_names().size() < spec.lp->arity()) {
            throw std::invalid_argument("pipeline [lp]: not enough sensitive columns");
        }
        std::vector<std::string> columns(train.sensitive_names().begin(),
                                         train.sensitive_names().begin() + spec.lp->arity());
        try {
            train = apply_lp(*spec.lp, train, columns);
            val = apply_lp(*spec.lp, val, columns);
            test = apply_lp(*spec.lp, test, columns);
        } catch (const std::exception& e) {
            throw std::runtime_error("pipeline [lp]: " + std::string(e.what()));
        }
        mitigation_col = spec.lp->kind == LpKind::kIdentity ? columns.front() : spec.lp->name();
    }
    meta["mitigation_column"] = mitigation_col;

    // Stage 2: pre-processor fit on train. The repairer also transforms the
    // other splits (a model trained on repaired features must score repaired
    // features); reweighing only changes training weights.
    std::optional<Repairer> repairer;
    if (spec.pre) {
        try {
            if (std::holds_alternative<ReweighSpec>(*spec.pre)) {
                train = reweigh(train, mitigation_col);
                meta["pre"] = "reweigh";
            } else {
                const auto& di = std::get<DiRemoverSpec>(*spec.pre);
                auto [repaired, rep] = di_remove(train, mitigation_col, di.params);
                train = std::move(repaired);
                repairer = std::move(rep);
                val = repairer->transform(val);
                test = repairer->transform(test);
                meta["pre"] = "diremover(lambda=" + format_double(di.params.lambda) + ")";
            }
        } catch (const std::exception& e) {
            throw std::runtime_error("pipeline [pre]: " + std::string(e.what()));
        }
    }

    // Stage 3: in-processor (baseline logistic when absent).
    ScoreModel model;
    try {
        const InSpec in_spec = spec.in ? *spec.in : InSpec(LogisticSpec{});
        if (const auto* s = std::get_if<LogisticSpec>(&in_spec)) {
            model = train_logistic(train, s->params);
        } else if (const auto* s = std::get_if<AdversarialSpec>(&in_spec)) {
            model = train_adversarial(train, mitigation_col, s->clf, s->adv, spec.seed);
        } else if (const auto* s = std::get_if<PiRegSpec>(&in_spec)) {
            model = train_pi_regularized(train, mitigation_col, s->clf, s->eta);
        } else {
            model = train_metafair(train, mitigation_col, std::get<MetaFairSpec>(in_spec).params);
        }
    } catch (const std::exception& e) {
        throw std::runtime_error("pipeline [in]: " + std::string(e.what()));
    }
    meta["in"] = model.metadata();

    // Stage 4: decision threshold maximizing validation balanced accuracy,
    // unless training fixed per-group cutoffs already.
    try {
        if (!model.thresholds_fixed()) {
            const double tau = select_threshold(model.score_all(val), val, mitigation_col);
            model.set_threshold(tau);
            meta["threshold"] = format_double(tau);
        } else {
            const auto& gt = *model.group_thresholds();
            meta["threshold"] = "group(tau0=" + format_double(gt.tau0) + ",tau1=" + format_double(gt.tau1) + ")";
        }
    } catch (const std::exception& e) {
        throw std::runtime_error("pipeline [threshold]: " + std::string(e.what()));
    }

    // Stage 5 fits the post-processor on validation; stage 6 predicts the
    // test split and reads its labels for the first time.
    std::vector<int> yhat;
    try {
        if (!spec.post) {
            yhat = model.predict(test);
        } else if (const auto* s = std::get_if<RejectOptionSpec>(&*spec.post)) {
            // Probabilities re-centered so the selected threshold sits at 0.5.
            const auto scores = model.score_all(test);
            std::vector<double> recentered(scores.size());
            for (std::size_t i = 0; i < scores.size(); ++i) {
                recentered[i] = recenter_probability(scores[i], model.threshold_for(test, i));
            }
            yhat = reject_option(recentered, test.sensitive(mitigation_col), s->params);
            meta["post"] = "reject(theta=" + format_double(s->params.theta) + ")";
        } else if (std::holds_alternative<EqOddsSpec>(*spec.post)) {
            const auto mix = fit_eq_odds(model.predict(val), val.label(), val.sensitive(mitigation_col),
                                         val.weights());
            yhat = apply_eq_odds(mix, model.predict(test), test.sensitive(mitigation_col),
                                 rng::mix_key(spec.seed, 0x706f7374ULL));
            meta["post"] = "eqodds(fpr=" + format_double(mix.target_fpr) +
                           ",tpr=" + format_double(mix.target_tpr) + ")";
        } else {
            const auto gp = fit_group_platt(model.score_all(val), val.label(),
                                            val.sensitive(mitigation_col), val.weights());
            const auto calibrated = apply_group_platt(gp, model.score_all(test), test.sensitive(mitigation_col));
            yhat.resize(calibrated.size());
            for (std::size_t i = 0; i < calibrated.size(); ++i) yhat[i] = calibrated[i] > 0.5 ? 1 : 0;
            meta["post"] = std::string("platt") + (gp.pooled_fallback[0] || gp.pooled_fallback[1] ? "(pooled_fallback)" : "");
        }
    } catch (const std::exception& e) {
        throw std::runtime_error("pipeline [post]: " + std::string(e.what()));
    }

    report.prediction_fingerprint = fingerprint_labels(yhat);

    const auto& y = test.label();
    const auto& a = test.sensitive(eval_col);
    const auto& w = test.weights();
    auto guard = [&meta](const char* name, auto&& fn) -> std::optional<double> {
        try {
            return fn();
        } catch (const MetricUndefinedError& e) {
            meta[std::string("undefined_") + name] = e.what();
            return std::nullopt;
        }
    };
    report.accuracy = guard("accuracy", [&] { return accuracy_from(yhat, y, w); });
    report.balanced_accuracy = guard("balanced_accuracy", [&] { return balanced_accuracy_from(yhat, y, a, w); });
    report.ind = guard("ind", [&] { return ind_from(yhat, a, w); });
    report.sp = guard("sp", [&] { return sp_from(yhat, y, a, w); });
    report.sp_abs = guard("sp_abs", [&] { return sp_abs_from(yhat, y, a, w); });
    report.sf = guard("sf", [&] { return sf_from(yhat, y, a, w); });
    report.independence_quotient =
        guard("independence_quotient", [&] { return independence_quotient_from(yhat, a, w); });
    report.confusion = confusion_from(yhat, y, a, w);
    return report;
}

std::vector<PipelineSpec> enumerate_grid(const std::vector<PreSpec>& pres,
                                         const std::vector<InSpec>& ins,
                                         const std::vector<PostSpec>& posts,
                                         const std::vector<std::optional<LogicalProcessor>>& lps) {
    std::vector<PipelineSpec> out;
    const std::vector<std::optional<LogicalProcessor>> scenarios =
        lps.empty() ? std::vector<std::optional<LogicalProcessor>>{std::nullopt} : lps;
    for (const auto& lp : scenarios) {
        PipelineSpec base;
        base.lp = lp;
        if (pres.empty() && ins.empty() && posts.empty()) {
            out.push_back(base);  // nothing configured: evaluate the baseline
            continue;
        }
        for (const auto& p : pres) {
            auto s = base;
            s.pre = p;
            out.push_back(std::move(s));
        }
        for (const auto& i : ins) {
            auto s = base;
            s.in = i;
            out.push_back(std::move(s));
        }
        for (const auto& q : posts) {
            auto s = base;
            s.post = q;
            out.push_back(std::move(s));
        }
        for (const auto& p : pres) {
            for (const auto& i : ins) {
                auto s = base;
                s.pre = p;
                s.in = i;
                out.push_back(std::move(s));
            }
        }
        for (const auto& p : pres) {
            for (const auto& q : posts) {
                auto s = base;
                s.pre = p;
                s.post = q;
                out.push_back(std::move(s));
            }
        }
        for (const auto& i : ins) {
            for (const auto& q : posts) {
                auto s = base;
                s.in = i;
                s.post = q;
                out.push_back(std::move(s));
            }
        }
    }
    return out;
}

}  // namespace fairbench
