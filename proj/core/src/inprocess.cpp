#include "fairbench/inprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace fairbench {

namespace gd {

Design make_design(std::vector<double> x, std::size_t d, std::vector<int> y, std::vector<double> w) {
    Design dz;
    dz.d = d;
    dz.n = y.size();
    if (x.size() != dz.n * d || w.size() != dz.n) throw std::invalid_argument("design: shape mismatch");
    dz.x = std::move(x);
    dz.y = std::move(y);
    dz.w = std::move(w);
    for (double wi : dz.w) dz.total_weight += wi;
    if (dz.total_weight <= 0.0) throw std::invalid_argument("design: zero total weight");
    return dz;
}

double linear_score(const Design& dz, std::size_t i, std::span<const double> theta) {
    double t = theta[dz.d];
    const double* row = dz.x.data() + i * dz.d;
    for (std::size_t j = 0; j < dz.d; ++j) t += theta[j] * row[j];
    return t;
}

double sigmoid(double t) {
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

namespace {

// log(1 + exp(t)) without overflow.
double softplus(double t) {
    if (t > 0.0) return t + std::log1p(std::exp(-t));
    return std::log1p(std::exp(t));
}

double l2_half_norm(std::span<const double> theta) {
    double s = 0.0;
    for (double v : theta) s += v * v;
    return 0.5 * s;
}

}  // namespace

double LogisticLoss::value(std::span<const double> theta) const {
    const Design& dz = *design;
    double loss = 0.0;
    for (std::size_t i = 0; i < dz.n; ++i) {
        const double t = linear_score(dz, i, theta);
        loss += dz.w[i] * (softplus(t) - static_cast<double>(dz.y[i]) * t);
    }
    return loss / dz.total_weight + l2 * l2_half_norm(theta);
}

void LogisticLoss::gradient(std::span<const double> theta, std::span<double> out) const {
    const Design& dz = *design;
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 0; i < dz.n; ++i) {
        const double p = sigmoid(linear_score(dz, i, theta));
        const double c = dz.w[i] * (p - static_cast<double>(dz.y[i]));
        const double* row = dz.x.data() + i * dz.d;
        for (std::size_t j = 0; j < dz.d; ++j) out[j] += c * row[j];
        out[dz.d] += c;
    }
    for (std::size_t j = 0; j <= dz.d; ++j) out[j] = out[j] / dz.total_weight + l2 * theta[j];
}

void PiRegLoss::refresh(std::span<const double> theta) {
    const Design& dz = *design;
    const auto& a = *group;
    double mass[2] = {0.0, 0.0};
    double mean_p[2] = {0.0, 0.0};
    double mean_all = 0.0;
    for (std::size_t i = 0; i < dz.n; ++i) {
        const double p = sigmoid(linear_score(dz, i, theta));
        mass[a[i]] += dz.w[i];
        mean_p[a[i]] += dz.w[i] * p;
        mean_all += dz.w[i] * p;
    }
    for (int g = 0; g < 2; ++g) {
        if (mass[g] <= 0.0) throw std::invalid_argument("pi regularizer: sensitive group " + std::to_string(g) + " is empty");
        mean_p[g] /= mass[g];
    }
    mean_all /= dz.total_weight;
    auto safe_log = [](double num, double den) {
        constexpr double kEps = 1e-12;
        return std::log(std::max(num, kEps) / std::max(den, kEps));
    };
    for (int g = 0; g < 2; ++g) {
        log_ratio[0 * 2 + g] = safe_log(1.0 - mean_p[g], 1.0 - mean_all);  // y = 0
        log_ratio[1 * 2 + g] = safe_log(mean_p[g], mean_all);              // y = 1
    }
}

double PiRegLoss::penalty(std::span<const double> theta) const {
    const Design& dz = *design;
    const auto& a = *group;
    double pen = 0.0;
    for (std::size_t i = 0; i < dz.n; ++i) {
        const double p = sigmoid(linear_score(dz, i, theta));
        pen += dz.w[i] * (p * log_ratio[2 + a[i]] + (1.0 - p) * log_ratio[a[i]]);
    }
    return pen / dz.total_weight;
}

double PiRegLoss::value(std::span<const double> theta) const {
    const Design& dz = *design;
    const auto& a = *group;
    double loss = 0.0;
    for (std::size_t i = 0; i < dz.n; ++i) {
        const double t = linear_score(dz, i, theta);
        const double p = sigmoid(t);
        loss += dz.w[i] * (softplus(t) - static_cast<double>(dz.y[i]) * t +
                           eta * (p * log_ratio[2 + a[i]] + (1.0 - p) * log_ratio[a[i]]));
    }
    return loss / dz.total_weight + l2 * l2_half_norm(theta);
}

void PiRegLoss::gradient(std::span<const double> theta, std::span<double> out) const {
    const Design& dz = *design;
    const auto& a = *group;
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 0; i < dz.n; ++i) {
        const double p = sigmoid(linear_score(dz, i, theta));
        const double pi_coef = (log_ratio[2 + a[i]] - log_ratio[a[i]]) * p * (1.0 - p);
        const double c = dz.w[i] * ((p - static_cast<double>(dz.y[i])) + eta * pi_coef);
        const double* row = dz.x.data() + i * dz.d;
        for (std::size_t j = 0; j < dz.d; ++j) out[j] += c * row[j];
        out[dz.d] += c;
    }
    for (std::size_t j = 0; j <= dz.d; ++j) out[j] = out[j] / dz.total_weight + l2 * theta[j];
}

void AdversaryHead::init() {
    phi.assign(use_label ? 3 : 2, 0.0);
}

double AdversaryHead::value(std::span<const double> theta) const {
    const Design& dz = *design;
    const auto& a = *group;
    double loss = 0.0;
    for (std::size_t i = 0; i < dz.n; ++i) {
        const double p = sigmoid(linear_score(dz, i, theta));
        double s = phi[0] * p + phi.back();
        if (use_label) s += phi[1] * static_cast<double>(dz.y[i]);
        loss += dz.w[i] * (softplus(s) - static_cast<double>(a[i]) * s);
    }
    return loss / dz.total_weight;
}

void AdversaryHead::gradient_theta(std::span<const double> theta, std::span<double> out) const {
    const Design& dz = *design;
    const auto& a = *group;
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 0; i < dz.n; ++i) {
        const double p = sigmoid(linear_score(dz, i, theta));
        double s = phi[0] * p + phi.back();
        if (use_label) s += phi[1] * static_cast<double>(dz.y[i]);
        const double q = sigmoid(s);
        const double c = dz.w[i] * (q - static_cast<double>(a[i])) * phi[0] * p * (1.0 - p);
        const double* row = dz.x.data() + i * dz.d;
        for (std::size_t j = 0; j < dz.d; ++j) out[j] += c * row[j];
        out[dz.d] += c;
    }
    for (std::size_t j = 0; j <= dz.d; ++j) out[j] /= dz.total_weight;
}

void AdversaryHead::step_phi(std::span<const double> theta, double lr) {
    const Design& dz = *design;
    const auto& a = *group;
    std::vector<double> grad(phi.size(), 0.0);
    for (std::size_t i = 0; i < dz.n; ++i) {
        const double p = sigmoid(linear_score(dz, i, theta));
        double s = phi[0] * p + phi.back();
        if (use_label) s += phi[1] * static_cast<double>(dz.y[i]);
        const double c = dz.w[i] * (sigmoid(s) - static_cast<double>(a[i]));
        grad[0] += c * p;
        if (use_label) grad[1] += c * static_cast<double>(dz.y[i]);
        grad.back() += c;
    }
    for (std::size_t j = 0; j < phi.size(); ++j) phi[j] -= lr * grad[j] / dz.total_weight;
}

}  // namespace gd

// ---------------------------------------------------------------------------
// shared descent loop

namespace {

struct Scaler {
    std::vector<double> mean;
    std::vector<double> scale;
};

Scaler fit_scaler(const Dataset& data) {
    const std::size_t d = data.dim();
    Scaler s;
    s.mean.assign(d, 0.0);
    s.scale.assign(d, 1.0);
    const double total = data.total_weight();
    for (std::size_t i = 0; i < data.n(); ++i) {
        const double w = data.weights()[i];
        for (std::size_t j = 0; j < d; ++j) s.mean[j] += w * data.feature(i, j);
    }
    for (std::size_t j = 0; j < d; ++j) s.mean[j] /= total;
    std::vector<double> var(d, 0.0);
    for (std::size_t i = 0; i < data.n(); ++i) {
        const double w = data.weights()[i];
        for (std::size_t j = 0; j < d; ++j) {
            const double c = data.feature(i, j) - s.mean[j];
            var[j] += w * c * c;
        }
    }
    for (std::size_t j = 0; j < d; ++j) {
        const double sd = std::sqrt(var[j] / total);
        s.scale[j] = sd > 1e-12 ? sd : 1.0;
    }
    return s;
}

gd::Design standardized_design(const Dataset& data, const Scaler& s) {
    const std::size_t d = data.dim();
    std::vector<double> x(data.n() * d);
    for (std::size_t i = 0; i < data.n(); ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            x[i * d + j] = (data.feature(i, j) - s.mean[j]) / s.scale[j];
        }
    }
    return gd::make_design(std::move(x), d, data.label(), data.weights());
}

std::vector<double> initial_theta(const LogisticParams& params, std::size_t d) {
    if (params.init_theta.empty()) return std::vector<double>(d + 1, 0.0);
    if (params.init_theta.size() != d + 1) {
        throw std::invalid_argument("logistic: init theta must have dim+1 entries");
    }
    return params.init_theta;
}

void check_params(const LogisticParams& p) {
    if (p.l2 < 0.0) throw std::invalid_argument("logistic: l2 must be >= 0");
    if (!(p.learning_rate > 0.0)) throw std::invalid_argument("logistic: learning rate must be > 0");
    if (p.max_epochs < 1) throw std::invalid_argument("logistic: max_epochs must be >= 1");
    if (!(p.tol >= 0.0)) throw std::invalid_argument("logistic: tol must be >= 0");
}

// Full-batch descent with backtracking: a step that increases the current
// objective is retried at half the rate, and the reduced rate persists.
template <typename Objective>
std::vector<double> descend(Objective& obj, const LogisticParams& params, std::size_t d,
                            TrainDiagnostics* diag) {
    std::vector<double> theta = initial_theta(params, d);
    std::vector<double> grad(d + 1, 0.0), candidate(d + 1, 0.0);
    double lr = params.learning_rate;
    constexpr int kMaxHalvings = 60;
    int halvings_total = 0;
    int epochs = 0;
    double last_loss = std::numeric_limits<double>::quiet_NaN();

    for (int epoch = 0; epoch < params.max_epochs; ++epoch) {
        obj.refresh(theta);
        const double loss = obj.value(theta);
        if (!std::isfinite(loss)) throw std::runtime_error("training diverged: non-finite loss");
        obj.gradient(theta, grad);
        for (double g : grad) {
            if (!std::isfinite(g)) throw std::runtime_error("training diverged: non-finite gradient");
        }

        bool accepted = false;
        double new_loss = loss;
        for (int h = 0; h <= kMaxHalvings; ++h) {
            for (std::size_t j = 0; j <= d; ++j) candidate[j] = theta[j] - lr * grad[j];
            new_loss = obj.value(candidate);
            if (std::isfinite(new_loss) && new_loss <= loss) {
                accepted = true;
                break;
            }
            lr *= 0.5;
            ++halvings_total;
        }
        ++epochs;
        if (!accepted) break;  // the gradient step cannot reduce the objective further
        theta.swap(candidate);
        last_loss = new_loss;
        if (diag) diag->loss_trace.push_back(new_loss);
        if (loss - new_loss < params.tol) break;
    }

    if (diag) {
        diag->epochs = epochs;
        diag->halvings = halvings_total;
        diag->final_loss = last_loss;
        diag->theta = theta;
    }
    return theta;
}

ScoreModel make_linear_model(const Scaler& scaler, std::vector<double> theta, std::string metadata) {
    auto scorer = [scaler, theta = std::move(theta)](std::span<const double> row) {
        double t = theta.back();
        for (std::size_t j = 0; j < row.size(); ++j) {
            t += theta[j] * (row[j] - scaler.mean[j]) / scaler.scale[j];
        }
        return gd::sigmoid(t);
    };
    return ScoreModel(std::move(scorer), 0.5, std::move(metadata));
}

std::string format_param(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace

ScoreModel train_logistic(const Dataset& train, const LogisticParams& params, TrainDiagnostics* diag) {
    check_params(params);
    const Scaler scaler = fit_scaler(train);
    const gd::Design design = standardized_design(train, scaler);
    gd::LogisticLoss loss{&design, params.l2};
    auto theta = descend(loss, params, design.d, diag);
    return make_linear_model(scaler, std::move(theta),
                             "logistic(l2=" + format_param(params.l2) + ",lr=" + format_param(params.learning_rate) + ")");
}

ScoreModel train_adversarial(const Dataset& train, const std::string& sensitive_column,
                             const LogisticParams& clf, const AdversaryParams& adv,
                             std::uint64_t seed, AdversarialStepTrace* last_step) {
    check_params(clf);
    if (adv.alpha < 0.0) throw std::invalid_argument("adversarial: alpha must be >= 0");
    const auto& group = train.sensitive(sensitive_column);
    const Scaler scaler = fit_scaler(train);
    const gd::Design design = standardized_design(train, scaler);
    gd::LogisticLoss clf_loss{&design, clf.l2};
    gd::AdversaryHead head{&design, &group, adv.inputs == AdvInput::kPredictionAndLabel, {}};
    head.init();

    std::vector<double> theta = initial_theta(clf, design.d);
    const std::size_t m = design.d + 1;
    std::vector<double> g(m, 0.0), h(m, 0.0);

    for (int epoch = 1; epoch <= clf.max_epochs; ++epoch) {
        head.step_phi(theta, adv.adversary_learning_rate);
        clf_loss.gradient(theta, g);
        head.gradient_theta(theta, h);
        for (std::size_t j = 0; j < m; ++j) {
            if (!std::isfinite(g[j]) || !std::isfinite(h[j])) {
                throw std::runtime_error("adversarial training diverged: non-finite gradient");
            }
        }
        const double alpha_t = adv.decay_alpha ? adv.alpha / std::sqrt(static_cast<double>(epoch)) : adv.alpha;
        double hh = 0.0, gh = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            hh += h[j] * h[j];
            gh += g[j] * h[j];
        }
        const double proj_coef = (adv.projection && hh >= 1e-12) ? gh / hh : 0.0;
        const bool record = last_step && epoch == clf.max_epochs;
        if (record) {
            last_step->clf_grad = g;
            last_step->adv_grad = h;
            last_step->theta_before = theta;
            last_step->alpha_t = alpha_t;
            last_step->step_size = clf.learning_rate;
        }
        for (std::size_t j = 0; j < m; ++j) {
            theta[j] -= clf.learning_rate * (g[j] - proj_coef * h[j] - alpha_t * h[j]);
        }
        if (record) last_step->theta_after = theta;
    }

    std::string meta = "adversarial(alpha=" + format_param(adv.alpha) +
                       ",inputs=" + (adv.inputs == AdvInput::kPredictionAndLabel ? "prediction_and_label" : "prediction_only") +
                       ",seed=" + std::to_string(seed) + ")";
    return make_linear_model(scaler, std::move(theta), std::move(meta));
}

ScoreModel train_pi_regularized(const Dataset& train, const std::string& sensitive_column,
                                const LogisticParams& params, double eta, TrainDiagnostics* diag) {
    check_params(params);
    if (eta < 0.0) throw std::invalid_argument("pi regularizer: eta must be >= 0");
    const auto& group = train.sensitive(sensitive_column);
    const Scaler scaler = fit_scaler(train);
    const gd::Design design = standardized_design(train, scaler);
    gd::PiRegLoss loss{&design, &group, params.l2, eta, {}};
    auto theta = descend(loss, params, design.d, diag);
    return make_linear_model(scaler, std::move(theta), "pireg(eta=" + format_param(eta) + ")");
}

double prejudice_index(const Dataset& data, const ScoreModel& model, const std::string& sensitive_column) {
    const auto& a = data.sensitive(sensitive_column);
    const auto& w = data.weights();
    const auto scores = model.score_all(data);
    double mass[2] = {0.0, 0.0}, mean_p[2] = {0.0, 0.0};
    double total = 0.0, mean_all = 0.0;
    for (std::size_t i = 0; i < data.n(); ++i) {
        mass[a[i]] += w[i];
        mean_p[a[i]] += w[i] * scores[i];
        total += w[i];
        mean_all += w[i] * scores[i];
    }
    for (int g = 0; g < 2; ++g) {
        if (mass[g] <= 0.0) throw std::invalid_argument("prejudice index: sensitive group " + std::to_string(g) + " is empty");
        mean_p[g] /= mass[g];
    }
    mean_all /= total;
    auto safe_log = [](double num, double den) {
        constexpr double kEps = 1e-12;
        return std::log(std::max(num, kEps) / std::max(den, kEps));
    };
    double pi = 0.0;
    for (std::size_t i = 0; i < data.n(); ++i) {
        const int g = a[i];
        pi += w[i] * (scores[i] * safe_log(mean_p[g], mean_all) +
                      (1.0 - scores[i]) * safe_log(1.0 - mean_p[g], 1.0 - mean_all));
    }
    return pi;
}

// ---------------------------------------------------------------------------
// constrained training via a per-group threshold search

FairnessMetric fairness_metric_by_name(const std::string& name) {
    if (name == "independence") return FairnessMetric::kIndependence;
    if (name == "equal_opportunity") return FairnessMetric::kEqualOpportunity;
    if (name == "separation") return FairnessMetric::kSeparation;
    if (name == "sufficiency") return FairnessMetric::kSufficiency;
    throw std::invalid_argument("metafair: unknown metric '" + name + "'");
}

std::string fairness_metric_name(FairnessMetric m) {
    switch (m) {
        case FairnessMetric::kIndependence: return "independence";
        case FairnessMetric::kEqualOpportunity: return "equal_opportunity";
        case FairnessMetric::kSeparation: return "separation";
        case FairnessMetric::kSufficiency: return "sufficiency";
    }
    return "unknown";
}

namespace {

// Quotient convention: equal zeros count as perfectly balanced; an undefined
// group performance (empty conditioning event) marks the pair infeasible and
// ranks below every defined quotient in the fallback.
double quotient(double q0, double q1) {
    const double lo = std::min(q0, q1);
    const double hi = std::max(q0, q1);
    if (hi <= 0.0) return 1.0;
    return lo / hi;
}

}  // namespace

ScoreModel train_metafair(const Dataset& train, const std::string& sensitive_column,
                          const MetaFairParams& params, TrainDiagnostics* diag) {
    if (!(params.tau_rule > 0.0 && params.tau_rule <= 1.0)) {
        throw std::invalid_argument("metafair: tau rule must lie in (0,1]");
    }
    if (params.group_threshold_grid < 2) throw std::invalid_argument("metafair: threshold grid needs >= 2 points");

    const auto& a = train.sensitive(sensitive_column);
    const auto& y = train.label();
    const auto& w = train.weights();

    double cell[2][2] = {{0.0, 0.0}, {0.0, 0.0}};  // [a][y]
    for (std::size_t i = 0; i < train.n(); ++i) cell[a[i]][y[i]] += w[i];
    for (int g = 0; g < 2; ++g) {
        if (cell[g][0] + cell[g][1] <= 0.0) {
            throw std::invalid_argument("metafair: sensitive group " + std::to_string(g) + " is empty");
        }
    }
    const bool needs_neg = params.metric == FairnessMetric::kEqualOpportunity || params.metric == FairnessMetric::kSeparation;
    const bool needs_pos = params.metric == FairnessMetric::kSeparation;
    for (int g = 0; g < 2; ++g) {
        if (needs_neg && cell[g][0] <= 0.0) {
            throw std::invalid_argument("metafair: cell (A=" + std::to_string(g) + ", Y=0) is empty");
        }
        if (needs_pos && cell[g][1] <= 0.0) {
            throw std::invalid_argument("metafair: cell (A=" + std::to_string(g) + ", Y=1) is empty");
        }
    }

    ScoreModel base = train_logistic(train, params.base);
    const auto scores = base.score_all(train);

    // Per-group rows sorted by score, with prefix label masses; the masses
    // predicted positive at cutoff tau follow by binary search.
    struct GroupIndex {
        std::vector<double> sorted;
        std::vector<double> prefix_pos;  // Y=1 mass with score <= s
        std::vector<double> prefix_neg;
        double pos_total = 0.0;
        double neg_total = 0.0;
        double all_total = 0.0;
    };
    GroupIndex gi[2];
    {
        std::vector<std::size_t> order(train.n());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return scores[l] < scores[r]; });
        for (std::size_t k = 0; k < order.size(); ++k) {
            const std::size_t i = order[k];
            auto& gx = gi[a[i]];
            gx.sorted.push_back(scores[i]);
            const double prev_pos = gx.prefix_pos.empty() ? 0.0 : gx.prefix_pos.back();
            const double prev_neg = gx.prefix_neg.empty() ? 0.0 : gx.prefix_neg.back();
            gx.prefix_pos.push_back(prev_pos + (y[i] == 1 ? w[i] : 0.0));
            gx.prefix_neg.push_back(prev_neg + (y[i] == 0 ? w[i] : 0.0));
        }
        for (int g = 0; g < 2; ++g) {
            gi[g].pos_total = gi[g].prefix_pos.empty() ? 0.0 : gi[g].prefix_pos.back();
            gi[g].neg_total = gi[g].prefix_neg.empty() ? 0.0 : gi[g].prefix_neg.back();
            gi[g].all_total = gi[g].pos_total + gi[g].neg_total;
        }
    }
    const double total_weight = gi[0].all_total + gi[1].all_total;

    // Masses predicted positive (score > tau) per group and label.
    auto masses_at = [&](int g, double tau, double& pos_above, double& neg_above) {
        const auto& gx = gi[g];
        const auto cut = std::upper_bound(gx.sorted.begin(), gx.sorted.end(), tau) - gx.sorted.begin();
        const double pos_below = cut > 0 ? gx.prefix_pos[cut - 1] : 0.0;
        const double neg_below = cut > 0 ? gx.prefix_neg[cut - 1] : 0.0;
        pos_above = gx.pos_total - pos_below;
        neg_above = gx.neg_total - neg_below;
    };

    const int m = params.group_threshold_grid;
    std::vector<double> taus(m);
    for (int k = 0; k < m; ++k) taus[k] = static_cast<double>(k) / static_cast<double>(m - 1);

    struct Candidate {
        double tau0 = 0.5, tau1 = 0.5;
        double error = std::numeric_limits<double>::infinity();
        double quot = -1.0;
        bool feasible = false;
        bool valid = false;
    };
    Candidate best_feasible, best_fallback;

    for (double t0 : taus) {
        double pos_above0, neg_above0;
        masses_at(0, t0, pos_above0, neg_above0);
        for (double t1 : taus) {
            double pos_above1, neg_above1;
            masses_at(1, t1, pos_above1, neg_above1);

            const double err = ((gi[0].pos_total - pos_above0) + neg_above0 +
                                (gi[1].pos_total - pos_above1) + neg_above1) / total_weight;

            bool defined = true;
            double quot_min = 1.0;
            switch (params.metric) {
                case FairnessMetric::kIndependence: {
                    const double q0 = (pos_above0 + neg_above0) / gi[0].all_total;
                    const double q1 = (pos_above1 + neg_above1) / gi[1].all_total;
                    quot_min = quotient(q0, q1);
                    break;
                }
                case FairnessMetric::kEqualOpportunity: {
                    const double q0 = neg_above0 / gi[0].neg_total;
                    const double q1 = neg_above1 / gi[1].neg_total;
                    quot_min = quotient(q0, q1);
                    break;
                }
                case FairnessMetric::kSeparation: {
                    const double fpr_q = quotient(neg_above0 / gi[0].neg_total, neg_above1 / gi[1].neg_total);
                    const double fnr_q = quotient((gi[0].pos_total - pos_above0) / gi[0].pos_total,
                                                  (gi[1].pos_total - pos_above1) / gi[1].pos_total);
                    quot_min = std::min(fpr_q, fnr_q);
                    break;
                }
                case FairnessMetric::kSufficiency: {
                    const double pp0 = pos_above0 + neg_above0;
                    const double pp1 = pos_above1 + neg_above1;
                    if (pp0 <= 0.0 || pp1 <= 0.0) {
                        defined = false;
                    } else {
                        quot_min = quotient(pos_above0 / pp0, pos_above1 / pp1);
                    }
                    break;
                }
            }

            const bool feasible = defined && quot_min >= params.tau_rule - 1e-12;
            if (feasible && err < best_feasible.error) {
                best_feasible = {t0, t1, err, quot_min, true, true};
            }
            const double rank_quot = defined ? quot_min : -1.0;
            if (rank_quot > best_fallback.quot ||
                (rank_quot == best_fallback.quot && err < best_fallback.error)) {
                best_fallback = {t0, t1, err, rank_quot, false, true};
            }
        }
    }

    const Candidate chosen = best_feasible.valid ? best_feasible : best_fallback;
    ScoreModel model = base;
    model.set_group_thresholds(GroupThresholds{sensitive_column, chosen.tau0, chosen.tau1});
    model.append_metadata("metafair(metric=" + fairness_metric_name(params.metric) +
                          ",tau=" + format_param(params.tau_rule) +
                          ",feasible=" + (best_feasible.valid ? "yes" : "no") + ")");
    if (diag) {
        diag->constraint_feasible = best_feasible.valid;
        diag->constraint_quotient = chosen.quot;
        diag->final_loss = chosen.error;
    }
    return model;
}

}  // namespace fairbench
