#include "fairbench/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace fairbench {

namespace {

void check_lengths(std::span<const int> yhat, std::span<const int> y,
                   std::span<const int> a, std::span<const double> w) {
    if (yhat.size() != y.size() || yhat.size() != a.size() || yhat.size() != w.size() || yhat.empty()) {
        throw std::invalid_argument("metrics: prediction/label/group/weight lengths must match and be nonempty");
    }
}

}  // namespace

GroupConfusion confusion_from(std::span<const int> yhat, std::span<const int> y,
                              std::span<const int> a, std::span<const double> w) {
    check_lengths(yhat, y, a, w);
    GroupConfusion out;
    for (std::size_t i = 0; i < yhat.size(); ++i) {
        GroupCell& c = out.group[a[i]];
        if (y[i] == 1) {
            (yhat[i] == 1 ? c.tp : c.fn) += w[i];
        } else {
            (yhat[i] == 1 ? c.fp : c.tn) += w[i];
        }
    }
    return out;
}

double accuracy_from(std::span<const int> yhat, std::span<const int> y, std::span<const double> w) {
    double correct = 0.0, total = 0.0;
    for (std::size_t i = 0; i < yhat.size(); ++i) {
        total += w[i];
        if (yhat[i] == y[i]) correct += w[i];
    }
    if (total <= 0.0) throw MetricUndefinedError("accuracy: zero total weight");
    return correct / total;
}

double balanced_accuracy_from(std::span<const int> yhat, std::span<const int> y,
                              std::span<const int> a, std::span<const double> w) {
    const auto conf = confusion_from(yhat, y, a, w);
    double sum = 0.0;
    for (int g = 0; g < 2; ++g) {
        const auto acc = conf[g].accuracy();
        if (!acc) throw MetricUndefinedError("balanced accuracy: group A=" + std::to_string(g) + " is empty");
        sum += *acc;
    }
    return sum / 2.0;
}

double ind_from(std::span<const int> yhat, std::span<const int> a, std::span<const double> w) {
    double pos[2] = {0.0, 0.0}, tot[2] = {0.0, 0.0};
    for (std::size_t i = 0; i < yhat.size(); ++i) {
        tot[a[i]] += w[i];
        if (yhat[i] == 1) pos[a[i]] += w[i];
    }
    for (int g = 0; g < 2; ++g) {
        if (tot[g] <= 0.0) throw MetricUndefinedError("independence: group A=" + std::to_string(g) + " is empty");
    }
    return std::abs(pos[1] / tot[1] - pos[0] / tot[0]);
}

namespace {

// Per-group (FPR, FNR) with named errors on empty conditioning cells.
std::array<std::array<double, 2>, 2> error_rates(std::span<const int> yhat, std::span<const int> y,
                                                 std::span<const int> a, std::span<const double> w) {
    const auto conf = confusion_from(yhat, y, a, w);
    std::array<std::array<double, 2>, 2> out{};  // [group][0]=FPR, [group][1]=FNR
    for (int g = 0; g < 2; ++g) {
        const auto fpr = conf[g].fpr();
        if (!fpr) throw MetricUndefinedError("separation: cell (A=" + std::to_string(g) + ", Y=0) is empty");
        const auto fnr = conf[g].fnr();
        if (!fnr) throw MetricUndefinedError("separation: cell (A=" + std::to_string(g) + ", Y=1) is empty");
        out[g] = {*fpr, *fnr};
    }
    return out;
}

}  // namespace

double sp_from(std::span<const int> yhat, std::span<const int> y, std::span<const int> a,
               std::span<const double> w) {
    const auto r = error_rates(yhat, y, a, w);
    return 0.5 * std::abs((r[1][0] - r[0][0]) + (r[1][1] - r[0][1]));
}

double sp_abs_from(std::span<const int> yhat, std::span<const int> y, std::span<const int> a,
                   std::span<const double> w) {
    const auto r = error_rates(yhat, y, a, w);
    return 0.5 * (std::abs(r[1][0] - r[0][0]) + std::abs(r[1][1] - r[0][1]));
}

double sf_from(std::span<const int> yhat, std::span<const int> y, std::span<const int> a,
               std::span<const double> w) {
    const auto conf = confusion_from(yhat, y, a, w);
    double prec[2];
    for (int g = 0; g < 2; ++g) {
        const auto p = conf[g].precision();
        if (!p) {
            throw MetricUndefinedError("sufficiency: group A=" + std::to_string(g) + " has no positive predictions");
        }
        prec[g] = *p;
    }
    return std::abs(prec[1] - prec[0]);
}

double independence_quotient_from(std::span<const int> yhat, std::span<const int> a,
                                  std::span<const double> w) {
    double pos[2] = {0.0, 0.0}, tot[2] = {0.0, 0.0};
    for (std::size_t i = 0; i < yhat.size(); ++i) {
        tot[a[i]] += w[i];
        if (yhat[i] == 1) pos[a[i]] += w[i];
    }
    for (int g = 0; g < 2; ++g) {
        if (tot[g] <= 0.0) throw MetricUndefinedError("independence quotient: group A=" + std::to_string(g) + " is empty");
    }
    const double p1 = pos[1] / tot[1];
    const double p0 = pos[0] / tot[0];
    if (p0 <= 0.0) throw MetricUndefinedError("independence quotient: group A=0 has no positive predictions");
    return p1 / p0;
}

// ---------------------------------------------------------------------------
// model-level wrappers

GroupConfusion confusion(const Dataset& data, const ScoreModel& model, const std::string& sensitive_column) {
    const auto yhat = model.predict(data);
    return confusion_from(yhat, data.label(), data.sensitive(sensitive_column), data.weights());
}

double accuracy(const Dataset& data, const ScoreModel& model) {
    const auto yhat = model.predict(data);
    return accuracy_from(yhat, data.label(), data.weights());
}

double balanced_accuracy(const Dataset& data, const ScoreModel& model, const std::string& sensitive_column) {
    const auto yhat = model.predict(data);
    return balanced_accuracy_from(yhat, data.label(), data.sensitive(sensitive_column), data.weights());
}

double ind_metric(const Dataset& data, const ScoreModel& model, const std::string& sensitive_column) {
    const auto yhat = model.predict(data);
    return ind_from(yhat, data.sensitive(sensitive_column), data.weights());
}

double sp_metric(const Dataset& data, const ScoreModel& model, const std::string& sensitive_column) {
    const auto yhat = model.predict(data);
    return sp_from(yhat, data.label(), data.sensitive(sensitive_column), data.weights());
}

double sp_metric_abs(const Dataset& data, const ScoreModel& model, const std::string& sensitive_column) {
    const auto yhat = model.predict(data);
    return sp_abs_from(yhat, data.label(), data.sensitive(sensitive_column), data.weights());
}

double sf_metric(const Dataset& data, const ScoreModel& model, const std::string& sensitive_column) {
    const auto yhat = model.predict(data);
    return sf_from(yhat, data.label(), data.sensitive(sensitive_column), data.weights());
}

// ---------------------------------------------------------------------------
// threshold selection

std::vector<double> default_threshold_grid(std::vector<double> scores, std::size_t cap) {
    if (scores.empty()) throw std::invalid_argument("threshold grid: no scores");
    std::sort(scores.begin(), scores.end());
    scores.erase(std::unique(scores.begin(), scores.end()), scores.end());
    std::vector<double> grid;
    grid.reserve(scores.size() * 2);
    for (std::size_t i = 0; i < scores.size(); ++i) {
        grid.push_back(scores[i]);
        if (i + 1 < scores.size()) grid.push_back(0.5 * (scores[i] + scores[i + 1]));
    }
    if (grid.size() > cap) {
        const double lo = scores.front();
        const double hi = scores.back();
        grid.resize(cap);
        for (std::size_t k = 0; k < cap; ++k) {
            grid[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(cap - 1);
        }
    }
    return grid;
}

double select_threshold(const std::vector<double>& scores, const Dataset& validation,
                        const std::string& sensitive_column, const std::vector<double>& grid) {
    if (scores.size() != validation.n()) {
        throw std::invalid_argument("select_threshold: score count must match validation rows");
    }
    std::vector<double> taus = grid.empty() ? default_threshold_grid(scores) : grid;
    if (taus.empty()) throw std::invalid_argument("select_threshold: empty grid");
    std::sort(taus.begin(), taus.end());

    const auto& y = validation.label();
    const auto& a = validation.sensitive(sensitive_column);
    const auto& w = validation.weights();

    double tot[2] = {0.0, 0.0};
    double pos_mass[2] = {0.0, 0.0};  // mass of Y=1 per group
    for (std::size_t i = 0; i < scores.size(); ++i) {
        tot[a[i]] += w[i];
        if (y[i] == 1) pos_mass[a[i]] += w[i];
    }
    for (int g = 0; g < 2; ++g) {
        if (tot[g] <= 0.0) throw MetricUndefinedError("select_threshold: validation group A=" + std::to_string(g) + " is empty");
    }

    // Sort rows by score; prefix sums give, for any tau, the mass with
    // score <= tau (predicted negative) split by (group, label).
    std::vector<std::size_t> order(scores.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return scores[l] < scores[r]; });
    std::vector<double> sorted_scores(order.size());
    std::vector<double> prefix_y1[2], prefix_y0[2];
    for (int g = 0; g < 2; ++g) {
        prefix_y1[g].assign(order.size() + 1, 0.0);
        prefix_y0[g].assign(order.size() + 1, 0.0);
    }
    for (std::size_t k = 0; k < order.size(); ++k) {
        const std::size_t i = order[k];
        sorted_scores[k] = scores[i];
        for (int g = 0; g < 2; ++g) {
            prefix_y1[g][k + 1] = prefix_y1[g][k] + (a[i] == g && y[i] == 1 ? w[i] : 0.0);
            prefix_y0[g][k + 1] = prefix_y0[g][k] + (a[i] == g && y[i] == 0 ? w[i] : 0.0);
        }
    }

    double best_tau = taus.front();
    double best_ba = -1.0;
    for (const double tau : taus) {
        // Rows with score <= tau are predicted 0.
        const auto cut = std::upper_bound(sorted_scores.begin(), sorted_scores.end(), tau) - sorted_scores.begin();
        double ba = 0.0;
        for (int g = 0; g < 2; ++g) {
            const double neg_correct = prefix_y0[g][cut];                       // Y=0 predicted 0
            const double pos_correct = pos_mass[g] - prefix_y1[g][cut];         // Y=1 predicted 1
            ba += (neg_correct + pos_correct) / tot[g];
        }
        ba /= 2.0;
        if (ba > best_ba + 1e-15) {
            best_ba = ba;
            best_tau = tau;
        }
    }
    return best_tau;
}

double select_threshold(const ScoreModel& model, const Dataset& validation,
                        const std::string& sensitive_column, const std::vector<double>& grid) {
    return select_threshold(model.score_all(validation), validation, sensitive_column, grid);
}

}  // namespace fairbench
