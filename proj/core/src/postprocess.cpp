#include "fairbench/postprocess.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "fairbench/inprocess.hpp"
#include "fairbench/rng.hpp"

namespace fairbench {

std::vector<int> reject_option(std::span<const double> scores, std::span<const int> sensitive,
                               const RejectOptionParams& params) {
    if (!(params.theta > 0.5 && params.theta <= 1.0)) {
        throw std::invalid_argument("reject option: theta must lie in (0.5, 1]");
    }
    if (scores.size() != sensitive.size()) throw std::invalid_argument("reject option: length mismatch");
    std::vector<int> out(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const double p = scores[i];
        if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("reject option: scores must lie in [0,1]");
        if (std::max(p, 1.0 - p) < params.theta) {
            out[i] = sensitive[i] == 1 ? 1 : 0;
        } else {
            out[i] = p > 0.5 ? 1 : 0;
        }
    }
    return out;
}

double recenter_probability(double p, double tau) {
    if (tau <= 0.0) return 0.5 + 0.5 * p;
    if (tau >= 1.0) return 0.5 * p;
    if (p <= tau) return 0.5 * p / tau;
    return 0.5 + 0.5 * (p - tau) / (1.0 - tau);
}

// ---------------------------------------------------------------------------
// equalized odds

namespace {

struct Point {
    double x = 0.0;  // FPR
    double y = 0.0;  // TPR
};

constexpr double kGeomEps = 1e-12;

// Achievable (FPR, TPR) set of the randomized relabeling for one group: the
// convex hull of the trivial classifiers (0,0) and (1,1), the base point and
// its complement. Returned counter-clockwise; collapses to the diagonal
// segment when the base point lies on it.
std::vector<Point> achievable_polygon(Point base) {
    const Point comp{1.0 - base.x, 1.0 - base.y};
    if (std::abs(base.y - base.x) <= kGeomEps) {
        return {Point{0.0, 0.0}, Point{1.0, 1.0}};
    }
    if (base.y > base.x) {
        return {Point{0.0, 0.0}, comp, Point{1.0, 1.0}, base};
    }
    return {Point{0.0, 0.0}, base, Point{1.0, 1.0}, comp};
}

double cross(const Point& o, const Point& a, const Point& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Sutherland-Hodgman clip of a convex subject polygon against a convex
// counter-clockwise clip polygon.
std::vector<Point> clip_convex(std::vector<Point> subject, const std::vector<Point>& clip) {
    for (std::size_t e = 0; e < clip.size() && !subject.empty(); ++e) {
        const Point& c1 = clip[e];
        const Point& c2 = clip[(e + 1) % clip.size()];
        std::vector<Point> out;
        for (std::size_t i = 0; i < subject.size(); ++i) {
            const Point& p1 = subject[i];
            const Point& p2 = subject[(i + 1) % subject.size()];
            const double d1 = cross(c1, c2, p1);
            const double d2 = cross(c1, c2, p2);
            const bool in1 = d1 >= -kGeomEps;
            const bool in2 = d2 >= -kGeomEps;
            if (in1) out.push_back(p1);
            if (in1 != in2) {
                const double t = d1 / (d1 - d2);
                out.push_back(Point{p1.x + t * (p2.x - p1.x), p1.y + t * (p2.y - p1.y)});
            }
        }
        subject = std::move(out);
    }
    return subject;
}

std::vector<Point> dedupe(const std::vector<Point>& pts) {
    std::vector<Point> out;
    for (const auto& p : pts) {
        bool seen = false;
        for (const auto& q : out) {
            if (std::abs(p.x - q.x) <= 1e-9 && std::abs(p.y - q.y) <= 1e-9) {
                seen = true;
                break;
            }
        }
        if (!seen) out.push_back(p);
    }
    return out;
}

// Mixing probabilities reproducing target (x, y) from the base point.
void solve_mix(Point base, Point target, double& keep_pos, double& keep_neg) {
    const double f = base.x, t = base.y;
    const double det = f - t;
    double p, r;  // r = 1 - keep_neg
    if (std::abs(det) > kGeomEps) {
        p = (target.x * (1.0 - t) - target.y * (1.0 - f)) / det;
        r = (f * target.y - t * target.x) / det;
    } else {
        // Base on the diagonal: any symmetric mix stays on it.
        if (std::abs(2.0 * f - 1.0) > kGeomEps) {
            p = (target.x - (1.0 - f)) / (2.0 * f - 1.0);
        } else {
            p = 1.0;
        }
        r = 1.0 - p;
    }
    keep_pos = std::clamp(p, 0.0, 1.0);
    keep_neg = std::clamp(1.0 - r, 0.0, 1.0);
}

}  // namespace

EqOddsMix fit_eq_odds(std::span<const int> predictions, std::span<const int> labels,
                      std::span<const int> sensitive, std::span<const double> weights) {
    const std::size_t n = predictions.size();
    if (labels.size() != n || sensitive.size() != n || weights.size() != n || n == 0) {
        throw std::invalid_argument("fit_eq_odds: input lengths must match and be nonempty");
    }
    double cell[2][2] = {{0.0, 0.0}, {0.0, 0.0}};  // [a][y] mass
    double fp[2] = {0.0, 0.0}, tp[2] = {0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
        const int a = sensitive[i];
        cell[a][labels[i]] += weights[i];
        if (predictions[i] == 1) {
            (labels[i] == 1 ? tp[a] : fp[a]) += weights[i];
        }
    }
    for (int g = 0; g < 2; ++g) {
        for (int y = 0; y < 2; ++y) {
            if (cell[g][y] <= 0.0) {
                throw std::invalid_argument("fit_eq_odds: cell (A=" + std::to_string(g) + ", Y=" +
                                            std::to_string(y) + ") is empty");
            }
        }
    }

    Point base[2];
    for (int g = 0; g < 2; ++g) base[g] = {fp[g] / cell[g][0], tp[g] / cell[g][1]};

    const auto poly0 = achievable_polygon(base[0]);
    const auto poly1 = achievable_polygon(base[1]);
    std::vector<Point> feasible;
    if (poly0.size() == 2 || poly1.size() == 2) {
        // A degenerate group restricts the intersection to the diagonal,
        // which both achievable sets always contain.
        feasible = {Point{0.0, 0.0}, Point{1.0, 1.0}};
    } else {
        feasible = dedupe(clip_convex(poly0, poly1));
    }
    if (feasible.empty()) feasible = {Point{0.0, 0.0}, Point{1.0, 1.0}};

    // Expected 0/1 loss at a common (x, y): P(Y=0) x + P(Y=1)(1 - y).
    const double total = cell[0][0] + cell[0][1] + cell[1][0] + cell[1][1];
    const double p_neg = (cell[0][0] + cell[1][0]) / total;
    const double p_pos = 1.0 - p_neg;
    auto loss_at = [&](const Point& pt) { return p_neg * pt.x + p_pos * (1.0 - pt.y); };

    Point bestp = feasible.front();
    double best = loss_at(bestp);
    for (const auto& pt : feasible) {
        const double l = loss_at(pt);
        if (l < best - 1e-15 ||
            (std::abs(l - best) <= 1e-15 &&
             (pt.x < bestp.x - 1e-15 || (std::abs(pt.x - bestp.x) <= 1e-15 && pt.y < bestp.y - 1e-15)))) {
            best = l;
            bestp = pt;
        }
    }

    EqOddsMix mix;
    mix.target_fpr = bestp.x;
    mix.target_tpr = bestp.y;
    mix.expected_loss = best;
    for (int g = 0; g < 2; ++g) {
        mix.degenerate[g] = std::abs(base[g].y - base[g].x) <= kGeomEps;
        solve_mix(base[g], bestp, mix.keep_pos[g], mix.keep_neg[g]);
    }
    return mix;
}

std::vector<int> apply_eq_odds(const EqOddsMix& mix, std::span<const int> predictions,
                               std::span<const int> sensitive, std::uint64_t seed) {
    if (predictions.size() != sensitive.size()) throw std::invalid_argument("apply_eq_odds: length mismatch");
    rng::Rng gen(rng::mix_key(seed, 0x65716f64ULL));  // "eqod" tag
    std::vector<int> out(predictions.size());
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const int a = sensitive[i];
        const double keep = predictions[i] == 1 ? mix.keep_pos[a] : mix.keep_neg[a];
        const bool kept = gen.unit() < keep;
        out[i] = kept ? predictions[i] : 1 - predictions[i];
    }
    return out;
}

// ---------------------------------------------------------------------------
// per-group Platt scaling

namespace {

// 1-D logistic fit of labels on scores, returned on the raw score scale.
std::pair<double, double> platt_fit_1d(std::span<const double> scores, std::span<const int> labels,
                                       std::span<const double> weights,
                                       const std::vector<std::size_t>& rows) {
    std::vector<double> x;
    std::vector<int> y;
    std::vector<double> w;
    x.reserve(rows.size());
    for (std::size_t i : rows) {
        x.push_back(scores[i]);
        y.push_back(labels[i]);
        w.push_back(weights[i]);
    }
    Dataset one(std::move(x), 1, {"score"}, std::move(y), {"g"}, {std::vector<int>(rows.size(), 0)}, std::move(w));
    LogisticParams params;
    params.l2 = 1e-6;
    params.learning_rate = 0.5;
    params.max_epochs = 4000;
    params.tol = 1e-12;
    TrainDiagnostics diag;
    train_logistic(one, params, &diag);
    // diag.theta is on the standardized scale; undo it.
    double mean = 0.0, total = 0.0;
    for (std::size_t i : rows) {
        mean += weights[i] * scores[i];
        total += weights[i];
    }
    mean /= total;
    double var = 0.0;
    for (std::size_t i : rows) {
        const double c = scores[i] - mean;
        var += weights[i] * c * c;
    }
    double sd = std::sqrt(var / total);
    if (sd <= 1e-12) sd = 1.0;
    const double slope = diag.theta[0] / sd;
    const double intercept = diag.theta[1] - diag.theta[0] * mean / sd;
    return {slope, intercept};
}

}  // namespace

GroupPlatt fit_group_platt(std::span<const double> scores, std::span<const int> labels,
                           std::span<const int> sensitive, std::span<const double> weights) {
    const std::size_t n = scores.size();
    if (labels.size() != n || sensitive.size() != n || weights.size() != n || n == 0) {
        throw std::invalid_argument("fit_group_platt: input lengths must match and be nonempty");
    }
    bool overall[2] = {false, false};
    for (std::size_t i = 0; i < n; ++i) overall[labels[i]] = true;
    if (!overall[0] || !overall[1]) {
        throw std::invalid_argument("fit_group_platt: labels contain a single class");
    }

    std::array<std::vector<std::size_t>, 2> group_rows;
    std::vector<std::size_t> all_rows(n);
    for (std::size_t i = 0; i < n; ++i) {
        all_rows[i] = i;
        group_rows[sensitive[i]].push_back(i);
    }

    GroupPlatt gp;
    std::pair<double, double> pooled{0.0, 0.0};
    bool pooled_done = false;
    for (int g = 0; g < 2; ++g) {
        bool has[2] = {false, false};
        for (std::size_t i : group_rows[g]) has[labels[i]] = true;
        if (group_rows[g].empty() || !has[0] || !has[1]) {
            if (!pooled_done) {
                pooled = platt_fit_1d(scores, labels, weights, all_rows);
                pooled_done = true;
            }
            gp.slope[g] = pooled.first;
            gp.intercept[g] = pooled.second;
            gp.pooled_fallback[g] = true;
        } else {
            const auto [slope, intercept] = platt_fit_1d(scores, labels, weights, group_rows[g]);
            gp.slope[g] = slope;
            gp.intercept[g] = intercept;
        }
    }
    return gp;
}

std::vector<double> apply_group_platt(const GroupPlatt& gp, std::span<const double> scores,
                                      std::span<const int> sensitive) {
    if (scores.size() != sensitive.size()) throw std::invalid_argument("apply_group_platt: length mismatch");
    std::vector<double> out(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const int g = sensitive[i];
        out[i] = gd::sigmoid(gp.slope[g] * scores[i] + gp.intercept[g]);
    }
    return out;
}

}  // namespace fairbench
