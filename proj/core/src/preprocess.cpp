#include "fairbench/preprocess.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "fairbench/rng.hpp"

namespace fairbench {

namespace {

std::array<std::array<double, 2>, 2> cell_masses(const Dataset& data, const std::vector<int>& a) {
    std::array<std::array<double, 2>, 2> mass{};  // [a][y]
    const auto& y = data.label();
    const auto& w = data.weights();
    for (std::size_t i = 0; i < data.n(); ++i) mass[a[i]][y[i]] += w[i];
    return mass;
}

}  // namespace

Dataset reweigh(const Dataset& data, const std::string& sensitive_column) {
    const auto& a = data.sensitive(sensitive_column);
    const auto mass = cell_masses(data, a);
    const double total = mass[0][0] + mass[0][1] + mass[1][0] + mass[1][1];
    double factor[2][2];
    for (int g = 0; g < 2; ++g) {
        for (int y = 0; y < 2; ++y) {
            if (mass[g][y] <= 0.0) {
                throw std::invalid_argument("reweigh: cell (A=" + std::to_string(g) + ", Y=" +
                                            std::to_string(y) + ") is empty");
            }
            const double p_a = (mass[g][0] + mass[g][1]) / total;
            const double p_y = (mass[0][y] + mass[1][y]) / total;
            factor[g][y] = p_a * p_y / (mass[g][y] / total);
        }
    }
    std::vector<double> weights = data.weights();
    const auto& y = data.label();
    for (std::size_t i = 0; i < data.n(); ++i) weights[i] *= factor[a[i]][y[i]];
    return data.with_weights(std::move(weights));
}

Dataset reweigh_resample(const Dataset& data, const std::string& sensitive_column, std::uint64_t seed) {
    const Dataset weighted = reweigh(data, sensitive_column);
    const auto& w = weighted.weights();
    std::vector<double> cum(w.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        acc += w[i];
        cum[i] = acc;
    }
    rng::Rng gen(rng::mix_key(seed, 0x72657361ULL));  // "resa" tag
    std::vector<std::size_t> rows(data.n());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const double u = gen.unit() * acc;
        rows[k] = static_cast<std::size_t>(std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
        if (rows[k] >= w.size()) rows[k] = w.size() - 1;
    }
    std::vector<double> unit_weights(rows.size(), 1.0);
    return data.select_rows(rows).with_weights(std::move(unit_weights));
}

// ---------------------------------------------------------------------------
// disparate-impact remover

namespace {

// Linear interpolation of the empirical quantile function of sorted values.
double empirical_quantile(const std::vector<double>& sorted, double u) {
    const std::size_t m = sorted.size();
    const double pos = u * static_cast<double>(m - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    if (lo + 1 >= m) return sorted.back();
    const double t = pos - static_cast<double>(lo);
    return sorted[lo] + t * (sorted[lo + 1] - sorted[lo]);
}

bool column_is_binary(const Dataset& data, std::size_t j) {
    for (std::size_t i = 0; i < data.n(); ++i) {
        const double v = data.feature(i, j);
        if (v != 0.0 && v != 1.0) return false;
    }
    return true;
}

}  // namespace

double Repairer::map_value(double x, std::size_t slot, int group) const {
    if (lambda_ == 0.0) return x;
    const auto& q = knots_[slot][group];
    const auto& med = median_[slot];
    const double lo = q.front();
    const double hi = q.back();
    const double clamped = std::clamp(x, lo, hi);

    // Invert the piecewise-linear knot function: first segment containing x.
    const std::size_t g = q.size();
    auto it = std::lower_bound(q.begin(), q.end(), clamped);
    std::size_t k = static_cast<std::size_t>(it - q.begin());
    double u;
    if (k == 0) {
        u = 0.0;
    } else {
        const std::size_t seg = k - 1;
        const double span = q[seg + 1] - q[seg];
        const double t = span > 0.0 ? (clamped - q[seg]) / span : 1.0;
        u = (static_cast<double>(seg) + t) / static_cast<double>(g - 1);
    }

    const double pos = u * static_cast<double>(g - 1);
    const std::size_t lo_k = std::min(static_cast<std::size_t>(std::floor(pos)), g - 2);
    const double t = pos - static_cast<double>(lo_k);
    const double own = q[lo_k] + t * (q[lo_k + 1] - q[lo_k]);
    const double target = med[lo_k] + t * (med[lo_k + 1] - med[lo_k]);
    return (1.0 - lambda_) * own + lambda_ * target;
}

Dataset Repairer::transform(const Dataset& data) const {
    if (lambda_ == 0.0) return data;
    const auto& a = data.sensitive(sensitive_column_);
    std::vector<double> feats = data.features();
    const std::size_t d = data.dim();
    for (std::size_t slot = 0; slot < columns_.size(); ++slot) {
        const std::size_t j = data.feature_index(columns_[slot]);
        for (std::size_t i = 0; i < data.n(); ++i) {
            feats[i * d + j] = map_value(feats[i * d + j], slot, a[i]);
        }
    }
    return data.with_features(std::move(feats));
}

std::pair<Dataset, Repairer> di_remove(const Dataset& train, const std::string& sensitive_column,
                                       const RepairParams& params) {
    if (params.lambda < 0.0 || params.lambda > 1.0) {
        throw std::invalid_argument("di_remove: lambda must lie in [0,1]");
    }
    if (params.quantile_grid < 2) throw std::invalid_argument("di_remove: quantile grid must have >= 2 knots");

    const auto& a = train.sensitive(sensitive_column);
    std::array<std::vector<std::size_t>, 2> group_rows;
    for (std::size_t i = 0; i < train.n(); ++i) group_rows[a[i]].push_back(i);
    for (int g = 0; g < 2; ++g) {
        if (group_rows[g].size() < 2) {
            throw std::invalid_argument("di_remove: group A=" + std::to_string(g) + " needs at least 2 rows");
        }
    }

    std::vector<std::string> columns = params.columns;
    if (columns.empty()) {
        for (std::size_t j = 0; j < train.dim(); ++j) {
            if (!params.include_binary && column_is_binary(train, j)) continue;
            columns.push_back(train.feature_names()[j]);
        }
    } else {
        for (const auto& name : columns) train.feature_index(name);  // validate
    }

    Repairer rep;
    rep.sensitive_column_ = sensitive_column;
    rep.lambda_ = params.lambda;
    rep.grid_ = params.quantile_grid;
    rep.columns_ = columns;
    rep.knots_.resize(columns.size());
    rep.median_.resize(columns.size());

    const std::size_t g_knots = static_cast<std::size_t>(params.quantile_grid);
    for (std::size_t slot = 0; slot < columns.size(); ++slot) {
        const std::size_t j = train.feature_index(columns[slot]);
        for (int g = 0; g < 2; ++g) {
            std::vector<double> values;
            values.reserve(group_rows[g].size());
            for (std::size_t i : group_rows[g]) values.push_back(train.feature(i, j));
            std::sort(values.begin(), values.end());
            auto& q = rep.knots_[slot][g];
            q.resize(g_knots);
            for (std::size_t k = 0; k < g_knots; ++k) {
                q[k] = empirical_quantile(values, static_cast<double>(k) / static_cast<double>(g_knots - 1));
            }
        }
        auto& med = rep.median_[slot];
        med.resize(g_knots);
        for (std::size_t k = 0; k < g_knots; ++k) {
            // Median across the two group quantiles is their midpoint.
            med[k] = 0.5 * (rep.knots_[slot][0][k] + rep.knots_[slot][1][k]);
        }
    }

    return {rep.transform(train), std::move(rep)};
}

}  // namespace fairbench
