#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairbench/dataset.hpp"

namespace fairbench {

// Group-dependent decision thresholds (constrained training assigns one
// cutoff per sensitive group).
struct GroupThresholds {
    std::string column;
    double tau0 = 0.5;
    double tau1 = 0.5;
};

// A trained scorer mapping a feature row to [0,1], plus the decision
// threshold. The positive class is score > tau, strictly; ties are negative.
class ScoreModel {
public:
    using Scorer = std::function<double(std::span<const double>)>;

    ScoreModel() = default;
    ScoreModel(Scorer scorer, double threshold, std::string metadata)
        : scorer_(std::move(scorer)), threshold_(threshold), metadata_(std::move(metadata)) {}

    double score(std::span<const double> row) const {
        const double s = scorer_(row);
        return std::clamp(s, 0.0, 1.0);
    }

    std::vector<double> score_all(const Dataset& data) const {
        std::vector<double> out(data.n());
        for (std::size_t i = 0; i < data.n(); ++i) out[i] = score(data.row(i));
        return out;
    }

    double threshold() const { return threshold_; }
    void set_threshold(double tau) { threshold_ = tau; }

    const std::optional<GroupThresholds>& group_thresholds() const { return group_thresholds_; }
    void set_group_thresholds(GroupThresholds gt) { group_thresholds_ = std::move(gt); }
    // True when the decision rule was fixed by training (per-group cutoffs);
    // validation threshold selection must not override it.
    bool thresholds_fixed() const { return group_thresholds_.has_value(); }

    // Effective cutoff for row i of `data`.
    double threshold_for(const Dataset& data, std::size_t i) const {
        if (!group_thresholds_) return threshold_;
        const auto& gt = *group_thresholds_;
        return data.sensitive(gt.column)[i] == 1 ? gt.tau1 : gt.tau0;
    }

    std::vector<int> predict(const Dataset& data) const {
        std::vector<int> out(data.n());
        for (std::size_t i = 0; i < data.n(); ++i) {
            out[i] = score(data.row(i)) > threshold_for(data, i) ? 1 : 0;
        }
        return out;
    }

    const std::string& metadata() const { return metadata_; }
    void append_metadata(const std::string& extra) {
        if (!metadata_.empty()) metadata_ += "; ";
        metadata_ += extra;
    }

private:
    Scorer scorer_;
    double threshold_ = 0.5;
    std::optional<GroupThresholds> group_thresholds_;
    std::string metadata_;
};

}  // namespace fairbench
