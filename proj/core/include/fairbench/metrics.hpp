#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairbench/dataset.hpp"
#include "fairbench/errors.hpp"
#include "fairbench/score_model.hpp"

namespace fairbench {

// Weighted confusion counts of one sensitive group at a fixed decision rule.
// Rates are only defined when the corresponding denominator is positive.
struct GroupCell {
    double tp = 0.0, fp = 0.0, tn = 0.0, fn = 0.0;

    double total() const { return tp + fp + tn + fn; }
    double positives() const { return tp + fn; }   // label mass Y=1
    double negatives() const { return tn + fp; }   // label mass Y=0
    double predicted_positive() const { return tp + fp; }

    std::optional<double> tpr() const { return positives() > 0 ? std::optional<double>(tp / positives()) : std::nullopt; }
    std::optional<double> fnr() const { return positives() > 0 ? std::optional<double>(fn / positives()) : std::nullopt; }
    std::optional<double> tnr() const { return negatives() > 0 ? std::optional<double>(tn / negatives()) : std::nullopt; }
    std::optional<double> fpr() const { return negatives() > 0 ? std::optional<double>(fp / negatives()) : std::nullopt; }
    std::optional<double> accuracy() const { return total() > 0 ? std::optional<double>((tp + tn) / total()) : std::nullopt; }
    std::optional<double> precision() const {
        return predicted_positive() > 0 ? std::optional<double>(tp / predicted_positive()) : std::nullopt;
    }
};

struct GroupConfusion {
    GroupCell group[2];  // indexed by sensitive value a
    const GroupCell& operator[](int a) const { return group[a]; }
};

// Kernels on prediction/label/group/weight vectors. The model-level
// operations below and the post-processing evaluation both reduce to these.
GroupConfusion confusion_from(std::span<const int> yhat, std::span<const int> y,
                              std::span<const int> a, std::span<const double> w);
double accuracy_from(std::span<const int> yhat, std::span<const int> y, std::span<const double> w);
double balanced_accuracy_from(std::span<const int> yhat, std::span<const int> y,
                              std::span<const int> a, std::span<const double> w);
double ind_from(std::span<const int> yhat, std::span<const int> a, std::span<const double> w);
double sp_from(std::span<const int> yhat, std::span<const int> y, std::span<const int> a,
               std::span<const double> w);
double sp_abs_from(std::span<const int> yhat, std::span<const int> y, std::span<const int> a,
                   std::span<const double> w);
double sf_from(std::span<const int> yhat, std::span<const int> y, std::span<const int> a,
               std::span<const double> w);
// Quotient P(Yhat=1|A=1) / P(Yhat=1|A=0), the ratio the 80% rule bounds.
double independence_quotient_from(std::span<const int> yhat, std::span<const int> a,
                                  std::span<const double> w);

// Model-level operations: threshold the score, then apply the kernels.
GroupConfusion confusion(const Dataset& data, const ScoreModel& model, const std::string& sensitive_column);
double accuracy(const Dataset& data, const ScoreModel& model);
double balanced_accuracy(const Dataset& data, const ScoreModel& model, const std::string& sensitive_column);
double ind_metric(const Dataset& data, const ScoreModel& model, const std::string& sensitive_column);
// Deviation from separation with the absolute value around the sum of the
// two rate gaps, so opposite-sign gaps cancel. sp_metric_abs applies the
// absolute value per term instead; reports default to the first form.
double sp_metric(const Dataset& data, const ScoreModel& model, const std::string& sensitive_column);
double sp_metric_abs(const Dataset& data, const ScoreModel& model, const std::string& sensitive_column);
double sf_metric(const Dataset& data, const ScoreModel& model, const std::string& sensitive_column);

// Threshold maximizing validation balanced accuracy; ties go to the smallest
// candidate. The default grid is the distinct validation scores plus the
// midpoints between neighbors, replaced by 512 evenly spaced points when
// larger than that.
double select_threshold(const std::vector<double>& scores, const Dataset& validation,
                        const std::string& sensitive_column,
                        const std::vector<double>& grid = {});
double select_threshold(const ScoreModel& model, const Dataset& validation,
                        const std::string& sensitive_column,
                        const std::vector<double>& grid = {});

std::vector<double> default_threshold_grid(std::vector<double> scores, std::size_t cap = 512);

}  // namespace fairbench
