#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fairbench/dataset.hpp"

namespace fairbench {

struct RejectOptionParams {
    double theta = 0.6;  // band half-width around 0.5, in (0.5, 1]
};

// Relabels rows whose posterior is inside the uncertainty band
// max(p, 1-p) < theta: unprivileged (A=1) rows become positive, privileged
// rows negative. Outside the band the 0.5-thresholded label stands.
std::vector<int> reject_option(std::span<const double> scores, std::span<const int> sensitive,
                               const RejectOptionParams& params);

// Monotone piecewise-linear remap sending the decision threshold tau to 0.5,
// so band-based post-processing can assume the 0.5 decision point.
double recenter_probability(double p, double tau);

// Per-group randomized relabeling probabilities: when the base classifier
// predicts 1 (resp. 0) the prediction is kept with keep_pos[a]
// (resp. keep_neg[a]), otherwise flipped. Fitting equalizes the two groups'
// (FPR, TPR) while minimizing expected 0/1 loss.
struct EqOddsMix {
    double keep_pos[2] = {1.0, 1.0};
    double keep_neg[2] = {1.0, 1.0};
    double target_fpr = 0.0;
    double target_tpr = 0.0;
    double expected_loss = 0.0;
    bool degenerate[2] = {false, false};  // base group point on the ROC diagonal
};

EqOddsMix fit_eq_odds(std::span<const int> predictions, std::span<const int> labels,
                      std::span<const int> sensitive, std::span<const double> weights);

std::vector<int> apply_eq_odds(const EqOddsMix& mix, std::span<const int> predictions,
                               std::span<const int> sensitive, std::uint64_t seed);

// Per-group logistic map from score to calibrated probability. A group
// missing one of the label values falls back to the pooled map.
struct GroupPlatt {
    double slope[2] = {0.0, 0.0};
    double intercept[2] = {0.0, 0.0};
    bool pooled_fallback[2] = {false, false};
};

GroupPlatt fit_group_platt(std::span<const double> scores, std::span<const int> labels,
                           std::span<const int> sensitive, std::span<const double> weights);

std::vector<double> apply_group_platt(const GroupPlatt& gp, std::span<const double> scores,
                                      std::span<const int> sensitive);

}  // namespace fairbench
