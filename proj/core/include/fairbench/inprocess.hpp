#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairbench/dataset.hpp"
#include "fairbench/score_model.hpp"

namespace fairbench {

struct LogisticParams {
    std::vector<double> init_theta;  // empty = zeros; length dim+1, intercept last
    double l2 = 1e-4;
    double learning_rate = 0.1;
    int max_epochs = 500;
    double tol = 1e-7;  // stop when the per-epoch loss improvement drops below this
};

struct TrainDiagnostics {
    int epochs = 0;
    int halvings = 0;
    double final_loss = 0.0;
    std::vector<double> loss_trace;        // per-epoch objective after the accepted step
    bool constraint_feasible = true;       // constrained training only
    double constraint_quotient = 1.0;
    std::vector<double> theta;             // on the standardized scale
};

// ---------------------------------------------------------------------------
// Objectives over an explicit design matrix. These are public so tests can
// finite-difference them directly; the trainers below standardize features
// and then run plain full-batch descent with backtracking on these.

namespace gd {

struct Design {
    std::size_t n = 0;
    std::size_t d = 0;
    std::vector<double> x;  // row-major n x d, no intercept column
    std::vector<int> y;
    std::vector<double> w;
    double total_weight = 0.0;
};

Design make_design(std::vector<double> x, std::size_t d, std::vector<int> y, std::vector<double> w);

// theta has d+1 entries, intercept last.
double linear_score(const Design& dz, std::size_t i, std::span<const double> theta);
double sigmoid(double t);

// Weighted mean negative log-likelihood plus (l2/2)|theta|^2.
struct LogisticLoss {
    const Design* design = nullptr;
    double l2 = 0.0;

    void refresh(std::span<const double>) {}
    double value(std::span<const double> theta) const;
    void gradient(std::span<const double> theta, std::span<double> out) const;
};

// Logistic loss plus eta times the mutual-information penalty between the
// model's prediction distribution and the sensitive group. The log ratios
// log(P(y|a)/P(y)) are recomputed from the current model once per epoch via
// refresh() and held constant inside the epoch, which is also the objective
// the gradient refers to.
struct PiRegLoss {
    const Design* design = nullptr;
    const std::vector<int>* group = nullptr;
    double l2 = 0.0;
    double eta = 0.0;
    std::array<double, 4> log_ratio{};  // [y*2 + a]

    void refresh(std::span<const double> theta);
    double penalty(std::span<const double> theta) const;
    double value(std::span<const double> theta) const;
    void gradient(std::span<const double> theta, std::span<double> out) const;
};

// Adversary: a logistic head predicting the group from the classifier's
// probability (and the label, in separation mode). value()/gradient_theta()
// treat the head weights phi as constants, giving the adversary loss as a
// function of the classifier parameters.
struct AdversaryHead {
    const Design* design = nullptr;
    const std::vector<int>* group = nullptr;
    bool use_label = false;
    std::vector<double> phi;  // [w_prob, (w_label), bias]

    void init();
    double value(std::span<const double> theta) const;
    void gradient_theta(std::span<const double> theta, std::span<double> out) const;
    void step_phi(std::span<const double> theta, double lr);
};

}  // namespace gd

// ---------------------------------------------------------------------------
// Trainers. All are deterministic given (data, params, seed); scoring models
// standardize features internally and undo the scaling when applied to raw
// rows.

ScoreModel train_logistic(const Dataset& train, const LogisticParams& params = {},
                          TrainDiagnostics* diag = nullptr);

enum class AdvInput { kPredictionOnly, kPredictionAndLabel };

struct AdversaryParams {
    double alpha = 0.1;           // weight of the adversary gradient term
    bool decay_alpha = true;      // alpha_t = alpha / sqrt(t)
    bool projection = true;       // subtract the projection onto the adversary gradient
    AdvInput inputs = AdvInput::kPredictionOnly;
    double adversary_learning_rate = 0.1;
};

// One recorded update so tests can recompute the direction independently.
struct AdversarialStepTrace {
    std::vector<double> clf_grad;
    std::vector<double> adv_grad;
    std::vector<double> theta_before;
    std::vector<double> theta_after;
    double alpha_t = 0.0;
    double step_size = 0.0;
};

ScoreModel train_adversarial(const Dataset& train, const std::string& sensitive_column,
                             const LogisticParams& clf, const AdversaryParams& adv,
                             std::uint64_t seed, AdversarialStepTrace* last_step = nullptr);

ScoreModel train_pi_regularized(const Dataset& train, const std::string& sensitive_column,
                                const LogisticParams& params, double eta,
                                TrainDiagnostics* diag = nullptr);

// Literal mutual-information estimate: the weighted sum over rows of
// sum_y f(y|x_i) log(P(y|a_i)/P(y)), with P(y|a) and P(y) the weighted
// group averages of the model probabilities.
double prejudice_index(const Dataset& data, const ScoreModel& model, const std::string& sensitive_column);

enum class FairnessMetric { kIndependence, kEqualOpportunity, kSeparation, kSufficiency };

FairnessMetric fairness_metric_by_name(const std::string& name);
std::string fairness_metric_name(FairnessMetric m);

struct MetaFairParams {
    FairnessMetric metric = FairnessMetric::kSeparation;
    double tau_rule = 0.8;                // min_a q_a / max_a q_a >= tau_rule
    std::vector<double> penalty_grid;     // reserved for Lagrangian-style solvers; unused here
    int group_threshold_grid = 64;        // thresholds per group, evenly spaced over [0,1]
    LogisticParams base;
};

// Fits the baseline score, then picks the per-group threshold pair with the
// lowest weighted error among pairs satisfying the tau-rule. When no grid
// pair is feasible the pair with the largest quotient is returned and the
// diagnostics flag it.
ScoreModel train_metafair(const Dataset& train, const std::string& sensitive_column,
                          const MetaFairParams& params, TrainDiagnostics* diag = nullptr);

}  // namespace fairbench
