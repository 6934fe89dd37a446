#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fairbench/errors.hpp"

namespace fairbench {

// Immutable tabular sample: real feature matrix, binary label, one or more
// named binary sensitive columns, and per-row nonnegative weights.
// All mutating operations return a new Dataset.
class Dataset {
public:
    Dataset(std::vector<double> features, std::size_t n_cols,
            std::vector<std::string> feature_names,
            std::vector<int> label,
            std::vector<std::string> sensitive_names,
            std::vector<std::vector<int>> sensitive_columns,
            std::vector<double> weights = {});

    std::size_t n() const { return n_; }
    std::size_t dim() const { return d_; }

    std::span<const double> row(std::size_t i) const { return {features_.data() + i * d_, d_}; }
    const std::vector<double>& features() const { return features_; }
    double feature(std::size_t i, std::size_t j) const { return features_[i * d_ + j]; }
    const std::vector<std::string>& feature_names() const { return feature_names_; }
    std::size_t feature_index(const std::string& name) const;

    const std::vector<int>& label() const { return label_; }
    const std::vector<double>& weights() const { return weights_; }
    double total_weight() const;

    const std::vector<std::string>& sensitive_names() const { return sensitive_names_; }
    std::size_t sensitive_count() const { return sensitive_columns_.size(); }
    const std::vector<int>& sensitive(const std::string& name) const;
    bool has_sensitive(const std::string& name) const;

    Dataset with_sensitive_column(const std::string& name, std::vector<int> column) const;
    Dataset with_weights(std::vector<double> weights) const;
    Dataset with_features(std::vector<double> features) const;  // same shape and names
    Dataset select_rows(const std::vector<std::size_t>& rows) const;

private:
    std::size_t n_ = 0;
    std::size_t d_ = 0;
    std::vector<double> features_;  // row-major n x d
    std::vector<std::string> feature_names_;
    std::vector<int> label_;
    std::vector<std::string> sensitive_names_;
    std::vector<std::vector<int>> sensitive_columns_;
    std::vector<double> weights_;
};

// Stratified three-way split. Strata are the joint (label, all sensitive
// columns) cells; part sizes are exactly proportional to the fractions
// (largest-remainder, globally reconciled) and every stratum with at least
// 3 rows contributes at least one training row. Deterministic in seed.
struct SplitResult {
    Dataset train;
    Dataset val;
    Dataset test;
};
SplitResult split(const Dataset& data, double train_fraction, double val_fraction,
                  double test_fraction, std::uint64_t seed);

// Canonical CSV form: feature columns, then sensitive columns prefixed
// "sens_", then "label", then "weight". Header row included.
void write_dataset_csv(const Dataset& data, std::ostream& out);
void write_dataset_csv(const Dataset& data, const std::string& path);
Dataset read_dataset_csv(std::istream& in);
Dataset read_dataset_csv_file(const std::string& path);

}  // namespace fairbench
