#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fairbench/dataset.hpp"

namespace fairbench {

// Multiplies w(a,y) = P(A=a)P(Y=y) / P(A=a,Y=y) onto the existing row
// weights, making the weighted joint of (A, Y) factorize exactly.
Dataset reweigh(const Dataset& data, const std::string& sensitive_column);

// Resampling form: draws n rows with replacement proportional to the
// reweighed weights; the result carries unit weights.
Dataset reweigh_resample(const Dataset& data, const std::string& sensitive_column, std::uint64_t seed);

struct RepairParams {
    double lambda = 1.0;               // repair strength; 0 leaves data untouched
    std::vector<std::string> columns;  // explicit subset; empty selects defaults
    int quantile_grid = 100;           // knots per group quantile function
    bool include_binary = false;       // repair {0,1}-valued columns too
};

// Fitted per-group quantile maps, reusable on validation/test rows. Values
// outside a group's training support are clamped to it before lookup
// (except at lambda = 0, which is the exact identity).
class Repairer {
public:
    Dataset transform(const Dataset& data) const;
    const std::vector<std::string>& repaired_columns() const { return columns_; }
    double lambda() const { return lambda_; }

private:
    friend std::pair<Dataset, Repairer> di_remove(const Dataset&, const std::string&, const RepairParams&);

    double map_value(double x, std::size_t col_slot, int group) const;

    std::string sensitive_column_;
    double lambda_ = 1.0;
    int grid_ = 100;
    std::vector<std::string> columns_;
    std::vector<std::size_t> column_index_;
    // knots_[slot][group][k]: group quantile at u = k/(grid-1);
    // median_[slot][k]: median across groups of the group quantiles.
    std::vector<std::array<std::vector<double>, 2>> knots_;
    std::vector<std::vector<double>> median_;
};

// Fits the repairer on the training split and returns the repaired training
// data together with the fitted maps.
std::pair<Dataset, Repairer> di_remove(const Dataset& train, const std::string& sensitive_column,
                                       const RepairParams& params = {});

}  // namespace fairbench
