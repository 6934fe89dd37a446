#pragma once

#include <string>
#include <vector>

#include "fairbench/dataset.hpp"

namespace fairbench {

// Boolean combination of binary sensitive attributes into a single binary
// attribute. Built-in kinds cover the bivariate case; a custom truth table
// over k inputs (2^k entries, input bits read most-significant-first)
// supports larger arities.
enum class LpKind { kOr, kAnd, kXor, kIdentity, kCustom };

struct LogicalProcessor {
    LpKind kind = LpKind::kOr;
    std::vector<int> table;  // custom only

    static LogicalProcessor by_name(const std::string& name);
    static LogicalProcessor custom(std::vector<int> truth_table);

    std::size_t arity() const;
    int apply(const std::vector<int>& bits) const;
    std::string name() const;
};

// Appends the combined column (named after the processor) to the dataset;
// the original sensitive columns stay so metrics can still target them.
Dataset apply_lp(const LogicalProcessor& lp, const Dataset& data,
                 const std::vector<std::string>& columns);

struct LpRates {
    double or_rate = 0.0;
    double and_rate = 0.0;
    double xor_rate = 0.0;
};

// Weighted proportions of the three built-in combinations over two columns.
LpRates lp_rates(const Dataset& data, const std::vector<std::string>& columns);

}  // namespace fairbench
