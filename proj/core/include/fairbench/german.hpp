#pragma once

#include <string>
#include <vector>

#include "fairbench/dataset.hpp"

namespace fairbench {

struct GermanConfig {
    std::string path;
    int age_cutoff = 25;  // unprivileged when age <= cutoff
    // Attribute positions (1-based) to one-hot encode; the remaining ones
    // pass through as numeric columns.
    std::vector<int> categorical_attributes = {1, 3, 4, 6, 7, 9, 10, 12, 14, 15, 17, 19, 20};
};

// Measured marginals of the loaded data, emitted next to the published
// reference values so mismatches are visible instead of reconciled away.
struct GermanSummary {
    std::size_t rows = 0;
    std::size_t feature_count = 0;
    double default_rate = 0.0;  // P(Y=0)
    double a1_rate = 0.0;       // young (age <= cutoff)
    double a2_rate = 0.0;       // female
    double or_rate = 0.0;
    double and_rate = 0.0;
    double xor_rate = 0.0;
};

// Published characteristics of the data set for comparison in reports.
inline constexpr double kGermanReferenceDefaultRate = 0.30;
inline constexpr double kGermanReferenceA1Rate = 0.15;
inline constexpr double kGermanReferenceA2Rate = 0.19;
inline constexpr double kGermanReferenceOrRate = 0.39;
inline constexpr double kGermanReferenceAndRate = 0.11;
inline constexpr double kGermanReferenceXorRate = 0.29;
inline constexpr std::size_t kGermanReferenceFeatureCount = 61;

// Loads the UCI statlog file (20 space-separated attributes plus outcome,
// outcome 1 = good credit). Y=1 means the loan is repaid. Sensitive columns:
// "young" = 1(age <= cutoff) and "female" = 1(personal status code A92 or
// A95). Observed levels of categorical attributes are one-hot encoded.
Dataset load_german(const GermanConfig& cfg);
std::pair<Dataset, GermanSummary> load_german_detailed(const GermanConfig& cfg);

}  // namespace fairbench
