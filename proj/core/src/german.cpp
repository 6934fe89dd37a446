#include "fairbench/german.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "fairbench/errors.hpp"
#include "fairbench/logic.hpp"

namespace fairbench {

namespace {

constexpr int kAttributeCount = 20;

const std::array<const char*, kAttributeCount> kAttributeNames = {
    "status", "duration", "credit_history", "purpose", "credit_amount",
    "savings", "employment_since", "installment_rate", "personal_status_sex", "other_debtors",
    "residence_since", "property", "age", "installment_plans", "housing",
    "existing_credits", "job", "num_dependents", "telephone", "foreign_worker"};

// Legal categorical codes per attribute (1-based), from the UCI codebook.
const std::map<int, std::vector<std::string>> kCodebook = {
    {1, {"A11", "A12", "A13", "A14"}},
    {3, {"A30", "A31", "A32", "A33", "A34"}},
    {4, {"A40", "A41", "A42", "A43", "A44", "A45", "A46", "A47", "A48", "A49", "A410"}},
    {6, {"A61", "A62", "A63", "A64", "A65"}},
    {7, {"A71", "A72", "A73", "A74", "A75"}},
    {9, {"A91", "A92", "A93", "A94", "A95"}},
    {10, {"A101", "A102", "A103"}},
    {12, {"A121", "A122", "A123", "A124"}},
    {14, {"A141", "A142", "A143"}},
    {15, {"A151", "A152", "A153"}},
    {17, {"A171", "A172", "A173", "A174"}},
    {19, {"A191", "A192"}},
    {20, {"A201", "A202"}}};

// Codes for "female" in the personal status / sex attribute.
const std::set<std::string> kFemaleCodes = {"A92", "A95"};

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

double parse_number(const std::string& tok, std::size_t row_no) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
        throw DataError("german: bad numeric field '" + tok + "' at row " + std::to_string(row_no));
    }
    return v;
}

}  // namespace

std::pair<Dataset, GermanSummary> load_german_detailed(const GermanConfig& cfg) {
    if (cfg.age_cutoff <= 0) throw std::invalid_argument("german: age cutoff must be positive");
    std::ifstream in(cfg.path, std::ios::binary);
    if (!in) throw DataError("german: cannot open '" + cfg.path + "'");

    std::set<int> categorical(cfg.categorical_attributes.begin(), cfg.categorical_attributes.end());
    for (int attr : categorical) {
        if (attr < 1 || attr > kAttributeCount) {
            throw std::invalid_argument("german: categorical attribute index out of range");
        }
    }

    std::vector<std::array<std::string, kAttributeCount>> raw;
    std::vector<int> label;
    std::string line;
    std::size_t row_no = 0;
    while (std::getline(in, line)) {
        ++row_no;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        const auto toks = tokenize(line);
        if (toks.size() != kAttributeCount + 1) {
            throw DataError("german: row " + std::to_string(row_no) + " has " +
                            std::to_string(toks.size()) + " fields, expected " +
                            std::to_string(kAttributeCount + 1));
        }
        std::array<std::string, kAttributeCount> fields;
        for (int k = 0; k < kAttributeCount; ++k) {
            const std::string& tok = toks[k];
            if (categorical.count(k + 1)) {
                auto it = kCodebook.find(k + 1);
                if (it != kCodebook.end() &&
                    std::find(it->second.begin(), it->second.end(), tok) == it->second.end()) {
                    throw DataError("german: unknown code '" + tok + "' for attribute " +
                                    std::to_string(k + 1) + " at row " + std::to_string(row_no));
                }
            } else {
                parse_number(tok, row_no);
            }
            fields[k] = tok;
        }
        const std::string& outcome = toks[kAttributeCount];
        if (outcome == "1") {
            label.push_back(1);  // good credit: repays
        } else if (outcome == "2") {
            label.push_back(0);  // bad credit: defaults
        } else {
            throw DataError("german: unknown outcome '" + outcome + "' at row " + std::to_string(row_no));
        }
        raw.push_back(std::move(fields));
    }
    if (raw.empty()) throw DataError("german: no data rows in '" + cfg.path + "'");
    const std::size_t n = raw.size();

    // Observed levels per categorical attribute, in codebook order.
    std::map<int, std::vector<std::string>> levels;
    for (int attr : categorical) {
        std::set<std::string> seen;
        for (const auto& row : raw) seen.insert(row[attr - 1]);
        std::vector<std::string> ordered;
        auto it = kCodebook.find(attr);
        if (it != kCodebook.end()) {
            for (const auto& code : it->second) {
                if (seen.count(code)) ordered.push_back(code);
            }
        } else {
            ordered.assign(seen.begin(), seen.end());
        }
        levels[attr] = std::move(ordered);
    }

    std::vector<std::string> feature_names;
    for (int k = 1; k <= kAttributeCount; ++k) {
        if (categorical.count(k)) {
            for (const auto& code : levels[k]) {
                feature_names.push_back(std::string(kAttributeNames[k - 1]) + "_" + code);
            }
        } else {
            feature_names.push_back(kAttributeNames[k - 1]);
        }
    }
    const std::size_t d = feature_names.size();

    std::vector<double> feats(n * d, 0.0);
    std::vector<int> young(n), female(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t col = 0;
        for (int k = 1; k <= kAttributeCount; ++k) {
            const std::string& tok = raw[i][k - 1];
            if (categorical.count(k)) {
                const auto& lv = levels[k];
                for (std::size_t m = 0; m < lv.size(); ++m) {
                    feats[i * d + col + m] = lv[m] == tok ? 1.0 : 0.0;
                }
                col += lv.size();
            } else {
                feats[i * d + col] = parse_number(tok, i + 1);
                ++col;
            }
        }
        const double age = parse_number(raw[i][12], i + 1);  // attribute 13
        young[i] = age <= static_cast<double>(cfg.age_cutoff) ? 1 : 0;
        female[i] = kFemaleCodes.count(raw[i][8]) ? 1 : 0;  // attribute 9
    }

    Dataset data(std::move(feats), d, std::move(feature_names), std::move(label),
                 {"young", "female"}, {std::move(young), std::move(female)});

    GermanSummary summary;
    summary.rows = n;
    summary.feature_count = d;
    double bad = 0.0, y_count = 0.0, f_count = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (data.label()[i] == 0) bad += 1.0;
        y_count += data.sensitive("young")[i];
        f_count += data.sensitive("female")[i];
    }
    summary.default_rate = bad / static_cast<double>(n);
    summary.a1_rate = y_count / static_cast<double>(n);
    summary.a2_rate = f_count / static_cast<double>(n);
    const auto rates = lp_rates(data, {"young", "female"});
    summary.or_rate = rates.or_rate;
    summary.and_rate = rates.and_rate;
    summary.xor_rate = rates.xor_rate;
    return {std::move(data), summary};
}

Dataset load_german(const GermanConfig& cfg) {
    return load_german_detailed(cfg).first;
}

}  // namespace fairbench
