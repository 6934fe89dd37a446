#pragma once

// Shared fixtures: random datasets with guarded cell occupancy, simple
// hand-built datasets, and a synthetic credit file in the UCI statlog
// format with the published marginals (used when the real file is not
// available; point FAIRBENCH_GERMAN_DATA at a local copy to use it).

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "fairbench/dataset.hpp"
#include "fairbench/rng.hpp"

namespace testdata {

using fairbench::Dataset;

// Random dataset whose four (A, Y) cells are all nonempty.
inline Dataset random_dataset(std::uint64_t seed, std::size_t n, std::size_t d,
                              bool random_weights = false) {
    fairbench::rng::Rng gen(seed);
    while (true) {
        std::vector<double> feats(n * d);
        for (auto& v : feats) v = gen.normal();
        std::vector<int> y(n), a(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = gen.unit() < 0.5 ? 1 : 0;
            a[i] = gen.unit() < 0.5 ? 1 : 0;
        }
        std::vector<double> w(n, 1.0);
        if (random_weights) {
            for (auto& v : w) v = 0.25 + 1.5 * gen.unit();
        }
        int cells[2][2] = {{0, 0}, {0, 0}};
        for (std::size_t i = 0; i < n; ++i) ++cells[a[i]][y[i]];
        if (cells[0][0] == 0 || cells[0][1] == 0 || cells[1][0] == 0 || cells[1][1] == 0) continue;
        std::vector<std::string> names(d);
        for (std::size_t j = 0; j < d; ++j) names[j] = "x" + std::to_string(j);
        return Dataset(std::move(feats), d, std::move(names), std::move(y), {"a"}, {std::move(a)},
                       std::move(w));
    }
}

// Dataset with explicit labels/groups and a single "score" feature equal to
// the given values, handy for threshold-rule tests.
inline Dataset score_dataset(const std::vector<double>& scores, const std::vector<int>& y,
                             const std::vector<int>& a, std::vector<double> w = {}) {
    return Dataset(std::vector<double>(scores), 1, {"score"}, std::vector<int>(y), {"a"},
                   {std::vector<int>(a)}, std::move(w));
}

// Two sensitive columns; features are the two bits plus one noise column.
inline Dataset two_attribute_dataset(std::uint64_t seed, std::size_t n) {
    fairbench::rng::Rng gen(seed);
    std::vector<double> feats(n * 3);
    std::vector<int> y(n), a1(n), a2(n);
    for (std::size_t i = 0; i < n; ++i) {
        a1[i] = gen.unit() < 0.5 ? 1 : 0;
        a2[i] = gen.unit() < 0.5 ? 1 : 0;
        y[i] = gen.unit() < 0.5 ? 1 : 0;
        feats[i * 3 + 0] = a1[i];
        feats[i * 3 + 1] = a2[i];
        feats[i * 3 + 2] = gen.normal();
    }
    return Dataset(std::move(feats), 3, {"f1", "f2", "noise"}, std::move(y), {"a1", "a2"},
                   {std::move(a1), std::move(a2)});
}

// ---------------------------------------------------------------------------
// synthetic statlog-format credit file

struct GermanFixtureSpec {
    std::size_t rows = 1000;
    std::size_t bad = 300;     // outcome 2
    std::size_t young = 150;   // age <= 25
    std::size_t female = 310;  // personal status A92
    std::uint64_t seed = 20240101;
};

// Writes a deterministic file with exactly the requested marginals. Every
// level code observed in the real data appears at least once, so one-hot
// encoding yields the published 61 feature columns.
inline void write_german_fixture(const std::string& path, const GermanFixtureSpec& spec = {}) {
    using fairbench::rng::Rng;
    Rng gen(spec.seed);
    const std::size_t n = spec.rows;

    auto pick_flags = [&](std::size_t count, std::uint64_t salt) {
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        Rng local(fairbench::rng::mix_key(spec.seed, salt));
        local.shuffle(idx);
        std::vector<int> flags(n, 0);
        for (std::size_t i = 0; i < count; ++i) flags[idx[i]] = 1;
        return flags;
    };
    const auto young = pick_flags(spec.young, 1);
    const auto female = pick_flags(spec.female, 2);

    // Bad outcomes lean towards young/female rows so mitigation has bias to
    // work against; exact count by taking the top scores.
    std::vector<double> risk(n);
    for (std::size_t i = 0; i < n; ++i) {
        risk[i] = 0.9 * young[i] + 0.6 * female[i] + gen.normal();
    }
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
        if (risk[l] != risk[r]) return risk[l] > risk[r];
        return l < r;
    });
    std::vector<int> bad(n, 0);
    for (std::size_t k = 0; k < spec.bad; ++k) bad[order[k]] = 1;

    // Level pools exactly as observed in the real data (A47 and A95 absent).
    const std::vector<std::vector<std::string>> pools = {
        {"A11", "A12", "A13", "A14"},                                              // 1 status
        {},                                                                        // 2 duration
        {"A30", "A31", "A32", "A33", "A34"},                                       // 3 history
        {"A40", "A41", "A42", "A43", "A44", "A45", "A46", "A48", "A49", "A410"},   // 4 purpose
        {},                                                                        // 5 amount
        {"A61", "A62", "A63", "A64", "A65"},                                       // 6 savings
        {"A71", "A72", "A73", "A74", "A75"},                                       // 7 employment
        {},                                                                        // 8 installment rate
        {},                                                                        // 9 personal status (from sex)
        {"A101", "A102", "A103"},                                                  // 10 debtors
        {},                                                                        // 11 residence
        {"A121", "A122", "A123", "A124"},                                          // 12 property
        {},                                                                        // 13 age
        {"A141", "A142", "A143"},                                                  // 14 plans
        {"A151", "A152", "A153"},                                                  // 15 housing
        {},                                                                        // 16 existing credits
        {"A171", "A172", "A173", "A174"},                                          // 17 job
        {},                                                                        // 18 dependents
        {"A191", "A192"},                                                          // 19 telephone
        {"A201", "A202"},                                                          // 20 foreign worker
    };
    const std::vector<std::string> male_codes = {"A91", "A93", "A94"};

    std::vector<std::vector<std::string>> rows(n, std::vector<std::string>(21));
    for (std::size_t i = 0; i < n; ++i) {
        auto& row = rows[i];
        for (int attr = 1; attr <= 20; ++attr) {
            const auto& pool = pools[attr - 1];
            if (!pool.empty()) {
                row[attr - 1] = pool[gen.below(pool.size())];
            }
        }
        row[1] = std::to_string(6 + gen.below(55));                   // duration
        row[4] = std::to_string(400 + gen.below(14000));              // amount
        row[7] = std::to_string(1 + gen.below(4));                    // installment rate
        row[8] = female[i] ? "A92" : male_codes[gen.below(3)];        // personal status / sex
        row[10] = std::to_string(1 + gen.below(4));                   // residence since
        row[12] = young[i] ? std::to_string(19 + gen.below(7))        // age 19..25
                           : std::to_string(26 + gen.below(50));      // age 26..75
        row[15] = std::to_string(1 + gen.below(4));                   // existing credits
        row[17] = std::to_string(1 + gen.below(2));                   // dependents
        row[20] = bad[i] ? "2" : "1";
    }

    // Guarantee every pool level occurs (uniform draws almost surely cover
    // them, but the 61-column layout must not depend on luck).
    std::size_t patch_row = 0;
    for (int attr = 1; attr <= 20; ++attr) {
        const auto& pool = pools[attr - 1];
        if (pool.empty()) continue;
        std::set<std::string> seen;
        for (std::size_t i = 0; i < n; ++i) seen.insert(rows[i][attr - 1]);
        for (const auto& code : pool) {
            if (!seen.count(code)) {
                rows[patch_row % n][attr - 1] = code;
                ++patch_row;
            }
        }
    }

    std::ofstream out(path, std::ios::binary);
    for (const auto& row : rows) {
        for (std::size_t k = 0; k < row.size(); ++k) {
            if (k) out << ' ';
            out << row[k];
        }
        out << '\n';
    }
}

// Path of the credit data used in tests: the real file when
// FAIRBENCH_GERMAN_DATA points at one, otherwise a synthetic fixture
// written under /tmp.
inline std::string german_test_file() {
    if (const char* env = std::getenv("FAIRBENCH_GERMAN_DATA")) return env;
    const std::string path = "/tmp/fairbench_german_fixture.data";
    static bool written = false;
    if (!written) {
        write_german_fixture(path);
        written = true;
    }
    return path;
}

inline bool german_test_file_is_synthetic() {
    return std::getenv("FAIRBENCH_GERMAN_DATA") == nullptr;
}

}  // namespace testdata
