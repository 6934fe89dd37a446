#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fairbench/preprocess.hpp"
#include "support/testdata.hpp"

using namespace fairbench;

namespace {

// Weighted joint/marginal masses over the four (A, Y) cells.
struct Cells {
    double m[2][2] = {{0, 0}, {0, 0}};
    double total = 0.0;
    double pa(int g) const { return (m[g][0] + m[g][1]) / total; }
    double py(int y) const { return (m[0][y] + m[1][y]) / total; }
    double joint(int g, int y) const { return m[g][y] / total; }
};

Cells cells_of(const Dataset& d, const std::string& col) {
    Cells c;
    const auto& a = d.sensitive(col);
    for (std::size_t i = 0; i < d.n(); ++i) {
        c.m[a[i]][d.label()[i]] += d.weights()[i];
        c.total += d.weights()[i];
    }
    return c;
}

}  // namespace

TEST_CASE("reweigh: independence is the fixed point") {
    // A and Y empirically independent: equal counts in all four cells.
    std::vector<double> feats(8, 0.0);
    std::vector<int> y = {0, 0, 1, 1, 0, 0, 1, 1};
    std::vector<int> a = {0, 1, 0, 1, 0, 1, 0, 1};
    const Dataset data(std::move(feats), 1, {"x"}, std::move(y), {"a"}, {std::move(a)});
    const auto out = reweigh(data, "a");
    for (double w : out.weights()) CHECK(w == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("reweigh: hand-computed cell weight") {
    // n=10: P(A=0)=0.5, P(Y=1)=0.6, cell (A=0,Y=1) has 4 rows -> w = .5*.6/.4 = 0.75.
    std::vector<int> a = {0, 0, 0, 0, 0, 1, 1, 1, 1, 1};
    std::vector<int> y = {1, 1, 1, 1, 0, 1, 1, 0, 0, 0};
    std::vector<double> feats(10, 0.0);
    const Dataset data(std::move(feats), 1, {"x"}, std::move(y), {"a"}, {std::move(a)});
    const auto out = reweigh(data, "a");
    CHECK(out.weights()[0] == doctest::Approx(0.75).epsilon(1e-12));  // (A=0, Y=1)
    // Weighted joint factorizes on every cell.
    const auto c = cells_of(out, "a");
    for (int g = 0; g < 2; ++g) {
        for (int lab = 0; lab < 2; ++lab) {
            CHECK(c.joint(g, lab) == doctest::Approx(c.pa(g) * c.py(lab)).epsilon(1e-10));
        }
    }
}

TEST_CASE("reweigh: empty cell error names the cell") {
    std::vector<double> feats(4, 0.0);
    const Dataset data(std::move(feats), 1, {"x"}, {1, 1, 1, 0}, {"a"}, {{0, 0, 1, 0}});
    CHECK_THROWS_WITH_AS(reweigh(data, "a"), doctest::Contains("A=1, Y=0"), std::invalid_argument);
}

TEST_CASE("reweigh factorization property on random data") {
    for (std::uint64_t seed = 60; seed < 70; ++seed) {
        const auto data = testdata::random_dataset(seed, 37, 2, true);
        const auto out = reweigh(data, "a");
        const auto c = cells_of(out, "a");
        for (int g = 0; g < 2; ++g) {
            for (int lab = 0; lab < 2; ++lab) {
                CHECK(c.joint(g, lab) == doctest::Approx(c.pa(g) * c.py(lab)).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("reweigh_resample: empirical joint factorizes at large n") {
    // Biased joint, then resample 1e5 rows and check factorization within
    // three standard errors.
    const std::size_t n = 100000;
    fairbench::rng::Rng gen(123);
    std::vector<double> feats(n, 0.0);
    std::vector<int> y(n), a(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = gen.unit() < 0.4 ? 1 : 0;
        const double p = a[i] ? 0.35 : 0.7;
        y[i] = gen.unit() < p ? 1 : 0;
    }
    const Dataset data(std::move(feats), 1, {"x"}, std::move(y), {"a"}, {std::move(a)});
    const auto out = reweigh_resample(data, "a", 99);
    CHECK(out.n() == n);
    for (double w : out.weights()) CHECK(w == 1.0);
    const auto c = cells_of(out, "a");
    for (int g = 0; g < 2; ++g) {
        for (int lab = 0; lab < 2; ++lab) {
            const double expect = c.pa(g) * c.py(lab);
            const double se = std::sqrt(expect * (1.0 - expect) / static_cast<double>(n));
            CHECK(std::abs(c.joint(g, lab) - expect) <= 3.0 * se);
        }
    }
}

TEST_CASE("di_remove: lambda 0 is the identity") {
    const auto data = testdata::random_dataset(81, 40, 3);
    RepairParams params;
    params.lambda = 0.0;
    const auto [repaired, rep] = di_remove(data, "a", params);
    CHECK(repaired.features() == data.features());
    const auto other = testdata::random_dataset(82, 12, 3);
    CHECK(rep.transform(other).features() == other.features());
}

TEST_CASE("di_remove: identical group distributions stay put at lambda 1") {
    // Both groups carry the same values 0..19.
    std::vector<double> feats;
    std::vector<int> y, a;
    for (int g = 0; g < 2; ++g) {
        for (int k = 0; k < 20; ++k) {
            feats.push_back(static_cast<double>(k));
            y.push_back(k % 2);
            a.push_back(g);
        }
    }
    const Dataset data(std::move(feats), 1, {"x"}, std::move(y), {"a"}, {std::move(a)});
    RepairParams params;
    params.quantile_grid = 100;
    const auto [repaired, rep] = di_remove(data, "a", params);
    const double spacing = 19.0 / 99.0;  // max knot gap of the value range
    for (std::size_t i = 0; i < data.n(); ++i) {
        CHECK(std::abs(repaired.feature(i, 0) - data.feature(i, 0)) <= spacing + 1e-9);
    }
}

TEST_CASE("di_remove: rank-wise medians of two shifted groups") {
    // Group 0 values {1,2,3,4}, group 1 values {11,12,13,14}: full repair
    // maps both to the per-rank medians {6,7,8,9}.
    std::vector<double> feats = {1, 2, 3, 4, 11, 12, 13, 14};
    std::vector<int> y = {0, 1, 0, 1, 0, 1, 0, 1};
    std::vector<int> a = {0, 0, 0, 0, 1, 1, 1, 1};
    const Dataset data(std::move(feats), 1, {"x"}, std::move(y), {"a"}, {std::move(a)});
    RepairParams params;
    params.quantile_grid = 4;  // knots exactly at the order statistics
    const auto [repaired, rep] = di_remove(data, "a", params);
    const std::vector<double> expect = {6, 7, 8, 9, 6, 7, 8, 9};
    for (std::size_t i = 0; i < 8; ++i) {
        CHECK(repaired.feature(i, 0) == doctest::Approx(expect[i]).epsilon(1e-12));
    }
}

TEST_CASE("di_remove: within-group monotonicity") {
    for (std::uint64_t seed = 300; seed < 304; ++seed) {
        const auto data = testdata::random_dataset(seed, 80, 2);
        RepairParams params;
        params.lambda = 0.7;
        const auto [repaired, rep] = di_remove(data, "a", params);
        for (int g = 0; g < 2; ++g) {
            std::vector<std::pair<double, double>> pairs;  // (original, repaired)
            for (std::size_t i = 0; i < data.n(); ++i) {
                if (data.sensitive("a")[i] == g) pairs.emplace_back(data.feature(i, 0), repaired.feature(i, 0));
            }
            std::sort(pairs.begin(), pairs.end());
            for (std::size_t k = 1; k < pairs.size(); ++k) {
                CHECK(pairs[k].second >= pairs[k - 1].second - 1e-12);
            }
        }
    }
}

TEST_CASE("di_remove: full repair aligns the group distributions (KS bound)") {
    fairbench::rng::Rng gen(17);
    const std::size_t n = 1300;
    std::vector<double> feats(n);
    std::vector<int> y(n), a(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = i < 500 ? 0 : 1;
        y[i] = gen.unit() < 0.5;
        feats[i] = a[i] == 0 ? gen.normal(0.0, 1.0) : gen.normal(2.0, 1.7);
    }
    const Dataset data(std::move(feats), 1, {"x"}, std::move(y), {"a"}, {std::move(a)});
    RepairParams params;
    params.quantile_grid = 100;
    const auto [repaired, rep] = di_remove(data, "a", params);

    std::vector<double> g0, g1;
    for (std::size_t i = 0; i < n; ++i) {
        (data.sensitive("a")[i] == 0 ? g0 : g1).push_back(repaired.feature(i, 0));
    }
    std::sort(g0.begin(), g0.end());
    std::sort(g1.begin(), g1.end());
    // Two-sample Kolmogorov-Smirnov statistic.
    double ks = 0.0;
    std::size_t i0 = 0, i1 = 0;
    while (i0 < g0.size() && i1 < g1.size()) {
        if (g0[i0] <= g1[i1]) {
            ++i0;
        } else {
            ++i1;
        }
        ks = std::max(ks, std::abs(static_cast<double>(i0) / g0.size() - static_cast<double>(i1) / g1.size()));
    }
    CHECK(ks <= 2.0 / params.quantile_grid);
}

TEST_CASE("di_remove: fit-transform consistency on the training data") {
    const auto data = testdata::random_dataset(95, 60, 3);
    RepairParams params;
    params.lambda = 0.5;
    const auto [repaired, rep] = di_remove(data, "a", params);
    const auto again = rep.transform(data);
    for (std::size_t i = 0; i < data.n(); ++i) {
        for (std::size_t j = 0; j < data.dim(); ++j) {
            CHECK(again.feature(i, j) == doctest::Approx(repaired.feature(i, j)).epsilon(1e-12));
        }
    }
}

TEST_CASE("di_remove: binary columns are excluded by default") {
    std::vector<double> feats;
    std::vector<int> y, a;
    fairbench::rng::Rng gen(7);
    for (int i = 0; i < 30; ++i) {
        feats.push_back(i % 2);          // binary indicator
        feats.push_back(gen.normal());   // continuous
        y.push_back(i % 2);
        a.push_back(gen.unit() < 0.5);
    }
    const Dataset data(std::move(feats), 2, {"flag", "value"}, std::move(y), {"a"}, {std::move(a)});
    const auto [repaired, rep] = di_remove(data, "a");
    CHECK(rep.repaired_columns() == std::vector<std::string>{"value"});
    for (std::size_t i = 0; i < data.n(); ++i) CHECK(repaired.feature(i, 0) == data.feature(i, 0));
}

TEST_CASE("di_remove: out-of-support values clamp to the group's range") {
    std::vector<double> feats = {1, 2, 3, 4, 11, 12, 13, 14};
    std::vector<int> y = {0, 1, 0, 1, 0, 1, 0, 1};
    std::vector<int> a = {0, 0, 0, 0, 1, 1, 1, 1};
    const Dataset train(std::move(feats), 1, {"x"}, std::move(y), {"a"}, {std::move(a)});
    RepairParams params;
    params.quantile_grid = 4;
    const auto [repaired, rep] = di_remove(train, "a", params);
    const Dataset probe({-100.0, 100.0}, 1, {"x"}, {0, 1}, {"a"}, {{0, 0}});
    const auto out = rep.transform(probe);
    CHECK(out.feature(0, 0) == doctest::Approx(6.0));  // below support -> lowest median knot
    CHECK(out.feature(1, 0) == doctest::Approx(9.0));  // above support -> highest median knot
}

TEST_CASE("di_remove errors") {
    const auto data = testdata::random_dataset(4, 20, 2);
    RepairParams params;
    params.lambda = 1.5;
    CHECK_THROWS_AS(di_remove(data, "a", params), std::invalid_argument);
    params.lambda = 1.0;
    params.quantile_grid = 1;
    CHECK_THROWS_AS(di_remove(data, "a", params), std::invalid_argument);
    params.quantile_grid = 50;
    params.columns = {"does_not_exist"};
    CHECK_THROWS_AS(di_remove(data, "a", params), std::invalid_argument);

    // A group with fewer than 2 rows.
    std::vector<double> feats = {1, 2, 3};
    const Dataset small(std::move(feats), 1, {"x"}, {0, 1, 0}, {"a"}, {{0, 0, 1}});
    CHECK_THROWS_AS(di_remove(small, "a"), std::invalid_argument);
}
