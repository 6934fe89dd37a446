#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "fairbench/dataset.hpp"
#include "fairbench/metrics.hpp"
#include "support/oracles.hpp"
#include "support/testdata.hpp"

using namespace fairbench;

namespace {

// Scorer that reads the single "score" feature straight off the row.
ScoreModel score_feature_model(double tau = 0.5) {
    return ScoreModel([](std::span<const double> row) { return row[0]; }, tau, "test");
}

}  // namespace

TEST_CASE("dataset validation") {
    CHECK_THROWS_AS(Dataset({1.0}, 1, {"x"}, {2}, {"a"}, {{0}}), std::invalid_argument);   // label not binary
    CHECK_THROWS_AS(Dataset({1.0}, 1, {"x"}, {1}, {"a"}, {{5}}), std::invalid_argument);   // sensitive not binary
    CHECK_THROWS_AS(Dataset({1.0}, 1, {"x"}, {1}, {"a"}, {{0}}, {-1.0}), std::invalid_argument);
    CHECK_THROWS_AS(Dataset({1.0}, 1, {"x"}, {1}, {"a"}, {{0}}, {0.0}), std::invalid_argument);  // all-zero weights
    const Dataset d({1.0, 2.0}, 1, {"x"}, {1, 0}, {"a"}, {{0, 1}});
    CHECK(d.n() == 2);
    CHECK(d.weights()[0] == 1.0);
    CHECK_THROWS_AS(d.sensitive("nope"), std::invalid_argument);
}

TEST_CASE("split: exact proportional sizes and determinism") {
    const auto data = testdata::random_dataset(7, 10, 2);
    const auto parts = split(data, 0.6, 0.2, 0.2, 7);
    CHECK(parts.train.n() == 6);
    CHECK(parts.val.n() == 2);
    CHECK(parts.test.n() == 2);

    const auto again = split(data, 0.6, 0.2, 0.2, 7);
    CHECK(again.train.features() == parts.train.features());
    CHECK(again.val.features() == parts.val.features());
    CHECK(again.test.features() == parts.test.features());
}

TEST_CASE("split: partition of the input rows") {
    const auto data = testdata::random_dataset(11, 53, 3);
    const auto parts = split(data, 0.5, 0.25, 0.25, 9);
    CHECK(parts.train.n() + parts.val.n() + parts.test.n() == data.n());
    // Features are continuous draws, so rows are unique markers.
    std::multiset<double> seen;
    for (const Dataset* part : {&parts.train, &parts.val, &parts.test}) {
        for (std::size_t i = 0; i < part->n(); ++i) seen.insert(part->feature(i, 0));
    }
    std::multiset<double> expected;
    for (std::size_t i = 0; i < data.n(); ++i) expected.insert(data.feature(i, 0));
    CHECK(seen == expected);
}

TEST_CASE("split: stratified cell allocation 4 rows per cell -> 2/1/1") {
    // 16 rows, 4 per (Y, A) cell.
    std::vector<double> feats;
    std::vector<int> y, a;
    for (int g = 0; g < 2; ++g) {
        for (int lab = 0; lab < 2; ++lab) {
            for (int k = 0; k < 4; ++k) {
                feats.push_back(static_cast<double>(feats.size()));
                y.push_back(lab);
                a.push_back(g);
            }
        }
    }
    const Dataset data(std::move(feats), 1, {"x"}, std::move(y), {"a"}, {std::move(a)});
    const auto parts = split(data, 0.5, 0.25, 0.25, 3);
    auto cell_count = [](const Dataset& d, int lab, int g) {
        int c = 0;
        for (std::size_t i = 0; i < d.n(); ++i) {
            if (d.label()[i] == lab && d.sensitive("a")[i] == g) ++c;
        }
        return c;
    };
    for (int g = 0; g < 2; ++g) {
        for (int lab = 0; lab < 2; ++lab) {
            CHECK(cell_count(parts.train, lab, g) == 2);
            CHECK(cell_count(parts.val, lab, g) == 1);
            CHECK(cell_count(parts.test, lab, g) == 1);
        }
    }
}

TEST_CASE("split: every stratum of three or more rows reaches the training split") {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        const auto data = testdata::random_dataset(seed * 3 + 1, 21 + 2 * seed, 2);
        const auto parts = split(data, 0.5, 0.25, 0.25, seed);
        // Stratum key of a row: (label, sensitive bit).
        auto stratum_counts = [](const Dataset& d) {
            std::map<int, int> counts;
            for (std::size_t i = 0; i < d.n(); ++i) {
                counts[d.label()[i] * 2 + d.sensitive("a")[i]]++;
            }
            return counts;
        };
        const auto total = stratum_counts(data);
        const auto in_train = stratum_counts(parts.train);
        for (const auto& [key, count] : total) {
            if (count >= 3) {
                CHECK(in_train.count(key));
            }
        }
    }
}

TEST_CASE("split: error cases") {
    const auto data = testdata::random_dataset(2, 10, 2);
    CHECK_THROWS_AS(split(data, 0.5, 0.2, 0.2, 1), std::invalid_argument);  // sum != 1
    CHECK_THROWS_AS(split(data, -0.2, 0.6, 0.6, 1), std::invalid_argument);
    const Dataset tiny({1.0, 2.0}, 1, {"x"}, {0, 1}, {"a"}, {{0, 1}});
    CHECK_THROWS_AS(split(tiny, 0.6, 0.2, 0.2, 1), std::invalid_argument);  // n < 3
}

TEST_CASE("confusion: perfect and constant classifiers") {
    // Scores equal to labels: perfect classifier at tau = 0.5.
    const auto d1 = testdata::score_dataset({1, 0, 1, 0}, {1, 0, 1, 0}, {0, 0, 1, 1});
    const auto conf = confusion(d1, score_feature_model(), "a");
    for (int g = 0; g < 2; ++g) {
        CHECK(*conf[g].fpr() == 0.0);
        CHECK(*conf[g].fnr() == 0.0);
    }

    // Constant positive scores, half the labels 1 per group.
    const auto d2 = testdata::score_dataset({1, 1, 1, 1}, {1, 0, 1, 0}, {0, 0, 1, 1});
    const auto conf2 = confusion(d2, score_feature_model(), "a");
    for (int g = 0; g < 2; ++g) {
        CHECK(*conf2[g].tpr() == 1.0);
        CHECK(*conf2[g].fpr() == 1.0);
    }
}

TEST_CASE("confusion: hand-counted 8-row table") {
    // A=1 rows: TP=2, FP=1, TN=1, FN=0; A=0 rows: TP=1, FP=0, TN=2, FN=1.
    const std::vector<int> y = {1, 1, 0, 0, /*A=0:*/ 1, 0, 0, 1};
    const std::vector<double> s = {1, 1, 1, 0, /*A=0:*/ 1, 0, 0, 0};
    const std::vector<int> a = {1, 1, 1, 1, 0, 0, 0, 0};
    const auto d = testdata::score_dataset(s, y, a);
    const auto conf = confusion(d, score_feature_model(), "a");
    CHECK(*conf[1].tpr() == doctest::Approx(1.0));
    CHECK(*conf[0].tpr() == doctest::Approx(0.5));
    CHECK(*conf[1].fpr() == doctest::Approx(0.5));
    CHECK(*conf[0].fpr() == doctest::Approx(0.0));
    CHECK_THROWS_AS(confusion(d, score_feature_model(), "missing"), std::invalid_argument);
}

TEST_CASE("balanced accuracy: group means and errors") {
    // Group 0: 8/10 correct; group 1: 6/10 correct.
    std::vector<double> s;
    std::vector<int> y, a;
    for (int i = 0; i < 10; ++i) {
        y.push_back(1);
        a.push_back(0);
        s.push_back(i < 8 ? 1.0 : 0.0);
    }
    for (int i = 0; i < 10; ++i) {
        y.push_back(1);
        a.push_back(1);
        s.push_back(i < 6 ? 1.0 : 0.0);
    }
    const auto d = testdata::score_dataset(s, y, a);
    CHECK(balanced_accuracy(d, score_feature_model(), "a") == doctest::Approx(0.7));

    // Perfect classifier.
    const auto dp = testdata::score_dataset({1, 0, 1, 0}, {1, 0, 1, 0}, {0, 0, 1, 1});
    CHECK(balanced_accuracy(dp, score_feature_model(), "a") == doctest::Approx(1.0));

    // Constant predictor on balanced labels.
    const auto dc = testdata::score_dataset({1, 1, 1, 1}, {1, 0, 1, 0}, {0, 0, 1, 1});
    CHECK(balanced_accuracy(dc, score_feature_model(), "a") == doctest::Approx(0.5));

    // One group empty.
    const auto de = testdata::score_dataset({1, 0}, {1, 0}, {0, 0});
    CHECK_THROWS_AS(balanced_accuracy(de, score_feature_model(), "a"), MetricUndefinedError);
}

TEST_CASE("independence deviation") {
    // 10-row groups with 7 and 4 positive predictions.
    std::vector<double> s;
    std::vector<int> y, a;
    for (int i = 0; i < 10; ++i) {
        a.push_back(1);
        y.push_back(i % 2);
        s.push_back(i < 7 ? 1.0 : 0.0);
    }
    for (int i = 0; i < 10; ++i) {
        a.push_back(0);
        y.push_back(i % 2);
        s.push_back(i < 4 ? 1.0 : 0.0);
    }
    const auto d = testdata::score_dataset(s, y, a);
    CHECK(ind_metric(d, score_feature_model(), "a") == doctest::Approx(0.3));

    const auto deq = testdata::score_dataset({1, 0, 1, 0}, {1, 0, 1, 0}, {0, 0, 1, 1});
    CHECK(ind_metric(deq, score_feature_model(), "a") == doctest::Approx(0.0));

    const auto dex = testdata::score_dataset({1, 1, 0, 0}, {1, 0, 1, 0}, {1, 1, 0, 0});
    CHECK(ind_metric(dex, score_feature_model(), "a") == doctest::Approx(1.0));
}

TEST_CASE("separation deviation: literal and per-term forms") {
    // Group 1: FPR 0.2 (1/5), FNR 0.2 (1/5); group 0: FPR 0.0, FNR 0.1 (...).
    // Build from explicit confusion masses instead: use weights.
    // Group 1: 5 negatives with 1 FP, 10 positives with 2 FN -> FPR .2, FNR .2
    // Group 0: 5 negatives with 0 FP, 10 positives with 1 FN -> FPR .0, FNR .1
    std::vector<double> s;
    std::vector<int> y, a;
    auto add = [&](int group, int label, int pred, int count) {
        for (int k = 0; k < count; ++k) {
            a.push_back(group);
            y.push_back(label);
            s.push_back(pred ? 1.0 : 0.0);
        }
    };
    add(1, 0, 1, 1);
    add(1, 0, 0, 4);
    add(1, 1, 0, 2);
    add(1, 1, 1, 8);
    add(0, 0, 1, 0);
    add(0, 0, 0, 5);
    add(0, 1, 0, 1);
    add(0, 1, 1, 9);
    const auto d = testdata::score_dataset(s, y, a);
    CHECK(sp_metric(d, score_feature_model(), "a") == doctest::Approx(0.15));
    CHECK(sp_metric_abs(d, score_feature_model(), "a") == doctest::Approx(0.15));

    // Cancellation: dFPR = +0.2, dFNR = -0.2.
    std::vector<double> s2;
    std::vector<int> y2, a2;
    auto add2 = [&](int group, int label, int pred, int count) {
        for (int k = 0; k < count; ++k) {
            a2.push_back(group);
            y2.push_back(label);
            s2.push_back(pred ? 1.0 : 0.0);
        }
    };
    add2(1, 0, 1, 2);  // group 1 FPR 2/10
    add2(1, 0, 0, 8);
    add2(1, 1, 1, 10);  // group 1 FNR 0
    add2(0, 0, 0, 10);  // group 0 FPR 0
    add2(0, 1, 0, 2);   // group 0 FNR 2/10
    add2(0, 1, 1, 8);
    const auto d2 = testdata::score_dataset(s2, y2, a2);
    CHECK(sp_metric(d2, score_feature_model(), "a") == doctest::Approx(0.0));
    CHECK(sp_metric_abs(d2, score_feature_model(), "a") == doctest::Approx(0.2));

    // Undefined cell names the group: group 0 has no Y=1 rows.
    const auto dbad = testdata::score_dataset({1, 0, 1}, {1, 1, 0}, {1, 1, 0});
    CHECK_THROWS_WITH_AS(sp_metric(dbad, score_feature_model(), "a"),
                         doctest::Contains("A=0, Y=1"), MetricUndefinedError);
}

TEST_CASE("sufficiency deviation") {
    // Group 1: 4 positive predictions with 3 true; group 0: 4 with 2 true.
    std::vector<double> s;
    std::vector<int> y, a;
    auto add = [&](int group, int label, int pred, int count) {
        for (int k = 0; k < count; ++k) {
            a.push_back(group);
            y.push_back(label);
            s.push_back(pred ? 1.0 : 0.0);
        }
    };
    add(1, 1, 1, 3);
    add(1, 0, 1, 1);
    add(1, 0, 0, 1);
    add(0, 1, 1, 2);
    add(0, 0, 1, 2);
    add(0, 0, 0, 1);
    const auto d = testdata::score_dataset(s, y, a);
    CHECK(sf_metric(d, score_feature_model(), "a") == doctest::Approx(0.25));

    // All positive predictions correct in both groups.
    const auto dok = testdata::score_dataset({1, 0, 1, 0}, {1, 0, 1, 0}, {0, 0, 1, 1});
    CHECK(sf_metric(dok, score_feature_model(), "a") == doctest::Approx(0.0));

    // No positive predictions for one group.
    const auto dz = testdata::score_dataset({0, 0, 1, 0}, {1, 0, 1, 0}, {0, 0, 1, 1});
    CHECK_THROWS_AS(sf_metric(dz, score_feature_model(), "a"), MetricUndefinedError);
}

TEST_CASE("metrics match brute-force probability definitions on random data") {
    for (std::uint64_t seed = 100; seed < 110; ++seed) {
        const auto data = testdata::random_dataset(seed, 24, 3, /*random_weights=*/true);
        // Random linear scorer.
        rng::Rng gen(seed * 13 + 1);
        std::vector<double> coef(3);
        for (auto& c : coef) c = gen.normal();
        auto model = ScoreModel(
            [coef](std::span<const double> row) {
                double t = 0.0;
                for (std::size_t j = 0; j < row.size(); ++j) t += coef[j] * row[j];
                return 1.0 / (1.0 + std::exp(-t));
            },
            0.5, "rand");

        const auto yhat = model.predict(data);
        const auto m = oracle::brute_metrics(yhat, data.label(), data.sensitive("a"), data.weights());
        if (!m.defined) continue;
        CHECK(balanced_accuracy(data, model, "a") == doctest::Approx(m.balanced_accuracy).epsilon(1e-12));
        CHECK(ind_metric(data, model, "a") == doctest::Approx(m.ind).epsilon(1e-12));
        CHECK(sp_metric(data, model, "a") == doctest::Approx(m.sp).epsilon(1e-12));
        CHECK(sp_metric_abs(data, model, "a") == doctest::Approx(m.sp_abs).epsilon(1e-12));
        CHECK(sf_metric(data, model, "a") == doctest::Approx(m.sf).epsilon(1e-12));
    }
}

TEST_CASE("group relabeling leaves the deviation metrics unchanged") {
    for (std::uint64_t seed = 40; seed < 46; ++seed) {
        const auto data = testdata::random_dataset(seed, 30, 2, true);
        std::vector<int> flipped = data.sensitive("a");
        for (auto& v : flipped) v = 1 - v;
        const Dataset swapped(data.features(), data.dim(), data.feature_names(), data.label(),
                              {"a"}, {flipped}, data.weights());
        auto model = ScoreModel([](std::span<const double> row) {
            return 1.0 / (1.0 + std::exp(-row[0]));
        }, 0.5, "m");
        const auto rates_ok = [&](const Dataset& d) {
            try {
                ind_metric(d, model, "a");
                sp_metric(d, model, "a");
                sf_metric(d, model, "a");
                return true;
            } catch (const MetricUndefinedError&) {
                return false;
            }
        };
        if (!rates_ok(data) || !rates_ok(swapped)) continue;
        CHECK(ind_metric(data, model, "a") == doctest::Approx(ind_metric(swapped, model, "a")).epsilon(1e-12));
        CHECK(sp_metric(data, model, "a") == doctest::Approx(sp_metric(swapped, model, "a")).epsilon(1e-12));
        CHECK(sf_metric(data, model, "a") == doctest::Approx(sf_metric(swapped, model, "a")).epsilon(1e-12));
    }
}

TEST_CASE("confusion rate identities") {
    for (std::uint64_t seed = 77; seed < 82; ++seed) {
        const auto data = testdata::random_dataset(seed, 40, 2, true);
        auto model = ScoreModel([](std::span<const double> row) {
            return 1.0 / (1.0 + std::exp(-row[1]));
        }, 0.5, "m");
        const auto conf = confusion(data, model, "a");
        for (int g = 0; g < 2; ++g) {
            if (conf[g].positives() > 0) CHECK(*conf[g].tpr() + *conf[g].fnr() == doctest::Approx(1.0).epsilon(1e-12));
            if (conf[g].negatives() > 0) CHECK(*conf[g].tnr() + *conf[g].fpr() == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("threshold selection: separable, tie-break, brute force") {
    // Separable scores: positives 0.9, negatives 0.1. With the strict
    // decision rule, tau = 0.1 already classifies perfectly and is the
    // smallest optimal grid point.
    const auto dsep = testdata::score_dataset({0.9, 0.9, 0.1, 0.1}, {1, 1, 0, 0}, {0, 1, 0, 1});
    const double tau = select_threshold(ScoreModel([](std::span<const double> r) { return r[0]; }, 0.5, ""),
                                        dsep, "a");
    auto ba_at = [&](double t) {
        ScoreModel m([](std::span<const double> r) { return r[0]; }, t, "");
        return balanced_accuracy(dsep, m, "a");
    };
    CHECK(ba_at(tau) == doctest::Approx(1.0));
    CHECK(tau == doctest::Approx(0.1));

    // Constant score: every threshold ties, smallest grid point returned.
    const auto dconst = testdata::score_dataset({0.5, 0.5, 0.5, 0.5}, {1, 0, 1, 0}, {0, 0, 1, 1});
    const double tau_c = select_threshold(std::vector<double>{0.5, 0.5, 0.5, 0.5}, dconst, "a");
    CHECK(tau_c == doctest::Approx(0.5));

    // 6-point hand example checked against exhaustive evaluation.
    const std::vector<double> scores = {0.1, 0.35, 0.41, 0.6, 0.72, 0.9};
    const auto d6 = testdata::score_dataset(scores, {0, 0, 1, 0, 1, 1}, {0, 1, 0, 1, 0, 1});
    const double got = select_threshold(scores, d6, "a");
    const auto grid = default_threshold_grid(scores);
    double best_tau = grid.front(), best_ba = -1.0;
    for (double t : grid) {
        ScoreModel m([](std::span<const double> r) { return r[0]; }, t, "");
        const double ba = balanced_accuracy(d6, m, "a");
        if (ba > best_ba + 1e-15) {
            best_ba = ba;
            best_tau = t;
        }
    }
    CHECK(got == doctest::Approx(best_tau));
}

TEST_CASE("threshold selection equals exhaustive argmax on random data") {
    for (std::uint64_t seed = 500; seed < 506; ++seed) {
        const auto data = testdata::random_dataset(seed, 60, 2, true);
        rng::Rng gen(seed + 9);
        std::vector<double> scores(data.n());
        for (auto& s : scores) s = gen.unit();
        const double got = select_threshold(scores, data, "a");
        const auto grid = default_threshold_grid(scores);
        double best_tau = grid.front(), best_ba = -1.0;
        for (double t : grid) {
            std::vector<int> yhat(data.n());
            for (std::size_t i = 0; i < data.n(); ++i) yhat[i] = scores[i] > t ? 1 : 0;
            const double ba = balanced_accuracy_from(yhat, data.label(), data.sensitive("a"), data.weights());
            if (ba > best_ba + 1e-15) {
                best_ba = ba;
                best_tau = t;
            }
        }
        CHECK(got == doctest::Approx(best_tau).epsilon(1e-12));
    }
}

TEST_CASE("default grid caps at 512 points") {
    std::vector<double> scores(4000);
    rng::Rng gen(4);
    for (auto& s : scores) s = gen.unit();
    const auto grid = default_threshold_grid(scores);
    CHECK(grid.size() == 512);
    CHECK(std::is_sorted(grid.begin(), grid.end()));
}

TEST_CASE("metrics are weight-aware: duplicating a row equals doubling its weight") {
    const std::vector<double> s = {0.9, 0.2, 0.7, 0.4, 0.8, 0.1};
    const std::vector<int> y = {1, 0, 1, 0, 0, 1};
    const std::vector<int> a = {0, 0, 1, 1, 0, 1};
    // Duplicate row 2.
    auto dup_s = s;
    auto dup_y = y;
    auto dup_a = a;
    dup_s.push_back(s[2]);
    dup_y.push_back(y[2]);
    dup_a.push_back(a[2]);
    std::vector<double> w = {1, 1, 2, 1, 1, 1};
    const auto weighted = testdata::score_dataset(s, y, a, std::move(w));
    const auto duplicated = testdata::score_dataset(dup_s, dup_y, dup_a);
    auto model = ScoreModel([](std::span<const double> r) { return r[0]; }, 0.5, "");
    CHECK(ind_metric(weighted, model, "a") == doctest::Approx(ind_metric(duplicated, model, "a")).epsilon(1e-12));
    CHECK(sp_metric(weighted, model, "a") == doctest::Approx(sp_metric(duplicated, model, "a")).epsilon(1e-12));
    CHECK(sf_metric(weighted, model, "a") == doctest::Approx(sf_metric(duplicated, model, "a")).epsilon(1e-12));
    CHECK(balanced_accuracy(weighted, model, "a") ==
          doctest::Approx(balanced_accuracy(duplicated, model, "a")).epsilon(1e-12));
}

TEST_CASE("dataset csv round trip") {
    const auto data = testdata::random_dataset(21, 17, 3, true);
    std::ostringstream out;
    write_dataset_csv(data, out);
    std::istringstream in(out.str());
    const auto back = read_dataset_csv(in);
    CHECK(back.n() == data.n());
    CHECK(back.dim() == data.dim());
    CHECK(back.label() == data.label());
    CHECK(back.sensitive("a") == data.sensitive("a"));
    for (std::size_t i = 0; i < data.n(); ++i) {
        for (std::size_t j = 0; j < data.dim(); ++j) {
            CHECK(back.feature(i, j) == data.feature(i, j));  // shortest round-trip formatting
        }
        CHECK(back.weights()[i] == data.weights()[i]);
    }
}
