#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vent/errors.hpp"
#include "vent/rng.hpp"
#include "vent/stats.hpp"

using namespace vent;

namespace {

// Independent Wilcoxon oracle: double-precision average ranks, exhaustive
// sign-flip enumeration of the null distribution of W+.
double wilcoxon_exact_oracle(std::vector<double> diffs) {
    diffs.erase(std::remove(diffs.begin(), diffs.end(), 0.0), diffs.end());
    const int n = static_cast<int>(diffs.size());
    std::vector<double> absd(n);
    for (int i = 0; i < n; ++i) absd[i] = std::abs(diffs[i]);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return absd[a] < absd[b]; });
    std::vector<double> rank(n);
    int i = 0;
    while (i < n) {
        int j = i;
        while (j < n && absd[order[j]] == absd[order[i]]) ++j;
        double avg = (i + 1 + j) / 2.0;
        for (int k = i; k < j; ++k) rank[order[k]] = avg;
        i = j;
    }
    double w_obs = 0.0;
    for (int k = 0; k < n; ++k)
        if (diffs[k] > 0.0) w_obs += rank[k];

    long total = 1L << n;
    long le = 0, ge = 0;
    for (long s = 0; s < total; ++s) {
        double w = 0.0;
        for (int k = 0; k < n; ++k)
            if (s & (1L << k)) w += rank[k];
        if (w <= w_obs + 1e-9) ++le;
        if (w >= w_obs - 1e-9) ++ge;
    }
    double p = 2.0 * std::min(le, ge) / static_cast<double>(total);
    return std::min(1.0, p);
}

}  // namespace

TEST_CASE("rmse and mae hand values") {
    std::vector<double> pred = {2, 2, 2, 2};
    std::vector<double> ref = {0, 2, 4, 2};
    CHECK(rmse(pred, ref) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(mae(pred, ref) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rmse(pred, pred) == 0.0);
    CHECK_THROWS_AS(rmse({1.0}, {1.0, 2.0}), ContractError);
}

TEST_CASE("pearson correlation extremes and degenerate input") {
    std::vector<double> x = {1, 2, 3, 4, 5};
    std::vector<double> y, neg;
    for (double v : x) {
        y.push_back(2 * v + 1);
        neg.push_back(-3 * v + 7);
    }
    CHECK(pearson_r(x, y) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pearson_r(x, neg) == doctest::Approx(-1.0).epsilon(1e-12));
    std::vector<double> flat = {2, 2, 2, 2, 2};
    CHECK_THROWS_AS(pearson_r(x, flat), NumericError);
}

TEST_CASE("bland-altman limits on a hand example") {
    // diffs {1, -1}: mean 0, sample sd sqrt(2), limits at +-1.96*sqrt(2)
    std::vector<double> pred = {3, 1};
    std::vector<double> ref = {2, 2};
    auto ba = bland_altman(pred, ref);
    CHECK(ba.mean_diff == doctest::Approx(0.0));
    CHECK(ba.upper_loa == doctest::Approx(1.96 * std::sqrt(2.0)).epsilon(1e-12));
    CHECK(ba.lower_loa == doctest::Approx(-1.96 * std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("bland-altman limits cover about 95 percent of normal differences") {
    Rng rng(8);
    int n = 4000;
    std::vector<double> pred(n), ref(n);
    for (int i = 0; i < n; ++i) {
        ref[i] = rng.uniform(4.0, 10.0);
        pred[i] = ref[i] + 0.3 + 0.8 * rng.normal();
    }
    auto ba = bland_altman(pred, ref);
    int inside = 0;
    for (int i = 0; i < n; ++i) {
        double d = pred[i] - ref[i];
        if (d >= ba.lower_loa && d <= ba.upper_loa) ++inside;
    }
    CHECK(static_cast<double>(inside) / n >= 0.93);
    CHECK(static_cast<double>(inside) / n <= 0.97);
}

TEST_CASE("wilcoxon: six uniformly positive differences are significant") {
    std::vector<double> a = {2.0, 2.1, 2.2, 2.3, 2.4, 2.5};
    std::vector<double> b = {1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
    auto res = paired_significance(a, b);
    CHECK(res.n_used == 6);
    CHECK(res.statistic == doctest::Approx(21.0));
    CHECK(res.p_value == doctest::Approx(2.0 / 64.0).epsilon(1e-12));
    CHECK(res.significant);
    CHECK(res.annotation() == "significant");
}

TEST_CASE("wilcoxon: symmetric differences are not significant") {
    std::vector<double> a = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
    std::vector<double> b = {2.0, 1.0, 4.0, 3.0, 6.0, 5.0};
    auto res = paired_significance(a, b);
    CHECK(!res.significant);
    CHECK(res.annotation() == "NS");
    CHECK(res.p_value > 0.5);
}

TEST_CASE("wilcoxon guards: too few pairs, all tied") {
    std::vector<double> a = {1, 2, 3};
    CHECK_THROWS_AS(paired_significance(a, a), ContractError);
    std::vector<double> six = {1, 2, 3, 4, 5, 6};
    CHECK_THROWS_AS(paired_significance(six, six), NumericError);
}

TEST_CASE("exact p agrees with exhaustive sign-flip enumeration") {
    Rng rng(314);
    for (int trial = 0; trial < 15; ++trial) {
        int n = 8 + static_cast<int>(rng.uniform_int(0, 6));
        std::vector<double> a(n), b(n);
        for (int i = 0; i < n; ++i) {
            b[i] = rng.uniform(0.0, 1.0);
            a[i] = b[i] + 0.2 * rng.normal();
            if (trial % 3 == 0) a[i] = b[i] + std::round(4 * rng.normal()) / 4.0;  // force ties
        }
        std::vector<double> diffs(n);
        bool any = false;
        for (int i = 0; i < n; ++i) {
            diffs[i] = a[i] - b[i];
            if (diffs[i] != 0.0) any = true;
        }
        if (!any) continue;
        auto res = paired_significance(a, b);
        CHECK(res.p_value == doctest::Approx(wilcoxon_exact_oracle(diffs)).epsilon(1e-9));
    }
}

TEST_CASE("large-sample p agrees with a monte-carlo permutation oracle") {
    Rng rng(2718);
    int n = 40;
    std::vector<double> a(n), b(n);
    for (int i = 0; i < n; ++i) {
        b[i] = rng.uniform(0.0, 1.0);
        a[i] = b[i] + 0.05 + 0.3 * rng.normal();
    }
    auto res = paired_significance(a, b);

    // monte-carlo sign flips over the observed |differences|
    std::vector<double> diffs(n);
    for (int i = 0; i < n; ++i) diffs[i] = a[i] - b[i];
    std::vector<double> absd(n);
    for (int i = 0; i < n; ++i) absd[i] = std::abs(diffs[i]);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int x, int y) { return absd[x] < absd[y]; });
    std::vector<double> rank(n);
    for (int i = 0; i < n; ++i) rank[order[i]] = i + 1;  // no ties with continuous noise
    double w_obs = 0.0;
    for (int i = 0; i < n; ++i)
        if (diffs[i] > 0) w_obs += rank[i];

    Rng mc(1);
    int reps = 200000, le = 0, ge = 0;
    for (int r = 0; r < reps; ++r) {
        double w = 0.0;
        for (int i = 0; i < n; ++i)
            if (mc.uniform() < 0.5) w += rank[i];
        if (w <= w_obs) ++le;
        if (w >= w_obs) ++ge;
    }
    double p_mc = std::min(1.0, 2.0 * std::min(le, ge) / static_cast<double>(reps));
    CHECK(res.p_value == doctest::Approx(p_mc).epsilon(0.15));
    CHECK(std::abs(res.p_value - p_mc) < 0.01);
}

TEST_CASE("stratified rmse recombines to the pooled value") {
    Rng rng(5);
    int n = 200;
    std::vector<double> pred(n), ref(n);
    std::vector<int> levels(n);
    for (int i = 0; i < n; ++i) {
        ref[i] = rng.uniform(4.0, 10.0);
        levels[i] = i % 4;
        pred[i] = ref[i] + (levels[i] + 1) * 0.2 * rng.normal();
    }
    auto per = stratified_error(pred, ref, levels);
    REQUIRE(per.size() == 4);
    double ss = 0.0;
    for (const auto& [level, r] : per) ss += r * r * (n / 4);
    CHECK(std::sqrt(ss / n) == doctest::Approx(rmse(pred, ref)).epsilon(1e-9));

    // empty buckets do not appear
    std::vector<int> two_levels(n, 0);
    for (int i = 0; i < n / 2; ++i) two_levels[i] = 3;
    auto sparse = stratified_error(pred, ref, two_levels);
    CHECK(sparse.size() == 2);
    CHECK(sparse.count(1) == 0);
}

TEST_CASE("eval report aggregates and flags degenerate correlation") {
    std::vector<double> ref = {5, 6, 7, 8, 9, 10};
    std::vector<double> pred = {5.1, 6.2, 6.8, 8.1, 9.3, 9.9};
    std::vector<int> levels = {0, 1, 2, 3, 0, 1};
    std::vector<int> subjects = {0, 0, 1, 1, 2, 2};
    std::vector<std::uint32_t> wids = {10, 11, 12, 13, 14, 15};
    auto rep = compute_eval_report("a", pred, ref, levels, subjects, wids);
    CHECK(rep.n == 6);
    CHECK(rep.rmse == doctest::Approx(rmse(pred, ref)));
    int total = 0;
    for (const auto& [lv, c] : rep.per_level_n) total += c;
    CHECK(total == rep.n);
    CHECK(rep.subject_rmse_min <= rep.subject_rmse_max);
    CHECK(rep.window_ids == wids);

    std::vector<double> flat(6, 7.0);
    auto deg = compute_eval_report("flat", flat, ref, levels, subjects, wids);
    CHECK(std::isnan(deg.pearson_r));

    auto sig = paired_significance(pred, flat);
    auto cmp = compare_models(rep, deg, sig);
    CHECK(cmp.delta_rmse == doctest::Approx(deg.rmse - rep.rmse));

    auto other = compute_eval_report("b", pred, ref, levels, subjects, {1, 2, 3, 4, 5, 6});
    CHECK_THROWS_AS(compare_models(rep, other, sig), ConfigError);
}
