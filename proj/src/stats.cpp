#include "vent/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include "vent/errors.hpp"

namespace vent {

namespace {

void require_pair(const std::vector<double>& a, const std::vector<double>& b, const char* what) {
    if (a.empty() || a.size() != b.size())
        throw ContractError(std::string(what) + ": sequences must have equal nonzero length, got " +
                            std::to_string(a.size()) + " and " + std::to_string(b.size()));
}

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double normal_sf(double z) {  // P(Z > z)
    return 0.5 * std::erfc(z / std::sqrt(2.0));
}

}  // namespace

double rmse(const std::vector<double>& pred, const std::vector<double>& ref) {
    require_pair(pred, ref, "rmse");
    double ss = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        double d = pred[i] - ref[i];
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(pred.size()));
}

double mae(const std::vector<double>& pred, const std::vector<double>& ref) {
    require_pair(pred, ref, "mae");
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) s += std::abs(pred[i] - ref[i]);
    return s / static_cast<double>(pred.size());
}

double pearson_r(const std::vector<double>& pred, const std::vector<double>& ref) {
    require_pair(pred, ref, "pearson_r");
    double ma = mean_of(pred), mb = mean_of(ref);
    double saa = 0.0, sbb = 0.0, sab = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        double da = pred[i] - ma, db = ref[i] - mb;
        saa += da * da;
        sbb += db * db;
        sab += da * db;
    }
    if (saa <= 0.0 || sbb <= 0.0)
        throw NumericError("pearson_r: undefined correlation, zero variance input");
    double r = sab / std::sqrt(saa * sbb);
    return std::clamp(r, -1.0, 1.0);
}

BlandAltman bland_altman(const std::vector<double>& pred, const std::vector<double>& ref,
                         double coverage) {
    require_pair(pred, ref, "bland_altman");
    if (pred.size() < 2) throw ContractError("bland_altman: need at least 2 pairs");
    std::vector<double> diffs(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) diffs[i] = pred[i] - ref[i];
    double m = mean_of(diffs);
    double ss = 0.0;
    for (double d : diffs) ss += (d - m) * (d - m);
    double sd = std::sqrt(ss / static_cast<double>(diffs.size() - 1));
    return {m, m - coverage * sd, m + coverage * sd};
}

SignificanceResult paired_significance(const std::vector<double>& errors_a,
                                       const std::vector<double>& errors_b, double alpha) {
    require_pair(errors_a, errors_b, "paired_significance");
    if (errors_a.size() < 6)
        throw ContractError("paired_significance: need at least 6 pairs, got " +
                            std::to_string(errors_a.size()));

    std::vector<double> diffs;
    for (std::size_t i = 0; i < errors_a.size(); ++i) {
        double d = errors_a[i] - errors_b[i];
        if (d != 0.0) diffs.push_back(d);
    }
    const int n = static_cast<int>(diffs.size());
    if (n == 0)
        throw NumericError("paired_significance: degenerate input, all pairs tied");

    // rank |d| with average ranks for ties; keep 2x ranks as exact integers
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return std::abs(diffs[a]) < std::abs(diffs[b]); });
    std::vector<long> rank2(n, 0);  // 2 * rank, integral even with average ranks
    std::vector<long> tie_sizes;
    int i = 0;
    while (i < n) {
        int j = i;
        while (j < n && std::abs(diffs[order[j]]) == std::abs(diffs[order[i]])) ++j;
        long r2 = (static_cast<long>(i) + 1 + j) ;  // 2 * average of ranks i+1..j
        for (int k = i; k < j; ++k) rank2[order[k]] = r2;
        tie_sizes.push_back(j - i);
        i = j;
    }

    long w2_plus = 0;
    for (int k = 0; k < n; ++k)
        if (diffs[k] > 0.0) w2_plus += rank2[k];

    SignificanceResult res;
    res.alpha = alpha;
    res.n_used = n;
    res.statistic = static_cast<double>(w2_plus) / 2.0;

    if (n <= 25) {
        // exact sign-flip null: subset-sum DP over doubled ranks
        long total2 = std::accumulate(rank2.begin(), rank2.end(), 0L);
        std::vector<std::uint64_t> count(total2 + 1, 0);
        count[0] = 1;
        for (int k = 0; k < n; ++k)
            for (long s = total2; s >= rank2[k]; --s) count[s] += count[s - rank2[k]];
        std::uint64_t total_subsets = std::uint64_t(1) << n;
        std::uint64_t le = 0, ge = 0;
        for (long s = 0; s <= total2; ++s) {
            if (s <= w2_plus) le += count[s];
            if (s >= w2_plus) ge += count[s];
        }
        double p_le = static_cast<double>(le) / static_cast<double>(total_subsets);
        double p_ge = static_cast<double>(ge) / static_cast<double>(total_subsets);
        res.p_value = std::min(1.0, 2.0 * std::min(p_le, p_ge));
    } else {
        double w = res.statistic;
        double mean = n * (n + 1.0) / 4.0;
        double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0;
        for (long t : tie_sizes) var -= (static_cast<double>(t) * t * t - t) / 48.0;
        if (var <= 0.0)
            throw NumericError("paired_significance: degenerate rank variance");
        double cc = w > mean ? -0.5 : (w < mean ? 0.5 : 0.0);  // continuity, toward the mean
        double z = (w - mean + cc) / std::sqrt(var);
        res.p_value = std::min(1.0, 2.0 * normal_sf(std::abs(z)));
    }
    res.significant = res.p_value < alpha;
    return res;
}

std::map<int, double> stratified_error(const std::vector<double>& pred,
                                       const std::vector<double>& ref,
                                       const std::vector<int>& levels) {
    require_pair(pred, ref, "stratified_error");
    if (levels.size() != pred.size())
        throw ContractError("stratified_error: level labels must match sequence length");
    std::map<int, std::pair<double, int>> acc;  // level -> (sum sq, n)
    for (std::size_t i = 0; i < pred.size(); ++i) {
        double d = pred[i] - ref[i];
        auto& a = acc[levels[i]];
        a.first += d * d;
        a.second += 1;
    }
    std::map<int, double> out;
    for (const auto& [level, a] : acc) out[level] = std::sqrt(a.first / a.second);
    return out;
}

EvalReport compute_eval_report(const std::string& model_name, const std::vector<double>& pred,
                               const std::vector<double>& ref, const std::vector<int>& levels,
                               const std::vector<int>& subjects,
                               const std::vector<std::uint32_t>& window_ids) {
    require_pair(pred, ref, "compute_eval_report");
    EvalReport rep;
    rep.model_name = model_name;
    rep.n = static_cast<int>(pred.size());
    rep.rmse = rmse(pred, ref);
    rep.mae = mae(pred, ref);
    try {
        rep.pearson_r = pearson_r(pred, ref);
    } catch (const NumericError&) {
        rep.pearson_r = std::numeric_limits<double>::quiet_NaN();
    }
    if (pred.size() >= 2) rep.bland_altman = bland_altman(pred, ref);
    rep.per_level_rmse = stratified_error(pred, ref, levels);
    for (int lv : levels) rep.per_level_n[lv] += 1;
    rep.window_ids = window_ids;

    // per-subject RMSE spread
    std::map<int, std::pair<double, int>> per_subject;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        double d = pred[i] - ref[i];
        auto& a = per_subject[subjects[i]];
        a.first += d * d;
        a.second += 1;
    }
    std::vector<double> srmse;
    for (const auto& [s, a] : per_subject) srmse.push_back(std::sqrt(a.first / a.second));
    std::sort(srmse.begin(), srmse.end());
    if (!srmse.empty()) {
        rep.subject_rmse_min = srmse.front();
        rep.subject_rmse_max = srmse.back();
        auto quantile = [&](double q) {
            double pos = q * (srmse.size() - 1);
            std::size_t lo = static_cast<std::size_t>(pos);
            std::size_t hi = std::min(lo + 1, srmse.size() - 1);
            return srmse[lo] + (pos - lo) * (srmse[hi] - srmse[lo]);
        };
        rep.subject_rmse_iqr = quantile(0.75) - quantile(0.25);
    }
    return rep;
}

ComparisonSummary compare_models(const EvalReport& report_a, const EvalReport& report_b,
                                 const SignificanceResult& significance) {
    if (report_a.n != report_b.n || report_a.window_ids != report_b.window_ids)
        throw ConfigError("compare_models: reports were not computed on the identical test set");
    ComparisonSummary s;
    s.model_a = report_a.model_name;
    s.model_b = report_b.model_name;
    s.delta_rmse = report_b.rmse - report_a.rmse;
    s.delta_r = report_b.pearson_r - report_a.pearson_r;
    s.significance = significance;
    return s;
}

}  // namespace vent
