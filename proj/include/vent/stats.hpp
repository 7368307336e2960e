#ifndef VENT_STATS_HPP
#define VENT_STATS_HPP

#include <map>
#include <string>
#include <vector>

namespace vent {

double rmse(const std::vector<double>& pred, const std::vector<double>& ref);
double mae(const std::vector<double>& pred, const std::vector<double>& ref);

// Throws NumericError when either side has zero variance.
double pearson_r(const std::vector<double>& pred, const std::vector<double>& ref);

struct BlandAltman {
    double mean_diff = 0.0;
    double lower_loa = 0.0;
    double upper_loa = 0.0;
};
BlandAltman bland_altman(const std::vector<double>& pred, const std::vector<double>& ref,
                         double coverage = 1.96);

struct SignificanceResult {
    double statistic = 0.0;  // W+ = sum of positive ranks
    double p_value = 1.0;
    bool significant = false;  // annotation: NS iff !significant
    double alpha = 0.05;
    int n_used = 0;  // pairs remaining after dropping zero differences
    std::string annotation() const { return significant ? "significant" : "NS"; }
};

// Two-sided Wilcoxon signed-rank on paired samples. Zero differences are
// dropped; exact sign-flip null distribution for n <= 25, normal
// approximation with continuity and tie correction above.
SignificanceResult paired_significance(const std::vector<double>& errors_a,
                                       const std::vector<double>& errors_b, double alpha = 0.05);

// RMSE within each artifact-level bucket; empty buckets are absent.
std::map<int, double> stratified_error(const std::vector<double>& pred,
                                       const std::vector<double>& ref,
                                       const std::vector<int>& levels);

struct EvalReport {
    std::string model_name;
    double rmse = 0.0;
    double mae = 0.0;
    double pearson_r = 0.0;  // NaN when undefined (constant predictions)
    BlandAltman bland_altman;
    std::map<int, double> per_level_rmse;
    std::map<int, int> per_level_n;
    int n = 0;
    // per-subject RMSE spread ("range of the RMSE")
    double subject_rmse_min = 0.0, subject_rmse_max = 0.0, subject_rmse_iqr = 0.0;
    std::vector<std::uint32_t> window_ids;  // identity of the evaluated test set
};

EvalReport compute_eval_report(const std::string& model_name, const std::vector<double>& pred,
                               const std::vector<double>& ref, const std::vector<int>& levels,
                               const std::vector<int>& subjects,
                               const std::vector<std::uint32_t>& window_ids);

struct ComparisonSummary {
    std::string model_a, model_b;
    double delta_rmse = 0.0;    // b - a
    double delta_r = 0.0;       // b - a
    long delta_params = 0;      // b - a, effective
    double delta_connectivity = 0.0;
    SignificanceResult significance;
};

// Reports must come from the identical test set (same n and window ids).
ComparisonSummary compare_models(const EvalReport& report_a, const EvalReport& report_b,
                                 const SignificanceResult& significance);

}  // namespace vent

#endif
