#ifndef VENT_REPORT_HPP
#define VENT_REPORT_HPP

#include <string>
#include <vector>

#include "vent/pruning.hpp"
#include "vent/stats.hpp"

namespace vent {

// Metrics CSV, one row per (model, split, artifact_level). Columns:
// model,split,artifact_level,n_level,rmse_level,n,rmse,mae,pearson_r,
// ba_mean,ba_lower,ba_upper,subject_rmse_min,subject_rmse_max,subject_rmse_iqr
std::string metrics_csv(const std::vector<EvalReport>& reports, const std::string& split);

// Comparison CSV: deltas, significance annotation, and prune accounting.
std::string comparison_csv(const ComparisonSummary& cmp, const EvalReport& a,
                           const EvalReport& b, const PruneSummary* prune);

// Self-contained SVG plots backing the comparison figures.
std::string svg_scatter(const std::vector<double>& ref, const std::vector<double>& pred,
                        const std::string& title);
std::string svg_level_bars(const std::vector<EvalReport>& reports, const std::string& title);

}  // namespace vent

#endif
