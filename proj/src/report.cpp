#include "vent/report.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace vent {

namespace {

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

}  // namespace

std::string metrics_csv(const std::vector<EvalReport>& reports, const std::string& split) {
    std::ostringstream os;
    os << "model,split,artifact_level,n_level,rmse_level,n,rmse,mae,pearson_r,"
          "ba_mean,ba_lower,ba_upper,subject_rmse_min,subject_rmse_max,subject_rmse_iqr\n";
    for (const auto& r : reports)
        for (const auto& [level, level_rmse] : r.per_level_rmse)
            os << r.model_name << "," << split << "," << level << ","
               << r.per_level_n.at(level) << "," << fmt(level_rmse) << "," << r.n << ","
               << fmt(r.rmse) << "," << fmt(r.mae) << "," << fmt(r.pearson_r) << ","
               << fmt(r.bland_altman.mean_diff) << "," << fmt(r.bland_altman.lower_loa) << ","
               << fmt(r.bland_altman.upper_loa) << "," << fmt(r.subject_rmse_min) << ","
               << fmt(r.subject_rmse_max) << "," << fmt(r.subject_rmse_iqr) << "\n";
    return os.str();
}

std::string comparison_csv(const ComparisonSummary& cmp, const EvalReport& a,
                           const EvalReport& b, const PruneSummary* prune) {
    std::ostringstream os;
    os << "model_a,model_b,rmse_a,rmse_b,delta_rmse,r_a,r_b,delta_r,"
          "delta_params,delta_connectivity,wilcoxon_w,p_value,annotation\n";
    os << cmp.model_a << "," << cmp.model_b << "," << fmt(a.rmse) << "," << fmt(b.rmse) << ","
       << fmt(cmp.delta_rmse) << "," << fmt(a.pearson_r) << "," << fmt(b.pearson_r) << ","
       << fmt(cmp.delta_r) << "," << cmp.delta_params << "," << fmt(cmp.delta_connectivity)
       << "," << fmt(cmp.significance.statistic) << "," << fmt(cmp.significance.p_value) << ","
       << cmp.significance.annotation() << "\n";
    if (prune) os << "\n# prune summary\n" << prune->to_kv_text();
    return os.str();
}

std::string svg_scatter(const std::vector<double>& ref, const std::vector<double>& pred,
                        const std::string& title) {
    const int W = 480, H = 480, M = 50;
    double lo = 1e300, hi = -1e300;
    for (double v : ref) lo = std::min(lo, v), hi = std::max(hi, v);
    for (double v : pred) lo = std::min(lo, v), hi = std::max(hi, v);
    if (!(hi > lo)) {
        lo -= 1.0;
        hi += 1.0;
    }
    double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
    auto sx = [&](double v) { return M + (v - lo) / (hi - lo) * (W - 2 * M); };
    auto sy = [&](double v) { return H - M - (v - lo) / (hi - lo) * (H - 2 * M); };

    std::ostringstream os;
    os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H << "'>\n";
    os << "<rect width='" << W << "' height='" << H << "' fill='white'/>\n";
    os << "<text x='" << W / 2 << "' y='20' text-anchor='middle' font-size='14'>" << title
       << "</text>\n";
    os << "<line x1='" << sx(lo) << "' y1='" << sy(lo) << "' x2='" << sx(hi) << "' y2='" << sy(hi)
       << "' stroke='gray' stroke-dasharray='4'/>\n";  // line of identity
    for (std::size_t i = 0; i < ref.size(); ++i)
        os << "<circle cx='" << sx(ref[i]) << "' cy='" << sy(pred[i])
           << "' r='2.5' fill='steelblue' fill-opacity='0.6'/>\n";
    os << "<text x='" << W / 2 << "' y='" << H - 10
       << "' text-anchor='middle' font-size='12'>reference MV (L/min)</text>\n";
    os << "<text x='15' y='" << H / 2 << "' font-size='12' transform='rotate(-90 15 " << H / 2
       << ")' text-anchor='middle'>estimated MV (L/min)</text>\n";
    os << "</svg>\n";
    return os.str();
}

std::string svg_level_bars(const std::vector<EvalReport>& reports, const std::string& title) {
    const int W = 560, H = 360, M = 50;
    double max_rmse = 0.0;
    for (const auto& r : reports)
        for (const auto& [lv, v] : r.per_level_rmse) max_rmse = std::max(max_rmse, v);
    if (max_rmse <= 0) max_rmse = 1.0;

    const char* colors[] = {"steelblue", "darkorange", "seagreen", "firebrick"};
    std::ostringstream os;
    os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H << "'>\n";
    os << "<rect width='" << W << "' height='" << H << "' fill='white'/>\n";
    os << "<text x='" << W / 2 << "' y='20' text-anchor='middle' font-size='14'>" << title
       << "</text>\n";
    const int n_levels = 4;
    double group_w = static_cast<double>(W - 2 * M) / n_levels;
    for (int lv = 0; lv < n_levels; ++lv) {
        double gx = M + lv * group_w;
        double bar_w = group_w / (reports.size() + 1);
        for (std::size_t m = 0; m < reports.size(); ++m) {
            auto it = reports[m].per_level_rmse.find(lv);
            if (it == reports[m].per_level_rmse.end()) continue;
            double h = it->second / max_rmse * (H - 2 * M);
            os << "<rect x='" << gx + m * bar_w << "' y='" << H - M - h << "' width='"
               << bar_w * 0.9 << "' height='" << h << "' fill='" << colors[m % 4] << "'/>\n";
        }
        os << "<text x='" << gx + group_w / 2 << "' y='" << H - M + 18
           << "' text-anchor='middle' font-size='12'>level " << lv << "</text>\n";
    }
    for (std::size_t m = 0; m < reports.size(); ++m)
        os << "<rect x='" << W - 160 << "' y='" << 35 + 18 * m << "' width='12' height='12' fill='"
           << colors[m % 4] << "'/><text x='" << W - 142 << "' y='" << 46 + 18 * m
           << "' font-size='12'>" << reports[m].model_name << "</text>\n";
    os << "<text x='15' y='" << H / 2 << "' font-size='12' transform='rotate(-90 15 " << H / 2
       << ")' text-anchor='middle'>RMSE (L/min)</text>\n";
    os << "</svg>\n";
    return os.str();
}

}  // namespace vent
