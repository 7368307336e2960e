#include "vent/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vent/errors.hpp"

namespace vent {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double series_rms(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s / static_cast<double>(v.size()));
}

// Rescales a noise component to an exact target RMS over the window.
void rescale_to_rms(std::vector<double>& v, double target) {
    double r = series_rms(v);
    if (r <= 0.0) return;
    double k = target / r;
    for (double& x : v) x *= k;
}

}  // namespace

double GenParams::noise_rms(int level, bool heart) const {
    double w = heart ? wander_rms_heart : wander_rms_resp;
    double b = heart ? burst_rms_heart : burst_rms_resp;
    double n = heart ? white_rms_heart : white_rms_resp;
    return level_scale[level] * std::sqrt(w * w + b * b + n * n);
}

void validate_manifest(const DatasetManifest& m) {
    if (m.n_subjects <= 0 || m.windows_per_subject <= 0)
        throw ConfigError("manifest: n_subjects and windows_per_subject must be positive");
    if (m.n_female < 0 || m.n_male < 0 || m.n_female + m.n_male != m.n_subjects)
        throw ConfigError("manifest: n_female + n_male must equal n_subjects (" +
                          std::to_string(m.n_female) + " + " + std::to_string(m.n_male) +
                          " != " + std::to_string(m.n_subjects) + ")");
    if (m.fs_hz <= 0 || m.window_seconds <= 0)
        throw ConfigError("manifest: fs_hz and window_seconds must be positive");
    double s = m.split_train + m.split_val + m.split_test;
    if (m.split_train < 0 || m.split_val < 0 || m.split_test < 0 || std::abs(s - 1.0) > 1e-9)
        throw ConfigError("manifest: split fractions must be nonnegative and sum to 1, got " +
                          std::to_string(s));
    if (m.age_min > m.age_max || m.age_min < 0)
        throw ConfigError("manifest: invalid age range");
}

std::vector<double> synth_breath_waveform(const SubjectProfile& profile, double window_seconds,
                                          double fs_hz, Rng& rng, const GenParams& params,
                                          double* mv_true_out) {
    if (profile.base_tidal_volume < 0 || profile.base_resp_rate <= 0 ||
        profile.base_heart_rate <= 0)
        throw ConfigError("profile: tidal volume must be >= 0; resp and heart rates positive");
    const double breath_hz = profile.base_resp_rate / 60.0;
    if (fs_hz < 4.0 * breath_hz)
        throw ConfigError("fs_hz must be at least 4x the breathing frequency");
    if (window_seconds * breath_hz < 1.0)
        throw ConfigError("window must span at least one breath period");

    const int n = static_cast<int>(std::lround(window_seconds * fs_hz));
    std::vector<double> flow(n, 0.0);
    double inspired = 0.0;

    if (profile.base_tidal_volume == 0.0) {
        if (mv_true_out) *mv_true_out = 0.0;
        return flow;
    }

    // Breath j: period and tidal volume jittered, flow is one sine cycle
    // (positive inspiration lobe, negative expiration lobe) with peak
    // pi*VT/T so the inspired volume per full breath is exactly VT.
    double t0 = 0.0;
    const double dt = 1.0 / fs_hz;
    while (t0 < window_seconds) {
        double period = (60.0 / profile.base_resp_rate) *
                        std::max(0.2, 1.0 + params.period_jitter_rel * rng.normal());
        double vt = profile.base_tidal_volume *
                    std::max(0.05, 1.0 + params.amplitude_jitter_rel * rng.normal());
        double peak = 3.14159265358979323846 * vt / period;

        int i0 = static_cast<int>(std::ceil(t0 / dt - 1e-12));
        int i1 = std::min(n, static_cast<int>(std::ceil((t0 + period) / dt - 1e-12)));
        for (int i = std::max(0, i0); i < i1; ++i)
            flow[i] = peak * std::sin(kTwoPi * (i * dt - t0) / period);

        // inspired volume contributed inside the window (analytic)
        double half = period / 2.0;
        double cut = std::min(window_seconds - t0, half);
        if (cut >= half)
            inspired += vt;
        else if (cut > 0)
            inspired += (vt / 2.0) * (1.0 - std::cos(kTwoPi * cut / period));

        t0 += period;
    }

    if (mv_true_out) *mv_true_out = inspired * 60.0 / window_seconds;
    return flow;
}

std::vector<double> synth_heart_series(const SubjectProfile& profile,
                                       const std::vector<double>& resp_flow, double fs_hz,
                                       Rng& rng, const GenParams& params) {
    if (resp_flow.empty()) throw ConfigError("synth_heart_series: empty respiratory signal");
    if (profile.base_heart_rate <= 0) throw ConfigError("profile: heart rate must be positive");

    const double rsa_eff =
        profile.rsa_gain * (1.0 - params.stress_rsa_atten * profile.stress_level);
    const double mean_rate =
        profile.base_heart_rate + params.stress_hr_offset * profile.stress_level;
    const int delay = static_cast<int>(
        std::lround(rng.uniform(params.rsa_delay_min_s, params.rsa_delay_max_s) * fs_hz));

    std::vector<double> hr(resp_flow.size());
    for (std::size_t i = 0; i < hr.size(); ++i) {
        double drive = (i >= static_cast<std::size_t>(delay)) ? resp_flow[i - delay] : 0.0;
        hr[i] = mean_rate + rsa_eff * params.rsa_bpm_per_lps * drive;
    }
    return hr;
}

SignalWindow inject_artifacts(const SignalWindow& window, int artifact_level, Rng& rng,
                              const GenParams& params) {
    if (artifact_level < 0 || artifact_level > 3)
        throw ConfigError("artifact_level must be in {0,1,2,3}, got " +
                          std::to_string(artifact_level));
    SignalWindow out = window;
    out.artifact_level = static_cast<std::uint8_t>(artifact_level);
    if (artifact_level == 0) return out;

    const double scale = params.level_scale[artifact_level];
    auto corrupt = [&](std::vector<float>& samples, double wander_rms, double burst_rms,
                       double white_rms) {
        const int n = static_cast<int>(samples.size());
        if (n == 0) return;

        // (a) low-frequency baseline wander
        std::vector<double> wander(n);
        double cycles = rng.uniform(3.0, 9.0);  // slow drift, a few cycles per window
        double phase = rng.uniform(0.0, kTwoPi);
        for (int i = 0; i < n; ++i)
            wander[i] = std::sin(kTwoPi * cycles * (static_cast<double>(i) / n) + phase);
        rescale_to_rms(wander, scale * wander_rms);

        // (b) burst transients with exponential decay
        std::vector<double> bursts(n, 0.0);
        int n_bursts = static_cast<int>(rng.uniform_int(2, 5));
        for (int b = 0; b < n_bursts; ++b) {
            int c = static_cast<int>(rng.uniform_int(0, n - 1));
            double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
            double tau = rng.uniform(0.02, 0.06) * n;  // decay width in samples
            for (int i = c; i < n; ++i) {
                double v = sign * std::exp(-(i - c) / tau);
                if (std::abs(v) < 1e-4) break;
                bursts[i] += v;
            }
        }
        rescale_to_rms(bursts, scale * burst_rms);

        // (c) white noise
        std::vector<double> white(n);
        for (int i = 0; i < n; ++i) white[i] = rng.normal();
        rescale_to_rms(white, scale * white_rms);

        for (int i = 0; i < n; ++i)
            samples[i] = static_cast<float>(samples[i] + wander[i] + bursts[i] + white[i]);
    };

    corrupt(out.resp_flow, params.wander_rms_resp, params.burst_rms_resp, params.white_rms_resp);
    corrupt(out.heart_series, params.wander_rms_heart, params.burst_rms_heart,
            params.white_rms_heart);
    return out;
}

void assign_splits(const DatasetManifest& m, std::vector<int>& train_out,
                   std::vector<int>& val_out, std::vector<int>& test_out) {
    std::vector<int> ids(m.n_subjects);
    std::iota(ids.begin(), ids.end(), 0);
    Rng rng = Rng(m.rng_seed).derive(0xFEEDULL);
    for (int i = m.n_subjects - 1; i > 0; --i) {
        int j = static_cast<int>(rng.uniform_int(0, i));
        std::swap(ids[i], ids[j]);
    }
    int n_train = static_cast<int>(std::lround(m.split_train * m.n_subjects));
    int n_val = static_cast<int>(std::lround(m.split_val * m.n_subjects));
    n_train = std::min(n_train, m.n_subjects);
    n_val = std::min(n_val, m.n_subjects - n_train);
    train_out.assign(ids.begin(), ids.begin() + n_train);
    val_out.assign(ids.begin() + n_train, ids.begin() + n_train + n_val);
    test_out.assign(ids.begin() + n_train + n_val, ids.end());
}

std::vector<const SignalWindow*> Dataset::split(const std::vector<int>& subjects) const {
    std::vector<const SignalWindow*> out;
    for (const auto& w : windows)
        if (std::find(subjects.begin(), subjects.end(), static_cast<int>(w.subject_id)) !=
            subjects.end())
            out.push_back(&w);
    return out;
}

Dataset build_dataset(const DatasetManifest& manifest, const GenParams& params) {
    validate_manifest(manifest);
    Dataset ds;
    ds.manifest = manifest;

    Rng root(manifest.rng_seed);

    // Profiles: sexes assigned deterministically, everything else drawn from
    // a per-subject derived stream so subjects can be generated in parallel.
    bool any_young = false;
    for (int s = 0; s < manifest.n_subjects; ++s) {
        Rng r = root.derive(static_cast<std::uint64_t>(s) + 1);
        SubjectProfile p;
        p.subject_id = s;
        p.sex = s < manifest.n_female ? Sex::female : Sex::male;
        p.age_years = static_cast<int>(r.uniform_int(manifest.age_min, manifest.age_max));
        p.has_disorder = r.uniform() < 0.3;
        double sex_scale = p.sex == Sex::male ? 1.1 : 1.0;
        p.base_tidal_volume = sex_scale * r.uniform(0.35, 0.75);
        p.base_resp_rate = r.uniform(10.0, 18.0);
        p.base_heart_rate = r.uniform(55.0, 80.0);
        p.rsa_gain = r.uniform(0.5, 1.5);
        p.stress_level = r.uniform() < 0.5 ? r.uniform(0.0, 0.25) : r.uniform(0.75, 1.0);
        if (p.age_years >= 12 && p.age_years <= 20) any_young = true;
        ds.profiles.push_back(p);
    }
    // keep the 12-20y sub-cohort nonempty regardless of cohort size
    if (!any_young && manifest.age_min <= 20 && manifest.age_max >= 12 && !ds.profiles.empty())
        ds.profiles[0].age_years = 16;

    ds.windows.reserve(static_cast<std::size_t>(manifest.n_subjects) *
                       manifest.windows_per_subject);
    for (int s = 0; s < manifest.n_subjects; ++s) {
        const SubjectProfile& p = ds.profiles[s];
        Rng subject_rng = root.derive(static_cast<std::uint64_t>(s) + 1);
        for (int w = 0; w < manifest.windows_per_subject; ++w) {
            Rng r = subject_rng.derive(static_cast<std::uint64_t>(w) + 0x10000ULL);
            double mv = 0.0;
            std::vector<double> flow = synth_breath_waveform(p, manifest.window_seconds,
                                                             manifest.fs_hz, r, params, &mv);
            std::vector<double> hr = synth_heart_series(p, flow, manifest.fs_hz, r, params);

            SignalWindow win;
            win.subject_id = static_cast<std::uint32_t>(s);
            win.window_id = static_cast<std::uint32_t>(w);
            win.sex = p.sex;
            win.age = static_cast<std::uint16_t>(p.age_years);
            win.mv_true = static_cast<float>(mv);
            win.resp_flow.assign(flow.begin(), flow.end());
            win.heart_series.assign(hr.begin(), hr.end());

            int level = w % 4;
            if (level > 0) {
                Rng ar = r.derive(0xA7ULL);
                win = inject_artifacts(win, level, ar, params);
            }
            ds.windows.push_back(std::move(win));
        }
    }

    assign_splits(manifest, ds.train_subjects, ds.val_subjects, ds.test_subjects);
    return ds;
}

double sdnn(const std::vector<double>& series) {
    if (series.size() < 2) return 0.0;
    double mean = std::accumulate(series.begin(), series.end(), 0.0) / series.size();
    double ss = 0.0;
    for (double v : series) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / (series.size() - 1));
}

double sdnn(const std::vector<float>& series) {
    return sdnn(std::vector<double>(series.begin(), series.end()));
}

}  // namespace vent
