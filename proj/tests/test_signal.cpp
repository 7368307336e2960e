#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "vent/errors.hpp"
#include "vent/signal.hpp"

using namespace vent;

namespace {

GenParams no_jitter() {
    GenParams p;
    p.period_jitter_rel = 0.0;
    p.amplitude_jitter_rel = 0.0;
    return p;
}

// Numeric oracle: minute ventilation from trapezoidal integration of the
// positive flow lobes, independent of the analytic bookkeeping inside the
// generator.
double integrate_mv(const std::vector<double>& flow, double fs_hz, double window_seconds) {
    double vol = 0.0;
    double dt = 1.0 / fs_hz;
    for (std::size_t i = 1; i < flow.size(); ++i) {
        double a = std::max(0.0, flow[i - 1]);
        double b = std::max(0.0, flow[i]);
        vol += 0.5 * (a + b) * dt;
    }
    return vol * 60.0 / window_seconds;
}

}  // namespace

TEST_CASE("steady breathing at 0.5 L and 12 breaths/min gives 6 L/min") {
    SubjectProfile p;
    p.base_tidal_volume = 0.5;
    p.base_resp_rate = 12.0;
    Rng rng(1);
    double mv = 0.0;
    auto flow = synth_breath_waveform(p, 60.0, 25.0, rng, no_jitter(), &mv);
    CHECK(mv == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(flow.size() == 1500);
    // peak flow of each breath is pi * VT / T
    double peak = *std::max_element(flow.begin(), flow.end());
    CHECK(peak == doctest::Approx(3.141592653589793 * 0.5 / 5.0).epsilon(1e-3));
}

TEST_CASE("zero tidal volume degenerates to silence, negative is rejected") {
    SubjectProfile p;
    p.base_tidal_volume = 0.0;
    Rng rng(1);
    double mv = 1.0;
    auto flow = synth_breath_waveform(p, 60.0, 25.0, rng, no_jitter(), &mv);
    CHECK(mv == 0.0);
    for (double v : flow) CHECK(v == 0.0);

    p.base_tidal_volume = -0.1;
    CHECK_THROWS_AS(synth_breath_waveform(p, 60.0, 25.0, rng, no_jitter(), &mv), ConfigError);
}

TEST_CASE("analytic mv agrees with numeric integration under jitter") {
    GenParams params;  // default jitter on
    Rng rng(404);
    for (int trial = 0; trial < 20; ++trial) {
        SubjectProfile p;
        p.base_tidal_volume = rng.uniform(0.3, 0.8);
        p.base_resp_rate = rng.uniform(10.0, 18.0);
        double mv = 0.0;
        Rng gen = rng.derive(trial + 1);
        auto flow = synth_breath_waveform(p, 60.0, 100.0, gen, params, &mv);
        double numeric = integrate_mv(flow, 100.0, 60.0);
        CHECK(numeric == doctest::Approx(mv).epsilon(0.02));
    }
}

TEST_CASE("sampling and window preconditions are enforced") {
    SubjectProfile p;
    Rng rng(1);
    double mv;
    // fs below 4x breathing frequency
    p.base_resp_rate = 60.0;
    CHECK_THROWS_AS(synth_breath_waveform(p, 60.0, 2.0, rng, no_jitter(), &mv), ConfigError);
    // window shorter than one breath
    p.base_resp_rate = 12.0;
    CHECK_THROWS_AS(synth_breath_waveform(p, 2.0, 25.0, rng, no_jitter(), &mv), ConfigError);
}

TEST_CASE("heart series is exactly constant without rsa and stress") {
    SubjectProfile p;
    p.base_heart_rate = 70.0;
    p.rsa_gain = 0.0;
    p.stress_level = 0.0;
    std::vector<double> flow(100, 0.7);
    Rng rng(3);
    auto hr = synth_heart_series(p, flow, 25.0, rng, GenParams{});
    for (double v : hr) CHECK(v == 70.0);
}

TEST_CASE("stress raises mean heart rate and attenuates rsa") {
    GenParams params;
    SubjectProfile calm;
    calm.base_heart_rate = 70.0;
    calm.rsa_gain = 1.0;
    calm.stress_level = 0.0;
    SubjectProfile tense = calm;
    tense.stress_level = 1.0;

    Rng r1(5), r2(5);
    double mv;
    Rng gen(5);
    auto flow = synth_breath_waveform(SubjectProfile{}, 60.0, 25.0, gen, no_jitter(), &mv);
    auto hr_calm = synth_heart_series(calm, flow, 25.0, r1, params);
    auto hr_tense = synth_heart_series(tense, flow, 25.0, r2, params);

    double m1 = 0, m2 = 0;
    for (double v : hr_calm) m1 += v;
    for (double v : hr_tense) m2 += v;
    m1 /= hr_calm.size();
    m2 /= hr_tense.size();
    CHECK(m2 - m1 == doctest::Approx(params.stress_hr_offset).epsilon(0.02));
    // same rng draws, so the delay matches and swing ratio is the attenuation
    CHECK(sdnn(hr_tense) / sdnn(hr_calm) ==
          doctest::Approx(1.0 - params.stress_rsa_atten).epsilon(0.02));
}

TEST_CASE("heart-rate variability tracks ventilation across subjects") {
    // larger tidal volumes drive larger rsa swings, so sdnn must increase
    GenParams params = no_jitter();
    std::vector<double> vts = {0.3, 0.45, 0.6, 0.75, 0.9};
    double prev = -1.0;
    for (double vt : vts) {
        SubjectProfile p;
        p.base_tidal_volume = vt;
        p.rsa_gain = 1.0;
        Rng rng(11);
        double mv;
        auto flow = synth_breath_waveform(p, 60.0, 25.0, rng, params, &mv);
        Rng hr_rng(11);
        auto hr = synth_heart_series(p, flow, 25.0, hr_rng, params);
        double s = sdnn(hr);
        CHECK(s > prev);
        prev = s;
    }
}

TEST_CASE("artifact level 0 is the identity and labels never change") {
    SubjectProfile p;
    Rng rng(21);
    double mv;
    SignalWindow w;
    w.subject_id = 9;
    w.window_id = 17;
    w.sex = Sex::male;
    w.age = 44;
    auto flow = synth_breath_waveform(p, 60.0, 25.0, rng, GenParams{}, &mv);
    w.mv_true = static_cast<float>(mv);
    w.resp_flow.assign(flow.begin(), flow.end());
    auto hr = synth_heart_series(p, flow, 25.0, rng, GenParams{});
    w.heart_series.assign(hr.begin(), hr.end());

    Rng ar(33);
    auto clean = inject_artifacts(w, 0, ar, GenParams{});
    CHECK(clean.resp_flow == w.resp_flow);
    CHECK(clean.heart_series == w.heart_series);

    for (int level = 1; level <= 3; ++level) {
        Rng ar2(33);
        auto noisy = inject_artifacts(w, level, ar2, GenParams{});
        CHECK(noisy.mv_true == w.mv_true);
        CHECK(noisy.subject_id == w.subject_id);
        CHECK(noisy.window_id == w.window_id);
        CHECK(noisy.age == w.age);
        CHECK(noisy.artifact_level == level);
        CHECK(noisy.resp_flow != w.resp_flow);
    }
    CHECK_THROWS_AS(inject_artifacts(w, 4, ar, GenParams{}), ConfigError);
}

TEST_CASE("added artifact power matches the configured level scaling") {
    GenParams params;
    SubjectProfile p;
    Rng rng(55);
    double mv;
    SignalWindow w;
    auto flow = synth_breath_waveform(p, 60.0, 25.0, rng, params, &mv);
    w.resp_flow.assign(flow.begin(), flow.end());
    auto hr = synth_heart_series(p, flow, 25.0, rng, params);
    w.heart_series.assign(hr.begin(), hr.end());

    auto added_rms = [&](const SignalWindow& a, const SignalWindow& b, bool heart) {
        const auto& x = heart ? a.heart_series : a.resp_flow;
        const auto& y = heart ? b.heart_series : b.resp_flow;
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            double d = static_cast<double>(y[i]) - x[i];
            s += d * d;
        }
        return std::sqrt(s / x.size());
    };

    double prev_resp = 0.0, prev_heart = 0.0;
    for (int level = 1; level <= 3; ++level) {
        // average over draws: the three components are independent, so the
        // combined RMS should sit near the root sum of squares target
        double acc_r = 0.0, acc_h = 0.0;
        int reps = 12;
        for (int rep = 0; rep < reps; ++rep) {
            Rng ar(1000 + rep);
            auto noisy = inject_artifacts(w, level, ar, params);
            acc_r += added_rms(w, noisy, false);
            acc_h += added_rms(w, noisy, true);
        }
        acc_r /= reps;
        acc_h /= reps;
        CHECK(acc_r == doctest::Approx(params.noise_rms(level, false)).epsilon(0.25));
        CHECK(acc_h == doctest::Approx(params.noise_rms(level, true)).epsilon(0.25));
        CHECK(acc_r > prev_resp);
        CHECK(acc_h > prev_heart);
        prev_resp = acc_r;
        prev_heart = acc_h;
    }
}

TEST_CASE("manifest validation rejects inconsistent cohorts and splits") {
    DatasetManifest m;
    validate_manifest(m);  // defaults are fine
    m.n_female = 60;
    CHECK_THROWS_AS(validate_manifest(m), ConfigError);
    m = DatasetManifest{};
    m.split_train = 0.8;
    CHECK_THROWS_AS(validate_manifest(m), ConfigError);
    m = DatasetManifest{};
    m.age_min = 50;
    m.age_max = 20;
    CHECK_THROWS_AS(validate_manifest(m), ConfigError);
}

TEST_CASE("small dataset build: cohort, cycling artifact levels, splits") {
    DatasetManifest m;
    m.n_subjects = 12;
    m.n_female = 7;
    m.n_male = 5;
    m.windows_per_subject = 8;
    m.rng_seed = 99;
    auto ds = build_dataset(m);

    CHECK(ds.windows.size() == 96);
    int n_f = 0;
    bool any_young = false;
    for (const auto& p : ds.profiles) {
        if (p.sex == Sex::female) ++n_f;
        if (p.age_years >= 12 && p.age_years <= 20) any_young = true;
        CHECK(p.age_years >= m.age_min);
        CHECK(p.age_years <= m.age_max);
    }
    CHECK(n_f == 7);
    CHECK(any_young);

    for (const auto& w : ds.windows) CHECK(w.artifact_level == w.window_id % 4);

    // subject-disjoint splits covering everyone exactly once
    std::vector<int> all;
    for (int s : ds.train_subjects) all.push_back(s);
    for (int s : ds.val_subjects) all.push_back(s);
    for (int s : ds.test_subjects) all.push_back(s);
    std::sort(all.begin(), all.end());
    std::vector<int> want(m.n_subjects);
    std::iota(want.begin(), want.end(), 0);
    CHECK(all == want);

    // split accessors pull only their own subjects
    for (const auto* w : ds.train())
        CHECK(std::find(ds.train_subjects.begin(), ds.train_subjects.end(),
                        static_cast<int>(w->subject_id)) != ds.train_subjects.end());
}

TEST_CASE("dataset generation is bit-deterministic in the seed") {
    DatasetManifest m;
    m.n_subjects = 4;
    m.n_female = 2;
    m.n_male = 2;
    m.windows_per_subject = 6;
    m.rng_seed = 7;
    auto a = build_dataset(m);
    auto b = build_dataset(m);
    REQUIRE(a.windows.size() == b.windows.size());
    for (std::size_t i = 0; i < a.windows.size(); ++i) {
        CHECK(a.windows[i].resp_flow == b.windows[i].resp_flow);
        CHECK(a.windows[i].heart_series == b.windows[i].heart_series);
        CHECK(a.windows[i].mv_true == b.windows[i].mv_true);
    }
    CHECK(a.train_subjects == b.train_subjects);

    m.rng_seed = 8;
    auto c = build_dataset(m);
    CHECK(a.windows[0].resp_flow != c.windows[0].resp_flow);
}

TEST_CASE("sdnn hand value") {
    std::vector<double> v = {1, 2, 3, 4};
    CHECK(sdnn(v) == doctest::Approx(std::sqrt(5.0 / 3.0)).epsilon(1e-12));
    CHECK(sdnn(std::vector<double>{5.0}) == 0.0);
}
