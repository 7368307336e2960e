#ifndef VENT_SIGNAL_HPP
#define VENT_SIGNAL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "vent/rng.hpp"

namespace vent {

enum class Sex : std::uint8_t { female = 0, male = 1 };

struct SubjectProfile {
    int subject_id = 0;
    Sex sex = Sex::female;
    int age_years = 30;
    bool has_disorder = false;
    double base_tidal_volume = 0.5;  // liters; 0 means no breathing (degenerate)
    double base_resp_rate = 12.0;    // breaths/min
    double base_heart_rate = 70.0;   // beats/min
    double rsa_gain = 1.0;           // heart-rate modulation depth by respiration
    double stress_level = 0.0;       // 0 = carefree, 1 = under duress
};

struct SignalWindow {
    std::uint32_t subject_id = 0;
    std::uint32_t window_id = 0;
    std::uint8_t artifact_level = 0;  // 0 clean .. 3 severe
    Sex sex = Sex::female;
    std::uint16_t age = 0;
    float mv_true = 0.0f;  // L/min, always from the clean generator
    std::vector<float> resp_flow;     // L/s at fs_hz
    std::vector<float> heart_series;  // beats/min at fs_hz
};

struct DatasetManifest {
    int n_subjects = 103;
    int n_female = 53;
    int n_male = 50;
    int windows_per_subject = 400;
    double fs_hz = 25.0;
    double window_seconds = 60.0;
    std::uint64_t rng_seed = 42;
    double split_train = 0.7;
    double split_val = 0.15;
    double split_test = 0.15;
    int age_min = 8;
    int age_max = 75;
};

// Generator knobs, all reproducible from the config file.
struct GenParams {
    double period_jitter_rel = 0.05;     // breath-to-breath period jitter, relative sd
    double amplitude_jitter_rel = 0.08;  // tidal-volume jitter, relative sd
    double rsa_bpm_per_lps = 8.0;        // heart-rate swing per unit flow at rsa_gain 1
    double rsa_delay_min_s = 0.2;        // respiratory-cardiac lag range
    double rsa_delay_max_s = 0.6;
    double stress_hr_offset = 25.0;      // added bpm at stress_level 1
    double stress_rsa_atten = 0.5;       // rsa_gain multiplier loss at stress_level 1
    // Artifact model: additive wander + bursts + white noise, each rescaled to
    // an exact per-window RMS target = level_scale[level] * base component RMS.
    double level_scale[4] = {0.0, 0.5, 1.0, 2.0};
    double wander_rms_resp = 0.025, wander_rms_heart = 0.75;
    double burst_rms_resp = 0.04, burst_rms_heart = 1.25;
    double white_rms_resp = 0.02, white_rms_heart = 0.5;

    // total additive RMS on one channel at a given level, as configured
    double noise_rms(int level, bool heart) const;
};

struct Dataset {
    DatasetManifest manifest;
    std::vector<SubjectProfile> profiles;
    std::vector<SignalWindow> windows;                // all windows, subject-major
    std::vector<int> train_subjects, val_subjects, test_subjects;

    std::vector<const SignalWindow*> split(const std::vector<int>& subjects) const;
    std::vector<const SignalWindow*> train() const { return split(train_subjects); }
    std::vector<const SignalWindow*> val() const { return split(val_subjects); }
    std::vector<const SignalWindow*> test() const { return split(test_subjects); }
};

void validate_manifest(const DatasetManifest& m);

// Quasi-periodic flow signal whose inspired volume per minute equals mv_true.
std::vector<double> synth_breath_waveform(const SubjectProfile& profile, double window_seconds,
                                          double fs_hz, Rng& rng, const GenParams& params,
                                          double* mv_true_out);

// Heart-rate channel coupled to respiration (RSA) plus a stress offset.
std::vector<double> synth_heart_series(const SubjectProfile& profile,
                                       const std::vector<double>& resp_flow, double fs_hz,
                                       Rng& rng, const GenParams& params);

// Level 0 returns the input unchanged; labels are never modified.
SignalWindow inject_artifacts(const SignalWindow& window, int artifact_level, Rng& rng,
                              const GenParams& params);

// Deterministic subject-disjoint split assignment, recomputable from the seed.
void assign_splits(const DatasetManifest& m, std::vector<int>& train_out,
                   std::vector<int>& val_out, std::vector<int>& test_out);

Dataset build_dataset(const DatasetManifest& manifest, const GenParams& params = {});

// SDNN of a rate series (sample standard deviation), the HRV summary used here.
double sdnn(const std::vector<float>& series);
double sdnn(const std::vector<double>& series);

}  // namespace vent

#endif
