#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qmm/observables.hpp"

namespace qmm {

enum class PhaseLabel {
    P1_FixedPoint,
    P2_RegularOscConstTPF,
    P3_Unstructured,
    P4_Structured,
    P5_BiStateMetastable,
    Undecided,
};

std::string to_string(PhaseLabel label);
PhaseLabel phase_label_from_string(const std::string& s);

// The phase hallmarks are qualitative; these thresholds are the pinned
// defaults that make the decision reproducible. All are exposed here.
struct ClassifierConfig {
    double window_in_a = 50.0;
    double stride_in_a = 25.0;
    double burn_in_frac = 0.25;

    double p1_std = 1e-3;
    double p1_mean = 0.999;
    double p1_amp = 1e-3;

    double p2_std = 5e-3;
    double p2_amp = 0.1;
    double p2_acf = 0.8;

    double p4_acf = 0.8;
    double p4_extrema = 1.5;  // per-period count must round to >= 2

    double bist_occupancy = 0.2;
    double bist_dwell_in_a = 20.0;
    double bist_transit_in_a = 5.0;
    double bist_min_contrast = 0.05;

    int persist_windows = 10;
    double frozen_std = 1e-6;  // "fully frozen" fidelity variant
};

enum class BistabilitySource { fidelity, component };

struct Bistability {
    double level_lo = 0;
    double level_hi = 0;
    double mean_dwell = 0;    // time units
    double mean_transit = 0;  // time units
    BistabilitySource source = BistabilitySource::fidelity;
};

struct WindowFeatures {
    int index = 0;
    double t_start = 0;
    double t_stop = 0;
    double mean_w2 = 0;
    double std_w2 = 0;
    bool frozen = false;  // fidelity pinned below the frozen threshold
    bool has_period = false;
    double dominant_period = 0;  // of w^2, from the autocorrelation peak
    double w2_acf_peak = 0;
    double extrema_per_period = 0;  // well-gapped extrema of w^2
    double comp_amplitude = 0;      // half peak-to-peak of the components
    bool comp_has_period = false;
    double comp_period = 0;
    double comp_acf_peak = 0;
    std::optional<Bistability> bistability;
};

struct TransitionEvent {
    double t_transition = 0;
    PhaseLabel from_label = PhaseLabel::Undecided;
    PhaseLabel to_label = PhaseLabel::Undecided;
};

// Sliding-window statistics after burn-in. Throws InsufficientData when the
// series is shorter than burn-in plus one window.
std::vector<WindowFeatures> window_features(const ObservableSeries& series,
                                            const ClassifierConfig& cfg);

struct PhaseDecision {
    std::vector<PhaseLabel> per_window;
    PhaseLabel final_label = PhaseLabel::Undecided;
};

// Per-window decision rules plus the final label (modal over the closing
// windows). Requires at least 3 windows.
PhaseDecision classify_phase(const std::vector<WindowFeatures>& features,
                             const ClassifierConfig& cfg);

// One in-run switch that persists to the end of the run.
std::optional<TransitionEvent> detect_transition(const std::vector<PhaseLabel>& labels,
                                                 const std::vector<WindowFeatures>& features,
                                                 const ClassifierConfig& cfg);

// Whole pipeline over one series.
struct PhaseReport {
    std::vector<WindowFeatures> features;
    PhaseDecision decision;
    std::optional<TransitionEvent> transition;
};

PhaseReport analyze_series(const ObservableSeries& series, const ClassifierConfig& cfg);

// Sets a named coupling / parameter on a run configuration.
void apply_parameter(RunConfig& cfg, const std::string& name, double value);

struct CrossoverResult {
    std::vector<std::pair<double, PhaseLabel>> labels;
    // consecutive value pairs between which the label changed
    std::vector<std::pair<double, double>> brackets;
};

// One classified run per value; sorted values expected.
CrossoverResult crossover_scan(const RunConfig& base_cfg, const std::string& coupling_name,
                               const std::vector<double>& values, const ClassifierConfig& ccfg,
                               int decimate = 5);

} // namespace qmm
