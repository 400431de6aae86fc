#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qmm/run_card.hpp"

namespace qmm {

// CSV columns: t, theta, phi, psi_up, re_psi_down, im_psi_down, w2_at and,
// for the three-memory model, w2_bt, w2_ab. Dot decimal, newline-terminated.
void write_series_csv(const std::string& path, const ObservableSeries& series);

// Reads a CSV produced by write_series_csv; `a` restores the delay scale.
ObservableSeries read_series_csv(const std::string& path, double a);

void write_phase_report(const std::string& path, const RunCard& card, const PhaseReport& report,
                        double max_step_drift);

// Minimal polyline rendering of (w2_at, psi_up, re_psi_down) over a time
// window given in units of a.
void write_svg_plot(const std::string& path, const ObservableSeries& series, double win_lo_in_a,
                    double win_hi_in_a, const std::string& caption);

// --- sweep driver ---------------------------------------------------------------

struct SweepAxis {
    std::string name;
    std::vector<double> values;
};

struct SweepSpec {
    RunCard base;
    SweepAxis axis1;
    std::optional<SweepAxis> axis2;
};

struct SweepRow {
    double v1 = 0;
    std::optional<double> v2;
    PhaseLabel label = PhaseLabel::Undecided;
    double mean_w2 = 0;
    double std_w2 = 0;
    std::optional<TransitionEvent> transition;
    bool failed = false;
    std::string error;
};

// Runs the grid; rows execute concurrently on up to `jobs` workers and are
// returned in grid order regardless of completion order.
std::vector<SweepRow> run_sweep(const SweepSpec& spec, int jobs);

void write_phase_map_csv(const std::string& path, const SweepSpec& spec,
                         const std::vector<SweepRow>& rows);

} // namespace qmm
