#pragma once

#include <vector>

#include "qmm/integrator.hpp"

namespace qmm {

// The plotted quantities: wavefunction components and the two-point fidelity
// series. Defined from t = a on (one full delay of coverage is required).
// w2_bt / w2_ab are filled for the three-memory model only.
struct ObservableSeries {
    double dt = 0;  // sample spacing (decimation included)
    double a = 0;
    std::vector<double> t;
    std::vector<double> theta;        // canonical polar angle
    std::vector<double> phi;          // unwrapped azimuth
    std::vector<double> psi_up;       // cos(theta/2)
    std::vector<double> re_psi_down;  // sin(theta/2) cos(phi)
    std::vector<double> im_psi_down;  // sin(theta/2) sin(phi)
    std::vector<double> w2_at;
    std::vector<double> w2_bt;
    std::vector<double> w2_ab;

    std::size_t size() const { return t.size(); }
    bool has_second_memory() const { return !w2_bt.empty(); }
};

// Extracts the series on the trajectory grid, keeping every `decimate`-th
// sample. Throws InsufficientData when the run is shorter than one delay.
ObservableSeries extract_series(const Trajectory& traj, int decimate = 1);

} // namespace qmm
