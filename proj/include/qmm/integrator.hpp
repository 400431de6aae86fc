#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qmm/fields.hpp"
#include "qmm/history.hpp"

namespace qmm {

enum class Model { qmm11, qmm22, qmm23, qmm33, hybrid22 };

enum class EngineKind { rk4_delay, method_of_steps };

enum class Representation { cartesian, polar };

std::string to_string(Model m);
std::string to_string(EngineKind e);
std::string to_string(Representation r);

// Everything needed to reproduce a run; deterministic, no seeds.
struct RunConfig {
    Model model = Model::qmm22;
    CouplingSet couplings;
    double a = 1.0;               // largest memory distance
    double r = 1.0;               // a/b; read only for qmm33
    double theta0 = 0, phi0 = 0;  // kicker launch state
    double t_end_in_a = 100.0;
    double dt_in_a = 1.0 / 200;
    EngineKind engine = EngineKind::rk4_delay;
    Representation representation = Representation::cartesian;

    // Throws ValidationError naming the violated constraint.
    void validate() const;

    // dt snapped so that the delay is a whole number of steps
    int steps_per_a() const;
    double dt() const { return a / steps_per_a(); }
    double b() const { return a / r; }
};

// Pure-state trajectory on the step grid t_i = i*dt, kicker phase included.
struct Trajectory {
    RunConfig cfg;
    double dt = 0;
    std::size_t pool_end = 0;  // node index of t* = a

    std::vector<Vec3> r;       // unit Bloch vectors per node
    std::vector<Vec3> deriv_left, deriv_right;
    std::vector<double> theta;  // acos(z): continuous, in [0, pi]
    std::vector<double> phi;    // unwrapped azimuth

    double max_step_drift = 0;  // max pre-renormalization | |r|-1 | per step
    double t_max_drift = 0;     // when it happened
    double total_drift = 0;     // accumulated absolute drift

    std::size_t size() const { return r.size(); }
    double time_at(std::size_t i) const { return dt * double(i); }
    double t_end() const { return time_at(size() - 1); }

    // Hermite-interpolated state at an off-grid time
    Vec3 state_at(double t) const;
};

// Initial history on [0, a] supplied directly instead of a kicker run.
using HistoryFn = std::function<BlochAngles(double)>;

// --- right-hand sides --------------------------------------------------------

// dr/dt of the chosen model; r_past_b is read only for qmm33. Tangent to the
// sphere: dot(r_now, rhs) = 0 up to rounding.
Vec3 rhs(Model model, const Vec3& r_now, const Vec3& r_past_a, const Vec3& r_past_b,
         const CouplingSet& c);

// (dtheta/dt, dphi/dt) in polar form. pole_ok is cleared when sin(theta) is
// below the pole tolerance, signalling the caller to switch representation.
struct PolarRate {
    double dtheta = 0;
    double dphi = 0;
    bool pole_ok = true;
};

struct PolarState {
    double theta = 0;
    double phi = 0;
};

PolarRate rhs_polar(Model model, const PolarState& now, const PolarState& past_a,
                    const PolarState& past_b, const CouplingSet& c);

// F, G of the two-memory polar system and the third-order A functions.
double fg_f(const PolarState& past, const PolarState& now);
double fg_g(const PolarState& past, const PolarState& now);
double a23_theta(const PolarState& past, const PolarState& now);
double a23_phi(const PolarState& past, const PolarState& now);

// --- trajectory construction -------------------------------------------------

// Kicker evolution on [0, a] from (theta0, phi0); fills the memory pool.
HistoryBuffer fill_memory_pool(const RunConfig& cfg);

// Two-stage run: kicker on [0, a], then the delay dynamics to t_end.
Trajectory simulate(const RunConfig& cfg);

// Same, but the pool is sampled from history_fn on [0, a].
Trajectory simulate_with_custom_history(const RunConfig& cfg, const HistoryFn& history_fn);

} // namespace qmm
