#include "qmm/observables.hpp"

#include <cmath>

#include "qmm/errors.hpp"

namespace qmm {

ObservableSeries extract_series(const Trajectory& traj, int decimate) {
    if (decimate < 1) throw ValidationError("extract_series: decimate must be >= 1");
    const int spa = traj.cfg.steps_per_a();
    if (traj.size() < static_cast<std::size_t>(2 * spa) + 1)
        throw InsufficientData("extract_series: trajectory covers less than one delay past t*");

    ObservableSeries s;
    s.dt = traj.dt * decimate;
    s.a = traj.cfg.a;
    const bool second = traj.cfg.model == Model::qmm33;
    const double b = traj.cfg.b();

    for (std::size_t i = spa; i < traj.size(); i += static_cast<std::size_t>(decimate)) {
        const double time = traj.time_at(i);
        s.t.push_back(time);
        s.theta.push_back(traj.theta[i]);
        s.phi.push_back(traj.phi[i]);
        const double half = 0.5 * traj.theta[i];
        s.psi_up.push_back(std::cos(half));
        s.re_psi_down.push_back(std::sin(half) * std::cos(traj.phi[i]));
        s.im_psi_down.push_back(std::sin(half) * std::sin(traj.phi[i]));
        s.w2_at.push_back(tpf_norm_sq(traj.r[i - spa], traj.r[i]));
        if (second) {
            const Vec3 rb = traj.state_at(time - b);
            s.w2_bt.push_back(tpf_norm_sq(rb, traj.r[i]));
            s.w2_ab.push_back(tpf_norm_sq(traj.r[i - spa], rb));
        }
    }
    return s;
}

} // namespace qmm
