#include "qmm/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qmm/errors.hpp"

namespace qmm {

namespace {

double bisect(const std::function<double(double)>& f, double lo, double hi, double tol) {
    double flo = f(lo);
    for (int it = 0; it < 200 && hi - lo > tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((flo <= 0) == (fm <= 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

std::vector<double> bracketed_roots(const std::function<double(double)>& f, double lo, double hi,
                                    int grid_points, double tol) {
    std::vector<double> roots;
    double prev_x = lo, prev_f = f(lo);
    for (int i = 1; i < grid_points; ++i) {
        const double x = lo + (hi - lo) * double(i) / double(grid_points - 1);
        const double fx = f(x);
        if (prev_f == 0.0) roots.push_back(prev_x);
        else if ((prev_f < 0) != (fx < 0)) roots.push_back(bisect(f, prev_x, x, tol));
        prev_x = x;
        prev_f = fx;
    }
    if (prev_f == 0.0) roots.push_back(prev_x);
    return roots;
}

void dedupe_sorted(std::vector<double>& v, double tol) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end(),
                        [tol](double a, double b) { return std::abs(a - b) < tol; }),
            v.end());
}

} // namespace

SlopeRoots alpha_roots(double lambda_im, double a) {
    if (!(a > 0)) throw ValidationError("alpha_roots: a must be positive");
    SlopeRoots out;
    const double bound = std::abs(lambda_im);
    if (bound > 0) {
        auto f = [&](double al) { return al + lambda_im * std::sin(a * al); };
        out.roots = bracketed_roots(f, -bound, bound, 10001, 1e-12);
    }
    for (double& r : out.roots)
        if (std::abs(r) < 1e-9) r = 0.0;  // alpha = 0 is exact
    const bool has_zero =
        std::any_of(out.roots.begin(), out.roots.end(), [](double r) { return r == 0.0; });
    if (!has_zero) out.roots.push_back(0.0);
    dedupe_sorted(out.roots, 1e-9);
    return out;
}

double theta_orbit_threshold(double lambda_im) {
    if (lambda_im == 0)
        throw ValidationError("theta_orbit_threshold: undefined for lambda_im = 0");
    return 1.0 / std::abs(lambda_im);
}

double phi_orbit_threshold(double lambda_im, double mu_hat) {
    if (lambda_im == 0)
        throw ValidationError("phi_orbit_threshold: undefined for lambda_im = 0");
    return std::abs(lambda_im) / (lambda_im * lambda_im + mu_hat * mu_hat);
}

// --- scalar method-of-steps integrator -----------------------------------------

namespace {

struct ScalarDense {
    double dt;
    const std::vector<double>& x;
    const std::vector<double>& xd;

    double at(double t) const {
        const double ft = t / dt;
        auto i = static_cast<std::size_t>(std::max(0.0, ft));
        if (i >= x.size() - 1) i = x.size() - 2;
        const double s = ft - double(i);
        if (s < 1e-7) return x[i];
        if (s > 1.0 - 1e-7) return x[i + 1];
        const double s2 = s * s, s3 = s2 * s;
        return (2 * s3 - 3 * s2 + 1) * x[i] + (s3 - 2 * s2 + s) * dt * xd[i] +
               (-2 * s3 + 3 * s2) * x[i + 1] + (s3 - s2) * dt * xd[i + 1];
    }
};

// rhs(t, x_now, x_delayed); optional stop(t, x) halts the march early.
ScalarSeries integrate_scalar_dde(const ScalarHistoryFn& history, double a, double t_end,
                                  int steps_per_delay,
                                  const std::function<double(double, double, double)>& rhs,
                                  const std::function<bool(double, double)>* stop = nullptr) {
    if (!(a > 0)) throw ValidationError("scalar delay integration: a must be positive");
    if (steps_per_delay < 50) throw ValidationError("steps_per_delay must be at least 50");
    const double dt = a / steps_per_delay;
    const auto n_total = static_cast<std::size_t>(std::llround(t_end / dt));

    ScalarSeries s;
    s.dt = dt;
    s.t.reserve(n_total + 1);
    s.x.reserve(n_total + 1);
    s.xdot.reserve(n_total + 1);

    // pool from the history function, with finite-difference derivatives
    auto h = [&](double t) { return history(std::clamp(t, 0.0, a)); };
    for (int i = 0; i <= steps_per_delay; ++i) {
        const double t = i * dt;
        s.t.push_back(t);
        s.x.push_back(h(t));
        double d;
        if (i >= 2 && i <= steps_per_delay - 2)
            d = (h((i - 2) * dt) - 8 * h((i - 1) * dt) + 8 * h((i + 1) * dt) - h((i + 2) * dt)) /
                (12 * dt);
        else if (i < 2)
            d = (-25 * h(i * dt) + 48 * h((i + 1) * dt) - 36 * h((i + 2) * dt) +
                 16 * h((i + 3) * dt) - 3 * h((i + 4) * dt)) /
                (12 * dt);
        else
            d = (25 * h(i * dt) - 48 * h((i - 1) * dt) + 36 * h((i - 2) * dt) -
                 16 * h((i - 3) * dt) + 3 * h((i - 4) * dt)) /
                (12 * dt);
        s.xdot.push_back(d);
    }

    const ScalarDense dense{dt, s.x, s.xdot};
    auto delayed = [&](double t) {
        const double td = t - a;
        const double ft = td / dt;
        const auto node = static_cast<std::size_t>(std::llround(std::max(0.0, ft)));
        if (node < s.x.size() && std::abs(ft - double(node)) < 1e-6) return s.x[node];
        return dense.at(td);
    };
    auto f = [&](double t, double x) { return rhs(t, x, delayed(t)); };

    // the generator switches at t = a; overwrite the pool's end derivative
    s.xdot.back() = f(a, s.x.back());

    for (std::size_t n = steps_per_delay; n < n_total; ++n) {
        const double t = double(n) * dt;
        const double y = s.x[n];
        const double k1 = f(t, y);
        const double k2 = f(t + 0.5 * dt, y + 0.5 * dt * k1);
        const double k3 = f(t + 0.5 * dt, y + 0.5 * dt * k2);
        const double k4 = f(t + dt, y + dt * k3);
        const double ynew = y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        s.t.push_back(t + dt);
        s.x.push_back(ynew);
        s.xdot.push_back(f(t + dt, ynew));
        if (!std::isfinite(ynew)) break;
        if (stop && (*stop)(t + dt, ynew)) break;
    }
    return s;
}

} // namespace

ScalarSeries solve_theta_orbit(const ScalarHistoryFn& history_fn, double lambda_im, double a,
                               double t_end, int steps_per_delay) {
    auto rhs = [lambda_im](double, double x_now, double x_del) {
        return -lambda_im * std::sin(x_now - x_del);
    };
    return integrate_scalar_dde(history_fn, a, t_end, steps_per_delay, rhs);
}

ScalarSeries solve_exciton_mode(const ScalarHistoryFn& history_fn, double lambda_im, double a,
                                double alpha, double t_end, int steps_per_delay) {
    const double k = lambda_im * std::cos(a * alpha);
    auto rhs = [k](double, double x_now, double x_del) { return -k * (x_now - x_del); };
    return integrate_scalar_dde(history_fn, a, t_end, steps_per_delay, rhs);
}

PhiExcitonReport solve_phi_exciton_mode(const ScalarHistoryFn& history_fn, double alpha,
                                        double beta, double a, double t_end,
                                        int steps_per_delay) {
    if (alpha == 0) throw ValidationError("solve_phi_exciton_mode: alpha must be nonzero");
    const double cot_aa = std::cos(a * alpha) / std::sin(a * alpha);
    auto rhs = [=](double t, double x_now, double x_del) {
        const double s = std::sin(alpha * t + beta);
        const double cot_t = std::cos(alpha * t + beta) / s;
        return alpha * (cot_aa - cot_t) * (x_now - x_del);
    };

    double amp = 0;
    const double dt_probe = a / steps_per_delay;
    for (int i = 0; i <= steps_per_delay; ++i)
        amp = std::max(amp, std::abs(history_fn(i * dt_probe)));
    const double limit = 1e3 * std::max(amp, 1e-300);

    PhiExcitonReport rep;
    std::function<bool(double, double)> stop = [&](double t, double x) {
        if (!std::isfinite(x) || std::abs(x) > limit) {
            if (!rep.diverged) {
                rep.diverged = true;
                rep.t_divergence = t;
            }
            return true;
        }
        return false;
    };
    rep.series = integrate_scalar_dde(history_fn, a, t_end, steps_per_delay, rhs, &stop);
    for (double v : rep.series.x)
        if (std::isfinite(v)) rep.max_abs = std::max(rep.max_abs, std::abs(v));
    return rep;
}

std::vector<double> characteristic_gamma_roots(double lambda_im, double a, double alpha,
                                               double grid_resolution) {
    const double k = lambda_im * std::cos(a * alpha);
    auto g = [&](double gamma) { return gamma + k * (1.0 - std::exp(-a * gamma)); };
    const int points = std::max(3, static_cast<int>(std::llround(40.0 / grid_resolution)) + 1);
    std::vector<double> roots = bracketed_roots(g, -20.0, 20.0, points, 1e-12);
    for (double& r : roots)
        if (std::abs(r) < 1e-9) r = 0.0;  // gamma = 0 is exact
    const bool has_zero =
        std::any_of(roots.begin(), roots.end(), [](double r) { return r == 0.0; });
    if (!has_zero) roots.push_back(0.0);
    dedupe_sorted(roots, 1e-9);
    return roots;
}

std::array<double, 3> infancy_coefficients(double theta0, double theta_b, double dtheta_b,
                                           double ddtheta_b) {
    const double d = theta0 - theta_b;
    const double th1 = std::sin(d);
    const double th2 = 0.5 * std::cos(d) * (std::sin(d) - dtheta_b);
    const double th3 =
        (std::sin(3 * d) - std::sin(d) +
         (1 - 3 * std::cos(2 * d) - 2 * std::sin(d) * dtheta_b) * dtheta_b -
         2 * std::cos(d) * ddtheta_b) /
        12.0;
    return {th1, th2, th3};
}

double NearMarkovSeries::theta_at(double a, double t) const {
    double out = 0, an = 1;
    for (const auto& poly : theta_poly) {
        double p = 0, tp = 1;
        for (double coef : poly) {
            p += coef * tp;
            tp *= t;
        }
        out += an * p;
        an *= a;
    }
    return out;
}

double NearMarkovSeries::phi_at(double a, double t) const {
    double out = 0, an = 1;
    for (const auto& poly : phi_poly) {
        double p = 0, tp = 1;
        for (double coef : poly) {
            p += coef * tp;
            tp *= t;
        }
        out += an * p;
        an *= a;
    }
    return out;
}

NearMarkovSeries hybrid_near_markovian(double c1, double c2, double lambda_re, double lambda_im,
                                       double b_z) {
    if (std::abs(std::sin(c1)) < 1e-12)
        throw ValidationError("hybrid_near_markovian: c1 at a pole (expansion divides by sin c1)");
    NearMarkovSeries s;
    s.c1 = c1;
    s.c2 = c2;
    s.theta_poly[0] = {c1};
    s.phi_poly[0] = {c2, b_z};
    s.theta_poly[1] = {0.0, -std::sin(c1) * lambda_re * b_z};
    s.phi_poly[1] = {0.0, -lambda_im * b_z};
    s.theta_poly[2] = {0.0,
                       0.25 * (8 * std::sin(c1) * lambda_im * lambda_re -
                               std::sin(2 * c1) * lambda_im * b_z) *
                           b_z,
                       0.25 * std::sin(2 * c1) * lambda_re * lambda_re * b_z * b_z};
    s.phi_poly[2] = {0.0, 0.5 *
                              (b_z * lambda_re * std::cos(c1) +
                               2 * (lambda_im * lambda_im - lambda_re * lambda_re)) *
                              b_z};
    return s;
}

std::string phi_orbit_category_name(PhiOrbitCategory c) {
    switch (c) {
        case PhiOrbitCategory::GenericTriplet: return "generic-triplet";
        case PhiOrbitCategory::ArbitraryAtPole: return "arbitrary-at-pole";
        case PhiOrbitCategory::DiscreteMuFamily: return "discrete-mu-family";
        case PhiOrbitCategory::ConstantOnly: return "constant-only";
        case PhiOrbitCategory::LambdaOnlyOrbit: return "lambda-only-orbit";
    }
    return "?";
}

PhiOrbitResult phi_orbit_classify(double lambda_im, double mu_hat, double theta0, double a) {
    if (!(a > 0)) throw ValidationError("phi_orbit_classify: a must be positive");
    constexpr double tol = 1e-12;
    PhiOrbitResult res{};
    const bool has_lambda = std::abs(lambda_im) > tol;
    const bool has_mu = std::abs(mu_hat) > tol;
    const double st = std::sin(theta0), ct = std::cos(theta0);

    if (has_lambda && has_mu) {
        if (std::abs(st) <= tol) {
            res.category = PhiOrbitCategory::ArbitraryAtPole;
            return res;
        }
        res.category = PhiOrbitCategory::GenericTriplet;
        const double l2 = lambda_im * lambda_im;
        res.slope = 2.0 * ct * (l2 + mu_hat * mu_hat) * mu_hat / (l2 * ct * ct + mu_hat * mu_hat);
        if (std::abs(res.slope) > tol && std::abs(ct) > tol) {
            // delay consistent with the constant-theta constraint:
            // tan(slope * a / 2) = -mu_hat / (lambda_im cos theta0)
            const double base = std::atan(-mu_hat / (lambda_im * ct));
            for (int k = -8; k <= 8; ++k) {
                const double cand = 2.0 * (base + k * kPi) / res.slope;
                if (cand > tol && (res.consistent_a == 0 || cand < res.consistent_a))
                    res.consistent_a = cand;
            }
        }
        return res;
    }
    if (has_mu) {  // lambda_im = 0
        const int k_max = static_cast<int>(std::floor((2 * a * std::abs(mu_hat) / kPi + 1) / 2)) + 1;
        for (int k = -k_max; k <= k_max; ++k) {
            const double target = (2 * k + 1) * kPi / (2 * a * mu_hat);
            if (std::abs(target) <= 1.0 && std::abs(ct - target) < 1e-9) {
                res.category = PhiOrbitCategory::DiscreteMuFamily;
                res.family_k = k;
                res.slope = (2 * k + 1) * kPi / a;
                return res;
            }
        }
        res.category = PhiOrbitCategory::ConstantOnly;
        return res;
    }
    if (has_lambda) {  // mu_hat = 0
        if (std::abs(ct) <= tol) {
            res.category = PhiOrbitCategory::LambdaOnlyOrbit;
            res.slope_roots = alpha_roots(lambda_im, a).roots;
            return res;
        }
        res.category = PhiOrbitCategory::ConstantOnly;
        return res;
    }
    res.category = PhiOrbitCategory::ConstantOnly;
    return res;
}

} // namespace qmm
