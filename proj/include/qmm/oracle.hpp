#pragma once

#include <array>
#include <functional>
#include <vector>

#include "qmm/bloch.hpp"

namespace qmm {

// Closed-form results from the reduced-orbit analysis; every routine here is
// independent of the full simulation engine and is used to validate it.

// Real roots of  alpha + lambda_im * sin(a * alpha) = 0  inside the dynamical
// bound |alpha| <= |lambda_im|, by sign bracketing on a 10^4-point grid plus
// bisection to 1e-12. Zero is always a root.
struct SlopeRoots {
    std::vector<double> roots;  // sorted ascending
};

SlopeRoots alpha_roots(double lambda_im, double a);

// a* = 1 / |lambda_im|; the smallest delay with nontrivial theta-orbit
// dynamics. Throws ValidationError when lambda_im = 0.
double theta_orbit_threshold(double lambda_im);

// a* = |lambda_im| / (lambda_im^2 + mu_hat^2)
double phi_orbit_threshold(double lambda_im, double mu_hat);

// --- scalar delay-differential solver ----------------------------------------

struct ScalarSeries {
    double dt = 0;
    std::vector<double> t;
    std::vector<double> x;
    std::vector<double> xdot;

    std::size_t size() const { return t.size(); }
};

using ScalarHistoryFn = std::function<double(double)>;

// Method-of-steps RK4 on  dx/dt = -lambda_im * sin(x(t) - x(t-a)), started
// from history_fn on [0, a].
ScalarSeries solve_theta_orbit(const ScalarHistoryFn& history_fn, double lambda_im, double a,
                               double t_end, int steps_per_delay = 400);

// Fluctuation mode around the linear-slope solution:
//   dx/dt = -lambda_im * cos(a*alpha) * (x(t) - x(t-a))
ScalarSeries solve_exciton_mode(const ScalarHistoryFn& history_fn, double lambda_im, double a,
                                double alpha, double t_end, int steps_per_delay = 400);

// Azimuthal fluctuation mode, with its time-dependent prefactor:
//   dx/dt = alpha * [cot(a*alpha) - cot(alpha*t + beta)] * (x(t) - x(t-a))
// Growth past 10^3 times the initial-history amplitude stops the run and is
// reported as a divergence (expected near the zeros of sin(alpha t + beta)).
struct PhiExcitonReport {
    ScalarSeries series;
    double max_abs = 0;
    bool diverged = false;
    double t_divergence = 0;
};

PhiExcitonReport solve_phi_exciton_mode(const ScalarHistoryFn& history_fn, double alpha,
                                        double beta, double a, double t_end,
                                        int steps_per_delay = 400);

// Real roots of  gamma + lambda_im * cos(a*alpha) * (1 - exp(-a*gamma)) = 0
// on a grid over [-20, 20] plus bisection. Zero is always a root.
std::vector<double> characteristic_gamma_roots(double lambda_im, double a, double alpha,
                                               double grid_resolution = 1e-3);

// First three polynomial coefficients of the early-time expansion in the
// rescaled time tau = |lambda_im| * t, from the boundary data at the start
// of the pool (value, first and second derivative) and the value at its end.
std::array<double, 3> infancy_coefficients(double theta0, double theta_b, double dtheta_b,
                                           double ddtheta_b);

// --- hybrid near-Markovian series ---------------------------------------------

// Order-by-order polynomial solution of the hybrid system for small delay a:
// angles(t) = sum_n a^n * poly_n(t), printed here to second order.
struct NearMarkovSeries {
    double c1 = 0, c2 = 0;
    std::array<std::vector<double>, 3> theta_poly;  // poly_n coefficients by power of t
    std::array<std::vector<double>, 3> phi_poly;

    double theta_at(double a, double t) const;
    double phi_at(double a, double t) const;
};

// Throws ValidationError when sin(c1) = 0 (the expansion divides by it).
NearMarkovSeries hybrid_near_markovian(double c1, double c2, double lambda_re, double lambda_im,
                                       double b_z);

// --- phi-orbit closed forms -----------------------------------------------------

enum class PhiOrbitCategory {
    GenericTriplet,   // theta constant, phi linear with the closed-form slope
    ArbitraryAtPole,  // sin(theta0) = 0: any phi(t) is a solution
    DiscreteMuFamily, // lambda_im = 0, fine-tuned theta0: discrete slopes
    ConstantOnly,     // single coupling, generic theta0
    LambdaOnlyOrbit,  // mu_hat = 0, cos(theta0) = 0: scalar-delay dynamics
};

std::string phi_orbit_category_name(PhiOrbitCategory c);

struct PhiOrbitResult {
    PhiOrbitCategory category;
    double slope = 0;         // GenericTriplet / DiscreteMuFamily
    double consistent_a = 0;  // smallest delay realizing the generic solution
    int family_k = 0;         // DiscreteMuFamily branch index
    std::vector<double> slope_roots;  // LambdaOnlyOrbit
};

PhiOrbitResult phi_orbit_classify(double lambda_im, double mu_hat, double theta0, double a);

} // namespace qmm
