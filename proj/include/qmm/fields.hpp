#pragma once

#include <utility>
#include <vector>

#include "qmm/bloch.hpp"

namespace qmm {

// Effective magnetic field (hbar = 1): the generator is B.S and the induced
// motion is dr/dt = B x r, tangent to the sphere by construction.
using Field3 = Vec3;

// All Hamiltonian parameters in one bag; the model decides which entries are
// read. mu_t is accepted but dynamically inert: it multiplies r_t in the
// field and drops out of B x r.
struct CouplingSet {
    double mu = 0;
    double mu_t = 0;
    double lambda_re = 0;
    double lambda_im = 0;
    double eta = 0;
    double kappa_re = 0;
    double kappa_im = 0;
    Vec3 b_ext{0, 0, 0};
    double b_kicker_y = 0;

    double mu_hat_past() const { return mu + lambda_re; }
    double mu_hat_now() const { return mu_t + lambda_re; }
};

// One monomial of the generic memory-polynomial Hamiltonian: a coupling and
// an ordered list of history-slot indices with adjacent entries distinct.
struct MonomialSpec {
    complexd coupling;
    std::vector<int> memory_indices;
};

// B = mu * r_past
Field3 field_qmm_11(const BlochVector& r_past, double mu);

// B = mu_hat_past r_past + mu_hat_now r_now - lambda_im r_past x r_now
Field3 field_qmm_22(const BlochVector& r_past, const BlochVector& r_now, double mu_hat_past,
                    double mu_hat_now, double lambda_im);

// B = lambda_re r_now + [lambda_re + eta/2 (1 + r_past.r_now)] r_past
//     - lambda_im r_past x r_now
Field3 field_qmm_23(const BlochVector& r_past, const BlochVector& r_now, double lambda_re,
                    double lambda_im, double eta);

// B = kR/2 [ (r_a + r_b + r_now) + (r_a.r_b) r_now - (r_a.r_now) r_b
//            + (r_b.r_now) r_a ]
//   - kI/2 [ r_a x r_b + r_b x r_now + r_a x r_now ]
Field3 field_qmm_33(const BlochVector& r_a, const BlochVector& r_b, const BlochVector& r_now,
                    double kappa_re, double kappa_im);

// Constant kicker field B = (0, B_y, 0); fills the memory pool before the
// memory-made dynamics takes over.
Field3 field_kicker(double b_kicker_y);

// Hybrid generator: memory-made field plus a conventional constant field.
Field3 field_hybrid(const Field3& qmm, const Vec3& b_ext);

// Sum of lambda * rho_{i1}...rho_{ir} terms, Hermitian-completed. Palindromic
// index strings are self-adjoint and counted once; they require a real
// coupling. Throws ValidationError on invalid indices.
Matrix2c generic_qmm_hamiltonian(const std::vector<MonomialSpec>& monomials,
                                 const std::vector<BlochAngles>& memories);

// "Retarded" and "Now" functions of the two-memory Schroedinger equation for
// arbitrary polynomial order:
//   S_R = (P_mu(w) + P_lambda(w)) m,   S_N = conj(P_lambda)(w) w^2
// with P_mu(w) = sum_s mu_poly[s] w^(2s) and likewise for lambda_poly.
std::pair<complexd, complexd> schrodinger_functions_2L(double w2, complexd m,
                                                       const std::vector<double>& mu_poly,
                                                       const std::vector<complexd>& lambda_poly);

} // namespace qmm
