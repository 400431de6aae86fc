#include "qmm/fields.hpp"

#include <algorithm>

#include "qmm/errors.hpp"

namespace qmm {

Field3 field_qmm_11(const BlochVector& r_past, double mu) { return mu * r_past; }

Field3 field_qmm_22(const BlochVector& r_past, const BlochVector& r_now, double mu_hat_past,
                    double mu_hat_now, double lambda_im) {
    return mu_hat_past * r_past + mu_hat_now * r_now - lambda_im * cross(r_past, r_now);
}

Field3 field_qmm_23(const BlochVector& r_past, const BlochVector& r_now, double lambda_re,
                    double lambda_im, double eta) {
    const double past_weight = lambda_re + 0.5 * eta * (1.0 + dot(r_past, r_now));
    return lambda_re * r_now + past_weight * r_past - lambda_im * cross(r_past, r_now);
}

Field3 field_qmm_33(const BlochVector& r_a, const BlochVector& r_b, const BlochVector& r_now,
                    double kappa_re, double kappa_im) {
    const double ab = dot(r_a, r_b);
    const double at = dot(r_a, r_now);
    const double bt = dot(r_b, r_now);
    const Vec3 real_part = (r_a + r_b + r_now) + ab * r_now - at * r_b + bt * r_a;
    const Vec3 imag_part = cross(r_a, r_b) + cross(r_b, r_now) + cross(r_a, r_now);
    return 0.5 * kappa_re * real_part - 0.5 * kappa_im * imag_part;
}

Field3 field_kicker(double b_kicker_y) { return {0, b_kicker_y, 0}; }

Field3 field_hybrid(const Field3& qmm, const Vec3& b_ext) { return qmm + b_ext; }

namespace {

bool is_palindrome(const std::vector<int>& v) {
    return std::equal(v.begin(), v.begin() + v.size() / 2, v.rbegin());
}

Matrix2c density_chain(const std::vector<int>& idx, const std::vector<Matrix2c>& rho,
                       bool reversed) {
    Matrix2c p = reversed ? rho[idx.back()] : rho[idx.front()];
    if (!reversed) {
        for (std::size_t k = 1; k < idx.size(); ++k) p = p * rho[idx[k]];
    } else {
        for (std::size_t k = idx.size() - 1; k-- > 0;) p = p * rho[idx[k]];
    }
    return p;
}

} // namespace

Matrix2c generic_qmm_hamiltonian(const std::vector<MonomialSpec>& monomials,
                                 const std::vector<BlochAngles>& memories) {
    std::vector<Matrix2c> rho;
    rho.reserve(memories.size());
    for (const auto& s : memories) rho.push_back(density_from_vector(angles_to_vector(s)));

    Matrix2c h = Matrix2c::zero();
    for (const auto& mono : monomials) {
        if (mono.memory_indices.empty())
            throw ValidationError("generic_qmm_hamiltonian: empty monomial");
        for (std::size_t k = 0; k < mono.memory_indices.size(); ++k) {
            const int i = mono.memory_indices[k];
            if (i < 0 || static_cast<std::size_t>(i) >= memories.size())
                throw ValidationError("generic_qmm_hamiltonian: memory index out of range");
            if (k > 0 && i == mono.memory_indices[k - 1])
                throw ValidationError("generic_qmm_hamiltonian: adjacent memory indices equal");
        }
        if (is_palindrome(mono.memory_indices)) {
            // self-adjoint string; a complex coupling would break Hermiticity
            if (std::abs(mono.coupling.imag()) > 1e-15 * (1.0 + std::abs(mono.coupling.real())))
                throw ValidationError(
                    "generic_qmm_hamiltonian: palindromic monomial requires a real coupling");
            h = h + mono.coupling.real() * density_chain(mono.memory_indices, rho, false);
        } else {
            h = h + mono.coupling * density_chain(mono.memory_indices, rho, false);
            h = h + std::conj(mono.coupling) * density_chain(mono.memory_indices, rho, true);
        }
    }
    return h;
}

std::pair<complexd, complexd> schrodinger_functions_2L(double w2, complexd m,
                                                       const std::vector<double>& mu_poly,
                                                       const std::vector<complexd>& lambda_poly) {
    double p_mu = 0;
    complexd p_lambda = 0;
    double wpow = 1.0;
    for (std::size_t s = 0; s < std::max(mu_poly.size(), lambda_poly.size()); ++s) {
        if (s < mu_poly.size()) p_mu += mu_poly[s] * wpow;
        if (s < lambda_poly.size()) p_lambda += lambda_poly[s] * wpow;
        wpow *= w2;
    }
    const complexd s_r = (p_mu + p_lambda) * m;
    const complexd s_n = std::conj(p_lambda) * w2;
    return {s_r, s_n};
}

} // namespace qmm
