#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "qmm/errors.hpp"
#include "qmm/fields.hpp"
#include "qmm/integrator.hpp"

using namespace qmm;

namespace {

std::mt19937 rng(777);

BlochAngles random_state() {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return {std::acos(1.0 - 2.0 * u(rng)), 2.0 * kPi * u(rng)};
}

Vec3 random_vec() { return angles_to_vector(random_state()); }

double random_coupling() {
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    return u(rng);
}

// traceless part of H as a field: H = c*1 + B.sigma/2
Vec3 field_of_hamiltonian(const Matrix2c& h) {
    const complexd half_trace = 0.5 * h.trace();
    return {2.0 * h(1, 0).real(), 2.0 * h(1, 0).imag(), 2.0 * (h(0, 0) - half_trace).real()};
}

} // namespace

TEST_CASE("linear-memory field") {
    CHECK(norm(field_qmm_11({0, 0, 1}, 0.0)) == 0.0);
    CHECK(norm(field_qmm_11({0, 0, 1}, 1.85) - Vec3{0, 0, 1.85}) < 1e-15);

    // induced motion is the cross-product equation
    for (int i = 0; i < 100; ++i) {
        const Vec3 rp = random_vec(), rn = random_vec();
        const double mu = random_coupling();
        CouplingSet c;
        c.mu = mu;
        const Vec3 expect = mu * cross(rp, rn);
        CHECK(norm(cross(field_qmm_11(rp, mu), rn) - expect) < 1e-13);
        CHECK(norm(rhs(Model::qmm11, rn, rp, rp, c) - expect) < 1e-13);
    }
}

TEST_CASE("two-memory field reductions and equivalences") {
    for (int i = 0; i < 100; ++i) {
        const Vec3 rp = random_vec(), rn = random_vec();
        const double mu = random_coupling();
        // lambda_im = 0, mu_hat_now = 0 reduces to the linear field
        CHECK(norm(field_qmm_22(rp, rn, mu, 0, 0) - field_qmm_11(rp, mu)) == 0.0);
        // equal memories kill the cross term
        const double mh_p = random_coupling(), mh_n = random_coupling();
        CHECK(norm(field_qmm_22(rn, rn, mh_p, mh_n, random_coupling()) -
                   (mh_p + mh_n) * rn) < 1e-13);
    }
}

TEST_CASE("two-memory polar rates match the field") {
    int used = 0;
    while (used < 1000) {
        const BlochAngles sp = random_state(), sn = random_state();
        if (std::sin(sn.theta) < 1e-3) continue;
        ++used;
        CouplingSet c;
        c.mu = random_coupling();
        c.lambda_im = random_coupling();
        const Vec3 rp = angles_to_vector(sp), rn = angles_to_vector(sn);
        const Vec3 dr = cross(field_qmm_22(rp, rn, c.mu_hat_past(), 0, c.lambda_im), rn);

        const PolarRate rate =
            rhs_polar(Model::qmm22, {sn.theta, sn.phi}, {sp.theta, sp.phi}, {}, c);
        REQUIRE(rate.pole_ok);
        const double st = std::sin(sn.theta), ct = std::cos(sn.theta);
        const double sph = std::sin(sn.phi), cph = std::cos(sn.phi);
        const Vec3 dr_polar = rate.dtheta * Vec3{ct * cph, ct * sph, -st} +
                              rate.dphi * st * Vec3{-sph, cph, 0};
        CHECK(norm(dr - dr_polar) < 1e-10);
    }
}

TEST_CASE("third-order field reduces and matches its polar rates") {
    for (int i = 0; i < 100; ++i) {
        const Vec3 rp = random_vec(), rn = random_vec();
        const double lr = random_coupling(), li = random_coupling();
        CHECK(norm(field_qmm_23(rp, rn, lr, li, 0.0) - field_qmm_22(rp, rn, lr, lr, li)) < 1e-13);
        // antipodal memories: the eta term vanishes
        const double eta = random_coupling();
        CHECK(norm(field_qmm_23(rp, -1.0 * rp, lr, li, eta) -
                   field_qmm_22(rp, -1.0 * rp, lr, lr, li)) < 1e-12);
    }

    int used = 0;
    while (used < 1000) {
        const BlochAngles sp = random_state(), sn = random_state();
        if (std::sin(sn.theta) < 1e-3) continue;
        ++used;
        CouplingSet c;
        c.lambda_re = random_coupling();
        c.lambda_im = random_coupling();
        c.eta = random_coupling();
        const Vec3 rp = angles_to_vector(sp), rn = angles_to_vector(sn);
        const Vec3 dr = cross(field_qmm_23(rp, rn, c.lambda_re, c.lambda_im, c.eta), rn);
        const PolarRate rate =
            rhs_polar(Model::qmm23, {sn.theta, sn.phi}, {sp.theta, sp.phi}, {}, c);
        REQUIRE(rate.pole_ok);
        const double st = std::sin(sn.theta), ct = std::cos(sn.theta);
        const double sph = std::sin(sn.phi), cph = std::cos(sn.phi);
        const Vec3 dr_polar = rate.dtheta * Vec3{ct * cph, ct * sph, -st} +
                              rate.dphi * st * Vec3{-sph, cph, 0};
        CHECK(norm(dr - dr_polar) < 1e-10);
    }
}

TEST_CASE("three-memory field: coincident memories reduce to two-memory") {
    for (int i = 0; i < 1000; ++i) {
        const Vec3 ra = random_vec(), rn = random_vec();
        const double kr = random_coupling(), ki = random_coupling();
        CHECK(norm(field_qmm_33(ra, ra, rn, kr, ki) - field_qmm_22(ra, rn, kr, kr, ki)) < 1e-12);
    }
    CHECK(norm(field_qmm_33(random_vec(), random_vec(), random_vec(), 0, 0)) == 0.0);
}

TEST_CASE("three-memory polar rates match the vector equation") {
    int used = 0;
    while (used < 1000) {
        const BlochAngles sa = random_state(), sb = random_state(), sn = random_state();
        if (std::sin(sn.theta) < 1e-3) continue;
        ++used;
        CouplingSet c;
        c.kappa_re = random_coupling();
        c.kappa_im = random_coupling();
        const Vec3 ra = angles_to_vector(sa), rb = angles_to_vector(sb), rn = angles_to_vector(sn);
        const Vec3 dr = rhs(Model::qmm33, rn, ra, rb, c);
        CHECK(std::abs(dot(dr, rn)) < 1e-12);
        CHECK(norm(dr - cross(field_qmm_33(ra, rb, rn, c.kappa_re, c.kappa_im), rn)) < 1e-12);

        const PolarRate rate = rhs_polar(Model::qmm33, {sn.theta, sn.phi}, {sa.theta, sa.phi},
                                         {sb.theta, sb.phi}, c);
        REQUIRE(rate.pole_ok);
        const double st = std::sin(sn.theta), ct = std::cos(sn.theta);
        const double sph = std::sin(sn.phi), cph = std::cos(sn.phi);
        const Vec3 dr_polar = rate.dtheta * Vec3{ct * cph, ct * sph, -st} +
                              rate.dphi * st * Vec3{-sph, cph, 0};
        CHECK(norm(dr - dr_polar) < 1e-10);
    }
}

TEST_CASE("kicker and hybrid fields") {
    CHECK(norm(field_kicker(7.0) - Vec3{0, 7, 0}) == 0.0);
    CHECK(norm(field_kicker(0.0)) == 0.0);
    const Vec3 q = random_vec();
    CHECK(norm(field_hybrid(q, {0, 0, 0}) - q) == 0.0);
    // pure precession about z
    CouplingSet c;
    c.b_ext = {0, 0, 2.5};
    const BlochAngles sn = random_state();
    const PolarRate rate = rhs_polar(Model::hybrid22, {sn.theta, sn.phi}, {sn.theta, sn.phi}, {}, c);
    CHECK(std::abs(rate.dtheta) < 1e-12);
    CHECK(rate.dphi == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("field trace parts never move the state") {
    // adding any multiple of r_now to the field leaves dr/dt unchanged
    for (int i = 0; i < 200; ++i) {
        const Vec3 rp = random_vec(), rn = random_vec();
        const Vec3 b = field_qmm_22(rp, rn, random_coupling(), 0.0, random_coupling());
        const Vec3 b_shifted = b + random_coupling() * rn;
        CHECK(norm(cross(b, rn) - cross(b_shifted, rn)) < 1e-12);
    }
}

TEST_CASE("generic memory-polynomial Hamiltonian") {
    // a single linear monomial is the density itself
    const BlochAngles s0 = random_state();
    const Matrix2c h1 = generic_qmm_hamiltonian({{complexd(1.85, 0), {0}}}, {s0});
    CHECK((h1 - complexd(1.85, 0) * density_from_vector(angles_to_vector(s0))).max_abs() < 1e-14);

    CHECK_THROWS_AS(generic_qmm_hamiltonian({{complexd(1, 0), {0, 0}}}, {s0}), ValidationError);
    CHECK_THROWS_AS(generic_qmm_hamiltonian({{complexd(1, 0), {1}}}, {s0}), ValidationError);
    CHECK_THROWS_AS(generic_qmm_hamiltonian({{complexd(1, 1), {0}}}, {s0}), ValidationError);

    // Hermitian for arbitrary random monomial lists
    for (int i = 0; i < 200; ++i) {
        const std::vector<BlochAngles> mem{random_state(), random_state(), random_state()};
        std::vector<MonomialSpec> monos;
        std::uniform_int_distribution<int> len(1, 4), idx(0, 2), nmono(1, 3);
        const int n = nmono(rng);
        for (int k = 0; k < n; ++k) {
            MonomialSpec m;
            const int l = len(rng);
            int prev = -1;
            for (int j = 0; j < l; ++j) {
                int v = idx(rng);
                while (v == prev) v = idx(rng);
                m.memory_indices.push_back(v);
                prev = v;
            }
            const bool pal = std::equal(m.memory_indices.begin(),
                                        m.memory_indices.begin() + m.memory_indices.size() / 2,
                                        m.memory_indices.rbegin());
            m.coupling = pal ? complexd(random_coupling(), 0)
                             : complexd(random_coupling(), random_coupling());
            monos.push_back(std::move(m));
        }
        const Matrix2c h = generic_qmm_hamiltonian(monos, mem);
        CHECK(hermiticity_defect(h) < 1e-12);
        // its commutator with any pure density is traceless and anti-Hermitian
        const Matrix2c rho = density_from_vector(angles_to_vector(mem[0]));
        const Matrix2c comm = h * rho - rho * h;
        CHECK(std::abs(comm.trace()) < 1e-12);
        CHECK((comm + comm.adjoint()).max_abs() < 1e-12);
    }
}

TEST_CASE("generic Hamiltonian reproduces the closed-form fields") {
    for (int i = 0; i < 1000; ++i) {
        const BlochAngles sp = random_state(), sn = random_state();
        const double mu = random_coupling(), lr = random_coupling(), li = random_coupling();

        // two-memory second order: mu rho_p + lambda rho_p rho_n + h.c.
        const Matrix2c h22 = generic_qmm_hamiltonian(
            {{complexd(mu, 0), {0}}, {complexd(lr, li), {0, 1}}}, {sp, sn});
        const Vec3 b22 = field_qmm_22(angles_to_vector(sp), angles_to_vector(sn), mu + lr, lr, li);
        CHECK(norm(field_of_hamiltonian(h22) - b22) < 1e-12);

        // third order eta rho_p rho_n rho_p on top of the quadratic pair
        const double eta = random_coupling();
        const Matrix2c h23 = generic_qmm_hamiltonian(
            {{complexd(lr, li), {0, 1}}, {complexd(eta, 0), {0, 1, 0}}}, {sp, sn});
        const Vec3 b23 =
            field_qmm_23(angles_to_vector(sp), angles_to_vector(sn), lr, li, eta);
        CHECK(norm(field_of_hamiltonian(h23) - b23) < 1e-12);

        // three memories, one cubic string
        const BlochAngles sb = random_state();
        const double kr = random_coupling(), ki = random_coupling();
        const Matrix2c h33 =
            generic_qmm_hamiltonian({{complexd(kr, ki), {0, 1, 2}}}, {sp, sb, sn});
        const Vec3 b33 = field_qmm_33(angles_to_vector(sp), angles_to_vector(sb),
                                      angles_to_vector(sn), kr, ki);
        CHECK(norm(field_of_hamiltonian(h33) - b33) < 1e-12);
    }
}

TEST_CASE("retarded and now Schroedinger functions") {
    // L = 2 with unit linear coupling only
    auto [sr, sn] = schrodinger_functions_2L(0.3, complexd(0.2, 0.1), {1.0}, {});
    CHECK(std::abs(sr - complexd(0.2, 0.1)) < 1e-15);
    CHECK(std::abs(sn) == 0.0);

    // L = 3 line: S_R = (mu + lambda + eta w^2) m, S_N = conj(lambda) w^2
    const double w2 = 0.42, mu = 0.7, eta = 1.3;
    const complexd lam(0.5, -0.2), m(std::sqrt(w2), 0);
    auto [sr3, sn3] = schrodinger_functions_2L(w2, m, {mu, eta}, {lam});
    CHECK(std::abs(sr3 - (mu + lam + eta * w2) * m) < 1e-14);
    CHECK(std::abs(sn3 - std::conj(lam) * w2) < 1e-14);

    // orthogonal memories: both vanish
    auto [sr0, sn0] = schrodinger_functions_2L(0.0, complexd(0, 0), {mu, eta}, {lam});
    CHECK(std::abs(sr0) == 0.0);
    CHECK(std::abs(sn0) == 0.0);
}
