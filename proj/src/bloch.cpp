#include "qmm/bloch.hpp"

#include <algorithm>

#include "qmm/errors.hpp"

namespace qmm {

BlochAngles canonicalize(const BlochAngles& s) {
    // remainder() lands in [-pi, pi]; the negative branch is reflected.
    double th = std::remainder(s.theta, 2.0 * kPi);
    double ph = s.phi;
    if (th < 0) {
        th = -th;
        ph += kPi;
    }
    return {th, ph};
}

Matrix2c Matrix2c::operator+(const Matrix2c& o) const {
    Matrix2c r;
    for (int i = 0; i < 4; ++i) r.m[i] = m[i] + o.m[i];
    return r;
}

Matrix2c Matrix2c::operator-(const Matrix2c& o) const {
    Matrix2c r;
    for (int i = 0; i < 4; ++i) r.m[i] = m[i] - o.m[i];
    return r;
}

Matrix2c Matrix2c::operator*(const Matrix2c& o) const {
    Matrix2c r;
    r.m[0] = m[0] * o.m[0] + m[1] * o.m[2];
    r.m[1] = m[0] * o.m[1] + m[1] * o.m[3];
    r.m[2] = m[2] * o.m[0] + m[3] * o.m[2];
    r.m[3] = m[2] * o.m[1] + m[3] * o.m[3];
    return r;
}

Matrix2c Matrix2c::operator*(complexd s) const {
    Matrix2c r;
    for (int i = 0; i < 4; ++i) r.m[i] = m[i] * s;
    return r;
}

Matrix2c Matrix2c::adjoint() const {
    Matrix2c r;
    r.m[0] = std::conj(m[0]);
    r.m[1] = std::conj(m[2]);
    r.m[2] = std::conj(m[1]);
    r.m[3] = std::conj(m[3]);
    return r;
}

double Matrix2c::max_abs() const {
    double v = 0;
    for (const auto& e : m) v = std::max(v, std::abs(e));
    return v;
}

Matrix2c Matrix2c::identity() {
    Matrix2c r;
    r.m[0] = 1;
    r.m[3] = 1;
    return r;
}

double hermiticity_defect(const Matrix2c& a) { return (a - a.adjoint()).max_abs(); }

Matrix2c density_from_vector(const BlochVector& r) {
    Matrix2c d;
    d(0, 0) = 0.5 * (1.0 + r.z);
    d(0, 1) = 0.5 * complexd(r.x, -r.y);
    d(1, 0) = 0.5 * complexd(r.x, r.y);
    d(1, 1) = 0.5 * (1.0 - r.z);
    return d;
}

Matrix2c pauli_dot(const Vec3& b) {
    Matrix2c h;
    h(0, 0) = b.z;
    h(0, 1) = complexd(b.x, -b.y);
    h(1, 0) = complexd(b.x, b.y);
    h(1, 1) = -b.z;
    return h;
}

PureKet angles_to_ket(const BlochAngles& s) {
    const double c = std::cos(0.5 * s.theta);
    const double sn = std::sin(0.5 * s.theta);
    return {complexd(c, 0), sn * std::exp(complexd(0, s.phi))};
}

BlochVector angles_to_vector(const BlochAngles& s) {
    const double st = std::sin(s.theta);
    return {st * std::cos(s.phi), st * std::sin(s.phi), std::cos(s.theta)};
}

BlochAngles vector_to_angles(const BlochVector& r) {
    const double n = norm(r);
    if (std::abs(n - 1.0) > 1e-6)
        throw ValidationError("vector_to_angles: |r| deviates from 1 by more than 1e-6");
    const double z = std::clamp(r.z / n, -1.0, 1.0);
    const double theta = std::acos(z);
    double phi = 0;
    if (std::abs(std::sin(theta)) >= kPoleTol) phi = std::atan2(r.y, r.x);
    return {theta, phi};
}

complexd tpf(const BlochAngles& s1, const BlochAngles& s2) {
    const double c1 = std::cos(0.5 * s1.theta), c2 = std::cos(0.5 * s2.theta);
    const double n1 = std::sin(0.5 * s1.theta), n2 = std::sin(0.5 * s2.theta);
    return c1 * c2 + n1 * n2 * std::exp(complexd(0, s2.phi - s1.phi));
}

double tpf_norm_sq(const BlochVector& r1, const BlochVector& r2) {
    return 0.5 * (1.0 + dot(r1, r2));
}

Matrix2c density_product(const BlochVector& r1, const BlochVector& r2) {
    const double d = dot(r1, r2);
    const Vec3 s = r1 + r2;
    const Vec3 c = cross(r1, r2);
    Matrix2c p;
    p(0, 0) = 0.25 * complexd(1.0 + d + s.z, c.z);
    p(0, 1) = 0.25 * complexd(s.x + c.y, -s.y + c.x);
    p(1, 0) = 0.25 * complexd(s.x - c.y, s.y + c.x);
    p(1, 1) = 0.25 * complexd(1.0 + d - s.z, -c.z);
    return p;
}

Matrix2c tpo(const BlochAngles& s1, const BlochAngles& s2) {
    const complexd m12 = tpf(s1, s2);
    if (std::norm(m12) < 1e-24)
        throw ValidationError("tpo: degenerate input, the two states are orthogonal (w^2 = 0)");
    const double c1 = std::cos(0.5 * s1.theta), c2 = std::cos(0.5 * s2.theta);
    const double n1 = std::sin(0.5 * s1.theta), n2 = std::sin(0.5 * s2.theta);
    Matrix2c t;
    t(0, 0) = c1 * c2;
    t(0, 1) = c1 * n2 * std::exp(complexd(0, -s2.phi));
    t(1, 0) = n1 * c2 * std::exp(complexd(0, s1.phi));
    t(1, 1) = n1 * n2 * std::exp(complexd(0, s1.phi - s2.phi));
    return t;
}

} // namespace qmm
