#pragma once

#include <array>
#include <cmath>
#include <complex>

namespace qmm {

using complexd = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

// Below this value of sin(theta) the azimuth is degenerate; phi is reported
// as-is but carries no physical information there.
inline constexpr double kPoleTol = 1e-9;

struct Vec3 {
    double x = 0, y = 0, z = 0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator-() const { return {-x, -y, -z}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

inline Vec3 normalized(const Vec3& v) {
    double n = norm(v);
    return {v.x / n, v.y / n, v.z / n};
}

// The unit Bloch vector of a pure qubit state.
using BlochVector = Vec3;

// Pure state in polar form. theta is canonical in [0, pi] after
// canonicalize(); phi is kept unwrapped so plotted series stay continuous.
struct BlochAngles {
    double theta = 0;
    double phi = 0;
};

// Reflects theta into [0, pi] (phi shifted by pi on the reflected branch).
// The physical state is unchanged: same ket up to a global phase.
BlochAngles canonicalize(const BlochAngles& s);

// True when the state is too close to a pole for phi to mean anything.
inline bool phi_degenerate(const BlochAngles& s) { return std::abs(std::sin(s.theta)) < kPoleTol; }

struct PureKet {
    complexd up;
    complexd down;
};

// Row-major complex 2x2 matrix; the workhorse for density operators and
// two-point operators.
struct Matrix2c {
    std::array<complexd, 4> m{};  // [ m00 m01 ; m10 m11 ]

    complexd& operator()(int r, int c) { return m[2 * r + c]; }
    const complexd& operator()(int r, int c) const { return m[2 * r + c]; }

    Matrix2c operator+(const Matrix2c& o) const;
    Matrix2c operator-(const Matrix2c& o) const;
    Matrix2c operator*(const Matrix2c& o) const;
    Matrix2c operator*(complexd s) const;

    Matrix2c adjoint() const;
    complexd trace() const { return m[0] + m[3]; }
    double max_abs() const;

    static Matrix2c identity();
    static Matrix2c zero() { return {}; }
};

inline Matrix2c operator*(complexd s, const Matrix2c& a) { return a * s; }

// max |A - A^dagger| entry
double hermiticity_defect(const Matrix2c& a);

// rho = (1 + r.sigma)/2
Matrix2c density_from_vector(const BlochVector& r);

// b.sigma as a matrix (no 1/2); the Hamiltonian of a field b is b.S = b.sigma/2.
Matrix2c pauli_dot(const Vec3& b);

// --- state representations -------------------------------------------------

PureKet angles_to_ket(const BlochAngles& s);

BlochVector angles_to_vector(const BlochAngles& s);

// Inverse map. Rejects vectors whose norm deviates from 1 by more than 1e-6.
// phi is undefined at the poles; 0 is reported there.
BlochAngles vector_to_angles(const BlochVector& r);

// --- quantum-memory two-point quantities ------------------------------------

// Two-point overlap m = <psi1|psi2>.
complexd tpf(const BlochAngles& s1, const BlochAngles& s2);

// w^2 = |m|^2 = (1 + r1.r2)/2, the memory fidelity.
double tpf_norm_sq(const BlochVector& r1, const BlochVector& r2);

// rho1 rho2 = [(1 + r1.r2) 1 + (r1 + r2 + i r1 x r2).sigma] / 4
Matrix2c density_product(const BlochVector& r1, const BlochVector& r2);

// Rank-1 two-point operator |psi1><psi2| = rho1 rho2 / m12.
// Throws ValidationError for (anti)orthogonal inputs (w^2 = 0).
Matrix2c tpo(const BlochAngles& s1, const BlochAngles& s2);

} // namespace qmm
