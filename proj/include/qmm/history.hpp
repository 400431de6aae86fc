#pragma once

#include <cstddef>
#include <type_traits>
#include <vector>

#include "qmm/bloch.hpp"
#include "qmm/errors.hpp"

namespace qmm {

// Dense, interpolable record of a trajectory on a uniform grid: the quantum
// memory pool. Stores one value and two one-sided derivatives per node so
// cubic Hermite segments stay accurate across the derivative jumps that
// delay equations place at multiples of the delay.
//
// State must support + and scalar *. BlochVector samples are renormalized
// after interpolation when `renormalize` is set; angle buffers leave it off.
template <class State>
class UniformHistory {
public:
    UniformHistory(double dt, bool renormalize) : dt_(dt), renormalize_(renormalize) {}

    void reserve(std::size_t n) {
        value_.reserve(n);
        deriv_left_.reserve(n);
        deriv_right_.reserve(n);
    }

    // Appends a node whose left and right derivatives coincide.
    void push(const State& v, const State& d) { push(v, d, d); }

    void push(const State& v, const State& d_left, const State& d_right) {
        value_.push_back(v);
        deriv_left_.push_back(d_left);
        deriv_right_.push_back(d_right);
    }

    // Marks the most recent node as a breakpoint: derivatives right of it
    // follow a new rule (model switch or method-of-steps block edge).
    void set_right_derivative(const State& d) { deriv_right_.back() = d; }

    std::size_t size() const { return value_.size(); }
    double dt() const { return dt_; }
    double t_end() const { return value_.empty() ? 0.0 : dt_ * double(value_.size() - 1); }
    const State& at(std::size_t i) const { return value_[i]; }
    const State& deriv_at(std::size_t i) const { return deriv_right_[i]; }

    bool covers(double t) const { return t >= -1e-12 * dt_ && t <= t_end() + 1e-12 * dt_; }

    // Cubic Hermite interpolation; O(dt^4) on smooth segments.
    State interpolate(double t) const {
        if (!covers(t)) throw ValidationError("history interpolation outside coverage");
        double ft = t / dt_;
        auto i = static_cast<std::size_t>(ft);
        if (i >= value_.size() - 1) i = value_.size() - 2;
        const double s = ft - double(i);
        if (s <= 1e-12) return maybe_renorm(value_[i]);
        if (s >= 1.0 - 1e-12) return maybe_renorm(value_[i + 1]);
        const double s2 = s * s, s3 = s2 * s;
        const double h00 = 2 * s3 - 3 * s2 + 1;
        const double h10 = s3 - 2 * s2 + s;
        const double h01 = -2 * s3 + 3 * s2;
        const double h11 = s3 - s2;
        State out = h00 * value_[i] + (h10 * dt_) * deriv_right_[i] + h01 * value_[i + 1] +
                    (h11 * dt_) * deriv_left_[i + 1];
        return maybe_renorm(out);
    }

private:
    State maybe_renorm(const State& v) const {
        if constexpr (std::is_same_v<State, Vec3>) {
            if (renormalize_) return normalized(v);
        }
        return v;
    }

    double dt_;
    bool renormalize_;
    std::vector<State> value_;
    std::vector<State> deriv_left_;
    std::vector<State> deriv_right_;
};

using HistoryBuffer = UniformHistory<Vec3>;

} // namespace qmm
