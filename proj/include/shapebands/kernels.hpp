#pragma once

// Extremal kernel pairs for shape-restricted curve estimation.
//
// For each shape class (isotonic / convex) there is a lower and an upper
// kernel whose windowed averages bound the regression function from below
// resp. above in expectation. Two variants are provided:
//
//  * rescaled_kernel(): unit-support forms evaluated on the half-integer
//    grid (j - 1/2)/d. These drive every band computation and admit exact
//    closed-form weight sums S_d and R_d.
//  * canonical_kernel(): the continuous extremal forms whose moment
//    constants feed the adaptivity diagnostics. They are never used on
//    data.
//
// Every kernel is a piecewise polynomial of degree <= 2, so window sums
// over an observation vector reduce to three moment prefix sums.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "shapebands/errors.hpp"

namespace shapebands {

enum class ShapeClass { Isotonic, Convex };
enum class KernelSide { Lower, Upper };

// Smoothness order of the class: 1 (isotonic) or 2 (convex).
inline int smoothness_order(ShapeClass shape) {
    return shape == ShapeClass::Isotonic ? 1 : 2;
}

inline const char* to_string(ShapeClass shape) {
    return shape == ShapeClass::Isotonic ? "isotonic" : "convex";
}

inline const char* to_string(KernelSide side) {
    return side == KernelSide::Lower ? "lower" : "upper";
}

inline ShapeClass parse_shape_class(const std::string& name) {
    if (name == "isotonic") return ShapeClass::Isotonic;
    if (name == "convex") return ShapeClass::Convex;
    throw ParseError("unknown shape class '" + name + "' (expected isotonic or convex)");
}

// One polynomial piece: c0 + c1*x + c2*x^2 on [lo, hi).
struct KernelPiece {
    double lo;
    double hi;
    double c0;
    double c1;
    double c2;
};

struct KernelSpec {
    ShapeClass shape;
    KernelSide side;
    double a;  // support is [-a, b]
    double b;
    std::vector<KernelPiece> pieces;  // contiguous, ascending in x
    bool rescaled;                    // grid family with a, b in {0, 1}
};

// Kernels matched to the half-integer observation grid.
//   isotonic lower  1{[-1,0]} (1 + x)
//   isotonic upper  1{[0,1]}  (1 - x)
//   convex lower    1{[-1,1]} (1 - 3|x| + 2x^2)
//   convex upper    1{[-1,1]} (1 - x^2)
inline KernelSpec rescaled_kernel(ShapeClass shape, KernelSide side) {
    if (shape == ShapeClass::Isotonic) {
        if (side == KernelSide::Lower)
            return {shape, side, 1.0, 0.0, {{-1.0, 0.0, 1.0, 1.0, 0.0}}, true};
        return {shape, side, 0.0, 1.0, {{0.0, 1.0, 1.0, -1.0, 0.0}}, true};
    }
    if (side == KernelSide::Lower)
        return {shape, side, 1.0, 1.0,
                {{-1.0, 0.0, 1.0, 3.0, 2.0}, {0.0, 1.0, 1.0, -3.0, 2.0}},
                true};
    return {shape, side, 1.0, 1.0, {{-1.0, 1.0, 1.0, 0.0, -1.0}}, true};
}

// Continuous extremal forms at their natural scale.
//   isotonic lower  1{[-1,0]} (1 + x)
//   isotonic upper  1{[0,1]}  (1 - x)
//   convex lower    1{[-2,2]} (1 - (3/2)|x| + x^2/2)
//   convex upper    1{[-sqrt2,sqrt2]} (1 - x^2/2)
inline KernelSpec canonical_kernel(ShapeClass shape, KernelSide side) {
    if (shape == ShapeClass::Isotonic) return rescaled_kernel(shape, side);
    if (side == KernelSide::Lower)
        return {shape, side, 2.0, 2.0,
                {{-2.0, 0.0, 1.0, 1.5, 0.5}, {0.0, 2.0, 1.0, -1.5, 0.5}},
                false};
    const double s2 = std::sqrt(2.0);
    return {shape, side, s2, s2, {{-s2, s2, 1.0, 0.0, -0.5}}, false};
}

// Piecewise-polynomial value; zero off the support. Pieces are half-open on
// the right, the final piece closed; the kernels are continuous, so the
// convention never changes a value.
inline double kernel_value(const KernelSpec& spec, double x) {
    if (x < -spec.a || x > spec.b) return 0.0;
    for (std::size_t p = 0; p < spec.pieces.size(); ++p) {
        const KernelPiece& pc = spec.pieces[p];
        const bool is_last = p + 1 == spec.pieces.size();
        if (x >= pc.lo && (x < pc.hi || (is_last && x <= pc.hi)))
            return pc.c0 + x * (pc.c1 + x * pc.c2);
    }
    return 0.0;
}

// Weight sum S and squared-weight sum R over the offsets (j - 1/2)/d,
// j = 1-d .. d.
struct DiscreteKernelSums {
    int d;
    double S;
    double R;
};

// Closed forms for the rescaled kernels:
//   isotonic (both sides)  S_d = d/2            R_d = d/3 - 1/(12d)
//   convex lower           S_d = d/3 - 1/(3d)   R_d = 4d/15 - 1/(2d) + 7/(30d^3)
//   convex upper           S_d = 4d/3 + 1/(6d)  R_d = 16d/15 + 7/(120d^3)
// The convex lower kernel has S_1 = R_1 = 0, so d = 1 is rejected there.
inline DiscreteKernelSums discrete_sums(const KernelSpec& spec, int d) {
    if (d < 1) throw DomainError("discrete_sums: d must be >= 1");
    if (!spec.rescaled)
        throw DomainError("discrete_sums: closed forms are defined for rescaled kernels only");
    const double dd = static_cast<double>(d);
    if (spec.shape == ShapeClass::Isotonic)
        return {d, dd / 2.0, dd / 3.0 - 1.0 / (12.0 * dd)};
    if (spec.side == KernelSide::Lower) {
        if (d == 1)
            throw DegenerateBandwidth("convex lower kernel: every weight vanishes at d = 1");
        return {d, dd / 3.0 - 1.0 / (3.0 * dd),
                4.0 * dd / 15.0 - 1.0 / (2.0 * dd) + 7.0 / (30.0 * dd * dd * dd)};
    }
    return {d, 4.0 * dd / 3.0 + 1.0 / (6.0 * dd),
            16.0 * dd / 15.0 + 7.0 / (120.0 * dd * dd * dd)};
}

// Literal summation over j = 1-d .. d; the oracle counterpart of
// discrete_sums.
inline DiscreteKernelSums brute_force_sums(const KernelSpec& spec, int d) {
    if (d < 1) throw DomainError("brute_force_sums: d must be >= 1");
    double s = 0.0, r = 0.0;
    for (int j = 1 - d; j <= d; ++j) {
        const double w = kernel_value(spec, (j - 0.5) / d);
        s += w;
        r += w * w;
    }
    return {d, s, r};
}

// <1, psi> and ||psi||^2.
struct KernelMoments {
    double integral;
    double sq_norm;
};

// Exact polynomial integration over the support.
inline KernelMoments continuous_moments(const KernelSpec& spec) {
    auto power_int = [](double lo, double hi, int k) {
        return (std::pow(hi, k + 1) - std::pow(lo, k + 1)) / (k + 1);
    };
    double integral = 0.0, sq = 0.0;
    for (const KernelPiece& pc : spec.pieces) {
        integral += pc.c0 * power_int(pc.lo, pc.hi, 0) + pc.c1 * power_int(pc.lo, pc.hi, 1) +
                    pc.c2 * power_int(pc.lo, pc.hi, 2);
        // (c0 + c1 x + c2 x^2)^2 expanded by monomial degree
        const double q0 = pc.c0 * pc.c0;
        const double q1 = 2.0 * pc.c0 * pc.c1;
        const double q2 = pc.c1 * pc.c1 + 2.0 * pc.c0 * pc.c2;
        const double q3 = 2.0 * pc.c1 * pc.c2;
        const double q4 = pc.c2 * pc.c2;
        sq += q0 * power_int(pc.lo, pc.hi, 0) + q1 * power_int(pc.lo, pc.hi, 1) +
              q2 * power_int(pc.lo, pc.hi, 2) + q3 * power_int(pc.lo, pc.hi, 3) +
              q4 * power_int(pc.lo, pc.hi, 4);
    }
    return {integral, sq};
}

// Width-rate constant ((k + 1/2) ||psi||^2)^(-k/(2k+1)) computed from the
// canonical kernel of the given side.
inline double delta_constant(ShapeClass shape, KernelSide side) {
    const int k = smoothness_order(shape);
    const KernelMoments m = continuous_moments(canonical_kernel(shape, side));
    return std::pow((k + 0.5) * m.sq_norm, -static_cast<double>(k) / (2 * k + 1));
}

namespace detail {

// Shape-class membership of f sampled at the design points (i - 1/2)/n.
// Returns the first violating index (1-based), or 0 when f is in class.
inline int shape_violation_index(ShapeClass shape, const std::vector<double>& y) {
    const int n = static_cast<int>(y.size());
    double scale = 1.0;
    for (double v : y) scale = std::max(scale, std::abs(v));
    const double slack = 1e-12 * scale;
    if (shape == ShapeClass::Isotonic) {
        for (int i = 0; i + 1 < n; ++i)
            if (y[i + 1] < y[i] - slack) return i + 2;
        return 0;
    }
    for (int i = 1; i + 1 < n; ++i)
        if (y[i + 1] - 2.0 * y[i] + y[i - 1] < -slack) return i + 2;
    return 0;
}

}  // namespace detail

// Checks the deterministic bias sign of the noiseless kernel estimate at
// t = t_index/n with bandwidth d/n: lower kernels must not overshoot f(t),
// upper kernels must not undershoot. f is evaluated on the design grid to
// confirm class membership; `tol` absorbs floating-point rounding in the
// equality cases (constant / linear f).
inline bool verify_sign_bias(const KernelSpec& spec, const std::function<double(double)>& f,
                             int n, int d, int t_index, double tol = 1e-9) {
    if (n < 2) throw DomainError("verify_sign_bias: need n >= 2");
    if (d < 1) throw DomainError("verify_sign_bias: need d >= 1");
    std::vector<double> y(n);
    for (int i = 1; i <= n; ++i) y[i - 1] = f((i - 0.5) / n);
    if (int bad = detail::shape_violation_index(spec.shape, y))
        throw InvalidShape("verify_sign_bias: f leaves the " + std::string(to_string(spec.shape)) +
                           " class near design point " + std::to_string(bad));

    const double t = static_cast<double>(t_index) / n;
    if (spec.a * d > t_index || t_index > n - spec.b * d)
        throw WindowOutOfRange("verify_sign_bias: window [t - ah, t + bh] leaves [0, 1]");

    const int j_lo = static_cast<int>(std::ceil(0.5 - spec.a * d - 1e-9));
    const int j_hi = static_cast<int>(std::floor(0.5 + spec.b * d + 1e-9));
    double weight_sum = 0.0, value_sum = 0.0;
    for (int j = j_lo; j <= j_hi; ++j) {
        const double w = kernel_value(spec, (j - 0.5) / d);
        weight_sum += w;
        value_sum += w * y[t_index + j - 1];
    }
    if (std::abs(weight_sum) < 1e-12)
        throw DegenerateBandwidth("verify_sign_bias: kernel weights sum to zero");

    const double estimate = value_sum / weight_sum;
    const double target = f(t);
    const double slack = tol * std::max(1.0, std::abs(target));
    return spec.side == KernelSide::Lower ? estimate <= target + slack
                                          : estimate >= target - slack;
}

}  // namespace shapebands
