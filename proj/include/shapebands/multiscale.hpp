#pragma once

// Windowed kernel statistics on the observation grid.
//
// Observations live at the design points x_i = (i - 1/2)/n. A window sum
// psi.Y(h, t) with bandwidth h = d/n and location t = i/n expands every
// kernel piece (degree <= 2) into the moment prefix sums of Y_i, i*Y_i and
// i^2*Y_i, so each window costs O(1) and a full multiscale scan costs
// O(n |H|). The multiscale statistic is the penalized maximum of the
// standardized window sums over all bandwidths and admissible locations.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "shapebands/errors.hpp"
#include "shapebands/kernels.hpp"

namespace shapebands {

struct ObservationVector {
    std::vector<double> values;    // Y_1..Y_n at x_i = (i - 1/2)/n
    std::optional<double> sigma;   // noise level, when known

    int n() const { return static_cast<int>(values.size()); }
};

inline double design_point(int n, int i) { return (i - 0.5) / n; }

inline void validate_observations(const ObservationVector& obs) {
    if (obs.n() < 2) throw DomainError("observations: need at least 2 values");
    for (double v : obs.values)
        if (!std::isfinite(v)) throw DomainError("observations: non-finite value");
    if (obs.sigma && !(*obs.sigma > 0.0))
        throw DomainError("observations: sigma must be positive");
}

// Running sums of i^k * Y_i for k = 0, 1, 2, with compensated accumulation
// (the i^2 terms shed digits at large n otherwise).
struct MomentPrefixSums {
    int n = 0;
    std::vector<double> cum0, cum1, cum2;  // length n + 1, index 0 holds 0

    static MomentPrefixSums build(const std::vector<double>& y) {
        MomentPrefixSums ps;
        ps.n = static_cast<int>(y.size());
        ps.cum0.resize(ps.n + 1, 0.0);
        ps.cum1.resize(ps.n + 1, 0.0);
        ps.cum2.resize(ps.n + 1, 0.0);
        double s0 = 0.0, c0 = 0.0, s1 = 0.0, c1 = 0.0, s2 = 0.0, c2 = 0.0;
        auto add = [](double& sum, double& comp, double term) {
            const double t = term - comp;
            const double next = sum + t;
            comp = (next - sum) - t;
            sum = next;
        };
        for (int i = 1; i <= ps.n; ++i) {
            const double v = y[i - 1];
            add(s0, c0, v);
            add(s1, c1, i * v);
            add(s2, c2, static_cast<double>(i) * i * v);
            ps.cum0[i] = s0;
            ps.cum1[i] = s1;
            ps.cum2[i] = s2;
        }
        return ps;
    }
};

// Scale penalty sqrt(2 log(e/u)), strictly decreasing on (0, 1].
inline double scale_penalty(double u) {
    if (!(u > 0.0) || u > 1.0) throw DomainError("scale_penalty: u must lie in (0, 1]");
    return std::sqrt(2.0 * (1.0 - std::log(u)));
}

// Bandwidth set H = {1/n, ..., max_steps/n} and evaluation grid
// T = {1/n, ..., (n-1)/n}. Isotonic scans use every bandwidth up to 1;
// convex scans stop at floor(n/2)/n so windows of width 2h fit in [0, 1].
struct GridScheme {
    int n = 0;
    ShapeClass shape = ShapeClass::Isotonic;
    int max_steps = 0;

    static GridScheme for_shape(ShapeClass shape, int n) {
        if (n < 2) throw DomainError("grid scheme: need n >= 2");
        return {n, shape, shape == ShapeClass::Isotonic ? n : n / 2};
    }
};

namespace detail {

struct PiecePlan {
    int j_lo = 0, j_hi = 0;
    double c0 = 0.0, q1 = 0.0, q2 = 0.0;  // q1 = c1/d, q2 = c2/d^2
    bool quad = false;
};

struct WindowPlan {
    int d = 0;
    int a_steps = 0, b_steps = 0;
    double S = 0.0, R = 0.0;
    int n_pieces = 0;
    std::array<PiecePlan, 2> piece{};
};

// Fixed-bandwidth evaluation plan. Offsets (j - 1/2)/d never hit a piece
// boundary, so each piece owns the integer offsets j in [lo*d + 1, hi*d].
inline WindowPlan make_window_plan(const KernelSpec& spec, int d) {
    if (!spec.rescaled) throw DomainError("window plan requires a rescaled kernel");
    const DiscreteKernelSums sums = discrete_sums(spec, d);
    WindowPlan plan;
    plan.d = d;
    plan.a_steps = static_cast<int>(std::lround(spec.a));
    plan.b_steps = static_cast<int>(std::lround(spec.b));
    plan.S = sums.S;
    plan.R = sums.R;
    for (const KernelPiece& pc : spec.pieces) {
        PiecePlan pp;
        pp.j_lo = static_cast<int>(std::lround(pc.lo * d)) + 1;
        pp.j_hi = static_cast<int>(std::lround(pc.hi * d));
        if (pp.j_lo > pp.j_hi) continue;
        pp.c0 = pc.c0;
        pp.q1 = pc.c1 / d;
        pp.q2 = pc.c2 / (static_cast<double>(d) * d);
        pp.quad = pc.c2 != 0.0;
        plan.piece[plan.n_pieces++] = pp;
    }
    return plan;
}

// psi.Y(d/n, t_index/n) via prefix-sum differences. With m = t_index + 1/2,
// psi((i - m)/d) = (c0 - q1 m + q2 m^2) + (q1 - 2 q2 m) i + q2 i^2.
inline double eval_window(const MomentPrefixSums& ps, const WindowPlan& plan, int t_index) {
    const double m = t_index + 0.5;
    double acc = 0.0;
    for (int p = 0; p < plan.n_pieces; ++p) {
        const PiecePlan& pc = plan.piece[p];
        const int lo = t_index + pc.j_lo;
        const int hi = t_index + pc.j_hi;
        const double s0 = ps.cum0[hi] - ps.cum0[lo - 1];
        const double s1 = ps.cum1[hi] - ps.cum1[lo - 1];
        if (pc.quad) {
            const double s2 = ps.cum2[hi] - ps.cum2[lo - 1];
            acc += (pc.c0 - pc.q1 * m + pc.q2 * m * m) * s0 +
                   (pc.q1 - 2.0 * pc.q2 * m) * s1 + pc.q2 * s2;
        } else {
            acc += (pc.c0 - pc.q1 * m) * s0 + pc.q1 * s1;
        }
    }
    return acc;
}

// Locations of T = {1/n, .., (n-1)/n} whose window fits inside [0, 1].
inline void scan_range(const WindowPlan& plan, int n, int& lo, int& hi) {
    lo = std::max(1, plan.a_steps * plan.d);
    hi = std::min(n - 1, n - plan.b_steps * plan.d);
}

inline bool skip_bandwidth(const KernelSpec& spec, int d) {
    return spec.shape == ShapeClass::Convex && spec.side == KernelSide::Lower && d == 1;
}

}  // namespace detail

// Exact window sum sum_j psi((j-1/2)/d) Y_{t_index + j}. The location must
// satisfy a*d <= t_index <= n - b*d so all touched indices lie in 1..n.
inline double window_sum(const MomentPrefixSums& ps, const KernelSpec& spec, int d, int t_index) {
    const detail::WindowPlan plan = detail::make_window_plan(spec, d);
    if (t_index < plan.a_steps * d || t_index > ps.n - plan.b_steps * d)
        throw WindowOutOfRange("window_sum: window leaves the observation interval");
    return detail::eval_window(ps, plan, t_index);
}

struct KernelEstimate {
    double value;  // window sum / S_d
    double sd;     // sigma * sqrt(R_d) / S_d
};

inline KernelEstimate kernel_estimate(const MomentPrefixSums& ps, const KernelSpec& spec, int d,
                                      int t_index, double sigma) {
    if (!(sigma > 0.0)) throw DomainError("kernel_estimate: sigma must be positive");
    const detail::WindowPlan plan = detail::make_window_plan(spec, d);
    if (t_index < plan.a_steps * d || t_index > ps.n - plan.b_steps * d)
        throw WindowOutOfRange("kernel_estimate: window leaves the observation interval");
    const double ws = detail::eval_window(ps, plan, t_index);
    return {ws / plan.S, sigma * std::sqrt(plan.R) / plan.S};
}

struct MultiscaleResult {
    double value = -std::numeric_limits<double>::infinity();
    int argmax_steps = 0;       // bandwidth d with h = d/n
    int argmax_index = 0;       // location i with t = i/n
    std::int64_t term_count = 0;
};

namespace detail {

inline MultiscaleResult multiscale_scan(const MomentPrefixSums& ps, double sigma,
                                        const KernelSpec& spec, int sign,
                                        const GridScheme& grid) {
    MultiscaleResult result;
    const int n = grid.n;
    for (int d = 1; d <= grid.max_steps; ++d) {
        if (skip_bandwidth(spec, d)) continue;
        const WindowPlan plan = make_window_plan(spec, d);
        int lo = 0, hi = 0;
        scan_range(plan, n, lo, hi);
        if (lo > hi) continue;

        double extreme = eval_window(ps, plan, lo);
        int extreme_i = lo;
        if (sign > 0) {
            for (int i = lo + 1; i <= hi; ++i) {
                const double w = eval_window(ps, plan, i);
                if (w > extreme) { extreme = w; extreme_i = i; }
            }
        } else {
            for (int i = lo + 1; i <= hi; ++i) {
                const double w = eval_window(ps, plan, i);
                if (w < extreme) { extreme = w; extreme_i = i; }
            }
        }
        result.term_count += hi - lo + 1;

        const double width = static_cast<double>(plan.a_steps + plan.b_steps) * d / n;
        const double value = sign * extreme / (sigma * std::sqrt(plan.R)) - scale_penalty(width);
        if (value > result.value) {
            result.value = value;
            result.argmax_steps = d;
            result.argmax_index = extreme_i;
        }
    }
    if (result.term_count == 0)
        throw NoAdmissiblePairs("multiscale scan: no admissible (bandwidth, location) pair");
    return result;
}

}  // namespace detail

// Penalized maximum of sign-standardized window sums:
//   max_{h, t} ( sign * psi.Y(h,t) / (sigma sqrt(R_nh)) - scale_penalty((a+b) h) ).
// Ties resolve to the smallest bandwidth, then the smallest location.
inline MultiscaleResult multiscale_statistic(const ObservationVector& residuals,
                                             const KernelSpec& spec, int sign,
                                             const GridScheme& grid) {
    validate_observations(residuals);
    if (!residuals.sigma)
        throw DomainError("multiscale_statistic: residuals must carry sigma");
    if (sign != 1 && sign != -1) throw DomainError("multiscale_statistic: sign must be +-1");
    if (grid.n != residuals.n())
        throw DomainError("multiscale_statistic: grid size differs from data size");
    if (spec.shape != grid.shape)
        throw ShapeMismatch("multiscale_statistic: kernel and grid shape classes differ");
    const MomentPrefixSums ps = MomentPrefixSums::build(residuals.values);
    return detail::multiscale_scan(ps, *residuals.sigma, spec, sign, grid);
}

// Combined two-sided statistic: max of the lower-kernel scan with sign +1
// and the upper-kernel scan with sign -1.
inline double combined_statistic(const ObservationVector& residuals, const GridScheme& grid) {
    validate_observations(residuals);
    if (!residuals.sigma)
        throw DomainError("combined_statistic: residuals must carry sigma");
    if (grid.n != residuals.n())
        throw DomainError("combined_statistic: grid size differs from data size");
    const MomentPrefixSums ps = MomentPrefixSums::build(residuals.values);
    const double sigma = *residuals.sigma;
    const KernelSpec lower = rescaled_kernel(grid.shape, KernelSide::Lower);
    const KernelSpec upper = rescaled_kernel(grid.shape, KernelSide::Upper);
    return std::max(detail::multiscale_scan(ps, sigma, lower, +1, grid).value,
                    detail::multiscale_scan(ps, sigma, upper, -1, grid).value);
}

}  // namespace shapebands
