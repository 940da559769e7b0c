#pragma once

// Shared helpers for the unit and acceptance suites: tolerant comparisons,
// random in-class curve generators, and independent brute-force oracles.
// Every oracle uses literal summation and brute_force_sums only, never the
// prefix-sum evaluation path it is meant to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "shapebands/bands.hpp"
#include "shapebands/kernels.hpp"
#include "shapebands/multiscale.hpp"
#include "shapebands/rng.hpp"

namespace testutil {

using namespace shapebands;

inline bool close_rel(double a, double b, double tol) {
    if (a == b) return true;  // covers matching infinities
    if (std::isinf(a) || std::isinf(b)) return false;
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

inline double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v)
        if (std::isfinite(x)) m = std::max(m, std::abs(x));
    return m;
}

// --- random in-class curves -------------------------------------------------

inline std::vector<double> random_isotonic_grid(std::uint64_t seed, int n, double step = 0.4) {
    std::uint64_t s = seed;
    std::vector<double> y(n);
    double level = static_cast<double>(splitmix64(s) % 1000) / 250.0 - 2.0;
    for (int i = 0; i < n; ++i) {
        level += step * (splitmix64(s) % 1024) / 1024.0;
        y[i] = level;
    }
    return y;
}

inline std::vector<double> random_convex_grid(std::uint64_t seed, int n, double step = 0.1) {
    std::uint64_t s = seed;
    std::vector<double> y(n);
    double slope = -step * static_cast<double>(splitmix64(s) % 64);
    double level = static_cast<double>(splitmix64(s) % 1000) / 250.0 - 2.0;
    for (int i = 0; i < n; ++i) {
        slope += step * (splitmix64(s) % 1024) / 1024.0;
        level += slope;
        y[i] = level;
    }
    return y;
}

// Piecewise-linear function through the grid values, constant outside the
// design range; stays in class on [x_1, x_n].
inline std::function<double(double)> grid_function(std::vector<double> y) {
    const int n = static_cast<int>(y.size());
    return [y = std::move(y), n](double x) {
        const double pos = x * n + 0.5;
        if (pos <= 1.0) return y.front();
        if (pos >= n) return y.back();
        const int i = static_cast<int>(pos);
        const double frac = pos - i;
        return y[i - 1] + frac * (y[i] - y[i - 1]);
    };
}

inline std::vector<double> gaussian_vector(std::uint64_t seed, int n) {
    NormalSampler rng(seed);
    std::vector<double> v(n);
    for (double& x : v) x = rng.next();
    return v;
}

// --- literal oracles ---------------------------------------------------------

inline double literal_window_sum(const std::vector<double>& y, const KernelSpec& spec, int d,
                                 int t_index) {
    const int n = static_cast<int>(y.size());
    double acc = 0.0;
    for (int i = 1; i <= n; ++i)
        acc += kernel_value(spec, (i - t_index - 0.5) / d) * y[i - 1];
    return acc;
}

inline bool oracle_admissible(const KernelSpec& spec, int n, int d, int i) {
    const int a = static_cast<int>(std::lround(spec.a));
    const int b = static_cast<int>(std::lround(spec.b));
    return i >= std::max(1, a * d) && i <= std::min(n - 1, n - b * d);
}

// Exhaustive double loop with literal sums; R comes from brute_force_sums.
inline double oracle_multiscale(const std::vector<double>& y, double sigma,
                                const KernelSpec& spec, int sign, const GridScheme& grid) {
    const int n = grid.n;
    double best = -std::numeric_limits<double>::infinity();
    for (int d = 1; d <= grid.max_steps; ++d) {
        if (spec.shape == ShapeClass::Convex && spec.side == KernelSide::Lower && d == 1)
            continue;
        const DiscreteKernelSums sums = brute_force_sums(spec, d);
        const double width = (spec.a + spec.b) * d / n;
        for (int i = 1; i <= n - 1; ++i) {
            if (!oracle_admissible(spec, n, d, i)) continue;
            const double w = literal_window_sum(y, spec, d, i);
            const double value = sign * w / (sigma * std::sqrt(sums.R)) - scale_penalty(width);
            best = std::max(best, value);
        }
    }
    return best;
}

inline double oracle_combined(const std::vector<double>& y, double sigma, ShapeClass shape,
                              const GridScheme& grid) {
    return std::max(
        oracle_multiscale(y, sigma, rescaled_kernel(shape, KernelSide::Lower), +1, grid),
        oracle_multiscale(y, sigma, rescaled_kernel(shape, KernelSide::Upper), -1, grid));
}

inline ConfidenceBand oracle_raw_band(const std::vector<double>& y, ShapeClass shape,
                                      double kappa, double sigma) {
    const int n = static_cast<int>(y.size());
    const GridScheme grid = GridScheme::for_shape(shape, n);
    const double inf = std::numeric_limits<double>::infinity();
    ConfidenceBand band;
    band.n = n;
    band.shape = shape;
    band.kappa = kappa;
    band.sigma_used = sigma;
    band.lower.assign(n - 1, -inf);
    band.upper.assign(n - 1, inf);
    for (KernelSide side : {KernelSide::Lower, KernelSide::Upper}) {
        const KernelSpec spec = rescaled_kernel(shape, side);
        for (int d = 1; d <= grid.max_steps; ++d) {
            if (spec.shape == ShapeClass::Convex && side == KernelSide::Lower && d == 1)
                continue;
            const DiscreteKernelSums sums = brute_force_sums(spec, d);
            const double width = (spec.a + spec.b) * d / n;
            const double margin = sigma * std::sqrt(sums.R) / sums.S * (scale_penalty(width) + kappa);
            for (int i = 1; i <= n - 1; ++i) {
                if (!oracle_admissible(spec, n, d, i)) continue;
                const double est = literal_window_sum(y, spec, d, i) / sums.S;
                if (side == KernelSide::Lower)
                    band.lower[i - 1] = std::max(band.lower[i - 1], est - margin);
                else
                    band.upper[i - 1] = std::min(band.upper[i - 1], est + margin);
            }
        }
    }
    return band;
}

// Literal pair-loop construction of the local-average band. O(n^3).
inline ConfidenceBand oracle_indicator_band(const std::vector<double>& y, double kappa) {
    const int n = static_cast<int>(y.size());
    const double inf = std::numeric_limits<double>::infinity();
    ConfidenceBand band;
    band.n = n;
    band.shape = ShapeClass::Isotonic;
    band.kappa = kappa;
    band.sigma_used = 1.0;
    band.lower.assign(n - 1, -inf);
    band.upper.assign(n - 1, inf);
    auto avg = [&](int i, int j) {  // mean of Y over indices i+1..j
        double s = 0.0;
        for (int k = i + 1; k <= j; ++k) s += y[k - 1];
        return s / (j - i);
    };
    auto pen = [&](int w) {
        return (scale_penalty(static_cast<double>(w) / n) + kappa) / std::sqrt(double(w));
    };
    for (int p = 1; p <= n - 1; ++p) {
        for (int j = 1; j <= p; ++j)
            for (int i = 0; i < j; ++i)
                band.lower[p - 1] = std::max(band.lower[p - 1], avg(i, j) - pen(j - i));
        for (int s = p; s <= n - 1; ++s)
            for (int t = s + 1; t <= n; ++t)
                band.upper[p - 1] = std::min(band.upper[p - 1], avg(s, t) + pen(t - s));
    }
    return band;
}

// Greatest convex minorant by chord minimization: GCM(i) = min over p <= i <= q
// of the chord through (p, v_p), (q, v_q) evaluated at i. O(n^3).
inline std::vector<double> oracle_gcm(const std::vector<double>& v) {
    const int m = static_cast<int>(v.size());
    std::vector<double> out(m);
    for (int i = 0; i < m; ++i) {
        double best = v[i];
        for (int p = 0; p <= i; ++p) {
            if (!std::isfinite(v[p])) continue;
            for (int q = i; q < m; ++q) {
                if (!std::isfinite(v[q]) || p == q) continue;
                const double chord = v[p] + (v[q] - v[p]) * static_cast<double>(i - p) / (q - p);
                best = std::min(best, chord);
            }
        }
        out[i] = best;
    }
    return out;
}

// Smallest slack by direct scan over a lambda grid (bisection-free).
inline double oracle_levy_D(const std::vector<double>& g, const std::vector<double>& h, int n,
                            double epsilon, double lambda_step = 1e-4) {
    const int m = static_cast<int>(std::ceil(epsilon * n - 1e-9));
    double needed = 0.0;
    for (int i = 1; i + m <= n - 1; ++i) {
        needed = std::max(needed, g[i - 1] - h[i + m - 1]);
        needed = std::max(needed, h[i - 1] - g[i + m - 1]);
    }
    // round upward onto the lambda grid to emulate a scan
    return std::ceil(std::max(0.0, needed) / lambda_step) * lambda_step;
}

inline double oracle_levy_distance(const std::vector<double>& g, const std::vector<double>& h,
                                   int n) {
    for (int m = 1; m <= n - 1; ++m) {
        const double eps = static_cast<double>(m) / n;
        if (levy_D_epsilon(g, h, n, eps) <= eps) return eps;
    }
    return 1.0;
}

}  // namespace testutil
