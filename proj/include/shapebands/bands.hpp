#pragma once

// Simultaneous confidence bands on the evaluation grid T = {1/n..(n-1)/n}.
//
// raw_band() builds the kernel band: at each grid point the lower bound is
// the best (largest) penalized lower-kernel estimate over all admissible
// bandwidths, the upper bound the best penalized upper-kernel estimate.
// Grid points with no admissible bandwidth keep the sentinels -inf / +inf:
// the band is vacuous there.
//
// indicator_band() is the isotonic special case built from plain local
// averages over grid pairs; its bounds are monotone by construction and
// satisfy a deterministic shift-slack envelope that levy_D_epsilon()
// quantifies.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "shapebands/errors.hpp"
#include "shapebands/kernels.hpp"
#include "shapebands/multiscale.hpp"

namespace shapebands {

struct ConfidenceBand {
    int n = 0;
    ShapeClass shape = ShapeClass::Isotonic;
    double alpha = std::numeric_limits<double>::quiet_NaN();  // set by callers that know it
    double kappa = std::numeric_limits<double>::quiet_NaN();
    double sigma_used = std::numeric_limits<double>::quiet_NaN();
    bool postprocessed = false;
    std::vector<double> lower, upper;  // index p-1 holds the bound at t = p/n

    int grid_size() const { return n - 1; }
    double t(int idx) const { return static_cast<double>(idx + 1) / n; }
};

namespace detail {

inline void validate_kappa(double kappa) {
    // +inf is allowed (vacuous band); NaN and -inf are not.
    if (std::isnan(kappa) || kappa == -std::numeric_limits<double>::infinity())
        throw DomainError("band: kappa must be a real number or +inf");
}

}  // namespace detail

// Kernel confidence band at penalty kappa:
//   lower(t) = max_h  est_h(t) - sd_h * (scale_penalty((a+b)h) + kappa)
//   upper(t) = min_h  est_h(t) + sd_h * (scale_penalty((a+b)h) + kappa)
// with est/sd from the side's rescaled kernel.
inline ConfidenceBand raw_band(const ObservationVector& obs, ShapeClass shape, double kappa,
                               double sigma) {
    validate_observations(obs);
    detail::validate_kappa(kappa);
    if (!(sigma > 0.0)) throw DomainError("raw_band: sigma must be positive");

    const int n = obs.n();
    const GridScheme grid = GridScheme::for_shape(shape, n);
    const MomentPrefixSums ps = MomentPrefixSums::build(obs.values);
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
            if (detail::skip_bandwidth(spec, d)) continue;
            const detail::WindowPlan plan = detail::make_window_plan(spec, d);
            int lo = 0, hi = 0;
            detail::scan_range(plan, n, lo, hi);
            if (lo > hi) continue;
            const double width = static_cast<double>(plan.a_steps + plan.b_steps) * d / n;
            const double sd = sigma * std::sqrt(plan.R) / plan.S;
            const double margin = sd * (scale_penalty(width) + kappa);
            if (side == KernelSide::Lower) {
                for (int i = lo; i <= hi; ++i) {
                    const double bound = detail::eval_window(ps, plan, i) / plan.S - margin;
                    if (bound > band.lower[i - 1]) band.lower[i - 1] = bound;
                }
            } else {
                for (int i = lo; i <= hi; ++i) {
                    const double bound = detail::eval_window(ps, plan, i) / plan.S + margin;
                    if (bound < band.upper[i - 1]) band.upper[i - 1] = bound;
                }
            }
        }
    }
    return band;
}

// Isotonic band from local averages over grid pairs (s, t) = (i/n, j/n):
//   lower(x) = max_{s < t <= x}  avg(s,t] - (scale_penalty(t-s) + kappa) / sqrt(n(t-s))
//   upper(x) = min_{x <= s < t}  avg(s,t] + (scale_penalty(t-s) + kappa) / sqrt(n(t-s))
// This is the kernel band with unit indicator kernels on [-1,0] and [0,1],
// extended over all pair widths; bounds are monotone in x by construction.
// The half-width is calibrated for unit noise level.
inline ConfidenceBand indicator_band(const ObservationVector& obs, double kappa) {
    validate_observations(obs);
    detail::validate_kappa(kappa);
    const int n = obs.n();
    const double inf = std::numeric_limits<double>::infinity();

    std::vector<double> cum(n + 1, 0.0);
    for (int i = 1; i <= n; ++i) cum[i] = cum[i - 1] + obs.values[i - 1];

    std::vector<double> penalty(n + 1, 0.0);  // penalty[w] for pair width w/n
    for (int w = 1; w <= n; ++w)
        penalty[w] = (scale_penalty(static_cast<double>(w) / n) + kappa) / std::sqrt(static_cast<double>(w));

    ConfidenceBand band;
    band.n = n;
    band.shape = ShapeClass::Isotonic;
    band.kappa = kappa;
    band.sigma_used = 1.0;
    band.lower.assign(n - 1, -inf);
    band.upper.assign(n - 1, inf);

    // lower: best pair ending at j, then running max over x >= j
    double best = -inf;
    for (int j = 1; j <= n - 1; ++j) {
        for (int i = 0; i < j; ++i) {
            const double avg = (cum[j] - cum[i]) / (j - i);
            const double cand = avg - penalty[j - i];
            if (cand > best) best = cand;
        }
        band.lower[j - 1] = best;
    }
    // upper: best pair starting at s, then running min over x <= s
    best = inf;
    for (int s = n - 1; s >= 1; --s) {
        for (int j = s + 1; j <= n; ++j) {
            const double avg = (cum[j] - cum[s]) / (j - s);
            const double cand = avg + penalty[j - s];
            if (cand < best) best = cand;
        }
        band.upper[s - 1] = best;
    }
    return band;
}

// Smallest slack lambda >= 0 such that g <= h(. + eps) + lambda and
// h <= g(. + eps) + lambda hold on [0, 1 - eps], with shifts restricted to
// the grid (eps rounds up to a multiple of 1/n). Inputs are grid functions
// on T = {1/n..(n-1)/n}; both are expected to be nondecreasing.
inline double levy_D_epsilon(const std::vector<double>& g, const std::vector<double>& h, int n,
                             double epsilon) {
    if (!(epsilon > 0.0) || epsilon > 1.0)
        throw DomainError("levy_D_epsilon: epsilon must lie in (0, 1]");
    if (static_cast<int>(g.size()) != n - 1 || static_cast<int>(h.size()) != n - 1)
        throw DomainError("levy_D_epsilon: grid functions must have n - 1 values");
    const int m = std::max(1, static_cast<int>(std::ceil(epsilon * n - 1e-9)));
    double lambda = 0.0;
    for (int i = 1; i + m <= n - 1; ++i) {
        lambda = std::max(lambda, g[i - 1] - h[i + m - 1]);
        lambda = std::max(lambda, h[i - 1] - g[i + m - 1]);
    }
    return lambda;
}

// Smallest grid shift eps = m/n with D_eps(g, h) <= eps. For isotonic
// inputs D_eps is nonincreasing in eps, so binary search applies; the
// largest grid shift always qualifies (empty constraint set).
inline double levy_distance(const std::vector<double>& g, const std::vector<double>& h, int n) {
    if (static_cast<int>(g.size()) != n - 1 || static_cast<int>(h.size()) != n - 1)
        throw DomainError("levy_distance: grid functions must have n - 1 values");
    int lo = 1, hi = n - 1;
    while (lo < hi) {
        const int mid = lo + (hi - lo) / 2;
        const double eps = static_cast<double>(mid) / n;
        if (levy_D_epsilon(g, h, n, eps) <= eps)
            hi = mid;
        else
            lo = mid + 1;
    }
    return static_cast<double>(lo) / n;
}

struct LevyDiagnostic {
    double epsilon;
    double D;
    double dL;
};

inline LevyDiagnostic levy_diagnostic(const std::vector<double>& g, const std::vector<double>& h,
                                      int n, double epsilon) {
    return {epsilon, levy_D_epsilon(g, h, n, epsilon), levy_distance(g, h, n)};
}

// Width-rate diagnostics: rho_n = (log(en)/n)^(k/(2k+1)) and the side
// constants scaled by L^(1/(2k+1)). Purely informational.
struct AdaptivityEnvelope {
    double rho;
    double delta_lower;
    double delta_upper;
};

inline AdaptivityEnvelope adaptivity_envelope(ShapeClass shape, int n, double local_l) {
    if (n < 1) throw DomainError("adaptivity_envelope: need n >= 1");
    if (!(local_l > 0.0)) throw DomainError("adaptivity_envelope: L must be positive");
    const int k = smoothness_order(shape);
    const double exponent = static_cast<double>(k) / (2 * k + 1);
    const double rho = std::pow((1.0 + std::log(static_cast<double>(n))) / n, exponent);
    const double scale = std::pow(local_l, 1.0 / (2 * k + 1));
    return {rho, delta_constant(shape, KernelSide::Lower) * scale,
            delta_constant(shape, KernelSide::Upper) * scale};
}

}  // namespace shapebands
