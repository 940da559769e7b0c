#pragma once

// Building blocks shared by the command-line tool and the experiment
// harness: noise-level estimation, named test curves, coverage experiments
// and the kernel self-check report.

#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "shapebands/bands.hpp"
#include "shapebands/critical.hpp"
#include "shapebands/errors.hpp"
#include "shapebands/kernels.hpp"
#include "shapebands/multiscale.hpp"
#include "shapebands/parallel.hpp"
#include "shapebands/rng.hpp"

namespace shapebands {

// First-difference (Rice) estimator:
//   sigma^2 ~ sum (Y_{i+1} - Y_i)^2 / (2 (n - 1)).
// Returns 0 for constant data; band construction then needs an explicit
// sigma. A smooth trend inflates the estimate only at order 1/n.
inline double estimate_sigma(const ObservationVector& obs) {
    const int n = obs.n();
    if (n < 2) throw DomainError("estimate_sigma: need at least 2 observations");
    double ss = 0.0;
    for (int i = 0; i + 1 < n; ++i) {
        const double d = obs.values[i + 1] - obs.values[i];
        ss += d * d;
    }
    return std::sqrt(ss / (2.0 * (n - 1)));
}

struct NamedFunction {
    std::string name;
    std::function<double(double)> fn;
    bool in_isotonic;
    bool in_convex;
};

// Test curves for coverage experiments. ramp and vee are the piecewise
// flavors: flat-then-linear and V-shaped.
inline const std::vector<NamedFunction>& named_test_functions() {
    static const std::vector<NamedFunction> fns = {
        {"constant", [](double) { return 0.0; }, true, true},
        {"linear", [](double x) { return x; }, true, true},
        {"quadratic", [](double x) { return (x - 0.5) * (x - 0.5); }, false, true},
        {"ramp", [](double x) { return std::max(0.0, 2.0 * (x - 1.0 / 3.0)); }, true, true},
        {"vee", [](double x) { return std::abs(x - 0.5); }, false, true},
    };
    return fns;
}

inline const NamedFunction* find_test_function(const std::string& name) {
    for (const NamedFunction& f : named_test_functions())
        if (f.name == name) return &f;
    return nullptr;
}

struct CoverageResult {
    int reps = 0;
    int hits = 0;
    double empirical_coverage = 0.0;
    double binomial_se = 0.0;
};

// Simulates Y_i = f(x_i) + sigma * eps_i and counts replicates whose raw
// band contains f at every grid point. Postprocessing never changes the
// count for in-class f: it tightens the band onto the same envelope.
inline CoverageResult run_coverage(ShapeClass shape, const std::function<double(double)>& f,
                                   int n, double sigma, double kappa, int reps,
                                   std::uint64_t seed, int threads = 0) {
    if (reps < 1) throw DomainError("run_coverage: need reps >= 1");
    if (!(sigma > 0.0)) throw DomainError("run_coverage: sigma must be positive");
    std::vector<double> signal(n), f_grid(n - 1);
    for (int i = 1; i <= n; ++i) signal[i - 1] = f(design_point(n, i));
    for (int p = 1; p <= n - 1; ++p) f_grid[p - 1] = f(static_cast<double>(p) / n);

    std::vector<std::uint8_t> hit(reps, 0);
    parallel_for(reps, threads, [&](int r) {
        NormalSampler rng(derive_replicate_seed(seed, static_cast<std::uint64_t>(r)));
        ObservationVector obs;
        obs.values.resize(n);
        for (int i = 0; i < n; ++i) obs.values[i] = signal[i] + sigma * rng.next();
        obs.sigma = sigma;
        const ConfidenceBand band = raw_band(obs, shape, kappa, sigma);
        bool ok = true;
        for (int p = 0; p < n - 1 && ok; ++p)
            ok = band.lower[p] <= f_grid[p] && f_grid[p] <= band.upper[p];
        hit[r] = ok ? 1 : 0;
    });
    CoverageResult out;
    out.reps = reps;
    out.hits = std::accumulate(hit.begin(), hit.end(), 0);
    out.empirical_coverage = static_cast<double>(out.hits) / reps;
    out.binomial_se =
        std::sqrt(out.empirical_coverage * (1.0 - out.empirical_coverage) / reps);
    return out;
}

struct CheckResult {
    std::string name;
    bool pass;
    std::string detail;
};

namespace detail {

// Random nondecreasing grid function: cumulative sums of nonnegative steps.
inline std::vector<double> random_isotonic_values(NormalSampler& rng, int n) {
    std::vector<double> y(n);
    double level = 2.0 * rng.next();
    for (int i = 0; i < n; ++i) {
        level += std::abs(rng.next()) * 0.3;
        y[i] = level;
    }
    return y;
}

// Random convex grid function: cumulative sums of a nondecreasing slope.
inline std::vector<double> random_convex_values(NormalSampler& rng, int n) {
    std::vector<double> y(n);
    double level = 2.0 * rng.next();
    double slope = -std::abs(rng.next()) * 2.0;
    for (int i = 0; i < n; ++i) {
        slope += std::abs(rng.next()) * 0.2;
        level += slope;
        y[i] = level;
    }
    return y;
}

// Piecewise-linear interpolation of grid values, constant outside; keeps
// the shape class of the sampled sequence.
inline std::function<double(double)> interpolate_grid(std::vector<double> y, int n) {
    return [y = std::move(y), n](double x) {
        const double pos = x * n + 0.5;  // design index of x
        if (pos <= 1.0) return y.front();
        if (pos >= n) return y.back();
        const int i = static_cast<int>(pos);
        const double frac = pos - i;
        return y[i - 1] + frac * (y[i] - y[i - 1]);
    };
}

}  // namespace detail

// Self-check of the kernel module: moment constants, width-rate constants,
// closed-form weight sums against literal summation, odd-moment
// cancellation for the even kernels, and the deterministic bias sign on
// random in-class curves.
inline std::vector<CheckResult> kernel_verification_report(int sweep_max_d = 200,
                                                           int bias_samples = 1000,
                                                           std::uint64_t seed = 20130207) {
    std::vector<CheckResult> checks;

    {
        struct Expected {
            ShapeClass shape;
            KernelSide side;
            double integral, sq_norm;
        };
        const double s2 = std::sqrt(2.0);
        const Expected expected[] = {
            {ShapeClass::Isotonic, KernelSide::Lower, 0.5, 1.0 / 3.0},
            {ShapeClass::Isotonic, KernelSide::Upper, 0.5, 1.0 / 3.0},
            {ShapeClass::Convex, KernelSide::Lower, 2.0 / 3.0, 8.0 / 15.0},
            {ShapeClass::Convex, KernelSide::Upper, 4.0 * s2 / 3.0, 16.0 * s2 / 15.0},
        };
        double worst = 0.0;
        for (const Expected& e : expected) {
            const KernelMoments m = continuous_moments(canonical_kernel(e.shape, e.side));
            worst = std::max(worst, std::abs(m.integral - e.integral));
            worst = std::max(worst, std::abs(m.sq_norm - e.sq_norm));
        }
        checks.push_back({"moment constants", worst <= 1e-9,
                          "max deviation " + format_significant(worst, 3)});
    }

    {
        const double expected[] = {std::pow(2.0, 1.0 / 3.0), std::pow(2.0, 1.0 / 3.0),
                                   std::pow(0.75, 0.4),
                                   std::pow(3.0, 0.4) / std::pow(128.0, 0.2)};
        const KernelSide sides[] = {KernelSide::Lower, KernelSide::Upper, KernelSide::Lower,
                                    KernelSide::Upper};
        const ShapeClass shapes[] = {ShapeClass::Isotonic, ShapeClass::Isotonic,
                                     ShapeClass::Convex, ShapeClass::Convex};
        double worst = 0.0;
        for (int i = 0; i < 4; ++i)
            worst = std::max(worst, std::abs(delta_constant(shapes[i], sides[i]) - expected[i]));
        checks.push_back({"width-rate constants", worst <= 1e-9,
                          "max deviation " + format_significant(worst, 3)});
    }

    {
        double worst = 0.0;
        for (ShapeClass shape : {ShapeClass::Isotonic, ShapeClass::Convex}) {
            for (KernelSide side : {KernelSide::Lower, KernelSide::Upper}) {
                const KernelSpec spec = rescaled_kernel(shape, side);
                const bool degenerate_first =
                    shape == ShapeClass::Convex && side == KernelSide::Lower;
                for (int d = degenerate_first ? 2 : 1; d <= sweep_max_d; ++d) {
                    const DiscreteKernelSums closed = discrete_sums(spec, d);
                    const DiscreteKernelSums brute = brute_force_sums(spec, d);
                    worst = std::max(worst, std::abs(closed.S - brute.S) /
                                                std::max(1.0, std::abs(brute.S)));
                    worst = std::max(worst, std::abs(closed.R - brute.R) /
                                                std::max(1.0, std::abs(brute.R)));
                }
            }
        }
        checks.push_back({"closed-form weight sums", worst <= 1e-12,
                          "max relative deviation " + format_significant(worst, 3)});
    }

    {
        double worst = 0.0;
        for (KernelSide side : {KernelSide::Lower, KernelSide::Upper}) {
            const KernelSpec spec = rescaled_kernel(ShapeClass::Convex, side);
            for (int d = 1; d <= sweep_max_d; ++d) {
                double moment = 0.0;
                for (int j = 1 - d; j <= d; ++j) {
                    const double x = (j - 0.5) / d;
                    moment += x * kernel_value(spec, x);
                }
                worst = std::max(worst, std::abs(moment));
            }
        }
        checks.push_back({"odd-moment cancellation", worst <= 1e-12,
                          "max |moment| " + format_significant(worst, 3)});
    }

    {
        NormalSampler rng(seed);
        std::uint64_t pick_state = seed ^ 0x5bf03635aca1fd7bULL;
        auto pick = [&pick_state](int lo, int hi) {  // uniform integer in [lo, hi]
            return lo + static_cast<int>(splitmix64(pick_state) %
                                         static_cast<std::uint64_t>(hi - lo + 1));
        };
        int violations = 0;
        for (int s = 0; s < bias_samples; ++s) {
            const ShapeClass shape = (s % 2 == 0) ? ShapeClass::Isotonic : ShapeClass::Convex;
            const int n = pick(20, 200);
            const auto values = shape == ShapeClass::Isotonic
                                    ? detail::random_isotonic_values(rng, n)
                                    : detail::random_convex_values(rng, n);
            const auto f = detail::interpolate_grid(values, n);
            for (KernelSide side : {KernelSide::Lower, KernelSide::Upper}) {
                const KernelSpec spec = rescaled_kernel(shape, side);
                const GridScheme grid = GridScheme::for_shape(shape, n);
                const int d_min =
                    (shape == ShapeClass::Convex && side == KernelSide::Lower) ? 2 : 1;
                const int d = pick(d_min, grid.max_steps);
                const int lo = std::max(1, static_cast<int>(std::lround(spec.a)) * d);
                const int hi = std::min(n - 1, n - static_cast<int>(std::lround(spec.b)) * d);
                if (lo > hi) continue;
                const int t = pick(lo, hi);
                if (!verify_sign_bias(spec, f, n, d, t)) ++violations;
            }
        }
        checks.push_back({"bias sign on random curves", violations == 0,
                          std::to_string(violations) + " violations in " +
                              std::to_string(2 * bias_samples) + " windows"});
    }

    return checks;
}

}  // namespace shapebands
