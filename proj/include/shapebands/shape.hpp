#pragma once

// Shape-aware postprocessing: replaces a raw band by the envelope of all
// shape-class functions it contains.
//
// Isotonic: running maximum of the lower bound, running minimum (from the
// right) of the upper bound.
//
// Convex: the upper bound becomes its greatest convex minorant (lower convex
// hull on the grid); the lower bound is refined by extending every chord
// that joins an upper-hull point to a lower-bound point. The refined lower
// bound need not be convex.
//
// Infeasible bands (no shape-class function fits between the bounds) pass
// through unchanged; infeasibility is a reportable outcome, not an error.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "shapebands/bands.hpp"
#include "shapebands/errors.hpp"

namespace shapebands {

struct FeasibilityReport {
    bool feasible = true;
    std::optional<int> violation_index;  // grid array index of the first conflict
};

namespace detail {

inline std::vector<double> running_max(std::vector<double> v) {
    for (std::size_t i = 1; i < v.size(); ++i) v[i] = std::max(v[i], v[i - 1]);
    return v;
}

inline std::vector<double> running_min_from_right(std::vector<double> v) {
    for (std::size_t i = v.size(); i-- > 1;) v[i - 1] = std::min(v[i - 1], v[i]);
    return v;
}

// Indices of the lower convex hull vertices of (i, v[i]) over finite values,
// left to right. Strict turns only; collinear interior points are dropped.
inline std::vector<int> lower_hull_vertices(const std::vector<double>& v) {
    std::vector<int> hull;
    for (int i = 0; i < static_cast<int>(v.size()); ++i) {
        if (!std::isfinite(v[i])) continue;
        while (hull.size() >= 2) {
            const int p = hull[hull.size() - 2];
            const int q = hull[hull.size() - 1];
            // pop q unless it lies strictly below the chord p -> i
            const double cross = static_cast<double>(q - p) * (v[i] - v[p]) -
                                 (v[q] - v[p]) * static_cast<double>(i - p);
            if (cross > 0.0) break;
            hull.pop_back();
        }
        hull.push_back(i);
    }
    return hull;
}

}  // namespace detail

// Greatest convex minorant of a grid function: the lower convex hull of the
// points (i, v[i]). +inf entries impose no constraint and are replaced by
// the hull value (end segments extend linearly). With fewer than two finite
// points there is nothing to tighten and the input is returned unchanged.
inline std::vector<double> gcm(const std::vector<double>& values) {
    const std::vector<int> hull = detail::lower_hull_vertices(values);
    if (hull.size() < 2) return values;
    std::vector<double> out(values.size());
    std::size_t seg = 0;
    for (int i = 0; i < static_cast<int>(values.size()); ++i) {
        while (seg + 2 < hull.size() && hull[seg + 1] <= i) ++seg;
        const int p = hull[seg];
        const int q = hull[seg + 1];
        out[i] = values[p] + (values[q] - values[p]) * static_cast<double>(i - p) / (q - p);
    }
    return out;
}

// Set by shape: new lower = running max, new upper = running min from the
// right. Infeasible inputs simply produce crossing bounds.
inline ConfidenceBand postprocess_isotonic(const ConfidenceBand& band) {
    if (band.shape != ShapeClass::Isotonic)
        throw ShapeMismatch("postprocess_isotonic: band is not isotonic");
    ConfidenceBand out = band;
    out.lower = detail::running_max(band.lower);
    out.upper = detail::running_min_from_right(band.upper);
    out.postprocessed = true;
    return out;
}

namespace detail {

// Best chord value at x. Case (i) joins an upper point (s, upper[s]) to a
// lower point (t, lower[t]) with s < t <= x and extends the line to x; case
// (ii) mirrors it for x <= s < t. The upper endpoint runs over `upper_cands`
// (sorted); adjacent pairs (t-1, t) and (s, s+1) are always scanned, which
// covers the clipped-stretch optimum when the band crosses itself.
inline double refine_at(const std::vector<double>& lower, const std::vector<double>& upper,
                        const std::vector<int>& upper_cands, int x) {
    const int m = static_cast<int>(lower.size());
    double best = lower[x];
    auto chord_right = [&](int s, int t) {  // case (i), s < t <= x
        if (!std::isfinite(upper[s]) || !std::isfinite(lower[t])) return;
        const double val =
            upper[s] + (lower[t] - upper[s]) * static_cast<double>(x - s) / (t - s);
        if (val > best) best = val;
    };
    auto chord_left = [&](int s, int t) {  // case (ii), x <= s < t
        if (!std::isfinite(upper[t]) || !std::isfinite(lower[s])) return;
        const double val =
            upper[t] - (upper[t] - lower[s]) * static_cast<double>(t - x) / (t - s);
        if (val > best) best = val;
    };
    for (int s : upper_cands) {
        if (s >= x) break;
        for (int t = s + 1; t <= x; ++t) chord_right(s, t);
    }
    for (int t = 1; t <= x; ++t) chord_right(t - 1, t);
    for (auto it = upper_cands.rbegin(); it != upper_cands.rend(); ++it) {
        const int t = *it;
        if (t <= x) break;
        for (int s = x; s < t; ++s) chord_left(s, t);
    }
    for (int s = x; s + 1 < m; ++s) chord_left(s, s + 1);
    return best;
}

}  // namespace detail

// Reference chord refinement: all pairs, O(m^3). Kept as the ground truth
// the optimized path is tested against.
inline std::vector<double> refine_convex_lower_reference(const std::vector<double>& lower,
                                                         const std::vector<double>& hull_upper) {
    if (lower.size() != hull_upper.size())
        throw DomainError("refine_convex_lower: size mismatch");
    const int m = static_cast<int>(lower.size());
    std::vector<int> all(m);
    for (int i = 0; i < m; ++i) all[i] = i;
    std::vector<double> out(m);
    for (int x = 0; x < m; ++x) out[x] = detail::refine_at(lower, hull_upper, all, x);
    return out;
}

// Optimized chord refinement. Along any affine stretch of the convex upper
// bound the chord value at x is monotone in the upper endpoint, so the
// supremum over it is attained at a hull vertex or at the stretch cut next
// to the lower endpoint; refine_at covers the latter via the adjacent-pair
// scan.
inline std::vector<double> refine_convex_lower(const std::vector<double>& lower,
                                               const std::vector<double>& hull_upper) {
    if (lower.size() != hull_upper.size())
        throw DomainError("refine_convex_lower: size mismatch");
    const int m = static_cast<int>(lower.size());
    const std::vector<int> vertices = detail::lower_hull_vertices(hull_upper);
    std::vector<double> out(m);
    for (int x = 0; x < m; ++x) out[x] = detail::refine_at(lower, hull_upper, vertices, x);
    return out;
}

// Convex postprocessing: greatest convex minorant above, chord refinement
// below.
inline ConfidenceBand postprocess_convex(const ConfidenceBand& band) {
    if (band.shape != ShapeClass::Convex)
        throw ShapeMismatch("postprocess_convex: band is not convex");
    ConfidenceBand out = band;
    out.upper = gcm(band.upper);
    out.lower = refine_convex_lower(band.lower, out.upper);
    out.postprocessed = true;
    return out;
}

// Feasibility: does any shape-class function fit between the bounds?
// Isotonic: the running maximum of the lower bound must stay below the
// running minimum (from the right) of the upper bound. Convex: the greatest
// convex minorant of the upper bound must dominate the lower bound. A tiny
// slack absorbs hull interpolation rounding.
inline FeasibilityReport check_feasibility(const ConfidenceBand& band) {
    const int m = band.grid_size();
    if (band.shape == ShapeClass::Isotonic) {
        const std::vector<double> lo = detail::running_max(band.lower);
        const std::vector<double> hi = detail::running_min_from_right(band.upper);
        for (int i = 0; i < m; ++i)
            if (lo[i] > hi[i]) return {false, i};
        return {true, std::nullopt};
    }
    // convex functions are real valued: a -inf upper or +inf lower bound
    // excludes every candidate
    const double inf = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i)
        if (band.upper[i] == -inf || band.lower[i] == inf) return {false, i};
    const std::vector<double> hull = gcm(band.upper);
    for (int i = 0; i < m; ++i) {
        if (!std::isfinite(band.lower[i])) continue;  // -inf never binds
        const double slack = 1e-9 * (1.0 + std::max(std::abs(hull[i]), std::abs(band.lower[i])));
        if (hull[i] < band.lower[i] - slack) return {false, i};
    }
    return {true, std::nullopt};
}

struct PostprocessOutcome {
    ConfidenceBand band;
    FeasibilityReport report;
};

// Feasibility-aware composite: tightens feasible bands, passes infeasible
// ones through unchanged.
inline PostprocessOutcome postprocess(const ConfidenceBand& band) {
    const FeasibilityReport report = check_feasibility(band);
    if (!report.feasible) return {band, report};
    if (band.shape == ShapeClass::Isotonic) return {postprocess_isotonic(band), report};
    return {postprocess_convex(band), report};
}

}  // namespace shapebands
