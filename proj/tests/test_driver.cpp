#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "shapebands/driver.hpp"
#include "shapebands/io.hpp"
#include "shapebands/shape.hpp"
#include "test_util.hpp"

using namespace shapebands;
using testutil::close_rel;

namespace {

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_SUITE("driver") {

TEST_CASE("noise level estimation") {
    ObservationVector obs;
    obs.values = {0.0, 2.0, 0.0, 2.0};
    CHECK(estimate_sigma(obs) == doctest::Approx(std::sqrt(2.0)));

    obs.values = {5.0, 5.0, 5.0, 5.0, 5.0};
    CHECK(estimate_sigma(obs) == 0.0);

    obs.values = {1.0};
    CHECK_THROWS_AS(estimate_sigma(obs), DomainError);
}

TEST_CASE("noise level estimator concentrates") {
    const int n = 10000;
    const double sigma = 0.8;
    int within = 0;
    const int reps = 200;
    for (int r = 0; r < reps; ++r) {
        NormalSampler rng(derive_replicate_seed(314159, r));
        ObservationVector obs;
        obs.values.resize(n);
        for (double& v : obs.values) v = sigma * rng.next();
        if (std::abs(estimate_sigma(obs) - sigma) <= 0.05 * sigma) ++within;
    }
    CHECK(within >= reps - 2);  // 5% corridor is ~5.7 standard errors wide

    // a smooth trend only inflates the estimate mildly
    NormalSampler rng(7);
    ObservationVector trend;
    trend.values.resize(n);
    for (int i = 1; i <= n; ++i)
        trend.values[i - 1] = 3.0 * design_point(n, i) + sigma * rng.next();
    CHECK(std::abs(estimate_sigma(trend) - sigma) <= 0.05 * sigma);
}

TEST_CASE("named test curves carry honest class labels") {
    const int n = 64;
    for (const NamedFunction& fn : named_test_functions()) {
        std::vector<double> y(n);
        for (int i = 1; i <= n; ++i) y[i - 1] = fn.fn(design_point(n, i));
        bool monotone = true, convex = true;
        for (int i = 0; i + 1 < n; ++i) monotone = monotone && y[i + 1] >= y[i] - 1e-12;
        for (int i = 1; i + 1 < n; ++i)
            convex = convex && y[i + 1] - 2.0 * y[i] + y[i - 1] >= -1e-12;
        CHECK(fn.in_isotonic == monotone);
        CHECK(fn.in_convex == convex);
    }
    CHECK(find_test_function("linear") != nullptr);
    CHECK(find_test_function("cubic") == nullptr);
}

TEST_CASE("coverage experiment basics") {
    const auto* fn = find_test_function("constant");
    REQUIRE(fn);
    // an infinite band covers everything
    const CoverageResult full = run_coverage(ShapeClass::Isotonic, fn->fn, 20, 1.0,
                                             std::numeric_limits<double>::infinity(), 25, 1u);
    CHECK(full.hits == 25);
    CHECK(full.empirical_coverage == 1.0);
    CHECK(full.binomial_se == 0.0);

    // determinism across thread counts
    const CoverageResult a = run_coverage(ShapeClass::Convex, fn->fn, 30, 1.0, 1.3, 40, 9u, 1);
    const CoverageResult b = run_coverage(ShapeClass::Convex, fn->fn, 30, 1.0, 1.3, 40, 9u, 4);
    CHECK(a.hits == b.hits);
    CHECK(a.empirical_coverage == doctest::Approx(static_cast<double>(a.hits) / 40));
}

TEST_CASE("kernel verification report passes on the shipped kernels") {
    const std::vector<CheckResult> checks = kernel_verification_report(60, 40);
    REQUIRE(!checks.empty());
    for (const CheckResult& c : checks) {
        INFO(c.name, ": ", c.detail);
        CHECK(c.pass);
    }
}

TEST_CASE("a perturbed kernel coefficient is caught by the sum checks") {
    KernelSpec bent = rescaled_kernel(ShapeClass::Isotonic, KernelSide::Lower);
    bent.pieces[0].c1 += 0.05;
    const DiscreteKernelSums closed = discrete_sums(bent, 10);
    const DiscreteKernelSums brute = brute_force_sums(bent, 10);
    CHECK(std::abs(closed.S - brute.S) > 1e-3);

    const KernelMoments moments = continuous_moments(bent);
    CHECK(std::abs(moments.integral - 0.5) > 1e-3);
}

TEST_CASE("observation CSV round trips") {
    const std::string path = temp_path("shapebands_obs_test.csv");

    {
        std::ofstream out(path);
        out << "y\n1.5\n2.5\n\n3.5\n";
    }
    ObservationVector obs = read_observations_csv(path);
    CHECK(obs.values == std::vector<double>{1.5, 2.5, 3.5});

    {
        std::ofstream out(path);
        out << "x,y\n";
        const int n = 4;
        for (int i = 1; i <= n; ++i)
            out << format_significant(design_point(n, i), 17) << "," << i * 1.25 << "\n";
    }
    obs = read_observations_csv(path);
    CHECK(obs.values == std::vector<double>{1.25, 2.5, 3.75, 5.0});

    {
        std::ofstream out(path);
        out << "0.1,1.0\n0.2,2.0\n0.35,3.0\n";  // not the midpoint grid
    }
    CHECK_THROWS_AS(read_observations_csv(path), ParseError);

    {
        std::ofstream out(path);
        out << "1.0\nnot_a_number\n";
    }
    CHECK_THROWS_AS(read_observations_csv(path), ParseError);

    CHECK_THROWS_AS(read_observations_csv("/nonexistent/file.csv"), IoError);
    std::remove(path.c_str());
}

TEST_CASE("band files round trip at serialization precision") {
    const int n = 30;
    ObservationVector obs;
    obs.values = testutil::gaussian_vector(5, n);
    obs.sigma = 1.0;
    const ConfidenceBand raw = raw_band(obs, ShapeClass::Convex, 1.3, 1.0);
    const ConfidenceBand post = postprocess(raw).band;

    const std::string path = temp_path("shapebands_band_test.csv");
    write_band_csv(raw, post, path);
    const BandFile file = read_band_csv(path);
    REQUIRE(file.n == n);
    for (int p = 0; p < n - 1; ++p) {
        CHECK(close_rel(file.t[p], raw.t(p), 1e-9));
        CHECK(close_rel(file.lower_raw[p], raw.lower[p], 1e-9));   // -inf sentinels included
        CHECK(close_rel(file.upper_raw[p], raw.upper[p], 1e-9));
        CHECK(close_rel(file.lower_post[p], post.lower[p], 1e-9));
        CHECK(close_rel(file.upper_post[p], post.upper[p], 1e-9));
    }
    std::remove(path.c_str());
}

TEST_CASE("band sidecar round trips") {
    BandSidecar meta;
    meta.n = 100;
    meta.shape = ShapeClass::Convex;
    meta.alpha = 0.05;
    meta.kappa = 1.3580000000000001;
    meta.sigma_used = 0.75;
    meta.feasible = false;
    meta.seed = 0xFFFFFFFFFFFFFFF1ULL;  // above 2^53: must survive as an integer
    const std::string path = temp_path("shapebands_sidecar_test.json");
    write_band_sidecar(meta, path);
    const BandSidecar back = read_band_sidecar(path);
    CHECK(back.n == meta.n);
    CHECK(back.shape == meta.shape);
    CHECK(back.alpha == meta.alpha);
    CHECK(back.kappa == meta.kappa);
    CHECK(back.sigma_used == meta.sigma_used);
    CHECK(back.feasible == meta.feasible);
    CHECK(back.seed == meta.seed);

    // infinite kappa survives via the quoted sentinel
    meta.kappa = std::numeric_limits<double>::infinity();
    write_band_sidecar(meta, path);
    CHECK(read_band_sidecar(path).kappa == std::numeric_limits<double>::infinity());
    std::remove(path.c_str());
}

TEST_CASE("significant-digit formatting") {
    CHECK(format_significant(1.0 / 3.0, 12) == "0.333333333333");
    CHECK(format_significant(std::numeric_limits<double>::infinity(), 12) == "inf");
    CHECK(format_significant(-std::numeric_limits<double>::infinity(), 12) == "-inf");
    CHECK(parse_band_value("inf") == std::numeric_limits<double>::infinity());
    CHECK(parse_band_value("-inf") == -std::numeric_limits<double>::infinity());
    CHECK(parse_band_value("2.5e-3") == doctest::Approx(0.0025));
    CHECK_THROWS_AS(parse_band_value("abc"), ParseError);
    CHECK_THROWS_AS(parse_band_value("1.5x"), ParseError);
    // 17 digits round-trip doubles exactly
    const double v = 0.1234567890123456789;
    CHECK(parse_band_value(format_significant(v, 17)) == v);
}

}  // TEST_SUITE
