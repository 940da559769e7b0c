// shapebands: simultaneous confidence bands for isotonic or convex
// regression curves on an equispaced grid, with Monte-Carlo calibration of
// the multiscale critical values.
//
// Subcommands: band, simulate, coverage, verify-kernels, levy.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "shapebands/bands.hpp"
#include "shapebands/critical.hpp"
#include "shapebands/driver.hpp"
#include "shapebands/io.hpp"
#include "shapebands/shape.hpp"

namespace {

using namespace shapebands;

constexpr int kExitOk = 0;
constexpr int kExitParse = 1;
constexpr int kExitNoKappa = 2;
constexpr int kExitInfeasible = 3;

struct KappaOptions {
    double inline_kappa = std::numeric_limits<double>::quiet_NaN();
    bool has_inline = false;
    std::string table_path;
    bool simulate = false;
    int reps = 9999;
    std::uint64_t seed = 0;
    int threads = 0;
};

std::string default_table_path(ShapeClass shape, int n) {
    const char* dir = std::getenv("SHAPEBANDS_TABLE_DIR");
    if (!dir || !*dir) return {};
    return std::string(dir) + "/kappa_" + to_string(shape) + "_" + std::to_string(n) + ".json";
}

// Resolution order: inline value, then table file (explicit path or the
// SHAPEBANDS_TABLE_DIR convention), then on-the-fly simulation when allowed.
std::optional<double> resolve_kappa(const KappaOptions& opt, ShapeClass shape, int n,
                                    double alpha) {
    if (opt.has_inline) return opt.inline_kappa;

    std::string path = opt.table_path;
    if (path.empty()) path = default_table_path(shape, n);
    if (!path.empty()) {
        try {
            const CriticalValueTable table = read_table(path);
            if (table.shape == shape && table.n == n) {
                if (auto kappa = lookup_kappa(table, alpha)) return kappa;
                std::cerr << "note: table " << path << " has no entry for alpha = " << alpha
                          << "\n";
            } else {
                std::cerr << "note: table " << path << " is for (" << to_string(table.shape)
                          << ", n = " << table.n << "), not (" << to_string(shape)
                          << ", n = " << n << ")\n";
            }
        } catch (const Error& e) {
            if (!opt.table_path.empty()) {
                std::cerr << "error: " << e.what() << "\n";
                return std::nullopt;
            }
            // the env-var convention is best effort
        }
    }

    if (opt.simulate) {
        std::cerr << "simulating kappa (" << opt.reps << " replicates, n = " << n
                  << "); this may take a while...\n";
        SimulationConfig cfg{n, shape, opt.reps, opt.seed, {alpha}};
        const std::vector<double> samples = simulate_null_statistics(cfg, opt.threads);
        return quantile_kappa(samples, alpha);
    }
    return std::nullopt;
}

int cmd_band(const std::string& input, const std::string& output, ShapeClass shape, double alpha,
             std::optional<double> sigma_flag, bool estimate_sigma_flag, bool do_postprocess,
             const KappaOptions& kappa_opt) {
    ObservationVector obs;
    try {
        obs = read_observations_csv(input);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    }

    double sigma = 0.0;
    if (sigma_flag) {
        sigma = *sigma_flag;
    } else if (estimate_sigma_flag) {
        sigma = estimate_sigma(obs);
        if (!(sigma > 0.0)) {
            std::cerr << "error: estimated sigma is zero (constant data); pass --sigma\n";
            return kExitParse;
        }
        std::cerr << "estimated sigma = " << format_significant(sigma, 6) << "\n";
    } else {
        std::cerr << "error: pass --sigma VALUE or --estimate-sigma\n";
        return kExitParse;
    }
    obs.sigma = sigma;

    const std::optional<double> kappa = resolve_kappa(kappa_opt, shape, obs.n(), alpha);
    if (!kappa) {
        std::cerr << "error: no kappa available for (" << to_string(shape) << ", n = " << obs.n()
                  << ", alpha = " << alpha
                  << "); pass --kappa, --kappa-table or --simulate-kappa\n";
        return kExitNoKappa;
    }

    ConfidenceBand raw;
    try {
        raw = raw_band(obs, shape, *kappa, sigma);
        raw.alpha = alpha;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    }

    const PostprocessOutcome outcome = postprocess(raw);
    const ConfidenceBand& post = do_postprocess ? outcome.band : raw;

    try {
        write_band_csv(raw, post, output);
        BandSidecar meta;
        meta.n = raw.n;
        meta.shape = shape;
        meta.alpha = alpha;
        meta.kappa = *kappa;
        meta.sigma_used = sigma;
        meta.feasible = outcome.report.feasible;
        meta.seed = kappa_opt.seed;
        write_band_sidecar(meta, sidecar_path(output));
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    }

    if (!outcome.report.feasible) {
        const int idx = outcome.report.violation_index.value_or(0);
        std::cout << "band written to " << output << "; INFEASIBLE at t = "
                  << format_significant(raw.t(idx), 6)
                  << " (no " << to_string(shape) << " curve fits the band)\n";
        return kExitInfeasible;
    }
    std::cout << "band written to " << output << "; feasible, kappa = "
              << format_significant(*kappa, 6) << ", sigma = " << format_significant(sigma, 6)
              << "\n";
    return kExitOk;
}

int cmd_simulate(ShapeClass shape, int n, int reps, std::uint64_t seed,
                 const std::vector<double>& alphas, const std::string& output, int threads) {
    SimulationConfig cfg{n, shape, reps, seed, alphas};
    try {
        const CriticalValueTable table = build_table(cfg, threads);
        write_table(table, output);
        std::cout << "table written to " << output << "\n";
        for (const CriticalValueEntry& e : table.entries)
            std::cout << "  alpha = " << format_significant(e.alpha, 6)
                      << "  kappa = " << format_significant(e.kappa, 6) << "\n";
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    }
    return kExitOk;
}

int cmd_coverage(ShapeClass shape, const std::string& function_name, int n, double alpha,
                 double sigma, int reps, const KappaOptions& kappa_opt,
                 const std::string& output) {
    const NamedFunction* fn = find_test_function(function_name);
    if (!fn) {
        std::cerr << "error: unknown test function '" << function_name << "'\n";
        return kExitParse;
    }
    const bool in_class = shape == ShapeClass::Isotonic ? fn->in_isotonic : fn->in_convex;
    if (!in_class) {
        std::cerr << "error: test function '" << function_name << "' is not "
                  << to_string(shape) << "\n";
        return kExitParse;
    }
    const std::optional<double> kappa = resolve_kappa(kappa_opt, shape, n, alpha);
    if (!kappa) {
        std::cerr << "error: no kappa available; pass --kappa, --kappa-table or "
                     "--simulate-kappa\n";
        return kExitNoKappa;
    }
    try {
        // keep the coverage noise streams disjoint from any kappa simulation
        // run with the same base seed
        const std::uint64_t coverage_seed =
            derive_replicate_seed(kappa_opt.seed ^ 0x636f766572616765ULL, 0);
        const CoverageResult res =
            run_coverage(shape, fn->fn, n, sigma, *kappa, reps, coverage_seed,
                         kappa_opt.threads);
        std::ostringstream json;
        json << "{\"function\": \"" << function_name << "\", \"n\": " << n
             << ", \"alpha\": " << format_significant(alpha, 17)
             << ", \"kappa\": " << format_significant(*kappa, 17) << ", \"reps\": " << res.reps
             << ", \"hits\": " << res.hits
             << ", \"empiricalCoverage\": " << format_significant(res.empirical_coverage, 17)
             << ", \"binomialSE\": " << format_significant(res.binomial_se, 17) << "}";
        if (output.empty()) {
            std::cout << json.str() << "\n";
        } else {
            std::ofstream file(output);
            if (!file) throw IoError("cannot open '" + output + "' for writing");
            file << json.str() << "\n";
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    }
    return kExitOk;
}

int cmd_verify_kernels() {
    const std::vector<CheckResult> checks = kernel_verification_report();
    int failures = 0;
    for (const CheckResult& c : checks) {
        std::cout << (c.pass ? "PASS" : "FAIL") << "  " << c.name << " (" << c.detail << ")\n";
        if (!c.pass) ++failures;
    }
    return failures == 0 ? kExitOk : kExitParse;
}

int cmd_levy(const std::string& input, const std::string& which, double epsilon,
             bool has_epsilon, const std::string& output) {
    try {
        const BandFile file = read_band_csv(input);
        const bool use_post = which == "post";
        const std::vector<double>& lower = use_post ? file.lower_post : file.lower_raw;
        const std::vector<double>& upper = use_post ? file.upper_post : file.upper_raw;
        for (std::size_t i = 0; i < lower.size(); ++i)
            if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]))
                throw DomainError("levy: band has non-finite values; use a feasible band");
        for (std::size_t i = 1; i < lower.size(); ++i)
            if (lower[i] < lower[i - 1] || upper[i] < upper[i - 1])
                throw InvalidShape(
                    "levy: band envelopes must be nondecreasing (postprocess the band)");
        std::ostringstream json;
        if (has_epsilon) {
            const LevyDiagnostic diag = levy_diagnostic(lower, upper, file.n, epsilon);
            json << "{\"n\": " << file.n << ", \"dL\": " << format_significant(diag.dL, 17)
                 << ", \"epsilon\": " << format_significant(diag.epsilon, 17)
                 << ", \"D\": " << format_significant(diag.D, 17) << "}";
        } else {
            json << "{\"n\": " << file.n
                 << ", \"dL\": " << format_significant(levy_distance(lower, upper, file.n), 17)
                 << "}";
        }
        if (output.empty()) {
            std::cout << json.str() << "\n";
        } else {
            std::ofstream out(output);
            if (!out) throw IoError("cannot open '" + output + "' for writing");
            out << json.str() << "\n";
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simultaneous confidence bands for shape-restricted regression curves"};
    app.require_subcommand(1);

    std::string shape_name = "isotonic";
    double alpha = 0.05;
    std::string input, output;
    double sigma_value = 0.0;
    bool has_sigma = false, estimate_sigma_flag = false, postprocess_flag = false;
    KappaOptions kappa_opt;
    int n = 0;
    int reps = 0;
    std::string alphas_csv = "0.5,0.1,0.05";
    std::string function_name = "constant";
    double sim_sigma = 1.0;
    std::string levy_use = "post";
    double levy_eps = 0.0;

    auto add_shape = [&](CLI::App* cmd) {
        cmd->add_option("--shape", shape_name, "shape class: isotonic or convex")
            ->check(CLI::IsMember({"isotonic", "convex"}));
    };
    auto add_kappa = [&](CLI::App* cmd, bool own_reps) {
        auto* k = cmd->add_option("--kappa", kappa_opt.inline_kappa, "critical value kappa");
        k->each([&](const std::string&) { kappa_opt.has_inline = true; });
        cmd->add_option("--kappa-table", kappa_opt.table_path, "critical value table (JSON)");
        cmd->add_flag("--simulate-kappa", kappa_opt.simulate,
                      "simulate kappa when no table entry applies");
        if (own_reps)
            cmd->add_option("--reps", kappa_opt.reps,
                            "Monte-Carlo replicates for --simulate-kappa");
        cmd->add_option("--seed", kappa_opt.seed, "base seed for simulations");
        cmd->add_option("--threads", kappa_opt.threads, "worker threads (0 = all cores)");
    };

    CLI::App* band = app.add_subcommand("band", "compute a confidence band from a CSV file");
    add_shape(band);
    band->add_option("--input", input, "observation CSV (y, or x,y)")->required();
    band->add_option("--output", output, "band CSV to write")->required();
    band->add_option("--alpha", alpha, "confidence level parameter in (0,1)");
    auto* sig = band->add_option("--sigma", sigma_value, "known noise level");
    sig->each([&](const std::string&) { has_sigma = true; });
    band->add_flag("--estimate-sigma", estimate_sigma_flag,
                   "estimate the noise level from first differences");
    band->add_flag("--postprocess", postprocess_flag, "apply shape-aware postprocessing");
    add_kappa(band, true);

    CLI::App* simulate = app.add_subcommand("simulate", "build a critical value table");
    add_shape(simulate);
    simulate->add_option("--n", n, "sample size")->required();
    simulate->add_option("--output", output, "table JSON to write")->required();
    simulate->add_option("--reps", reps, "Monte-Carlo replicates")->default_val(9999);
    simulate->add_option("--seed", kappa_opt.seed, "base seed");
    simulate->add_option("--alphas", alphas_csv, "comma-separated levels");
    simulate->add_option("--threads", kappa_opt.threads, "worker threads (0 = all cores)");

    CLI::App* coverage = app.add_subcommand("coverage", "coverage experiment for a test curve");
    add_shape(coverage);
    coverage->add_option("--function", function_name,
                         "test curve: constant, linear, quadratic, ramp, vee");
    coverage->add_option("--n", n, "sample size")->required();
    coverage->add_option("--alpha", alpha, "confidence level parameter");
    coverage->add_option("--sigma", sim_sigma, "noise level used in the simulation");
    coverage->add_option("--reps", reps, "replicates (coverage and any kappa simulation)")
        ->default_val(2000);
    coverage->add_option("--output", output, "write the JSON report here instead of stdout");
    add_kappa(coverage, false);

    app.add_subcommand("verify-kernels", "run the kernel self-checks");

    CLI::App* levy = app.add_subcommand("levy", "shift-slack diagnostics for an isotonic band");
    levy->add_option("--input", input, "band CSV")->required();
    levy->add_option("--use", levy_use, "columns to compare: post or raw")
        ->check(CLI::IsMember({"post", "raw"}));
    auto* eps_opt = levy->add_option("--epsilon", levy_eps, "shift for the D_epsilon value");
    levy->add_option("--output", output, "write the JSON report here instead of stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        const ShapeClass shape = parse_shape_class(shape_name);
        if (band->parsed())
            return cmd_band(input, output, shape, alpha,
                            has_sigma ? std::optional<double>(sigma_value) : std::nullopt,
                            estimate_sigma_flag, postprocess_flag, kappa_opt);
        if (simulate->parsed()) {
            std::vector<double> alphas;
            std::stringstream ss(alphas_csv);
            std::string tok;
            while (std::getline(ss, tok, ',')) alphas.push_back(parse_band_value(tok));
            return cmd_simulate(shape, n, reps, kappa_opt.seed, alphas, output,
                                kappa_opt.threads);
        }
        if (coverage->parsed()) {
            kappa_opt.reps = reps;  // one replicate knob per the flag contract
            return cmd_coverage(shape, function_name, n, alpha, sim_sigma, reps, kappa_opt,
                                output);
        }
        if (app.get_subcommand("verify-kernels")->parsed()) return cmd_verify_kernels();
        if (levy->parsed())
            return cmd_levy(input, levy_use, levy_eps, eps_opt->count() > 0, output);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    }
    return kExitOk;
}
