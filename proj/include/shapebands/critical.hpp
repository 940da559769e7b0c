#pragma once

// Monte-Carlo calibration of the null distribution of the combined
// multiscale statistic and persistence of the resulting critical values.
//
// Replicates draw standard normal noise (sigma = 1; the statistic is scale
// free) from per-replicate streams, so a table is reproducible bit for bit
// from (n, shape, reps, baseSeed, generatorId) regardless of thread count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "shapebands/errors.hpp"
#include "shapebands/format.hpp"
#include "shapebands/multiscale.hpp"
#include "shapebands/parallel.hpp"
#include "shapebands/rng.hpp"

namespace shapebands {

struct SimulationConfig {
    int n = 0;
    ShapeClass shape = ShapeClass::Isotonic;
    int reps = 9999;
    std::uint64_t base_seed = 0;
    std::vector<double> alphas;
};

// Full invariants, enforced where tables are built; plain simulation runs
// only need reps >= 1.
inline void validate_simulation_config(const SimulationConfig& cfg) {
    if (cfg.n < 2) throw DomainError("simulation config: need n >= 2");
    if (cfg.reps < 100) throw DomainError("simulation config: need reps >= 100");
    if (cfg.alphas.empty()) throw DomainError("simulation config: alphas must be nonempty");
    for (double a : cfg.alphas)
        if (!(a > 0.0) || !(a < 1.0))
            throw DomainError("simulation config: every alpha must lie strictly in (0, 1)");
}

inline double null_statistic_replicate(int n, ShapeClass shape, std::uint64_t base_seed,
                                       int replicate) {
    NormalSampler rng(derive_replicate_seed(base_seed, static_cast<std::uint64_t>(replicate)));
    ObservationVector obs;
    obs.values.resize(n);
    for (double& v : obs.values) v = rng.next();
    obs.sigma = 1.0;
    return combined_statistic(obs, GridScheme::for_shape(shape, n));
}

// Sorted sample of the null statistic across cfg.reps replicates.
inline std::vector<double> simulate_null_statistics(const SimulationConfig& cfg, int threads = 0) {
    if (cfg.n < 2) throw DomainError("simulate_null_statistics: need n >= 2");
    if (cfg.reps < 1) throw DomainError("simulate_null_statistics: need reps >= 1");
    std::vector<double> out(cfg.reps);
    parallel_for(cfg.reps, threads, [&](int r) {
        out[r] = null_statistic_replicate(cfg.n, cfg.shape, cfg.base_seed, r);
    });
    std::sort(out.begin(), out.end());
    return out;
}

// Empirical (1-alpha)-quantile as the ceil((1-alpha) * reps)-th order
// statistic: the smallest kappa whose empirical coverage reaches 1-alpha.
inline double quantile_kappa(const std::vector<double>& sorted_samples, double alpha) {
    if (!(alpha > 0.0) || !(alpha < 1.0))
        throw DomainError("quantile_kappa: alpha must lie strictly in (0, 1)");
    if (sorted_samples.empty()) throw DomainError("quantile_kappa: empty sample");
    const double count = static_cast<double>(sorted_samples.size());
    const double target = (1.0 - alpha) * count;
    // nudge below integer targets that float rounding pushed upward
    long k = static_cast<long>(std::ceil(target - 1e-9 * count));
    k = std::max<long>(1, std::min<long>(k, sorted_samples.size()));
    return sorted_samples[k - 1];
}

struct CriticalValueEntry {
    double alpha;
    double kappa;
};

struct CriticalValueTable {
    ShapeClass shape = ShapeClass::Isotonic;
    int n = 0;
    int reps = 0;
    std::uint64_t base_seed = 0;
    std::string generator_id;
    std::vector<CriticalValueEntry> entries;  // ascending in alpha
};

inline CriticalValueTable build_table(const SimulationConfig& cfg, int threads = 0) {
    validate_simulation_config(cfg);
    std::vector<double> alphas = cfg.alphas;
    std::sort(alphas.begin(), alphas.end());
    for (std::size_t i = 1; i < alphas.size(); ++i)
        if (alphas[i] == alphas[i - 1])
            throw DomainError("build_table: duplicate alpha " + std::to_string(alphas[i]));
    const std::vector<double> samples = simulate_null_statistics(cfg, threads);
    CriticalValueTable table{cfg.shape, cfg.n, cfg.reps, cfg.base_seed, kGeneratorId, {}};
    table.entries.reserve(alphas.size());
    for (double a : alphas) table.entries.push_back({a, quantile_kappa(samples, a)});
    return table;
}

inline std::optional<double> lookup_kappa(const CriticalValueTable& table, double alpha,
                                          double tol = 1e-9) {
    for (const CriticalValueEntry& e : table.entries)
        if (std::abs(e.alpha - alpha) <= tol) return e.kappa;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Table file format (JSON, schemaVersion 1). Numbers carry 17 significant
// digits so doubles round-trip exactly.
// ---------------------------------------------------------------------------

inline void write_table(const CriticalValueTable& table, const std::string& path) {
    std::ostringstream out;
    out << "{\n";
    out << "  \"schemaVersion\": 1,\n";
    out << "  \"shape\": \"" << to_string(table.shape) << "\",\n";
    out << "  \"n\": " << table.n << ",\n";
    out << "  \"reps\": " << table.reps << ",\n";
    out << "  \"baseSeed\": " << table.base_seed << ",\n";
    out << "  \"generatorId\": \"" << table.generator_id << "\",\n";
    out << "  \"entries\": [";
    for (std::size_t i = 0; i < table.entries.size(); ++i) {
        out << (i == 0 ? "" : ",") << "\n    {\"alpha\": "
            << format_significant(table.entries[i].alpha, 17)
            << ", \"kappa\": " << format_significant(table.entries[i].kappa, 17) << "}";
    }
    out << "\n  ]\n}\n";
    std::ofstream file(path);
    if (!file) throw IoError("cannot open '" + path + "' for writing");
    file << out.str();
    file.flush();
    if (!file) throw IoError("failed writing '" + path + "'");
}

inline CriticalValueTable read_table(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw IoError("cannot open '" + path + "' for reading");
    nlohmann::json j;
    try {
        file >> j;
    } catch (const std::exception& e) {
        throw ParseError("table '" + path + "': " + e.what());
    }
    try {
        if (j.at("schemaVersion").get<int>() != 1)
            throw ParseError("table '" + path + "': unsupported schemaVersion");
        CriticalValueTable table;
        table.shape = parse_shape_class(j.at("shape").get<std::string>());
        table.n = j.at("n").get<int>();
        table.reps = j.at("reps").get<int>();
        table.base_seed = j.at("baseSeed").get<std::uint64_t>();
        table.generator_id = j.at("generatorId").get<std::string>();
        for (const auto& e : j.at("entries"))
            table.entries.push_back({e.at("alpha").get<double>(), e.at("kappa").get<double>()});
        return table;
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception& e) {
        throw ParseError("table '" + path + "': " + e.what());
    }
}

}  // namespace shapebands
