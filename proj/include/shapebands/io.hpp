#pragma once

// File formats.
//
// Observations: CSV with one column (y) or two columns (x,y). The design is
// structural: with two columns every x must equal (i - 1/2)/n to within
// 1e-9, otherwise the file is rejected — silently re-gridding would corrupt
// the calibration.
//
// Bands: CSV `t,lower_raw,upper_raw,lower_post,upper_post` with 12
// significant digits and "inf"/"-inf" sentinels, plus a JSON sidecar
// `<output>.json` carrying {n, shape, alpha, kappa, sigmaUsed, feasible,
// seed}.

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "shapebands/bands.hpp"
#include "shapebands/errors.hpp"
#include "shapebands/format.hpp"
#include "shapebands/multiscale.hpp"

namespace shapebands {

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
        std::size_t start = 0;
        while (start < field.size() && field[start] == ' ') ++start;
        fields.push_back(field.substr(start));
    }
    return fields;
}

inline bool looks_numeric(const std::string& s) {
    try {
        parse_band_value(s);
        return true;
    } catch (const ParseError&) {
        return false;
    }
}

}  // namespace detail

inline ObservationVector read_observations_csv(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw IoError("cannot open '" + path + "' for reading");
    std::vector<double> xs, ys;
    std::string line;
    int columns = 0;
    bool first_content_line = true;
    int line_no = 0;
    while (std::getline(file, line)) {
        ++line_no;
        const std::vector<std::string> fields = detail::split_csv_line(line);
        if (fields.empty() || (fields.size() == 1 && fields[0].empty())) continue;
        if (first_content_line && !detail::looks_numeric(fields[0])) {
            first_content_line = false;  // header
            continue;
        }
        first_content_line = false;
        if (columns == 0) {
            if (fields.size() != 1 && fields.size() != 2)
                throw ParseError(path + ":" + std::to_string(line_no) +
                                 ": expected 1 (y) or 2 (x,y) columns");
            columns = static_cast<int>(fields.size());
        } else if (static_cast<int>(fields.size()) != columns) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": inconsistent column count");
        }
        try {
            if (columns == 2) {
                xs.push_back(parse_band_value(fields[0]));
                ys.push_back(parse_band_value(fields[1]));
            } else {
                ys.push_back(parse_band_value(fields[0]));
            }
        } catch (const ParseError& e) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (ys.size() < 2) throw ParseError(path + ": need at least 2 observations");
    const int n = static_cast<int>(ys.size());
    if (columns == 2) {
        for (int i = 1; i <= n; ++i) {
            const double expected = design_point(n, i);
            if (std::abs(xs[i - 1] - expected) > 1e-9)
                throw ParseError(path + ": x column must follow the midpoint grid (i-1/2)/n; row " +
                                 std::to_string(i) + " has x = " + format_significant(xs[i - 1], 12) +
                                 ", expected " + format_significant(expected, 12));
        }
    }
    ObservationVector obs;
    obs.values = std::move(ys);
    validate_observations(obs);
    return obs;
}

// `post` may equal `raw` when postprocessing was not requested; the columns
// are always present.
inline void write_band_csv(const ConfidenceBand& raw, const ConfidenceBand& post,
                           const std::string& path) {
    if (raw.n != post.n) throw DomainError("write_band_csv: raw/post size mismatch");
    std::ofstream file(path);
    if (!file) throw IoError("cannot open '" + path + "' for writing");
    file << "t,lower_raw,upper_raw,lower_post,upper_post\n";
    for (int i = 0; i < raw.grid_size(); ++i) {
        file << format_significant(raw.t(i), 12) << ',' << format_significant(raw.lower[i], 12)
             << ',' << format_significant(raw.upper[i], 12) << ','
             << format_significant(post.lower[i], 12) << ','
             << format_significant(post.upper[i], 12) << '\n';
    }
    file.flush();
    if (!file) throw IoError("failed writing '" + path + "'");
}

struct BandFile {
    int n = 0;
    std::vector<double> t, lower_raw, upper_raw, lower_post, upper_post;
};

inline BandFile read_band_csv(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw IoError("cannot open '" + path + "' for reading");
    std::string line;
    if (!std::getline(file, line)) throw ParseError(path + ": empty band file");
    if (detail::split_csv_line(line) !=
        std::vector<std::string>{"t", "lower_raw", "upper_raw", "lower_post", "upper_post"})
        throw ParseError(path + ": unexpected band header");
    BandFile out;
    int line_no = 1;
    while (std::getline(file, line)) {
        ++line_no;
        const std::vector<std::string> fields = detail::split_csv_line(line);
        if (fields.empty() || (fields.size() == 1 && fields[0].empty())) continue;
        if (fields.size() != 5)
            throw ParseError(path + ":" + std::to_string(line_no) + ": expected 5 columns");
        try {
            out.t.push_back(parse_band_value(fields[0]));
            out.lower_raw.push_back(parse_band_value(fields[1]));
            out.upper_raw.push_back(parse_band_value(fields[2]));
            out.lower_post.push_back(parse_band_value(fields[3]));
            out.upper_post.push_back(parse_band_value(fields[4]));
        } catch (const ParseError& e) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (out.t.empty()) throw ParseError(path + ": no band rows");
    out.n = static_cast<int>(out.t.size()) + 1;
    return out;
}

struct BandSidecar {
    int n = 0;
    ShapeClass shape = ShapeClass::Isotonic;
    double alpha = 0.0;
    double kappa = 0.0;
    double sigma_used = 0.0;
    bool feasible = true;
    std::uint64_t seed = 0;
};

inline std::string sidecar_path(const std::string& band_path) { return band_path + ".json"; }

inline void write_band_sidecar(const BandSidecar& meta, const std::string& path) {
    auto num = [](double v) {
        // JSON has no infinity literal; quote the sentinel
        return std::isfinite(v) ? format_significant(v, 17)
                                : "\"" + format_significant(v, 17) + "\"";
    };
    std::ofstream file(path);
    if (!file) throw IoError("cannot open '" + path + "' for writing");
    file << "{\n"
         << "  \"n\": " << meta.n << ",\n"
         << "  \"shape\": \"" << to_string(meta.shape) << "\",\n"
         << "  \"alpha\": " << num(meta.alpha) << ",\n"
         << "  \"kappa\": " << num(meta.kappa) << ",\n"
         << "  \"sigmaUsed\": " << num(meta.sigma_used) << ",\n"
         << "  \"feasible\": " << (meta.feasible ? "true" : "false") << ",\n"
         << "  \"seed\": " << meta.seed << "\n"
         << "}\n";
    file.flush();
    if (!file) throw IoError("failed writing '" + path + "'");
}

inline BandSidecar read_band_sidecar(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw IoError("cannot open '" + path + "' for reading");
    nlohmann::json j;
    try {
        file >> j;
    } catch (const std::exception& e) {
        throw ParseError("sidecar '" + path + "': " + e.what());
    }
    auto num = [&](const char* key) {
        const auto& v = j.at(key);
        return v.is_string() ? parse_band_value(v.get<std::string>()) : v.get<double>();
    };
    try {
        BandSidecar meta;
        meta.n = j.at("n").get<int>();
        meta.shape = parse_shape_class(j.at("shape").get<std::string>());
        meta.alpha = num("alpha");
        meta.kappa = num("kappa");
        meta.sigma_used = num("sigmaUsed");
        meta.feasible = j.at("feasible").get<bool>();
        meta.seed = j.at("seed").get<std::uint64_t>();
        return meta;
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception& e) {
        throw ParseError("sidecar '" + path + "': " + e.what());
    }
}

}  // namespace shapebands
