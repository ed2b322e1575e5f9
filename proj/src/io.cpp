// Copyright 2026 The cblue Authors.
// SPDX-License-Identifier: Apache-2.0

#include "cblue/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace cblue::io {

namespace {

using json = nlohmann::json;

json parse_json(std::string_view text, std::string_view what)
{
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ParseError(std::string(what) + ": " + e.what());
    }
}

Index positive_index(const json& doc, const char* key)
{
    if (!doc.contains(key) || !doc[key].is_number_integer() || doc[key].get<long long>() < 1) {
        throw ParseError(std::string("matrix: '") + key + "' must be a positive integer");
    }
    return static_cast<Index>(doc[key].get<long long>());
}

Complex parse_entry(const json& entry, std::size_t index)
{
    if (entry.is_number()) {
        return {entry.get<double>(), 0.0};
    }
    if (entry.is_array() && entry.size() == 2 && entry[0].is_number() && entry[1].is_number()) {
        return {entry[0].get<double>(), entry[1].get<double>()};
    }
    throw ParseError("matrix: entry " + std::to_string(index) + " is not a number or [re, im] pair");
}

std::vector<double> positive_list(const json& value, const char* key)
{
    if (!value.is_array()) {
        throw ParseError(std::string("config: '") + key + "' must be an array of numbers");
    }
    std::vector<double> out;
    for (const auto& v : value) {
        if (!v.is_number()) {
            throw ParseError(std::string("config: '") + key + "' must be an array of numbers");
        }
        out.push_back(v.get<double>());
    }
    return out;
}

}  // namespace

std::string read_text(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError("cannot open " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text(const std::filesystem::path& path, std::string_view text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ParseError("cannot write " + path.string());
    }
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) {
        throw ParseError("write failed for " + path.string());
    }
}

CMatrix parse_matrix(std::string_view text)
{
    const json doc = parse_json(text, "matrix");
    if (!doc.is_object()) {
        throw ParseError("matrix: document must be an object");
    }
    const Index rows = positive_index(doc, "rows");
    const Index cols = positive_index(doc, "cols");
    if (!doc.contains("data") || !doc["data"].is_array()) {
        throw ParseError("matrix: 'data' must be an array");
    }
    const json& data = doc["data"];
    if (static_cast<Index>(data.size()) != rows * cols) {
        throw ParseError("matrix: 'data' has " + std::to_string(data.size()) + " entries, expected "
                         + std::to_string(rows * cols));
    }
    CMatrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        for (Index j = 0; j < cols; ++j) {
            const auto k = static_cast<std::size_t>(i * cols + j);
            m(i, j) = parse_entry(data[k], k);
        }
    }
    return m;
}

std::string format_matrix(const CMatrix& m)
{
    json data = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) {
            data.push_back({m(i, j).real(), m(i, j).imag()});
        }
    }
    json doc = {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
    return doc.dump() + "\n";
}

CMatrix read_matrix_file(const std::filesystem::path& path)
{
    try {
        return parse_matrix(read_text(path));
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

CVector as_vector(const CMatrix& m, std::string_view what)
{
    if (m.cols() == 1) {
        return m.col(0);
    }
    if (m.rows() == 1) {
        return m.row(0).transpose();
    }
    throw ParseError(std::string(what) + " must be a vector (n x 1 or 1 x n)");
}

ExperimentSpec parse_experiment_config(std::string_view text)
{
    static const std::set<std::string> known{"n_x",   "n_u",    "base_noise_diag", "k_grid",
                                             "k_min", "k_max",  "k_points",        "trials",
                                             "seed",  "true_x_policy"};
    const json doc = parse_json(text, "config");
    if (!doc.is_object()) {
        throw ParseError("config: document must be an object");
    }
    for (const auto& [key, value] : doc.items()) {
        if (!known.contains(key)) {
            throw ParseError("config: unknown key '" + key + "'");
        }
    }

    ExperimentSpec spec;
    auto get_count = [&](const char* key, auto& target) {
        if (!doc.contains(key)) {
            return;
        }
        if (!doc[key].is_number_unsigned()) {
            throw ParseError(std::string("config: '") + key + "' must be a non-negative integer");
        }
        target = static_cast<std::remove_reference_t<decltype(target)>>(doc[key].get<std::uint64_t>());
    };
    get_count("n_x", spec.n_x);
    get_count("n_u", spec.n_u);
    get_count("trials", spec.trials);
    get_count("seed", spec.seed);

    if (doc.contains("base_noise_diag")) {
        spec.base_noise_diag = positive_list(doc["base_noise_diag"], "base_noise_diag");
    }
    const bool has_range = doc.contains("k_min") || doc.contains("k_max") || doc.contains("k_points");
    if (doc.contains("k_grid") && has_range) {
        throw ParseError("config: give either 'k_grid' or 'k_min'/'k_max'/'k_points', not both");
    }
    if (doc.contains("k_grid")) {
        spec.k_grid = positive_list(doc["k_grid"], "k_grid");
    } else if (has_range) {
        double k_min = 0.1;
        double k_max = 1.0;
        std::size_t k_points = 10;
        if (doc.contains("k_min")) {
            if (!doc["k_min"].is_number()) throw ParseError("config: 'k_min' must be a number");
            k_min = doc["k_min"].get<double>();
        }
        if (doc.contains("k_max")) {
            if (!doc["k_max"].is_number()) throw ParseError("config: 'k_max' must be a number");
            k_max = doc["k_max"].get<double>();
        }
        get_count("k_points", k_points);
        if (!(k_min > 0.0) || !(k_max >= k_min)) {
            throw ParseError("config: need 0 < k_min <= k_max");
        }
        spec.k_grid = log_spaced(k_min, k_max, k_points);
    }
    if (doc.contains("true_x_policy")) {
        const auto& v = doc["true_x_policy"];
        const auto policy = v.is_string() ? parse_true_x_policy(v.get<std::string>()) : std::nullopt;
        if (!policy) {
            throw ParseError("config: 'true_x_policy' must be \"nullspace_unit_norm\" or \"particular\"");
        }
        spec.true_x_policy = *policy;
    }

    try {
        spec.validate();
    } catch (const Error& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
    return spec;
}

std::string format_number(double value)
{
    char buf[64];
    const auto result = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::scientific, 14);
    return std::string(buf, result.ptr);
}

std::string format_csv(const MseReport& report)
{
    std::string out(kCsvHeader);
    out += '\n';
    for (const SweepPoint& point : report.points) {
        out += format_number(point.k);
        for (SweepEstimator e : kSweepEstimators) {
            out += ',' + format_number(point[e].empirical_mse);
        }
        for (SweepEstimator e : kSweepEstimators) {
            out += ',' + format_number(point[e].analytic_mse);
        }
        out += '\n';
    }
    return out;
}

std::string format_svg(const MseReport& report)
{
    struct Style {
        const char* legend;
        const char* color;
        const char* dash;
    };
    // Red for the LS family, blue for the BLUE family; dotted plain, dashed
    // mean-subtracted, solid constrained.
    static constexpr std::array<Style, kSweepEstimatorCount> styles{{
        {"LS", "#d62728", "2,4"},
        {"LS, mean subtracted", "#d62728", "9,5"},
        {"Constrained LS", "#d62728", ""},
        {"BLUE", "#1f4fd6", "2,4"},
        {"BLUE, mean subtracted", "#1f4fd6", "9,5"},
        {"Constrained BLUE", "#1f4fd6", ""},
    }};

    constexpr double width = 720, height = 440;
    constexpr double left = 80, right = 20, top = 90, bottom = 60;
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;

    double k_lo = report.points.front().k;
    double k_hi = report.points.front().k;
    double y_lo = std::numeric_limits<double>::infinity();
    double y_hi = 0.0;
    for (const auto& p : report.points) {
        k_lo = std::min(k_lo, p.k);
        k_hi = std::max(k_hi, p.k);
        for (const auto& s : p.estimators) {
            if (s.empirical_mse > 0.0) {
                y_lo = std::min(y_lo, s.empirical_mse);
                y_hi = std::max(y_hi, s.empirical_mse);
            }
        }
    }
    if (!(y_hi > 0.0)) {
        y_lo = 1e-3;
        y_hi = 1e-1;
    }
    const double ly_lo = std::floor(std::log10(y_lo));
    const double ly_hi = std::max(std::ceil(std::log10(y_hi)), ly_lo + 1.0);
    double lk_lo = std::log10(k_lo);
    double lk_hi = std::log10(k_hi);
    if (lk_hi - lk_lo < 1e-12) {
        lk_lo -= 0.5;
        lk_hi += 0.5;
    }

    auto px = [&](double k) { return left + (std::log10(k) - lk_lo) / (lk_hi - lk_lo) * plot_w; };
    auto py = [&](double v) { return top + (ly_hi - std::log10(v)) / (ly_hi - ly_lo) * plot_h; };
    auto num = [](double v) {
        char buf[32];
        const auto r = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 2);
        return std::string(buf, r.ptr);
    };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\""
           + num(height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // Decade grid on y, grid at 1-2-5 multiples on x.
    for (double e = ly_lo; e <= ly_hi + 1e-9; e += 1.0) {
        const double y = py(std::pow(10.0, e));
        svg += "<line x1=\"" + num(left) + "\" y1=\"" + num(y) + "\" x2=\"" + num(left + plot_w)
               + "\" y2=\"" + num(y) + "\" stroke=\"#cccccc\"/>\n";
        svg += "<text x=\"" + num(left - 8) + "\" y=\"" + num(y + 4)
               + "\" text-anchor=\"end\">1e" + std::to_string(static_cast<int>(e)) + "</text>\n";
    }
    for (int e = static_cast<int>(std::floor(lk_lo)); e <= static_cast<int>(std::ceil(lk_hi)); ++e) {
        for (double m : {1.0, 2.0, 5.0}) {
            const double k = m * std::pow(10.0, e);
            const double lk = std::log10(k);
            if (lk < lk_lo - 1e-9 || lk > lk_hi + 1e-9) {
                continue;
            }
            const double x = px(k);
            svg += "<line x1=\"" + num(x) + "\" y1=\"" + num(top) + "\" x2=\"" + num(x) + "\" y2=\""
                   + num(top + plot_h) + "\" stroke=\"#cccccc\"/>\n";
            std::ostringstream label;
            label.imbue(std::locale::classic());
            label << k;
            svg += "<text x=\"" + num(x) + "\" y=\"" + num(top + plot_h + 18)
                   + "\" text-anchor=\"middle\">" + label.str() + "</text>\n";
        }
    }
    svg += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(plot_w)
           + "\" height=\"" + num(plot_h) + "\" fill=\"none\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + num(left + plot_w / 2) + "\" y=\"" + num(height - 15)
           + "\" text-anchor=\"middle\">k</text>\n";
    svg += "<text transform=\"translate(20," + num(top + plot_h / 2)
           + ") rotate(-90)\" text-anchor=\"middle\">Average MSE</text>\n";

    for (std::size_t i = 0; i < kSweepEstimatorCount; ++i) {
        const Style& st = styles[i];
        std::string points;
        for (const auto& p : report.points) {
            const double v = p.estimators[i].empirical_mse;
            if (v > 0.0) {
                points += num(px(p.k)) + "," + num(py(v)) + " ";
            }
        }
        svg += "<polyline fill=\"none\" stroke=\"" + std::string(st.color)
               + "\" stroke-width=\"1.5\"";
        if (*st.dash != '\0') {
            svg += " stroke-dasharray=\"" + std::string(st.dash) + "\"";
        }
        svg += " points=\"" + points + "\"/>\n";

        const double lx = left + static_cast<double>(i % 2) * 300.0;
        const double ly = 20.0 + static_cast<double>(i / 2) * 22.0;
        svg += "<line x1=\"" + num(lx) + "\" y1=\"" + num(ly) + "\" x2=\"" + num(lx + 40) + "\" y2=\""
               + num(ly) + "\" stroke=\"" + st.color + "\" stroke-width=\"1.5\"";
        if (*st.dash != '\0') {
            svg += " stroke-dasharray=\"" + std::string(st.dash) + "\"";
        }
        svg += "/>\n<text x=\"" + num(lx + 48) + "\" y=\"" + num(ly + 4) + "\">" + st.legend
               + "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace cblue::io
