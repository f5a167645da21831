#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "semiwave/errors.hpp"

// Artifact emission: CSV tables, minimal SVG line plots, and the run
// manifest. All number formatting is locale-independent and deterministic so
// identical runs produce bit-identical artifacts.

namespace semiwave::cli {

using json = nlohmann::ordered_json;

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string fmt6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

inline void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write " + tmp);
        f << text;
    }
    std::filesystem::rename(tmp, path);
}

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    void write(const std::filesystem::path& path) const {
        std::string out;
        for (std::size_t i = 0; i < columns.size(); ++i)
            out += (i ? "," : "") + columns[i];
        out += "\n";
        for (const auto& r : rows) {
            for (std::size_t i = 0; i < r.size(); ++i)
                out += (i ? "," : "") + fmt(r[i]);
            out += "\n";
        }
        write_text_atomic(path, out);
    }
};

/// Minimal line plot: hand-rolled polyline paths, no external tooling.
class SvgPlot {
public:
    SvgPlot(std::string title, std::string xlabel, std::string ylabel,
            bool log_y = false)
        : title_(std::move(title)), xlabel_(std::move(xlabel)),
          ylabel_(std::move(ylabel)), log_y_(log_y) {}

    void add_series(std::string label, std::vector<double> xs, std::vector<double> ys) {
        series_.push_back({std::move(label), std::move(xs), std::move(ys)});
    }

    void write(const std::filesystem::path& path) const {
        constexpr double W = 760, H = 480, ml = 70, mr = 20, mt = 40, mb = 50;
        double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
        for (const auto& s : series_) {
            for (std::size_t i = 0; i < s.xs.size(); ++i) {
                const double y = log_y_ ? (s.ys[i] > 0 ? std::log10(s.ys[i]) : NAN)
                                        : s.ys[i];
                if (!std::isfinite(y)) continue;
                xmin = std::min(xmin, s.xs[i]);
                xmax = std::max(xmax, s.xs[i]);
                ymin = std::min(ymin, y);
                ymax = std::max(ymax, y);
            }
        }
        if (!std::isfinite(xmin) || xmax <= xmin) { xmin = 0; xmax = 1; }
        if (!std::isfinite(ymin) || ymax <= ymin) { ymin = 0; ymax = 1; }
        auto X = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr); };
        auto Y = [&](double yv) {
            const double y = log_y_ ? std::log10(std::max(yv, 1e-300)) : yv;
            return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb);
        };
        static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                       "#ff7f0e"};
        std::string svg;
        svg += "<svg xmlns='http://www.w3.org/2000/svg' width='" + fmt6(W) +
               "' height='" + fmt6(H) + "'>\n";
        svg += "<rect width='100%' height='100%' fill='white'/>\n";
        svg += "<text x='" + fmt6(W / 2) + "' y='22' text-anchor='middle' font-size='15'>" +
               title_ + "</text>\n";
        // axes
        svg += "<line x1='" + fmt6(ml) + "' y1='" + fmt6(H - mb) + "' x2='" + fmt6(W - mr) +
               "' y2='" + fmt6(H - mb) + "' stroke='black'/>\n";
        svg += "<line x1='" + fmt6(ml) + "' y1='" + fmt6(mt) + "' x2='" + fmt6(ml) +
               "' y2='" + fmt6(H - mb) + "' stroke='black'/>\n";
        for (int i = 0; i <= 5; ++i) {
            const double fx = xmin + (xmax - xmin) * i / 5;
            const double fy = ymin + (ymax - ymin) * i / 5;
            svg += "<text x='" + fmt6(X(fx)) + "' y='" + fmt6(H - mb + 18) +
                   "' text-anchor='middle' font-size='11'>" + fmt6(fx) + "</text>\n";
            const std::string ylab = log_y_ ? ("1e" + fmt6(fy)) : fmt6(fy);
            svg += "<text x='" + fmt6(ml - 6) + "' y='" +
                   fmt6(H - mb - (H - mt - mb) * i / 5 + 4) +
                   "' text-anchor='end' font-size='11'>" + ylab + "</text>\n";
        }
        svg += "<text x='" + fmt6((W + ml) / 2) + "' y='" + fmt6(H - 12) +
               "' text-anchor='middle' font-size='12'>" + xlabel_ + "</text>\n";
        svg += "<text x='16' y='" + fmt6((H - mb + mt) / 2) +
               "' text-anchor='middle' font-size='12' transform='rotate(-90 16 " +
               fmt6((H - mb + mt) / 2) + ")'>" + ylabel_ + "</text>\n";
        for (std::size_t si = 0; si < series_.size(); ++si) {
            const auto& s = series_[si];
            std::string pts;
            for (std::size_t i = 0; i < s.xs.size(); ++i) {
                const double y = log_y_ && s.ys[i] <= 0 ? NAN : s.ys[i];
                if (!std::isfinite(y)) continue;
                pts += fmt6(X(s.xs[i])) + "," + fmt6(Y(s.ys[i])) + " ";
            }
            svg += "<polyline fill='none' stroke='" + std::string(colors[si % 5]) +
                   "' stroke-width='1.5' points='" + pts + "'/>\n";
            svg += "<text x='" + fmt6(W - mr - 4) + "' y='" + fmt6(mt + 16.0 * (si + 1)) +
                   "' text-anchor='end' font-size='12' fill='" + colors[si % 5] + "'>" +
                   s.label + "</text>\n";
        }
        svg += "</svg>\n";
        write_text_atomic(path, svg);
    }

private:
    struct Series {
        std::string label;
        std::vector<double> xs, ys;
    };
    std::string title_, xlabel_, ylabel_;
    bool log_y_ = false;
    std::vector<Series> series_;
};

/// Every assertion a run evaluates lands here exactly once; the manifest is
/// written atomically at run end even on failure.
class Manifest {
public:
    explicit Manifest(json config_echo) { doc_["config"] = std::move(config_echo); }

    void constant(const std::string& name, double value) {
        doc_["constants"][name] = value;
    }
    void constant(const std::string& name, const json& value) {
        doc_["constants"][name] = value;
    }

    void assert_that(const std::string& name, bool passed, double margin,
                     const std::string& detail = "") {
        json a;
        a["name"] = name;
        a["passed"] = passed;
        a["margin"] = margin;
        if (!detail.empty()) a["detail"] = detail;
        assertions_.push_back(std::move(a));
        if (!passed) any_failed_ = true;
    }

    void artifact(const std::string& path) { artifacts_.push_back(path); }
    void note(const std::string& key, const json& v) { doc_[key] = v; }
    bool any_failed() const { return any_failed_; }

    void write(const std::filesystem::path& path, double wall_clock_s, int exit_code) {
        doc_["assertions"] = assertions_;
        doc_["artifacts"] = artifacts_;
        doc_["wall_clock_s"] = wall_clock_s;
        doc_["exit_code"] = exit_code;
        write_text_atomic(path, doc_.dump(2) + "\n");
    }

private:
    json doc_;
    std::vector<json> assertions_;
    std::vector<std::string> artifacts_;
    bool any_failed_ = false;
};

}  // namespace semiwave::cli
