#include "calabi/csvio.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace calabi {

std::string csv_field(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.16e", value);
    return std::string(buf);
}

std::string csv_text(const CsvTable& table) {
    std::string out;
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        if (i) out += ',';
        out += table.header[i];
    }
    out += '\n';
    for (const auto& row : table.rows) {
        if (row.size() != table.header.size()) {
            throw std::invalid_argument(
                "csv row width does not match the header");
        }
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += csv_field(row[i]);
        }
        out += '\n';
    }
    return out;
}

void write_csv(const std::string& path, const CsvTable& table) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) {
        std::filesystem::create_directories(p.parent_path());
    }
    std::ofstream out(p, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open for writing: " + path);
    }
    out << csv_text(table);
    if (!out) {
        throw std::runtime_error("write failed: " + path);
    }
}

std::string svg_log_plot(const CsvTable& table, const std::string& title) {
    const double W = 640.0, H = 480.0, M = 56.0;
    std::string svg =
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" "
        "height=\"480\" viewBox=\"0 0 640 480\">\n"
        "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n"
        "<text x=\"320\" y=\"24\" text-anchor=\"middle\" "
        "font-family=\"monospace\" font-size=\"14\">" +
        title + "</text>\n";
    if (table.header.size() < 2 || table.rows.empty()) {
        return svg + "</svg>\n";
    }

    // Collect log10 coordinates; skip non-positive x and zero y.
    const std::size_t cols = table.header.size();
    std::vector<std::vector<std::pair<double, double>>> series(cols - 1);
    double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
    double y_lo = x_lo, y_hi = -x_lo;
    for (const auto& row : table.rows) {
        if (!(row[0] > 0.0)) continue;
        const double lx = std::log10(row[0]);
        for (std::size_t c = 1; c < cols; ++c) {
            const double a = std::abs(row[c]);
            if (!(a > 0.0) || !std::isfinite(a)) continue;
            const double ly = std::log10(a);
            series[c - 1].push_back({lx, ly});
            x_lo = std::min(x_lo, lx);
            x_hi = std::max(x_hi, lx);
            y_lo = std::min(y_lo, ly);
            y_hi = std::max(y_hi, ly);
        }
    }
    if (!(x_hi > x_lo) || !(y_hi > y_lo)) {
        return svg + "</svg>\n";
    }

    static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c",
                                    "#9467bd", "#ff7f0e", "#8c564b",
                                    "#17becf", "#7f7f7f"};
    auto px = [&](double lx) {
        return M + (lx - x_lo) / (x_hi - x_lo) * (W - 2 * M);
    };
    auto py = [&](double ly) {
        return H - M - (ly - y_lo) / (y_hi - y_lo) * (H - 2 * M);
    };
    for (std::size_t s = 0; s < series.size(); ++s) {
        if (series[s].empty()) continue;
        std::string pts;
        char buf[64];
        for (const auto& [lx, ly] : series[s]) {
            std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", px(lx), py(ly));
            pts += buf;
        }
        svg += "<polyline fill=\"none\" stroke=\"";
        svg += kColors[s % 8];
        svg += "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
        char label[160];
        std::snprintf(label, sizeof(label),
                      "<text x=\"%.0f\" y=\"%.0f\" font-family=\"monospace\" "
                      "font-size=\"12\" fill=\"%s\">%s</text>\n",
                      M + 8.0, M + 16.0 * (s + 1), kColors[s % 8],
                      table.header[s + 1].c_str());
        svg += label;
    }
    char axes[256];
    std::snprintf(axes, sizeof(axes),
                  "<text x=\"%.0f\" y=\"%.0f\" font-family=\"monospace\" "
                  "font-size=\"12\">log10 %s</text>\n",
                  W / 2 - 30.0, H - 16.0, table.header[0].c_str());
    svg += axes;
    svg += "</svg>\n";
    return svg;
}

}  // namespace calabi
