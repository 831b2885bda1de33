#include "stripesim/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace stripesim {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read CSV: " + path);
    CsvTable table;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (first) {
            table.header = split_csv_line(line);
            first = false;
        } else {
            table.rows.push_back(split_csv_line(line));
        }
    }
    return table;
}

void write_csv(const CsvTable& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write CSV: " + path);
    auto emit = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out << ',';
            out << cells[i];
        }
        out << '\n';
    };
    emit(table.header);
    for (const auto& row : table.rows) emit(row);
}

CsvTable merge_csv_tables(const std::vector<std::string>& paths) {
    if (paths.empty()) throw std::invalid_argument("merge_csv_tables: no inputs");
    CsvTable merged;
    for (const std::string& path : paths) {
        CsvTable t = read_csv(path);
        if (merged.header.empty()) {
            merged.header = {"source"};
            merged.header.insert(merged.header.end(), t.header.begin(), t.header.end());
        } else {
            std::vector<std::string> expected(merged.header.begin() + 1, merged.header.end());
            if (t.header != expected) {
                throw std::runtime_error("merge_csv_tables: header mismatch in " + path);
            }
        }
        std::string stem = std::filesystem::path(path).stem().string();
        for (auto& row : t.rows) {
            std::vector<std::string> out_row{stem};
            out_row.insert(out_row.end(), row.begin(), row.end());
            merged.rows.push_back(std::move(out_row));
        }
    }
    return merged;
}

std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<PlotSeries>& series) {
    const double width = 640, height = 420;
    const double left = 64, right = 24, top = 40, bottom = 48;
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;

    double x_min = 0, x_max = 1, y_min = 0, y_max = 1;
    bool any = false;
    for (const PlotSeries& s : series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!any) {
                x_min = x_max = s.x[i];
                y_min = y_max = s.y[i];
                any = true;
            }
            x_min = std::min(x_min, s.x[i]);
            x_max = std::max(x_max, s.x[i]);
            y_min = std::min(y_min, s.y[i]);
            y_max = std::max(y_max, s.y[i]);
        }
    }
    if (x_max == x_min) x_max = x_min + 1.0;
    if (y_max == y_min) y_max = y_min + 1.0;
    y_min = std::min(y_min, 0.0);

    auto px = [&](double x) { return left + (x - x_min) / (x_max - x_min) * plot_w; };
    auto py = [&](double y) { return top + plot_h - (y - y_min) / (y_max - y_min) * plot_h; };

    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

    std::ostringstream svg;
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
        << "' viewBox='0 0 " << width << " " << height << "'>\n";
    svg << "<rect width='100%' height='100%' fill='white'/>\n";
    svg << "<text x='" << width / 2 << "' y='22' text-anchor='middle' font-size='15' "
        << "font-family='sans-serif'>" << title << "</text>\n";

    // Axes with four ticks each.
    svg << "<line x1='" << left << "' y1='" << top + plot_h << "' x2='" << left + plot_w
        << "' y2='" << top + plot_h << "' stroke='black'/>\n";
    svg << "<line x1='" << left << "' y1='" << top << "' x2='" << left << "' y2='" << top + plot_h
        << "' stroke='black'/>\n";
    for (int i = 0; i <= 4; ++i) {
        double tx = x_min + (x_max - x_min) * i / 4.0;
        double ty = y_min + (y_max - y_min) * i / 4.0;
        svg << "<text x='" << px(tx) << "' y='" << top + plot_h + 18
            << "' text-anchor='middle' font-size='11' font-family='sans-serif'>" << fmt(tx)
            << "</text>\n";
        svg << "<text x='" << left - 8 << "' y='" << py(ty) + 4
            << "' text-anchor='end' font-size='11' font-family='sans-serif'>" << fmt(ty)
            << "</text>\n";
        svg << "<line x1='" << px(tx) << "' y1='" << top + plot_h << "' x2='" << px(tx) << "' y2='"
            << top + plot_h + 4 << "' stroke='black'/>\n";
        svg << "<line x1='" << left - 4 << "' y1='" << py(ty) << "' x2='" << left << "' y2='"
            << py(ty) << "' stroke='black'/>\n";
    }
    svg << "<text x='" << left + plot_w / 2 << "' y='" << height - 10
        << "' text-anchor='middle' font-size='12' font-family='sans-serif'>" << x_label
        << "</text>\n";
    svg << "<text x='16' y='" << top + plot_h / 2
        << "' text-anchor='middle' font-size='12' font-family='sans-serif' transform='rotate(-90 "
        << "16 " << top + plot_h / 2 << ")'>" << y_label << "</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = colors[s % 5];
        svg << "<polyline fill='none' stroke='" << color << "' stroke-width='2' points='";
        for (std::size_t i = 0; i < series[s].x.size(); ++i) {
            svg << fmt(px(series[s].x[i])) << "," << fmt(py(series[s].y[i])) << " ";
        }
        svg << "'/>\n";
        for (std::size_t i = 0; i < series[s].x.size(); ++i) {
            svg << "<circle cx='" << fmt(px(series[s].x[i])) << "' cy='" << fmt(py(series[s].y[i]))
                << "' r='3' fill='" << color << "'/>\n";
        }
        svg << "<text x='" << left + plot_w - 6 << "' y='" << top + 14 + 16.0 * double(s)
            << "' text-anchor='end' font-size='12' font-family='sans-serif' fill='" << color
            << "'>" << series[s].label << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

std::vector<std::string> plot_sweep_csv(const std::string& csv_path, const std::string& out_dir) {
    CsvTable table = read_csv(csv_path);
    if (table.header.size() < 3 || table.header[1] != "value") {
        throw std::runtime_error("plot_sweep_csv: not a sweep CSV: " + csv_path);
    }

    std::filesystem::create_directories(out_dir);
    std::string axis = table.rows.empty() ? "value" : table.rows.front()[0];
    std::string stem = std::filesystem::path(csv_path).stem().string();

    std::vector<std::string> written;
    for (std::size_t col = 3; col < table.header.size(); ++col) {
        PlotSeries series;
        series.label = table.header[col];
        for (const auto& row : table.rows) {
            if (col >= row.size() || row[col].empty()) continue;
            series.x.push_back(std::strtod(row[1].c_str(), nullptr));
            series.y.push_back(std::strtod(row[col].c_str(), nullptr));
        }
        if (series.x.empty()) continue;
        std::string svg = svg_line_chart(stem + ": " + series.label + " vs " + axis, axis,
                                         series.label, {series});
        std::string path =
            (std::filesystem::path(out_dir) / (stem + "_" + series.label + ".svg")).string();
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write SVG: " + path);
        out << svg;
        written.push_back(path);
    }
    return written;
}

}  // namespace stripesim
