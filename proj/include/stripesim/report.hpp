#pragma once

#include <string>
#include <vector>

namespace stripesim {

/// Minimal CSV table: a header row plus string cells.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::string& path);
void write_csv(const CsvTable& table, const std::string& path);

/// Concatenates tables with identical headers; a leading "source" column
/// records the originating file stem.
CsvTable merge_csv_tables(const std::vector<std::string>& paths);

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

/// Self-contained SVG line chart for the sweep curves.
std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<PlotSeries>& series);

/// Renders one chart per numeric metric column of a sweep CSV against its
/// first value column. Returns the written SVG paths.
std::vector<std::string> plot_sweep_csv(const std::string& csv_path, const std::string& out_dir);

}  // namespace stripesim
