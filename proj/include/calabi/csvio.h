#pragma once
// Canonical CSV output: UTF-8, comma-separated, '.' decimal point,
// scientific notation with 17 significant digits, '\n' line endings.
// Formatting is locale-independent and deterministic, so identical numeric
// content produces byte-identical files.

#include <string>
#include <vector>

namespace calabi {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;  // each row matches header size
};

// One numeric field: scientific, 17 significant digits ("%.16e").
std::string csv_field(double value);

// Full file contents (header line + rows).  Throws std::invalid_argument on
// a row width mismatch.
std::string csv_text(const CsvTable& table);

// Write csv_text to path, creating parent directories.  Throws
// std::runtime_error on I/O failure.
void write_csv(const std::string& path, const CsvTable& table);

// Minimal SVG line plot of log10|y_col| vs log10(x_col) for each y column;
// a derived artifact, never an input.
std::string svg_log_plot(const CsvTable& table, const std::string& title);

}  // namespace calabi
