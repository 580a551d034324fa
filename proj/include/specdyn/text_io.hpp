#pragma once

// Plain-text numeric formats: CSV matrices (row-major, one row per line)
// and spectra (one value per line). Numbers use the shortest decimal form
// that round-trips, '.' separator, LF endings.

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace specdyn {

std::string format_double(double v);
double parse_double(const std::string& text);

void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix_csv(std::istream& in);

void write_spectrum(std::ostream& out, std::span<const double> values);
std::vector<double> read_spectrum(std::istream& in);

/// Writes through a sibling temp file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

}  // namespace specdyn
