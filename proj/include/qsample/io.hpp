#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "qsample/kernels.hpp"
#include "qsample/nystrom.hpp"
#include "qsample/sampling.hpp"

namespace qsample::io {

/// %.17g: enough digits to round-trip every double.
std::string fmt(double v);

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial file. Throws std::runtime_error.
void write_atomic(const std::string& path, const std::string& content);

/// Numeric CSV rows. Blank lines and lines starting with '#' are skipped; a
/// first line that does not parse is taken as a header. Every row must have
/// one of the allowed widths, the same for all rows.
struct NumericCsv {
  std::size_t width = 0;
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> line_numbers;
};

/// Throws InputError naming the file, row (1-based line) and column.
NumericCsv read_numeric_csv(const std::string& path, const std::vector<std::size_t>& widths);

/// `x1[,x2],w,x,y,z`
SampledSignal read_samples_csv(const std::string& path);
/// `x1[,x2]`; the width must match dim.
std::vector<Point> read_points_csv(const std::string& path, int dim);

/// `x1[,x2],w,x,y,z` with a header row.
std::string points_values_csv(int dim, const std::vector<Point>& points, const std::vector<Quaternion>& values);
/// `node_index,x1[,x2],n,w,x,y,z`: phi_n at every grid node.
std::string eigenfunctions_csv(const PsqwsBasis& basis);

/// Sorted spectrum as JSON text.
std::string spectrum_json(const PsqwsBasis& basis, double kernel_trace);

}  // namespace qsample::io
