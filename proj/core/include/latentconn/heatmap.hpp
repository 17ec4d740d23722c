#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "latentconn/types.hpp"

namespace latentconn::heatmap {

/// Colormaps, both piecewise linear over 8-bit RGB:
///  diverging:  -bound -> (0,0,255), 0 -> (255,255,255), +bound -> (255,0,0)
///  sequential:  lo -> (255,255,255), hi -> (0,0,0)
/// Values outside the scale are clamped.
enum class Colormap { diverging, sequential };

struct Scale {
  Colormap colormap = Colormap::diverging;
  double lo = -1.0;
  double hi = 1.0;
};

/// Symmetric diverging scale +-max|v|; +-1 for an all-zero matrix.
Scale symmetric_scale(const Matrix& m);
Scale symmetric_scale(std::span<const Matrix> ms);

struct Rgb {
  unsigned char r, g, b;
};

Rgb color_of(double v, const Scale& scale);

/// Binary PPM (P6), one cell_pixels x cell_pixels square per entry, plus a
/// JSON sidecar at <path>.json recording the scale.
void write_ppm(const std::filesystem::path& path, const Matrix& m, const Scale& scale, int cell_pixels = 4);

/// Grid of matrices (row-major, `columns` per row) separated by `gap`
/// grey pixels, one shared scale.
void write_contact_sheet(const std::filesystem::path& path, std::span<const Matrix> tiles, std::size_t columns,
                         const Scale& scale, int cell_pixels = 1, int gap = 4);

}  // namespace latentconn::heatmap
