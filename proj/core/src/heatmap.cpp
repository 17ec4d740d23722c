#include "latentconn/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <json.hpp>

#include "latentconn/csv.hpp"
#include "latentconn/errors.hpp"

namespace latentconn::heatmap {

namespace {

unsigned char channel(double v) {
  return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

void write_sidecar(const std::filesystem::path& path, const Scale& s, int cell_pixels, std::size_t width,
                   std::size_t height) {
  nlohmann::ordered_json j;
  j["image"] = path.filename().string();
  j["colormap"] = s.colormap == Colormap::diverging ? "diverging-blue-white-red" : "sequential-white-black";
  j["min"] = s.lo;
  j["max"] = s.hi;
  j["cell_pixels"] = cell_pixels;
  j["width"] = width;
  j["height"] = height;
  csv::write_file(path.string() + ".json", j.dump(2) + "\n");
}

std::string ppm_header(std::size_t w, std::size_t h) {
  return "P6\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
}

}  // namespace

Scale symmetric_scale(const Matrix& m) { return symmetric_scale(std::span(&m, 1)); }

Scale symmetric_scale(std::span<const Matrix> ms) {
  double bound = 0.0;
  for (const auto& m : ms)
    if (m.size() > 0) bound = std::max(bound, m.cwiseAbs().maxCoeff());
  if (!(bound > 0.0) || !std::isfinite(bound)) bound = 1.0;
  return {Colormap::diverging, -bound, bound};
}

Rgb color_of(double v, const Scale& s) {
  if (s.colormap == Colormap::sequential) {
    const double t = std::clamp((v - s.lo) / (s.hi - s.lo), 0.0, 1.0);
    const auto c = channel(1.0 - t);
    return {c, c, c};
  }
  const double bound = std::max(std::abs(s.lo), std::abs(s.hi));
  const double t = std::clamp(v / bound, -1.0, 1.0);
  if (t >= 0.0) return {255, channel(1.0 - t), channel(1.0 - t)};
  return {channel(1.0 + t), channel(1.0 + t), 255};
}

void write_ppm(const std::filesystem::path& path, const Matrix& m, const Scale& scale, int cell_pixels) {
  if (cell_pixels < 1) throw ValidationError("heatmap: cell size must be >= 1");
  const auto cp = static_cast<std::size_t>(cell_pixels);
  const std::size_t w = static_cast<std::size_t>(m.cols()) * cp;
  const std::size_t h = static_cast<std::size_t>(m.rows()) * cp;
  std::string out = ppm_header(w, h);
  out.reserve(out.size() + w * h * 3);
  for (Index r = 0; r < m.rows(); ++r) {
    for (std::size_t py = 0; py < cp; ++py) {
      for (Index c = 0; c < m.cols(); ++c) {
        const Rgb px = color_of(m(r, c), scale);
        for (std::size_t px_i = 0; px_i < cp; ++px_i) {
          out.push_back(static_cast<char>(px.r));
          out.push_back(static_cast<char>(px.g));
          out.push_back(static_cast<char>(px.b));
        }
      }
    }
  }
  csv::write_file(path, out);
  write_sidecar(path, scale, cell_pixels, w, h);
}

void write_contact_sheet(const std::filesystem::path& path, std::span<const Matrix> tiles, std::size_t columns,
                         const Scale& scale, int cell_pixels, int gap) {
  if (tiles.empty() || columns == 0) throw ValidationError("contact sheet: no tiles");
  if (cell_pixels < 1 || gap < 0) throw ValidationError("contact sheet: invalid geometry");
  const auto cp = static_cast<std::size_t>(cell_pixels);
  const auto g = static_cast<std::size_t>(gap);
  const std::size_t tile_w = static_cast<std::size_t>(tiles.front().cols()) * cp;
  const std::size_t tile_h = static_cast<std::size_t>(tiles.front().rows()) * cp;
  const std::size_t rows = (tiles.size() + columns - 1) / columns;
  const std::size_t w = columns * tile_w + (columns + 1) * g;
  const std::size_t h = rows * tile_h + (rows + 1) * g;
  std::vector<unsigned char> pixels(w * h * 3, 128);
  for (std::size_t t = 0; t < tiles.size(); ++t) {
    const auto& m = tiles[t];
    if (static_cast<std::size_t>(m.cols()) * cp != tile_w || static_cast<std::size_t>(m.rows()) * cp != tile_h) {
      throw ShapeError("contact sheet: tiles must share one shape");
    }
    const std::size_t x0 = g + (t % columns) * (tile_w + g);
    const std::size_t y0 = g + (t / columns) * (tile_h + g);
    for (std::size_t y = 0; y < tile_h; ++y) {
      for (std::size_t x = 0; x < tile_w; ++x) {
        const Rgb px = color_of(m(static_cast<Index>(y / cp), static_cast<Index>(x / cp)), scale);
        unsigned char* dst = &pixels[((y0 + y) * w + (x0 + x)) * 3];
        dst[0] = px.r;
        dst[1] = px.g;
        dst[2] = px.b;
      }
    }
  }
  std::string out = ppm_header(w, h);
  out.append(reinterpret_cast<const char*>(pixels.data()), pixels.size());
  csv::write_file(path, out);
  write_sidecar(path, scale, cell_pixels, w, h);
}

}  // namespace latentconn::heatmap
