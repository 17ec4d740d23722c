#include "latentconn/connectome.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <string>
#include <utility>

#include "latentconn/errors.hpp"

namespace latentconn {

namespace {

constexpr std::array<std::string_view, 45> kAalRegions = {
    "PreCG",    "SFGdor", "ORBsup",    "MFG",  "ORBmid", "IFGoperc", "IFGtriang", "ORBinf",
    "ROL",      "SMA",    "OLF",       "SFGmed", "ORBsupmed", "REC", "INS",      "ACG",
    "DCG",      "PCG",    "HIP",       "PHG",  "AMYG",   "CAL",      "CUN",       "LING",
    "SOG",      "MOG",    "IOG",       "FFG",  "PoCG",   "SPG",      "IPL",       "SMG",
    "ANG",      "PCUN",   "PCL",       "CAU",  "PUT",    "PAL",      "THA",       "HES",
    "STG",      "TPOsup", "MTG",       "TPOmid", "ITG"};

bool is_constant(std::span<const double> x) {
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  return *lo == *hi;
}

}  // namespace

RegionAtlas::RegionAtlas() {
  names_.reserve(kRegionCount);
  for (auto region : kAalRegions) {
    names_.emplace_back(std::string(region) + ".L");
    names_.emplace_back(std::string(region) + ".R");
  }
}

const RegionAtlas& RegionAtlas::aal90() {
  static const RegionAtlas atlas;
  return atlas;
}

Index RegionAtlas::index_of(std::string_view label) const {
  const auto it = std::find(names_.begin(), names_.end(), label);
  return it == names_.end() ? -1 : static_cast<Index>(it - names_.begin());
}

std::string region_label(Index i, Index n) {
  if (n == kRegionCount) return RegionAtlas::aal90().name(i);
  return "node" + std::to_string(i);
}

double pearson_corr(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    std::ostringstream os;
    os << "pearson_corr: length mismatch (" << x.size() << " vs " << y.size() << ")";
    throw ShapeError(os.str());
  }
  if (x.size() < 3) throw ShapeError("pearson_corr: need at least 3 samples");
  if (is_constant(x) || is_constant(y)) {
    throw DegenerateSeriesError("pearson_corr: zero-variance series");
  }
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double dx = x[k] - mx;
    const double dy = y[k] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw DegenerateSeriesError("pearson_corr: zero-variance series");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

Matrix build_connectivity(const Matrix& samples) {
  const Index t = samples.rows();
  const Index n = samples.cols();
  if (t < 3) throw ShapeError("build_connectivity: need at least 3 time points");
  if (n < 2) throw ShapeError("build_connectivity: need at least 2 regions");
  if (!samples.allFinite()) throw ValidationError("build_connectivity: non-finite sample");

  // Columns are contiguous in column-major storage.
  for (Index c = 0; c < n; ++c) {
    std::span<const double> col(samples.col(c).data(), static_cast<std::size_t>(t));
    if (is_constant(col)) {
      throw DegenerateSeriesError("build_connectivity: constant time series in column " +
                                  std::to_string(c) + " (" + region_label(c, n) + ")");
    }
  }

  Matrix w = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    std::span<const double> xi(samples.col(i).data(), static_cast<std::size_t>(t));
    for (Index j = i + 1; j < n; ++j) {
      std::span<const double> xj(samples.col(j).data(), static_cast<std::size_t>(t));
      double r = 0.0;
      try {
        r = pearson_corr(xi, xj);
      } catch (const DegenerateSeriesError&) {
        throw DegenerateSeriesError("build_connectivity: zero-variance series in column " +
                                    std::to_string(i) + " or " + std::to_string(j));
      }
      w(i, j) = w(j, i) = std::abs(r);
    }
  }
  return w;
}

Index edge_count_for(Index nodes) { return nodes * (nodes - 1) / 2; }

Index node_count_for(Index edges) {
  if (edges < 1) throw ShapeError("edge vector is empty");
  const auto n = static_cast<Index>(std::llround((1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(edges))) / 2.0));
  if (edge_count_for(n) != edges) {
    throw ShapeError("edge vector length " + std::to_string(edges) + " is not a triangular number");
  }
  return n;
}

Index edge_index(Index i, Index j, Index n) {
  if (i > j) std::swap(i, j);
  if (i == j || i < 0 || j >= n) throw ShapeError("edge_index: no edge between " + std::to_string(i) + " and " + std::to_string(j));
  // Rows 0..i-1 contribute (n-1) + (n-2) + ... + (n-i) edges.
  return i * n - i * (i + 1) / 2 + (j - i - 1);
}

Vector vectorize_upper(const Matrix& m) {
  if (m.rows() != m.cols()) throw ShapeError("vectorize_upper: matrix is not square");
  const Index n = m.rows();
  Vector v(edge_count_for(n));
  Index k = 0;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) v(k++) = m(i, j);
  return v;
}

Matrix devectorize(const Vector& edges) {
  const Index n = node_count_for(edges.size());
  Matrix m = Matrix::Zero(n, n);
  Index k = 0;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) m(i, j) = m(j, i) = edges(k++);
  return m;
}

Vector fcs(const Matrix& m) {
  if (m.rows() != m.cols()) throw ShapeError("fcs: matrix is not square");
  Vector s = Vector::Zero(m.rows());
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      if (j != i) s(i) += m(i, j);
  return s;
}

double normalize_age(double age_years) {
  if (!std::isfinite(age_years) || age_years < 0.0 || age_years > 120.0) {
    std::ostringstream os;
    os << "age " << age_years << " outside [0, 120] years";
    throw ValidationError(os.str());
  }
  return std::clamp(age_years / 100.0, 0.0, 1.0);
}

Vector assemble_input(const Vector& edges, double age_years) {
  Vector input(edges.size() + 1);
  input.head(edges.size()) = edges;
  input(edges.size()) = normalize_age(age_years);
  return input;
}

void validate_connectivity(const Matrix& m) {
  if (m.rows() != m.cols()) throw ShapeError("connectivity matrix is not square");
  for (Index i = 0; i < m.rows(); ++i) {
    if (m(i, i) != 0.0) throw ValidationError("connectivity diagonal is nonzero at " + std::to_string(i));
    for (Index j = i + 1; j < m.cols(); ++j) {
      if (m(i, j) != m(j, i)) {
        throw ValidationError("connectivity matrix is asymmetric at (" + std::to_string(i) + "," +
                              std::to_string(j) + ")");
      }
      if (!(m(i, j) >= 0.0 && m(i, j) <= 1.0)) {
        throw ValidationError("connectivity weight outside [0,1] at (" + std::to_string(i) + "," +
                              std::to_string(j) + ")");
      }
    }
  }
}

}  // namespace latentconn
