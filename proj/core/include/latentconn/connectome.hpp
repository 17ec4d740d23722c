#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "latentconn/types.hpp"

namespace latentconn {

/// Number of cortical/subcortical regions in the AAL cerebral atlas.
inline constexpr Index kRegionCount = 90;
/// Upper-triangle edge count for kRegionCount nodes.
inline constexpr Index kEdgeCount = kRegionCount * (kRegionCount - 1) / 2;
/// Model input width: edges plus one normalized-age slot.
inline constexpr Index kInputWidth = kEdgeCount + 1;

/// Ordered region labels, standard AAL numbering 1..90 with alternating
/// left/right hemispheres (PreCG.L, PreCG.R, SFGdor.L, ...).
class RegionAtlas {
public:
  static const RegionAtlas& aal90();

  Index size() const { return static_cast<Index>(names_.size()); }
  const std::string& name(Index i) const { return names_.at(static_cast<std::size_t>(i)); }
  std::span<const std::string> names() const { return names_; }
  /// -1 when the label is unknown.
  Index index_of(std::string_view label) const;

private:
  RegionAtlas();
  std::vector<std::string> names_;
};

/// Label for region i of an n-node graph: the atlas label when n == 90,
/// otherwise "node<i>".
std::string region_label(Index i, Index n);

/// Sample Pearson correlation of two equal-length series.
///
/// Throws ShapeError on length mismatch or fewer than 3 samples, and
/// DegenerateSeriesError when either series is constant.
double pearson_corr(std::span<const double> x, std::span<const double> y);

/// Absolute-Pearson connectivity of a T x n region time-series matrix.
/// Diagonal is 0. Columns must be finite and non-constant.
Matrix build_connectivity(const Matrix& samples);

/// Edge index of pair (i, j) in row-major upper-triangle order; (j, i) maps
/// to the same edge. ShapeError for i == j or out-of-range nodes.
Index edge_index(Index i, Index j, Index n);
Index edge_count_for(Index nodes);
/// Inverse of edge_count_for; throws ShapeError for non-triangular lengths.
Index node_count_for(Index edges);

Vector vectorize_upper(const Matrix& m);
Matrix devectorize(const Vector& edges);

/// Node strength: off-diagonal row sums.
Vector fcs(const Matrix& m);

/// Age scaled to the edge range: age / 100 clamped to [0, 1].
/// Throws ValidationError outside [0, 120] years or for non-finite input.
double normalize_age(double age_years);
Vector assemble_input(const Vector& edges, double age_years);

/// Checks the connectivity-matrix invariants: square, symmetric, zero
/// diagonal, off-diagonal in [0, 1]. Throws ValidationError naming the
/// first violation.
void validate_connectivity(const Matrix& m);

}  // namespace latentconn
