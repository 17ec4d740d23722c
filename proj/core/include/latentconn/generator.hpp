#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "latentconn/types.hpp"
#include "latentconn/vae.hpp"

namespace latentconn::generator {

inline constexpr double kDefaultFcsThreshold = 1.5;

/// Signed difference of two generated matrices.
struct DeltaMatrix {
  Matrix values;
  Index feature = 0;
  double shift_sd = 0.0;  // shift of the feature, in cohort SD units
  double age = 0.0;
};

/// devectorize(decode(model, z, age)): symmetric, zero diagonal.
Matrix generate_matrix(const vae::VaeModel& model, const Vector& z, double age_years);

/// Cohort mean age; throws UsageError when the model has no cohort stats.
double default_age(const vae::VaeModel& model);
/// Cohort latent means; throws UsageError when absent.
Vector cohort_mean(const vae::VaeModel& model);

/// generate(z with z_i = mu_i + direction * sigma_i) - generate(mu).
/// Age defaults to the cohort mean age.
DeltaMatrix feature_delta(const vae::VaeModel& model, Index feature, double direction,
                          std::optional<double> age = std::nullopt);

struct ManifoldCell {
  std::size_t row = 0;  // index along the first latent axis
  std::size_t col = 0;  // index along the second latent axis
  double z1 = 0.0;
  double z2 = 0.0;
  Matrix delta;  // generate((z1, z2)) - generate((0, 0))
};

struct ManifoldGrid {
  double lo = -2.0;
  double hi = 2.0;
  std::size_t steps = 0;
  double age = 0.0;
  std::vector<ManifoldCell> cells;  // row-major: row * steps + col

  const ManifoldCell& at(std::size_t row, std::size_t col) const { return cells[row * steps + col]; }
};

/// Evenly spaced lattice coordinate k of `steps` points in [lo, hi].
double lattice_coordinate(double lo, double hi, std::size_t steps, std::size_t k);

/// Latent manifold over absolute coordinates. Requires a 2-D latent space.
ManifoldGrid manifold_grid(const vae::VaeModel& model, double lo, double hi, std::size_t steps,
                           std::optional<double> age = std::nullopt);

struct FcsDelta {
  Vector delta;                    // per-region strength change
  std::vector<Index> annotated;    // regions with |delta| > threshold, ascending
  double threshold = kDefaultFcsThreshold;
};

FcsDelta fcs_delta(const vae::VaeModel& model, Index feature, double direction,
                   std::optional<double> age = std::nullopt, double threshold = kDefaultFcsThreshold);

/// fcs(shifted) - fcs(reference) for two already generated matrices.
FcsDelta fcs_delta_between(const Matrix& shifted, const Matrix& reference, double threshold);

}  // namespace latentconn::generator
