#include "latentconn/generator.hpp"

#include <cmath>
#include <string>

#include "latentconn/connectome.hpp"
#include "latentconn/errors.hpp"
#include "latentconn/parallel.hpp"

namespace latentconn::generator {

Matrix generate_matrix(const vae::VaeModel& model, const Vector& z, double age_years) {
  return devectorize(vae::decode(model, z, age_years));
}

double default_age(const vae::VaeModel& model) {
  if (!model.cohort) throw UsageError("model has no cohort statistics; train or load a trained checkpoint");
  return model.cohort->mean_age;
}

Vector cohort_mean(const vae::VaeModel& model) {
  if (!model.cohort) throw UsageError("model has no cohort statistics; train or load a trained checkpoint");
  return model.cohort->mean;
}

namespace {

Vector shifted_latent(const vae::VaeModel& model, Index feature, double direction) {
  if (!model.cohort) throw UsageError("model has no cohort statistics; train or load a trained checkpoint");
  if (feature < 0 || feature >= model.latent_dim()) {
    throw ValidationError("feature index " + std::to_string(feature) + " outside [0, " +
                          std::to_string(model.latent_dim()) + ")");
  }
  if (!std::isfinite(direction)) throw ValidationError("direction must be finite");
  Vector z = model.cohort->mean;
  z(feature) = model.cohort->mean(feature) + direction * model.cohort->sd(feature);
  return z;
}

}  // namespace

DeltaMatrix feature_delta(const vae::VaeModel& model, Index feature, double direction, std::optional<double> age) {
  const Vector z = shifted_latent(model, feature, direction);
  const double a = age.value_or(default_age(model));
  DeltaMatrix d;
  d.values = generate_matrix(model, z, a) - generate_matrix(model, model.cohort->mean, a);
  d.feature = feature;
  d.shift_sd = direction;
  d.age = a;
  return d;
}

double lattice_coordinate(double lo, double hi, std::size_t steps, std::size_t k) {
  if (k + 1 == steps) return hi;
  return lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(steps - 1);
}

ManifoldGrid manifold_grid(const vae::VaeModel& model, double lo, double hi, std::size_t steps,
                           std::optional<double> age) {
  if (steps < 2) throw ValidationError("manifold: steps must be >= 2");
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
    throw ValidationError("manifold: range must satisfy lo < hi");
  }
  if (model.latent_dim() != 2) throw ValidationError("manifold: requires a 2-D latent space");
  ManifoldGrid grid;
  grid.lo = lo;
  grid.hi = hi;
  grid.steps = steps;
  grid.age = age.value_or(default_age(model));
  const Matrix origin = generate_matrix(model, Vector::Zero(2), grid.age);
  grid.cells.resize(steps * steps);
  parallel_for(grid.cells.size(), [&](std::size_t k) {
    auto& cell = grid.cells[k];
    cell.row = k / steps;
    cell.col = k % steps;
    cell.z1 = lattice_coordinate(lo, hi, steps, cell.row);
    cell.z2 = lattice_coordinate(lo, hi, steps, cell.col);
    cell.delta = generate_matrix(model, Vector{{cell.z1, cell.z2}}, grid.age) - origin;
  });
  return grid;
}

FcsDelta fcs_delta_between(const Matrix& shifted, const Matrix& reference, double threshold) {
  if (std::isnan(threshold) || threshold < 0.0) throw ValidationError("FCS threshold must be >= 0");
  FcsDelta f;
  f.threshold = threshold;
  f.delta = fcs(shifted) - fcs(reference);
  for (Index i = 0; i < f.delta.size(); ++i)
    if (std::abs(f.delta(i)) > threshold) f.annotated.push_back(i);
  return f;
}

FcsDelta fcs_delta(const vae::VaeModel& model, Index feature, double direction, std::optional<double> age,
                   double threshold) {
  const Vector z = shifted_latent(model, feature, direction);
  const double a = age.value_or(default_age(model));
  return fcs_delta_between(generate_matrix(model, z, a), generate_matrix(model, model.cohort->mean, a), threshold);
}

}  // namespace latentconn::generator
