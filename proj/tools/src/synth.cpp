#include "latentconn/cli/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "latentconn/connectome.hpp"
#include "latentconn/csv.hpp"
#include "latentconn/errors.hpp"
#include "latentconn/parallel.hpp"
#include "latentconn/rng.hpp"

namespace latentconn::cli {

void SyntheticSpec::validate() const {
  if (subjects < 4) throw ValidationError("synth: need at least 4 subjects");
  const auto n_asd = static_cast<std::size_t>(std::lround(static_cast<double>(subjects) * asd_fraction));
  if (n_asd == 0 || n_asd == subjects) throw ValidationError("synth: both groups must be non-empty");
  if (!(noise_sd >= 0.0) || !(factor_sd >= 0.0) || !(iq_noise_sd >= 0.0) || !(age_sd >= 0.0)) {
    throw ValidationError("synth: standard deviations must be >= 0");
  }
  if (!(base_lo >= 0.0 && base_lo <= base_hi && base_hi <= 1.0)) {
    throw ValidationError("synth: base range must lie within [0,1]");
  }
  if (!(age_min >= 0.0 && age_min <= age_max && age_max <= 120.0)) {
    throw ValidationError("synth: age range must lie within [0,120]");
  }
  if (!(iq_missing_fraction >= 0.0 && iq_missing_fraction < 1.0)) {
    throw ValidationError("synth: IQ missing fraction must be in [0,1)");
  }
  planted_edges(*this);
}

std::vector<PlantedEdge> planted_edges(const SyntheticSpec& spec) {
  const auto& atlas = RegionAtlas::aal90();
  auto resolve = [&](const std::vector<std::string>& names) {
    std::vector<Index> idx;
    for (const auto& n : names) {
      const Index k = atlas.index_of(n);
      if (k < 0) throw ValidationError("synth: unknown region '" + n + "'");
      idx.push_back(k);
    }
    return idx;
  };
  const auto a = resolve(spec.planted_regions_a);
  const auto b = resolve(spec.planted_regions_b);
  std::set<std::pair<Index, Index>> pairs;
  for (Index i : a)
    for (Index j : b)
      if (i != j) pairs.insert({std::min(i, j), std::max(i, j)});
  std::vector<PlantedEdge> out;
  for (const auto& [i, j] : pairs) out.push_back({i, j, edge_index(i, j, kRegionCount), spec.loading});
  return out;
}

SyntheticCohort make_synthetic_cohort(const SyntheticSpec& spec) {
  spec.validate();
  SyntheticCohort cohort;
  cohort.planted = planted_edges(spec);
  Rng rng(spec.seed);

  Vector base(kEdgeCount);
  for (Index e = 0; e < kEdgeCount; ++e) base(e) = rng.uniform(spec.base_lo, spec.base_hi);
  Vector loadings = Vector::Zero(kEdgeCount);
  for (const auto& p : cohort.planted) loadings(p.edge) = p.loading;

  const auto n_asd = static_cast<std::size_t>(std::lround(static_cast<double>(spec.subjects) * spec.asd_fraction));
  std::vector<Group> groups(spec.subjects, Group::nc);
  std::fill(groups.begin(), groups.begin() + static_cast<std::ptrdiff_t>(n_asd), Group::asd);
  for (std::size_t i = groups.size(); i > 1; --i) std::swap(groups[i - 1], groups[rng.below(i)]);

  const int width = spec.subjects >= 10000 ? 5 : 4;
  for (std::size_t s = 0; s < spec.subjects; ++s) {
    char id[32];
    std::snprintf(id, sizeof id, "sub-%0*zu", width, s + 1);
    ManifestEntry entry;
    entry.subject_id = id;
    entry.group = groups[s];
    const double sign = groups[s] == Group::asd ? 1.0 : -1.0;
    const double factor = sign * spec.group_shift + spec.factor_sd * rng.normal();
    entry.age = std::clamp(rng.normal(spec.age_mean, spec.age_sd), spec.age_min, spec.age_max);
    entry.age = std::round(entry.age * 10.0) / 10.0;
    const double iq = spec.iq_mean + spec.iq_coupling * factor + spec.iq_noise_sd * rng.normal();
    if (rng.uniform() >= spec.iq_missing_fraction) entry.fiq = std::round(iq);

    Vector e(kEdgeCount);
    for (Index k = 0; k < kEdgeCount; ++k) {
      e(k) = std::clamp(base(k) + loadings(k) * factor + spec.noise_sd * rng.normal(), 0.0, 1.0);
    }
    cohort.manifest.push_back(std::move(entry));
    cohort.edges.push_back(std::move(e));
    cohort.factors.push_back(factor);
  }
  return cohort;
}

SyntheticCohort cmd_synth(const SyntheticSpec& spec, const std::filesystem::path& out_dir) {
  auto cohort = make_synthetic_cohort(spec);
  write_manifest(out_dir / "manifest.csv", cohort.manifest);
  const auto conn_dir = out_dir / "connectivity";
  parallel_for(cohort.manifest.size(), [&](std::size_t s) {
    csv::write_matrix(conn_dir / (cohort.manifest[s].subject_id + ".matrix.csv"), devectorize(cohort.edges[s]), 9);
  });

  const auto& atlas = RegionAtlas::aal90();
  std::string planted = "edge,i,j,region_i,region_j,loading\n";
  for (const auto& p : cohort.planted) {
    planted += std::to_string(p.edge) + "," + std::to_string(p.i) + "," + std::to_string(p.j) + "," +
               atlas.name(p.i) + "," + atlas.name(p.j) + "," + csv::format_number(p.loading, 17) + "\n";
  }
  csv::write_file(out_dir / "planted_edges.csv", planted);

  std::string factors = "subject_id,group,factor\n";
  for (std::size_t s = 0; s < cohort.manifest.size(); ++s) {
    factors += cohort.manifest[s].subject_id + "," + std::string(to_string(cohort.manifest[s].group)) + "," +
               csv::format_number(cohort.factors[s], 17) + "\n";
  }
  csv::write_file(out_dir / "factors.csv", factors);
  return cohort;
}

}  // namespace latentconn::cli
