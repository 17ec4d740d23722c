#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "latentconn/dataset.hpp"
#include "latentconn/types.hpp"

namespace latentconn::cli {

/// Synthetic cohort with one planted group-related factor.
///
/// Subject s with factor f_s gets
///   edge_e = clamp(base_e + loading * f_s * [e planted] + noise_sd * N(0,1), 0, 1)
/// where f_s = +-group_shift (ASD +, NC -) + factor_sd * N(0,1) and base_e
/// is drawn once per cohort from U(base_lo, base_hi). Planted edges connect
/// every region of planted_regions_a with every region of planted_regions_b.
struct SyntheticSpec {
  std::size_t subjects = 600;
  double asd_fraction = 0.5;
  double group_shift = 1.0;
  double factor_sd = 1.0;
  std::vector<std::string> planted_regions_a = {"SFGdor.L", "SFGdor.R", "MFG.L",       "MFG.R", "SFGmed.L",
                                                "SFGmed.R", "ORBsupmed.L", "ORBsupmed.R", "REC.L", "REC.R"};
  std::vector<std::string> planted_regions_b = {"SPG.L", "SPG.R", "IPL.L", "IPL.R",   "SMG.L",
                                                "SMG.R", "ANG.L", "ANG.R", "PCUN.L", "PCUN.R"};
  double loading = -0.25;
  double base_lo = 0.25;
  double base_hi = 0.65;
  double noise_sd = 0.05;
  double age_mean = 16.5;
  double age_sd = 7.5;
  double age_min = 6.5;
  double age_max = 58.0;
  double iq_mean = 108.0;
  double iq_noise_sd = 12.0;
  double iq_coupling = -5.0;  // IQ points per unit of factor
  double iq_missing_fraction = 0.1;
  std::uint64_t seed = 2017;

  void validate() const;
};

struct PlantedEdge {
  Index i = 0;
  Index j = 0;
  Index edge = 0;  // canonical edge index
  double loading = 0.0;
};

struct SyntheticCohort {
  std::vector<ManifestEntry> manifest;
  std::vector<Vector> edges;  // per subject, canonical order
  std::vector<double> factors;
  std::vector<PlantedEdge> planted;
};

std::vector<PlantedEdge> planted_edges(const SyntheticSpec& spec);

SyntheticCohort make_synthetic_cohort(const SyntheticSpec& spec);

/// Writes manifest.csv, connectivity/<id>.matrix.csv, planted_edges.csv and
/// factors.csv under out_dir.
SyntheticCohort cmd_synth(const SyntheticSpec& spec, const std::filesystem::path& out_dir);

}  // namespace latentconn::cli
