#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "latentconn/analysis.hpp"
#include "latentconn/generator.hpp"
#include "latentconn/vae.hpp"

namespace latentconn::cli {

namespace fs = std::filesystem;

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const fs::path& path);

struct Rejection {
  std::string subject_id;
  std::string reason;
};

struct ConnectomeSummary {
  std::vector<std::string> accepted;
  std::vector<Rejection> rejected;
};

/// Every <id>.csv in timeseries_dir (T x 90, optional atlas header) becomes
/// <id>.matrix.csv and <id>.edges.csv in out_dir. Subjects that fail
/// validation are listed in out_dir/rejects.csv.
ConnectomeSummary cmd_connectome(const fs::path& timeseries_dir, const fs::path& out_dir);

/// Writes checkpoint.json and loss_history.csv under out_dir.
vae::TrainResult cmd_train(const fs::path& manifest, const fs::path& edges_dir, const vae::TrainConfig& config,
                           const fs::path& out_dir);

std::string loss_history_csv(const std::vector<vae::LossRecord>& history);

struct AnalyzeOptions {
  analysis::VarianceModel variance = analysis::VarianceModel::pooled;
  double alpha = 0.05;
};

/// Writes features.csv, stats.json, stats.txt and roc.csv under out_dir.
analysis::StatsReport cmd_analyze(const fs::path& checkpoint, const fs::path& manifest, const fs::path& edges_dir,
                                  const fs::path& out_dir, const AnalyzeOptions& options = {});

struct GenerateOptions {
  Index feature = 0;  // 0-based
  double direction = 1.0;
  std::optional<double> age;
  double threshold = generator::kDefaultFcsThreshold;
};

struct GenerateResult {
  generator::DeltaMatrix delta;
  generator::FcsDelta fcs;
};

/// Writes reference.csv, shifted.csv, delta.csv, delta.ppm (+ .json
/// sidecar) and fcs_delta.csv under out_dir.
GenerateResult cmd_generate(const fs::path& checkpoint, const GenerateOptions& options, const fs::path& out_dir);

struct ManifoldOptions {
  std::size_t steps = 5;
  double lo = -2.0;
  double hi = 2.0;
  std::optional<double> age;
};

/// Cell file name for lattice position (row, col) at (z1, z2).
std::string manifold_cell_name(std::size_t row, std::size_t col, double z1, double z2);

/// Writes cells/<cell>.csv, manifold.csv (index) and manifold.ppm (+ .json)
/// under out_dir.
generator::ManifoldGrid cmd_manifold(const fs::path& checkpoint, const ManifoldOptions& options,
                                     const fs::path& out_dir);

}  // namespace latentconn::cli
