#include "latentconn/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <openssl/evp.h>

#include "latentconn/connectome.hpp"
#include "latentconn/csv.hpp"
#include "latentconn/dataset.hpp"
#include "latentconn/errors.hpp"
#include "latentconn/heatmap.hpp"
#include "latentconn/parallel.hpp"

namespace latentconn::cli {

std::string sha256_file(const fs::path& path) {
  const std::string bytes = csv::read_file(path);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256 failed for " + path.string());
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int k = 0; k < len; ++k) {
    hex += kHex[digest[k] >> 4];
    hex += kHex[digest[k] & 0xF];
  }
  return hex;
}

namespace {

Matrix load_time_series(const fs::path& path) {
  auto table = csv::read_numeric(path);
  if (table.values.cols() != kRegionCount) {
    throw ShapeError("expected " + std::to_string(kRegionCount) + " region columns, found " +
                     std::to_string(table.values.cols()));
  }
  if (!table.header.empty()) {
    const auto& atlas = RegionAtlas::aal90();
    for (Index c = 0; c < kRegionCount; ++c) {
      if (table.header[static_cast<std::size_t>(c)] != atlas.name(c)) {
        throw ValidationError("header column " + std::to_string(c) + " is '" +
                              table.header[static_cast<std::size_t>(c)] + "', expected '" + atlas.name(c) + "'");
      }
    }
  }
  if (table.values.rows() < 3) throw ShapeError("need at least 3 time points");
  return std::move(table.values);
}

}  // namespace

ConnectomeSummary cmd_connectome(const fs::path& timeseries_dir, const fs::path& out_dir) {
  if (!fs::is_directory(timeseries_dir)) throw IoError("not a directory: " + timeseries_dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(timeseries_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(), [](const fs::path& a, const fs::path& b) { return a.stem() < b.stem(); });
  fs::create_directories(out_dir);

  std::vector<std::string> failure(files.size());
  parallel_for(files.size(), [&](std::size_t k) {
    const std::string id = files[k].stem().string();
    try {
      const Matrix m = build_connectivity(load_time_series(files[k]));
      csv::write_matrix(out_dir / (id + ".matrix.csv"), m, 9);
      csv::write_row(out_dir / (id + ".edges.csv"), vectorize_upper(m), 9);
    } catch (const ValidationError& e) {
      failure[k] = e.what();
      if (failure[k].empty()) failure[k] = "invalid input";
    }
  });

  ConnectomeSummary summary;
  std::string rejects = "subject_id,reason\n";
  for (std::size_t k = 0; k < files.size(); ++k) {
    const std::string id = files[k].stem().string();
    if (failure[k].empty()) {
      summary.accepted.push_back(id);
      continue;
    }
    std::string reason = failure[k];
    std::replace(reason.begin(), reason.end(), ',', ';');
    std::replace(reason.begin(), reason.end(), '\n', ' ');
    summary.rejected.push_back({id, reason});
    rejects += id + "," + reason + "\n";
  }
  csv::write_file(out_dir / "rejects.csv", rejects);
  return summary;
}

std::string loss_history_csv(const std::vector<vae::LossRecord>& history) {
  std::string out =
      "epoch,train_total,train_reconstruction,train_kl,validation_total,validation_reconstruction,validation_kl\n";
  for (const auto& r : history) {
    out += std::to_string(r.epoch);
    for (double v : {r.train_total, r.train_reconstruction, r.train_kl, r.validation_total,
                     r.validation_reconstruction, r.validation_kl}) {
      out += ',';
      out += csv::format_number(v, 17);
    }
    out += '\n';
  }
  return out;
}

vae::TrainResult cmd_train(const fs::path& manifest, const fs::path& edges_dir, const vae::TrainConfig& config,
                           const fs::path& out_dir) {
  const auto subjects = load_subjects(read_manifest(manifest), edges_dir);
  auto result = vae::train(subjects, config);
  vae::save_checkpoint(result.model, out_dir / "checkpoint.json");
  csv::write_file(out_dir / "loss_history.csv", loss_history_csv(result.history));
  return result;
}

analysis::StatsReport cmd_analyze(const fs::path& checkpoint, const fs::path& manifest_path,
                                  const fs::path& edges_dir, const fs::path& out_dir, const AnalyzeOptions& options) {
  const auto model = vae::load_checkpoint(checkpoint);
  const auto manifest = read_manifest(manifest_path);
  const auto subjects = load_subjects(manifest, edges_dir);
  if (!subjects.empty() && subjects.front().edges.size() != model.edge_count()) {
    throw ShapeError("edge count " + std::to_string(subjects.front().edges.size()) + " does not match checkpoint (" +
                     std::to_string(model.edge_count()) + ")");
  }
  const auto table = vae::extract_features(model, subjects);

  std::string features = "subject_id";
  for (Index j = 0; j < table.values.cols(); ++j) features += ",f" + std::to_string(j + 1);
  features += '\n';
  for (Index i = 0; i < table.values.rows(); ++i) {
    features += table.subject_ids[static_cast<std::size_t>(i)];
    for (Index j = 0; j < table.values.cols(); ++j) features += "," + csv::format_number(table.values(i, j), 17);
    features += '\n';
  }
  csv::write_file(out_dir / "features.csv", features);

  const auto labels = groups_of(subjects);
  std::vector<double> iq;
  if (manifest.has_fiq_column) {
    for (const auto& s : subjects) iq.push_back(s.fiq.value_or(std::numeric_limits<double>::quiet_NaN()));
  }
  auto report = analysis::analyze(table.values, labels, iq, options.variance, options.alpha);
  report.checkpoint_sha256 = sha256_file(checkpoint);
  csv::write_file(out_dir / "stats.json", analysis::report_json(report));
  csv::write_file(out_dir / "stats.txt", analysis::report_text(report));

  if (report.selected) {
    const Vector col = table.values.col(*report.selected);
    const auto curve = analysis::roc_curve(std::span(col.data(), static_cast<std::size_t>(col.size())), labels);
    std::string roc = "false_positive_rate,true_positive_rate\n";
    for (const auto& p : curve) {
      roc += csv::format_number(p.false_positive_rate, 17) + "," + csv::format_number(p.true_positive_rate, 17) + "\n";
    }
    csv::write_file(out_dir / "roc.csv", roc);
  }
  return report;
}

GenerateResult cmd_generate(const fs::path& checkpoint, const GenerateOptions& options, const fs::path& out_dir) {
  const auto model = vae::load_checkpoint(checkpoint);
  const double age = options.age.value_or(generator::default_age(model));
  GenerateResult r;
  r.delta = generator::feature_delta(model, options.feature, options.direction, age);
  const Matrix reference = generator::generate_matrix(model, generator::cohort_mean(model), age);
  const Matrix shifted = reference + r.delta.values;
  r.fcs = generator::fcs_delta(model, options.feature, options.direction, age, options.threshold);

  csv::write_matrix(out_dir / "reference.csv", reference, 9);
  csv::write_matrix(out_dir / "shifted.csv", shifted, 9);
  csv::write_matrix(out_dir / "delta.csv", r.delta.values, 9);
  heatmap::write_ppm(out_dir / "reference.ppm", reference, {heatmap::Colormap::sequential, 0.0, 1.0});
  heatmap::write_ppm(out_dir / "delta.ppm", r.delta.values, heatmap::symmetric_scale(r.delta.values));

  const Index n = r.fcs.delta.size();
  std::string fcs = "region,delta,annotated\n";
  for (Index i = 0; i < n; ++i) {
    const bool hit = std::find(r.fcs.annotated.begin(), r.fcs.annotated.end(), i) != r.fcs.annotated.end();
    fcs += region_label(i, n) + "," + csv::format_number(r.fcs.delta(i), 9) + "," + (hit ? "1" : "0") + "\n";
  }
  csv::write_file(out_dir / "fcs_delta.csv", fcs);
  return r;
}

std::string manifold_cell_name(std::size_t row, std::size_t col, double z1, double z2) {
  return "cell_r" + std::to_string(row) + "_c" + std::to_string(col) + "_z1=" + csv::format_number(z1, 6) +
         "_z2=" + csv::format_number(z2, 6);
}

generator::ManifoldGrid cmd_manifold(const fs::path& checkpoint, const ManifoldOptions& options,
                                     const fs::path& out_dir) {
  const auto model = vae::load_checkpoint(checkpoint);
  auto grid = generator::manifold_grid(model, options.lo, options.hi, options.steps, options.age);

  std::string index = "row,col,z1,z2,file\n";
  std::vector<Matrix> tiles;
  tiles.reserve(grid.cells.size());
  for (const auto& cell : grid.cells) {
    const std::string file = "cells/" + manifold_cell_name(cell.row, cell.col, cell.z1, cell.z2) + ".csv";
    index += std::to_string(cell.row) + "," + std::to_string(cell.col) + "," + csv::format_number(cell.z1, 17) + "," +
             csv::format_number(cell.z2, 17) + "," + file + "\n";
    tiles.push_back(cell.delta);
  }
  parallel_for(grid.cells.size(), [&](std::size_t k) {
    const auto& cell = grid.cells[k];
    csv::write_matrix(out_dir / "cells" / (manifold_cell_name(cell.row, cell.col, cell.z1, cell.z2) + ".csv"),
                      cell.delta, 9);
  });
  csv::write_file(out_dir / "manifold.csv", index);
  heatmap::write_contact_sheet(out_dir / "manifold.ppm", tiles, grid.steps, heatmap::symmetric_scale(tiles), 1, 4);
  return grid;
}

}  // namespace latentconn::cli
