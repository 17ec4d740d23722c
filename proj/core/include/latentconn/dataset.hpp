#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "latentconn/types.hpp"

namespace latentconn {

enum class Group { asd, nc };

std::string_view to_string(Group g);
/// Accepts "ASD" / "NC" (case-insensitive); throws ValidationError otherwise.
Group parse_group(std::string_view s);

struct ManifestEntry {
  std::string subject_id;
  Group group = Group::nc;
  double age = 0.0;
  std::optional<double> fiq;
};

struct Manifest {
  std::vector<ManifestEntry> entries;
  bool has_fiq_column = false;
};

/// Columns subject_id, group, age, and optionally fiq (empty cell = missing).
Manifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, std::span<const ManifestEntry> entries);

struct SubjectRecord {
  std::string subject_id;
  Group group = Group::nc;
  double age = 0.0;
  std::optional<double> fiq;
  Vector edges;
};

/// Edge vector for one subject from a connectivity directory. Looks for
/// <id>.edges.csv (one row of edges), then <id>.matrix.csv or <id>.csv
/// (full square matrix, vectorized on load).
Vector load_subject_edges(const std::filesystem::path& dir, const std::string& subject_id);

std::vector<SubjectRecord> load_subjects(const Manifest& manifest, const std::filesystem::path& dir);

std::vector<Group> groups_of(std::span<const SubjectRecord> subjects);

}  // namespace latentconn
