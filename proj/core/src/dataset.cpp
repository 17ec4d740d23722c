#include "latentconn/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "latentconn/connectome.hpp"
#include "latentconn/csv.hpp"
#include "latentconn/errors.hpp"

namespace latentconn {

namespace fs = std::filesystem;

std::string_view to_string(Group g) { return g == Group::asd ? "ASD" : "NC"; }

Group parse_group(std::string_view s) {
  std::string upper(s);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (upper == "ASD") return Group::asd;
  if (upper == "NC") return Group::nc;
  throw ValidationError("unknown group label '" + std::string(s) + "' (expected ASD or NC)");
}

Manifest read_manifest(const fs::path& path) {
  const std::string text = csv::read_file(path);
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  auto where = [&] { return path.string() + ":" + std::to_string(line_no) + ": "; };

  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line != "\r") header = csv::split_line(line);
  }
  auto column = [&](std::string_view name) -> int {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
  };
  const int id_col = column("subject_id");
  const int group_col = column("group");
  const int age_col = column("age");
  const int fiq_col = column("fiq");
  if (id_col < 0 || group_col < 0 || age_col < 0) {
    throw ParseError(path.string() + ": manifest header must contain subject_id, group, age");
  }

  Manifest manifest;
  manifest.has_fiq_column = fiq_col >= 0;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = csv::split_line(line);
    if (fields.size() != header.size()) {
      throw ParseError(where() + "expected " + std::to_string(header.size()) + " fields");
    }
    ManifestEntry e;
    e.subject_id = fields[static_cast<std::size_t>(id_col)];
    if (e.subject_id.empty()) throw ParseError(where() + "empty subject_id");
    if (!seen.insert(e.subject_id).second) throw ParseError(where() + "duplicate subject_id " + e.subject_id);
    try {
      e.group = parse_group(fields[static_cast<std::size_t>(group_col)]);
    } catch (const ValidationError& err) {
      throw ParseError(where() + err.what());
    }
    if (!csv::parse_double(fields[static_cast<std::size_t>(age_col)], e.age)) {
      throw ParseError(where() + "invalid age");
    }
    if (fiq_col >= 0 && !fields[static_cast<std::size_t>(fiq_col)].empty()) {
      double fiq = 0.0;
      if (!csv::parse_double(fields[static_cast<std::size_t>(fiq_col)], fiq)) {
        throw ParseError(where() + "invalid fiq");
      }
      e.fiq = fiq;
    }
    manifest.entries.push_back(std::move(e));
  }
  return manifest;
}

void write_manifest(const fs::path& path, std::span<const ManifestEntry> entries) {
  std::string out = "subject_id,group,age,fiq\n";
  for (const auto& e : entries) {
    out += e.subject_id;
    out += ',';
    out += to_string(e.group);
    out += ',';
    out += csv::format_number(e.age, 9);
    out += ',';
    if (e.fiq) out += csv::format_number(*e.fiq, 9);
    out += '\n';
  }
  csv::write_file(path, out);
}

Vector load_subject_edges(const fs::path& dir, const std::string& subject_id) {
  const fs::path edges_path = dir / (subject_id + ".edges.csv");
  if (fs::exists(edges_path)) {
    const auto table = csv::read_numeric(edges_path);
    if (table.values.rows() != 1) {
      throw ParseError(edges_path.string() + ": edge file must hold exactly one row");
    }
    Vector v = table.values.row(0).transpose();
    node_count_for(v.size());
    return v;
  }
  for (const auto* suffix : {".matrix.csv", ".csv"}) {
    const fs::path matrix_path = dir / (subject_id + suffix);
    if (!fs::exists(matrix_path)) continue;
    const auto table = csv::read_numeric(matrix_path);
    if (table.values.rows() != table.values.cols()) {
      throw ParseError(matrix_path.string() + ": connectivity matrix is not square");
    }
    return vectorize_upper(table.values);
  }
  throw IoError("no connectivity file for subject '" + subject_id + "' in " + dir.string());
}

std::vector<SubjectRecord> load_subjects(const Manifest& manifest, const fs::path& dir) {
  std::vector<SubjectRecord> subjects;
  subjects.reserve(manifest.entries.size());
  for (const auto& e : manifest.entries) {
    SubjectRecord s{e.subject_id, e.group, e.age, e.fiq, load_subject_edges(dir, e.subject_id)};
    if (!subjects.empty() && s.edges.size() != subjects.front().edges.size()) {
      throw ShapeError("subject '" + e.subject_id + "' has " + std::to_string(s.edges.size()) +
                       " edges, expected " + std::to_string(subjects.front().edges.size()));
    }
    if ((s.edges.array() < 0.0).any() || (s.edges.array() > 1.0).any() || !s.edges.allFinite()) {
      throw ValidationError("subject '" + e.subject_id + "' has edge weights outside [0,1]");
    }
    subjects.push_back(std::move(s));
  }
  return subjects;
}

std::vector<Group> groups_of(std::span<const SubjectRecord> subjects) {
  std::vector<Group> g;
  g.reserve(subjects.size());
  for (const auto& s : subjects) g.push_back(s.group);
  return g;
}

}  // namespace latentconn
