#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "latentconn/types.hpp"

namespace latentconn::csv {

/// Splits one CSV line on commas. Quoting is not supported; none of the
/// formats handled here carry commas inside fields.
std::vector<std::string> split_line(std::string_view line);

/// Strict double parse of a whole field (surrounding blanks allowed).
bool parse_double(std::string_view field, double& out);

/// "%.*g" formatting; 17 digits round-trips any double.
std::string format_number(double v, int significant_digits);

struct NumericTable {
  std::vector<std::string> header;  // empty when the file has no header row
  Matrix values;
};

/// Reads a rectangular numeric CSV. A first row containing any non-numeric
/// field is taken as the header. Throws ParseError with file:line context.
NumericTable read_numeric(const std::filesystem::path& path);

void write_matrix(const std::filesystem::path& path, const Matrix& m, int significant_digits = 9,
                  const std::vector<std::string>& header = {});
void write_row(const std::filesystem::path& path, const Vector& v, int significant_digits = 9);

/// Reads a whole file into memory; throws IoError.
std::string read_file(const std::filesystem::path& path);
/// Writes bytes, creating parent directories; throws IoError.
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace latentconn::csv
