#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace aicmss {

// Shortest decimal that parses back to the same double.
std::string format_double(double x);
double parse_double(const std::string& text);

// Simple comma-separated table; no quoting (all fields are numeric or plain words).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable parse_csv(const std::string& text);
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace aicmss
