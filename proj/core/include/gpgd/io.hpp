#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace gpgd {

std::string read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, const std::string& bytes);

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double v);

/// Minimal CSV handling: comma separated, no quoting. All artifacts written by
/// this library are plain numeric or identifier cells.
std::vector<std::string> split_csv_line(const std::string& line);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

}  // namespace gpgd
