#pragma once

// Scratch directories and whole-file reads for the harness tests.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace nlheat::testing {

/// Fresh empty directory under the system temp path.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("nlheat_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::filesystem::path source_path(const std::string& relative) {
  return std::filesystem::path(NLHEAT_SOURCE_DIR) / relative;
}

}  // namespace nlheat::testing
