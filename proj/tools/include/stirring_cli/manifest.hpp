#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace stirring::cli {

/// Hex SHA-256 of a byte string or file.
std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Run record written next to the outputs: config hash, tool version,
/// per-file checksums and wall-clock time per phase.
class Manifest {
 public:
  Manifest(std::string command, std::string experiment, const std::string& config_text, int threads);

  /// Records the file; it must already exist.
  void add_file(const std::filesystem::path& path);
  void add_timing(const std::string& phase, double seconds);
  void add_note(const std::string& key, const std::string& value);

  /// Writes manifest.json into `dir`.
  void write(const std::filesystem::path& dir) const;

 private:
  std::string command_;
  std::string experiment_;
  std::string config_hash_;
  int threads_;
  std::vector<std::pair<std::string, std::string>> files_;
  std::vector<std::pair<std::string, double>> timings_;
  std::vector<std::pair<std::string, std::string>> notes_;
};

/// Wall-clock stopwatch.
class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - start_).count();
    start_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace stirring::cli
