#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace tourexp {

inline constexpr const char* kToolVersion = "0.1.0";

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Writes via a temp file in the same directory plus rename, so readers
/// never observe a partial file.
void atomic_write(const std::filesystem::path& path, const std::string& content);

/// Record of one CLI run: the command, its inputs and parameters, and every
/// output file with a content digest. Written last, so a manifest's presence
/// implies the run completed. Paths are stored relative to the output
/// directory and no timestamps are recorded, keeping reruns byte-identical.
struct RunManifest {
  std::string command;
  std::string tool_version = kToolVersion;
  std::map<std::string, std::string> inputs;      // label -> path as given
  std::map<std::string, std::string> parameters;  // flag -> rendered value

  struct Output {
    std::string path;  // relative to the manifest directory
    std::string sha256;
    std::uint64_t bytes = 0;
  };
  std::vector<Output> outputs;  // sorted by path before writing

  void add_output(const std::filesystem::path& out_dir, const std::filesystem::path& file);
  std::string to_json() const;
  std::filesystem::path write(const std::filesystem::path& out_dir) const;
};

}  // namespace tourexp
