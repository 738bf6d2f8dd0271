#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace kglink::cli {

// Everything needed to reproduce a run: the fully resolved configuration,
// digests of every input file, the seed, and the produced artifacts.
struct RunManifest {
  std::string tool_version;
  std::string command;
  uint64_t seed = 0;
  std::map<std::string, std::string> config;
  std::map<std::string, std::string> input_digests;  // path -> fnv1a64 hex
  std::vector<std::string> artifacts;

  void add_input(const std::filesystem::path& path);
  void write(const std::filesystem::path& path) const;
};

uint64_t fnv1a64_file(const std::filesystem::path& path);
std::string fnv1a64_hex(uint64_t digest);

}  // namespace kglink::cli
