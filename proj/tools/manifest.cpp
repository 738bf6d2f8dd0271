#include "manifest.hpp"

#include <fstream>

#include <json.hpp>

#include "kglink/errors.hpp"

namespace kglink::cli {

uint64_t fnv1a64_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  uint64_t hash = 1469598103934665603ULL;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      hash ^= static_cast<unsigned char>(buf[i]);
      hash *= 1099511628211ULL;
    }
    if (!in) break;
  }
  return hash;
}

std::string fnv1a64_hex(uint64_t digest) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(digest));
  return buf;
}

void RunManifest::add_input(const std::filesystem::path& path) {
  input_digests[path.string()] = fnv1a64_hex(fnv1a64_file(path));
}

void RunManifest::write(const std::filesystem::path& path) const {
  nlohmann::json j;
  j["tool_version"] = tool_version;
  j["command"] = command;
  j["seed"] = seed;
  j["config"] = config;
  j["input_digests"] = input_digests;
  j["artifacts"] = artifacts;
  std::ofstream out(path);
  if (!out) throw IoError("cannot write manifest " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace kglink::cli
