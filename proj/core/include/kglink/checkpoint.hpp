#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "kglink/tensor.hpp"

namespace kglink {

// Named-tensor container file.
//
// Byte layout (all integers little-endian):
//   magic   "KGTC"                     4 bytes
//   version u32                        currently 1
//   count   u64                        number of entries
//   entry*  repeated `count` times:
//     name_len  u32
//     name      name_len bytes, UTF-8
//     rank      u32
//     extents   u64 * rank
//     precision u8                     0 = f64, 1 = f32
//     values    product(extents) raw little-endian IEEE 754 values
//
// Values are stored row-major. f32 entries are widened to f64 on load;
// writing with Precision::f32 narrows (lossy).
enum class Precision : uint8_t { f64 = 0, f32 = 1 };

struct NamedTensors {
  std::vector<std::pair<std::string, Tensor>> entries;

  void add(std::string name, Tensor t) {
    entries.emplace_back(std::move(name), std::move(t));
  }
  const Tensor* find(const std::string& name) const;
  const Tensor& at(const std::string& name) const;
};

void write_container(const std::filesystem::path& path, const NamedTensors& tensors,
                     Precision precision = Precision::f64);
NamedTensors read_container(const std::filesystem::path& path);

inline constexpr uint32_t kContainerVersion = 1;

}  // namespace kglink
