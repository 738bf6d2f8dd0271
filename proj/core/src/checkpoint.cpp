#include "kglink/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "kglink/errors.hpp"

namespace kglink {

namespace {

constexpr char kMagic[4] = {'K', 'G', 'T', 'C'};

template <typename T>
void put_le(std::string& out, T value) {
  static_assert(std::is_integral_v<T>);
  for (size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((static_cast<uint64_t>(value) >> (8 * i)) & 0xff));
  }
}

void put_f64(std::string& out, double v) {
  put_le(out, std::bit_cast<uint64_t>(v));
}

void put_f32(std::string& out, float v) {
  put_le(out, std::bit_cast<uint32_t>(v));
}

class Reader {
 public:
  Reader(const char* data, size_t size) : data_(data), size_(size) {}

  template <typename T>
  T get_le() {
    need(sizeof(T));
    uint64_t v = 0;
    for (size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return static_cast<T>(v);
  }

  double get_f64() { return std::bit_cast<double>(get_le<uint64_t>()); }
  float get_f32() { return std::bit_cast<float>(get_le<uint32_t>()); }

  std::string get_bytes(size_t n) {
    need(n);
    std::string s(data_ + pos_, n);
    pos_ += n;
    return s;
  }

  bool exhausted() const { return pos_ == size_; }

 private:
  void need(size_t n) {
    if (pos_ + n > size_) {
      throw IoError("container: truncated file");
    }
  }
  const char* data_;
  size_t size_;
  size_t pos_ = 0;
};

}  // namespace

const Tensor* NamedTensors::find(const std::string& name) const {
  for (const auto& [n, t] : entries) {
    if (n == name) return &t;
  }
  return nullptr;
}

const Tensor& NamedTensors::at(const std::string& name) const {
  const Tensor* t = find(name);
  if (!t) throw IoError("container: missing tensor '" + name + "'");
  return *t;
}

void write_container(const std::filesystem::path& path, const NamedTensors& tensors,
                     Precision precision) {
  std::string buf;
  buf.append(kMagic, 4);
  put_le<uint32_t>(buf, kContainerVersion);
  put_le<uint64_t>(buf, tensors.entries.size());
  for (const auto& [name, t] : tensors.entries) {
    put_le<uint32_t>(buf, static_cast<uint32_t>(name.size()));
    buf.append(name);
    put_le<uint32_t>(buf, static_cast<uint32_t>(t.shape().size()));
    for (size_t e : t.shape()) put_le<uint64_t>(buf, e);
    buf.push_back(static_cast<char>(precision));
    if (precision == Precision::f64) {
      for (double v : t.data()) put_f64(buf, v);
    } else {
      for (double v : t.data()) put_f32(buf, static_cast<float>(v));
    }
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("container: cannot open " + path.string() + " for writing");
  os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!os) throw IoError("container: write failed for " + path.string());
}

NamedTensors read_container(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("container: cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(is)),
                    std::istreambuf_iterator<char>());
  Reader r(bytes.data(), bytes.size());

  std::string magic = r.get_bytes(4);
  if (std::memcmp(magic.data(), kMagic, 4) != 0) {
    throw IoError("container: bad magic in " + path.string());
  }
  const uint32_t version = r.get_le<uint32_t>();
  if (version != kContainerVersion) {
    throw IoError("container: unsupported version " + std::to_string(version) +
                  " in " + path.string());
  }
  const uint64_t count = r.get_le<uint64_t>();

  NamedTensors out;
  for (uint64_t k = 0; k < count; ++k) {
    const uint32_t name_len = r.get_le<uint32_t>();
    std::string name = r.get_bytes(name_len);
    const uint32_t rank = r.get_le<uint32_t>();
    std::vector<size_t> shape;
    size_t numel = 1;
    for (uint32_t i = 0; i < rank; ++i) {
      uint64_t e = r.get_le<uint64_t>();
      shape.push_back(static_cast<size_t>(e));
      numel *= static_cast<size_t>(e);
    }
    const auto prec = static_cast<Precision>(r.get_le<uint8_t>());
    if (prec != Precision::f64 && prec != Precision::f32) {
      throw IoError("container: unknown precision tag in entry '" + name + "'");
    }
    Tensor t(shape.size() == 2 ? shape[0] : 1, shape.size() == 2 ? shape[1] : numel);
    for (size_t i = 0; i < numel; ++i) {
      t.data()[i] = prec == Precision::f64 ? r.get_f64()
                                           : static_cast<double>(r.get_f32());
    }
    t.reshape(shape);
    out.add(std::move(name), std::move(t));
  }
  if (!r.exhausted()) {
    throw IoError("container: trailing bytes in " + path.string());
  }
  return out;
}

}  // namespace kglink
