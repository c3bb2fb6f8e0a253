#include "nn/serialize.hpp"

#include <cstring>
#include <fstream>

#include "common/error.hpp"

namespace svc::nn {

namespace {

template <class T>
void write_le(std::ostream& out, T v) {
  unsigned char b[sizeof(T)];
  for (size_t i = 0; i < sizeof(T); ++i) b[i] = (unsigned char)(uint64_t(v) >> (8 * i));
  out.write(reinterpret_cast<char*>(b), sizeof(T));
}

template <class T>
T read_le(std::istream& in) {
  unsigned char b[sizeof(T)];
  in.read(reinterpret_cast<char*>(b), sizeof(T));
  uint64_t v = 0;
  for (size_t i = 0; i < sizeof(T); ++i) v |= uint64_t(b[i]) << (8 * i);
  return T(v);
}

}  // namespace

void write_rasv(const std::string& path, uint64_t global_step,
                const std::vector<NamedTensor>& tensors) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorKind::CheckpointError, "cannot write: " + path);
  out.write("RASV", 4);
  write_le<uint32_t>(out, 1);
  write_le<uint64_t>(out, global_step);
  write_le<uint32_t>(out, uint32_t(tensors.size()));
  for (const auto& t : tensors) {
    if (t.name.size() > 0xffff)
      raise(ErrorKind::CheckpointError, "tensor name too long: " + t.name);
    write_le<uint16_t>(out, uint16_t(t.name.size()));
    out.write(t.name.data(), std::streamsize(t.name.size()));
    write_le<uint8_t>(out, uint8_t(t.shape.rank));
    for (int i = 0; i < t.shape.rank; ++i) write_le<uint32_t>(out, uint32_t(t.shape.d[i]));
    static_assert(sizeof(float) == 4);
    for (float v : t.values) {
      uint32_t bits;
      std::memcpy(&bits, &v, 4);
      write_le<uint32_t>(out, bits);
    }
  }
  if (!out) raise(ErrorKind::CheckpointError, "failed writing: " + path);
}

std::pair<uint64_t, std::vector<NamedTensor>> read_rasv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::CheckpointError, "cannot open: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "RASV", 4) != 0)
    raise(ErrorKind::CheckpointError, "bad magic in: " + path);
  uint32_t version = read_le<uint32_t>(in);
  if (version != 1)
    raise(ErrorKind::CheckpointError, "unsupported version " + std::to_string(version));
  uint64_t step = read_le<uint64_t>(in);
  uint32_t count = read_le<uint32_t>(in);
  std::vector<NamedTensor> tensors;
  tensors.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    NamedTensor t;
    uint16_t name_len = read_le<uint16_t>(in);
    t.name.resize(name_len);
    in.read(t.name.data(), name_len);
    uint8_t rank = read_le<uint8_t>(in);
    if (rank > 3) raise(ErrorKind::CheckpointError, "tensor rank > 3 in: " + path);
    t.shape.rank = rank;
    for (int r = 0; r < rank; ++r) t.shape.d[r] = int(read_le<uint32_t>(in));
    t.values.resize(t.shape.numel());
    for (auto& v : t.values) {
      uint32_t bits = read_le<uint32_t>(in);
      std::memcpy(&v, &bits, 4);
    }
    if (!in) raise(ErrorKind::CheckpointError, "truncated file: " + path);
    tensors.push_back(std::move(t));
  }
  return {step, std::move(tensors)};
}

}  // namespace svc::nn
