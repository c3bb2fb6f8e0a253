#include "features/rafe.hpp"

#include <cstring>
#include <fstream>

#include "common/error.hpp"

namespace svc::features {

namespace {

uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 | uint32_t(b[3]) << 24;
}

void write_u32(std::ostream& out, uint32_t v) {
  char b[4] = {char(v & 0xff), char(v >> 8 & 0xff), char(v >> 16 & 0xff), char(v >> 24 & 0xff)};
  out.write(b, 4);
}

}  // namespace

RafeData read_rafe(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::FeatureFileError, "cannot open feature file: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "RAFE", 4) != 0)
    raise(ErrorKind::FeatureFileError, "bad magic in feature file: " + path);
  uint32_t version = read_u32(in);
  if (version != 1)
    raise(ErrorKind::FeatureFileError, "unsupported feature file version: " + path);
  RafeData d;
  d.frames = read_u32(in);
  d.dim = read_u32(in);
  if (d.dim == 0) raise(ErrorKind::FeatureFileError, "zero dim in feature file: " + path);
  const size_t n = d.rows() * d.dim;
  if (n > (size_t(1) << 30))
    raise(ErrorKind::FeatureFileError, "implausible feature file size: " + path);
  d.values.resize(n);
  in.read(reinterpret_cast<char*>(d.values.data()), std::streamsize(n * 4));
  if (!in) raise(ErrorKind::FeatureFileError, "truncated feature file: " + path);
  return d;
}

void write_rafe(const std::string& path, const RafeData& data) {
  if (data.values.size() != data.rows() * data.dim)
    raise(ErrorKind::FeatureFileError, "inconsistent feature payload for: " + path);
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorKind::FeatureFileError, "cannot write feature file: " + path);
  out.write("RAFE", 4);
  write_u32(out, 1);
  write_u32(out, data.frames);
  write_u32(out, data.dim);
  out.write(reinterpret_cast<const char*>(data.values.data()),
            std::streamsize(data.values.size() * 4));
  if (!out) raise(ErrorKind::FeatureFileError, "failed writing feature file: " + path);
}

}  // namespace svc::features
