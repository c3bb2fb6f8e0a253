#include "dsp/wav.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "common/error.hpp"

namespace svc::dsp {

namespace {

uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 | uint32_t(b[3]) << 24;
}

uint16_t read_u16(std::istream& in) {
  unsigned char b[2];
  in.read(reinterpret_cast<char*>(b), 2);
  return uint16_t(b[0]) | uint16_t(b[1]) << 8;
}

void write_u32(std::ostream& out, uint32_t v) {
  char b[4] = {char(v & 0xff), char(v >> 8 & 0xff), char(v >> 16 & 0xff), char(v >> 24 & 0xff)};
  out.write(b, 4);
}

void write_u16(std::ostream& out, uint16_t v) {
  char b[2] = {char(v & 0xff), char(v >> 8 & 0xff)};
  out.write(b, 2);
}

}  // namespace

AudioBuffer read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::InvalidInput, "cannot open wav file: " + path);

  char tag[4];
  in.read(tag, 4);
  if (!in || std::memcmp(tag, "RIFF", 4) != 0)
    raise(ErrorKind::InvalidInput, "not a RIFF file: " + path);
  read_u32(in);  // riff size
  in.read(tag, 4);
  if (!in || std::memcmp(tag, "WAVE", 4) != 0)
    raise(ErrorKind::InvalidInput, "not a WAVE file: " + path);

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  bool have_fmt = false;
  AudioBuffer audio;

  while (in.read(tag, 4)) {
    uint32_t chunk_size = read_u32(in);
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      format = read_u16(in);
      channels = read_u16(in);
      rate = read_u32(in);
      read_u32(in);  // byte rate
      read_u16(in);  // block align
      bits = read_u16(in);
      have_fmt = true;
      if (chunk_size > 16) in.seekg(chunk_size - 16, std::ios::cur);
    } else if (std::memcmp(tag, "data", 4) == 0) {
      if (!have_fmt) raise(ErrorKind::InvalidInput, "wav data before fmt chunk: " + path);
      if (format != 1 || bits != 16)
        raise(ErrorKind::InvalidInput, "wav must be PCM16: " + path);
      if (channels != 1) raise(ErrorKind::InvalidInput, "wav must be mono: " + path);
      if (rate != uint32_t(kDefaultSampleRate))
        raise(ErrorKind::InvalidInput,
              "wav must be 16 kHz (got " + std::to_string(rate) + "): " + path);
      const size_t n = chunk_size / 2;
      audio.sample_rate = int(rate);
      audio.samples.resize(n);
      std::vector<unsigned char> raw(chunk_size);
      in.read(reinterpret_cast<char*>(raw.data()), chunk_size);
      if (!in) raise(ErrorKind::InvalidInput, "truncated wav data: " + path);
      for (size_t i = 0; i < n; ++i) {
        int16_t s = int16_t(uint16_t(raw[2 * i]) | uint16_t(raw[2 * i + 1]) << 8);
        audio.samples[i] = float(s) / 32768.0f;
      }
      return audio;
    } else {
      in.seekg(chunk_size + (chunk_size & 1), std::ios::cur);
    }
  }
  raise(ErrorKind::InvalidInput, "wav has no data chunk: " + path);
}

void write_wav(const std::string& path, const AudioBuffer& audio) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorKind::InvalidInput, "cannot write wav file: " + path);

  const uint32_t data_size = uint32_t(audio.samples.size() * 2);
  out.write("RIFF", 4);
  write_u32(out, 36 + data_size);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  write_u32(out, 16);
  write_u16(out, 1);  // PCM
  write_u16(out, 1);  // mono
  write_u32(out, uint32_t(audio.sample_rate));
  write_u32(out, uint32_t(audio.sample_rate) * 2);
  write_u16(out, 2);
  write_u16(out, 16);
  out.write("data", 4);
  write_u32(out, data_size);

  for (float v : audio.samples) {
    float x = v;
    if (x > 1.0f) x = 1.0f;
    if (x < -1.0f) x = -1.0f;
    // round half away from zero
    long s = std::lround(double(x) * 32767.0);
    if (s > 32767) s = 32767;
    if (s < -32768) s = -32768;
    write_u16(out, uint16_t(int16_t(s)));
  }
  if (!out) raise(ErrorKind::InvalidInput, "failed writing wav file: " + path);
}

}  // namespace svc::dsp
