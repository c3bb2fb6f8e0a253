#include "features/f0.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"

namespace svc::features {

int F0Contour::voiced_count() const {
  int n = 0;
  for (uint8_t v : voiced) n += v ? 1 : 0;
  return n;
}

double F0Contour::voiced_mean_hz() const {
  double sum = 0.0;
  int n = 0;
  for (size_t i = 0; i < f0_hz.size(); ++i) {
    if (voiced[i]) {
      sum += f0_hz[i];
      ++n;
    }
  }
  if (n == 0) raise(ErrorKind::InsufficientVoicing, "contour has no voiced frames");
  return sum / n;
}

F0Contour shift_f0(const F0Contour& source, const F0Contour& target) {
  const double delta = target.voiced_mean_hz() - source.voiced_mean_hz();
  F0Contour out;
  out.f0_hz.resize(source.frames());
  out.voiced = source.voiced;
  for (size_t i = 0; i < source.frames(); ++i) {
    if (source.voiced[i]) {
      out.f0_hz[i] = float(std::max(double(source.f0_hz[i]) + delta, kF0MinHz));
    } else {
      out.f0_hz[i] = 0.0f;
    }
  }
  return out;
}

int f0_bin(double hz) {
  const double span = std::log(kF0MaxHz / kF0MinHz);
  int bin = int(std::floor(kF0Bins * std::log(hz / kF0MinHz) / span));
  return std::clamp(bin, 0, kF0Bins - 1);
}

std::vector<int> f0_embedding_rows(const F0Contour& contour) {
  std::vector<int> rows(contour.frames());
  for (size_t i = 0; i < contour.frames(); ++i)
    rows[i] = contour.voiced[i] ? f0_bin(contour.f0_hz[i]) : kF0UnvoicedRow;
  return rows;
}

}  // namespace svc::features
