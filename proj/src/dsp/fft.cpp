#include "dsp/fft.hpp"

#include <cmath>

#include "common/error.hpp"

namespace svc::dsp {

Fft::Fft(size_t n) : n_(n) {
  if (n == 0 || (n & (n - 1)) != 0)
    raise(ErrorKind::InvalidConfig, "FFT size must be a power of two, got " + std::to_string(n));
  // bit-reversal permutation
  rev_.resize(n);
  size_t log2n = 0;
  while ((size_t(1) << log2n) < n) ++log2n;
  for (size_t i = 0; i < n; ++i) {
    size_t r = 0;
    for (size_t b = 0; b < log2n; ++b)
      if (i & (size_t(1) << b)) r |= size_t(1) << (log2n - 1 - b);
    rev_[i] = r;
  }
  // twiddles for the largest stage; smaller stages stride through this table
  tw_.resize(n / 2);
  for (size_t k = 0; k < n / 2; ++k) {
    double ang = -2.0 * M_PI * double(k) / double(n);
    tw_[k] = {std::cos(ang), std::sin(ang)};
  }
}

void Fft::forward(std::complex<double>* x) const { transform(x, false); }

void Fft::inverse(std::complex<double>* x) const {
  transform(x, true);
  const double inv = 1.0 / double(n_);
  for (size_t i = 0; i < n_; ++i) x[i] *= inv;
}

void Fft::transform(std::complex<double>* x, bool invert) const {
  const size_t n = n_;
  for (size_t i = 0; i < n; ++i) {
    size_t j = rev_[i];
    if (i < j) std::swap(x[i], x[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const size_t half = len >> 1;
    const size_t stride = n / len;
    for (size_t i = 0; i < n; i += len) {
      for (size_t k = 0; k < half; ++k) {
        std::complex<double> w = tw_[k * stride];
        if (invert) w = std::conj(w);
        std::complex<double> u = x[i + k];
        std::complex<double> v = x[i + k + half] * w;
        x[i + k] = u + v;
        x[i + k + half] = u - v;
      }
    }
  }
}

}  // namespace svc::dsp
