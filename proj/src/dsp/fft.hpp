#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace svc::dsp {

// Iterative radix-2 complex FFT with precomputed twiddles. Sizes are powers
// of two; inverse() includes the 1/n factor.
class Fft {
 public:
  explicit Fft(size_t n);

  size_t size() const { return n_; }
  void forward(std::complex<double>* x) const;
  void inverse(std::complex<double>* x) const;

 private:
  void transform(std::complex<double>* x, bool invert) const;

  size_t n_;
  std::vector<size_t> rev_;
  std::vector<std::complex<double>> tw_;
};

}  // namespace svc::dsp
