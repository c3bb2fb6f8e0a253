#pragma once

#include <cstddef>
#include <cstdint>

// Dense array kernels behind the nn and dsp hot loops. Every kernel exists as
// a scalar reference implementation and, on x86-64 with AVX2+FMA, a SIMD
// variant selected once at startup. The scalar and SIMD variants are
// equivalence-tested against each other; elementwise kernels match bitwise,
// reductions and fused updates match to tight relative tolerance (FMA and
// lane-order reassociation change rounding).
//
// Reductions accumulate in double regardless of element type so results do
// not depend on how lanes are partitioned.

namespace svc::kernels {

enum class Isa { scalar, avx2 };

Isa active_isa();
// Test hook. Forcing an unavailable ISA falls back to scalar.
void force_isa(Isa isa);
bool cpu_supports_avx2();

template <class S>
struct OpTable {
  void (*add)(S* dst, const S* a, const S* b, size_t n);
  void (*sub)(S* dst, const S* a, const S* b, size_t n);
  void (*mul)(S* dst, const S* a, const S* b, size_t n);
  void (*div)(S* dst, const S* a, const S* b, size_t n);
  void (*scale)(S* dst, const S* a, S k, size_t n);       // dst = k*a
  void (*axpy)(S* dst, S k, const S* x, size_t n);        // dst += k*x
  double (*dot)(const S* a, const S* b, size_t n);
  // native-precision accumulation (hot conv path; reductions stay double)
  S (*dot_native)(const S* a, const S* b, size_t n);
  double (*sum)(const S* a, size_t n);
  double (*sumsq)(const S* a, size_t n);
  S (*max_abs)(const S* a, size_t n);
  void (*leaky_relu)(S* dst, const S* a, S slope, size_t n);
  void (*clamp)(S* dst, const S* a, S lo, S hi, size_t n);
  bool (*all_finite)(const S* a, size_t n);
  // Bias-corrected Adam step on one parameter array.
  void (*adam_update)(S* p, S* m, S* v, const S* g, size_t n, S lr, S beta1,
                      S beta2, S eps, S bias_c1, S bias_c2);
  // Fused filter accumulation: dst[t] += sum_j w[j] * x[t + off[j]].
  // Caller guarantees every x[t + off[j]] read is in bounds.
  void (*conv_taps)(S* dst, const S* x, const S* w, const int* off, int taps, size_t n);
  // Per-tap dots in one pass: out[j] += dot(g, x + off[j]) over n elements.
  void (*dot_taps)(const S* g, const S* x, const int* off, int taps, size_t n,
                   double* out);
  // dst += a[0]*x0 + a[1]*x1 + a[2]*x2 + a[3]*x3 (x rows strided from x0)
  void (*axpy4)(S* dst, const S* a, const S* x0, size_t row_stride, size_t n);
};

template <class S>
const OpTable<S>& ops();

// Convenience wrappers.
template <class S> inline void add(S* d, const S* a, const S* b, size_t n) { ops<S>().add(d, a, b, n); }
template <class S> inline void sub(S* d, const S* a, const S* b, size_t n) { ops<S>().sub(d, a, b, n); }
template <class S> inline void mul(S* d, const S* a, const S* b, size_t n) { ops<S>().mul(d, a, b, n); }
template <class S> inline void div(S* d, const S* a, const S* b, size_t n) { ops<S>().div(d, a, b, n); }
template <class S> inline void scale(S* d, const S* a, S k, size_t n) { ops<S>().scale(d, a, k, n); }
template <class S> inline void axpy(S* d, S k, const S* x, size_t n) { ops<S>().axpy(d, k, x, n); }
template <class S> inline double dot(const S* a, const S* b, size_t n) { return ops<S>().dot(a, b, n); }
template <class S> inline S dot_native(const S* a, const S* b, size_t n) { return ops<S>().dot_native(a, b, n); }
template <class S> inline double sum(const S* a, size_t n) { return ops<S>().sum(a, n); }
template <class S> inline double sumsq(const S* a, size_t n) { return ops<S>().sumsq(a, n); }
template <class S> inline S max_abs(const S* a, size_t n) { return ops<S>().max_abs(a, n); }
template <class S> inline void leaky_relu(S* d, const S* a, S s, size_t n) { ops<S>().leaky_relu(d, a, s, n); }
template <class S> inline void clamp(S* d, const S* a, S lo, S hi, size_t n) { ops<S>().clamp(d, a, lo, hi, n); }
template <class S> inline bool all_finite(const S* a, size_t n) { return ops<S>().all_finite(a, n); }
template <class S>
inline void adam_update(S* p, S* m, S* v, const S* g, size_t n, S lr, S b1, S b2, S eps, S c1, S c2) {
  ops<S>().adam_update(p, m, v, g, n, lr, b1, b2, eps, c1, c2);
}
template <class S>
inline void conv_taps(S* d, const S* x, const S* w, const int* off, int taps, size_t n) {
  ops<S>().conv_taps(d, x, w, off, taps, n);
}
template <class S>
inline void dot_taps(const S* g, const S* x, const int* off, int taps, size_t n, double* out) {
  ops<S>().dot_taps(g, x, off, taps, n, out);
}
template <class S>
inline void axpy4(S* d, const S* a, const S* x0, size_t row_stride, size_t n) {
  ops<S>().axpy4(d, a, x0, row_stride, n);
}

// Internal: per-ISA tables, defined in kernels_scalar.cpp / kernels_avx2.cpp.
namespace detail {
template <class S> const OpTable<S>& scalar_table();
#if defined(SVC_HAVE_AVX2_BUILD)
template <class S> const OpTable<S>& avx2_table();
#endif
}  // namespace detail

}  // namespace svc::kernels
