#include <immintrin.h>

#include <cfloat>
#include <cmath>

#include "kernels/kernels.hpp"

// AVX2+FMA variants. This translation unit is the only one compiled with
// -mavx2 -mfma; it is reached only after the runtime dispatcher has checked
// cpuid. Elementwise kernels perform the same IEEE operations as the scalar
// reference and therefore match it bitwise; reductions use double
// accumulators split across lanes and match to relative tolerance.

namespace svc::kernels::detail {

namespace {

// ---------------------------------------------------------------- float ----

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

void f_add(float* d, const float* a, const float* b, size_t n) {
  size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(d + i, _mm256_add_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  for (; i < n; ++i) d[i] = a[i] + b[i];
}

void f_sub(float* d, const float* a, const float* b, size_t n) {
  size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(d + i, _mm256_sub_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  for (; i < n; ++i) d[i] = a[i] - b[i];
}

void f_mul(float* d, const float* a, const float* b, size_t n) {
  size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(d + i, _mm256_mul_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  for (; i < n; ++i) d[i] = a[i] * b[i];
}

void f_div(float* d, const float* a, const float* b, size_t n) {
  size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(d + i, _mm256_div_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  for (; i < n; ++i) d[i] = a[i] / b[i];
}

void f_scale(float* d, const float* a, float k, size_t n) {
  __m256 kv = _mm256_set1_ps(k);
  size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(d + i, _mm256_mul_ps(kv, _mm256_loadu_ps(a + i)));
  for (; i < n; ++i) d[i] = k * a[i];
}

void f_axpy(float* d, float k, const float* x, size_t n) {
  __m256 kv = _mm256_set1_ps(k);
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 acc = _mm256_loadu_ps(d + i);
    acc = _mm256_fmadd_ps(kv, _mm256_loadu_ps(x + i), acc);
    _mm256_storeu_ps(d + i, acc);
  }
  for (; i < n; ++i) d[i] += k * x[i];
}

double f_dot(const float* a, const float* b, size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 av = _mm256_loadu_ps(a + i);
    __m256 bv = _mm256_loadu_ps(b + i);
    __m256d alo = _mm256_cvtps_pd(_mm256_castps256_ps128(av));
    __m256d ahi = _mm256_cvtps_pd(_mm256_extractf128_ps(av, 1));
    __m256d blo = _mm256_cvtps_pd(_mm256_castps256_ps128(bv));
    __m256d bhi = _mm256_cvtps_pd(_mm256_extractf128_ps(bv, 1));
    acc0 = _mm256_fmadd_pd(alo, blo, acc0);
    acc1 = _mm256_fmadd_pd(ahi, bhi, acc1);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += double(a[i]) * double(b[i]);
  return acc;
}

float f_dot_native(const float* a, const float* b, size_t n) {
  __m256 acc0 = _mm256_setzero_ps();
  __m256 acc1 = _mm256_setzero_ps();
  __m256 acc2 = _mm256_setzero_ps();
  __m256 acc3 = _mm256_setzero_ps();
  size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
    acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i + 8), _mm256_loadu_ps(b + i + 8), acc1);
    acc2 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i + 16), _mm256_loadu_ps(b + i + 16), acc2);
    acc3 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i + 24), _mm256_loadu_ps(b + i + 24), acc3);
  }
  for (; i + 8 <= n; i += 8)
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
  __m256 acc = _mm256_add_ps(_mm256_add_ps(acc0, acc1), _mm256_add_ps(acc2, acc3));
  __m128 lo = _mm256_castps256_ps128(acc);
  __m128 hi = _mm256_extractf128_ps(acc, 1);
  lo = _mm_add_ps(lo, hi);
  lo = _mm_hadd_ps(lo, lo);
  lo = _mm_hadd_ps(lo, lo);
  float out = _mm_cvtss_f32(lo);
  for (; i < n; ++i) out += a[i] * b[i];
  return out;
}

double f_sum(const float* a, size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 av = _mm256_loadu_ps(a + i);
    acc0 = _mm256_add_pd(acc0, _mm256_cvtps_pd(_mm256_castps256_ps128(av)));
    acc1 = _mm256_add_pd(acc1, _mm256_cvtps_pd(_mm256_extractf128_ps(av, 1)));
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += double(a[i]);
  return acc;
}

double f_sumsq(const float* a, size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 av = _mm256_loadu_ps(a + i);
    __m256d lo = _mm256_cvtps_pd(_mm256_castps256_ps128(av));
    __m256d hi = _mm256_cvtps_pd(_mm256_extractf128_ps(av, 1));
    acc0 = _mm256_fmadd_pd(lo, lo, acc0);
    acc1 = _mm256_fmadd_pd(hi, hi, acc1);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += double(a[i]) * double(a[i]);
  return acc;
}

float f_max_abs(const float* a, size_t n) {
  const __m256 absmask = _mm256_castsi256_ps(_mm256_set1_epi32(0x7fffffff));
  __m256 best = _mm256_setzero_ps();
  size_t i = 0;
  for (; i + 8 <= n; i += 8)
    best = _mm256_max_ps(best, _mm256_and_ps(absmask, _mm256_loadu_ps(a + i)));
  alignas(32) float lanes[8];
  _mm256_store_ps(lanes, best);
  float out = 0.f;
  for (float v : lanes) out = v > out ? v : out;
  for (; i < n; ++i) {
    float v = std::fabs(a[i]);
    if (v > out) out = v;
  }
  return out;
}

void f_leaky_relu(float* d, const float* a, float slope, size_t n) {
  __m256 sl = _mm256_set1_ps(slope);
  __m256 zero = _mm256_setzero_ps();
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 v = _mm256_loadu_ps(a + i);
    __m256 neg = _mm256_mul_ps(sl, v);
    __m256 mask = _mm256_cmp_ps(v, zero, _CMP_GT_OQ);
    _mm256_storeu_ps(d + i, _mm256_blendv_ps(neg, v, mask));
  }
  for (; i < n; ++i) d[i] = a[i] > 0 ? a[i] : slope * a[i];
}

void f_clamp(float* d, const float* a, float lo, float hi, size_t n) {
  __m256 lov = _mm256_set1_ps(lo);
  __m256 hiv = _mm256_set1_ps(hi);
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 v = _mm256_loadu_ps(a + i);
    v = _mm256_max_ps(v, lov);
    v = _mm256_min_ps(v, hiv);
    _mm256_storeu_ps(d + i, v);
  }
  for (; i < n; ++i) {
    float v = a[i];
    if (v < lo) v = lo;
    if (v > hi) v = hi;
    d[i] = v;
  }
}

bool f_all_finite(const float* a, size_t n) {
  const __m256 absmask = _mm256_castsi256_ps(_mm256_set1_epi32(0x7fffffff));
  const __m256 maxv = _mm256_set1_ps(FLT_MAX);
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 v = _mm256_and_ps(absmask, _mm256_loadu_ps(a + i));
    // abs(v) <= FLT_MAX is false for both Inf and NaN
    __m256 ok = _mm256_cmp_ps(v, maxv, _CMP_LE_OQ);
    if (_mm256_movemask_ps(ok) != 0xff) return false;
  }
  for (; i < n; ++i)
    if (!std::isfinite(a[i])) return false;
  return true;
}

void f_adam_update(float* p, float* m, float* v, const float* g, size_t n,
                   float lr, float b1, float b2, float eps, float c1, float c2) {
  __m256 b1v = _mm256_set1_ps(b1), ob1 = _mm256_set1_ps(1.f - b1);
  __m256 b2v = _mm256_set1_ps(b2), ob2 = _mm256_set1_ps(1.f - b2);
  __m256 lrv = _mm256_set1_ps(lr), epsv = _mm256_set1_ps(eps);
  __m256 ic1 = _mm256_set1_ps(1.f / c1), ic2 = _mm256_set1_ps(1.f / c2);
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 gv = _mm256_loadu_ps(g + i);
    __m256 mv = _mm256_fmadd_ps(b1v, _mm256_loadu_ps(m + i), _mm256_mul_ps(ob1, gv));
    __m256 vv = _mm256_fmadd_ps(b2v, _mm256_loadu_ps(v + i),
                                _mm256_mul_ps(ob2, _mm256_mul_ps(gv, gv)));
    _mm256_storeu_ps(m + i, mv);
    _mm256_storeu_ps(v + i, vv);
    __m256 mhat = _mm256_mul_ps(mv, ic1);
    __m256 vhat = _mm256_mul_ps(vv, ic2);
    __m256 denom = _mm256_add_ps(_mm256_sqrt_ps(vhat), epsv);
    __m256 upd = _mm256_div_ps(_mm256_mul_ps(lrv, mhat), denom);
    _mm256_storeu_ps(p + i, _mm256_sub_ps(_mm256_loadu_ps(p + i), upd));
  }
  for (; i < n; ++i) {
    m[i] = b1 * m[i] + (1.f - b1) * g[i];
    v[i] = b2 * v[i] + (1.f - b2) * g[i] * g[i];
    float mhat = m[i] / c1;
    float vhat = v[i] / c2;
    p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

void f_conv_taps(float* d, const float* x, const float* w, const int* off, int taps,
                 size_t n) {
  while (taps > 16) {
    f_conv_taps(d, x, w, off, 16, n);
    w += 16;
    off += 16;
    taps -= 16;
  }
  __m256 wv[16];
  for (int j = 0; j < taps; ++j) wv[j] = _mm256_set1_ps(w[j]);
  size_t t = 0;
  for (; t + 8 <= n; t += 8) {
    __m256 acc = _mm256_loadu_ps(d + t);
    for (int j = 0; j < taps; ++j)
      acc = _mm256_fmadd_ps(wv[j], _mm256_loadu_ps(x + ptrdiff_t(t) + off[j]), acc);
    _mm256_storeu_ps(d + t, acc);
  }
  for (; t < n; ++t) {
    float acc = d[t];
    for (int j = 0; j < taps; ++j) acc += w[j] * x[ptrdiff_t(t) + off[j]];
    d[t] = acc;
  }
}

void f_dot_taps(const float* g, const float* x, const int* off, int taps, size_t n,
                double* out) {
  while (taps > 4) {
    f_dot_taps(g, x, off, 4, n, out);
    off += 4;
    out += 4;
    taps -= 4;
  }
  __m256d alo[4], ahi[4];
  for (int j = 0; j < taps; ++j) {
    alo[j] = _mm256_setzero_pd();
    ahi[j] = _mm256_setzero_pd();
  }
  size_t t = 0;
  for (; t + 8 <= n; t += 8) {
    __m256 gv = _mm256_loadu_ps(g + t);
    __m256d glo = _mm256_cvtps_pd(_mm256_castps256_ps128(gv));
    __m256d ghi = _mm256_cvtps_pd(_mm256_extractf128_ps(gv, 1));
    for (int j = 0; j < taps; ++j) {
      __m256 xv = _mm256_loadu_ps(x + ptrdiff_t(t) + off[j]);
      alo[j] = _mm256_fmadd_pd(glo, _mm256_cvtps_pd(_mm256_castps256_ps128(xv)), alo[j]);
      ahi[j] = _mm256_fmadd_pd(ghi, _mm256_cvtps_pd(_mm256_extractf128_ps(xv, 1)), ahi[j]);
    }
  }
  for (int j = 0; j < taps; ++j) {
    double acc = hsum(_mm256_add_pd(alo[j], ahi[j]));
    for (size_t r = t; r < n; ++r) acc += double(g[r]) * x[ptrdiff_t(r) + off[j]];
    out[j] += acc;
  }
}

void f_axpy4(float* d, const float* a, const float* x0, size_t stride, size_t n) {
  const float* x1 = x0 + stride;
  const float* x2 = x1 + stride;
  const float* x3 = x2 + stride;
  __m256 a0 = _mm256_set1_ps(a[0]), a1 = _mm256_set1_ps(a[1]);
  __m256 a2 = _mm256_set1_ps(a[2]), a3 = _mm256_set1_ps(a[3]);
  size_t t = 0;
  for (; t + 8 <= n; t += 8) {
    __m256 acc = _mm256_loadu_ps(d + t);
    acc = _mm256_fmadd_ps(a0, _mm256_loadu_ps(x0 + t), acc);
    acc = _mm256_fmadd_ps(a1, _mm256_loadu_ps(x1 + t), acc);
    acc = _mm256_fmadd_ps(a2, _mm256_loadu_ps(x2 + t), acc);
    acc = _mm256_fmadd_ps(a3, _mm256_loadu_ps(x3 + t), acc);
    _mm256_storeu_ps(d + t, acc);
  }
  for (; t < n; ++t) d[t] += a[0] * x0[t] + a[1] * x1[t] + a[2] * x2[t] + a[3] * x3[t];
}

// --------------------------------------------------------------- double ----

void d_add(double* d, const double* a, const double* b, size_t n) {
  size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(d + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) d[i] = a[i] + b[i];
}

void d_sub(double* d, const double* a, const double* b, size_t n) {
  size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(d + i, _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) d[i] = a[i] - b[i];
}

void d_mul(double* d, const double* a, const double* b, size_t n) {
  size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(d + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) d[i] = a[i] * b[i];
}

void d_div(double* d, const double* a, const double* b, size_t n) {
  size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(d + i, _mm256_div_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) d[i] = a[i] / b[i];
}

void d_scale(double* d, const double* a, double k, size_t n) {
  __m256d kv = _mm256_set1_pd(k);
  size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(d + i, _mm256_mul_pd(kv, _mm256_loadu_pd(a + i)));
  for (; i < n; ++i) d[i] = k * a[i];
}

void d_axpy(double* d, double k, const double* x, size_t n) {
  __m256d kv = _mm256_set1_pd(k);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d acc = _mm256_loadu_pd(d + i);
    acc = _mm256_fmadd_pd(kv, _mm256_loadu_pd(x + i), acc);
    _mm256_storeu_pd(d + i, acc);
  }
  for (; i < n; ++i) d[i] += k * x[i];
}

double d_dot(const double* a, const double* b, size_t n) {
  __m256d acc = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  double out = hsum(acc);
  for (; i < n; ++i) out += a[i] * b[i];
  return out;
}

double d_dot_native(const double* a, const double* b, size_t n) {
  return d_dot(a, b, n);
}

double d_sum(const double* a, size_t n) {
  __m256d acc = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
  double out = hsum(acc);
  for (; i < n; ++i) out += a[i];
  return out;
}

double d_sumsq(const double* a, size_t n) {
  __m256d acc = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(a + i);
    acc = _mm256_fmadd_pd(v, v, acc);
  }
  double out = hsum(acc);
  for (; i < n; ++i) out += a[i] * a[i];
  return out;
}

double d_max_abs(const double* a, size_t n) {
  const __m256d absmask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
  __m256d best = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4)
    best = _mm256_max_pd(best, _mm256_and_pd(absmask, _mm256_loadu_pd(a + i)));
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, best);
  double out = 0.0;
  for (double v : lanes) out = v > out ? v : out;
  for (; i < n; ++i) {
    double v = std::fabs(a[i]);
    if (v > out) out = v;
  }
  return out;
}

void d_leaky_relu(double* d, const double* a, double slope, size_t n) {
  __m256d sl = _mm256_set1_pd(slope);
  __m256d zero = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(a + i);
    __m256d neg = _mm256_mul_pd(sl, v);
    __m256d mask = _mm256_cmp_pd(v, zero, _CMP_GT_OQ);
    _mm256_storeu_pd(d + i, _mm256_blendv_pd(neg, v, mask));
  }
  for (; i < n; ++i) d[i] = a[i] > 0 ? a[i] : slope * a[i];
}

void d_clamp(double* d, const double* a, double lo, double hi, size_t n) {
  __m256d lov = _mm256_set1_pd(lo);
  __m256d hiv = _mm256_set1_pd(hi);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(a + i);
    v = _mm256_max_pd(v, lov);
    v = _mm256_min_pd(v, hiv);
    _mm256_storeu_pd(d + i, v);
  }
  for (; i < n; ++i) {
    double v = a[i];
    if (v < lo) v = lo;
    if (v > hi) v = hi;
    d[i] = v;
  }
}

bool d_all_finite(const double* a, size_t n) {
  const __m256d absmask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
  const __m256d maxv = _mm256_set1_pd(DBL_MAX);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_and_pd(absmask, _mm256_loadu_pd(a + i));
    __m256d ok = _mm256_cmp_pd(v, maxv, _CMP_LE_OQ);
    if (_mm256_movemask_pd(ok) != 0xf) return false;
  }
  for (; i < n; ++i)
    if (!std::isfinite(a[i])) return false;
  return true;
}

void d_adam_update(double* p, double* m, double* v, const double* g, size_t n,
                   double lr, double b1, double b2, double eps, double c1, double c2) {
  __m256d b1v = _mm256_set1_pd(b1), ob1 = _mm256_set1_pd(1.0 - b1);
  __m256d b2v = _mm256_set1_pd(b2), ob2 = _mm256_set1_pd(1.0 - b2);
  __m256d lrv = _mm256_set1_pd(lr), epsv = _mm256_set1_pd(eps);
  __m256d ic1 = _mm256_set1_pd(1.0 / c1), ic2 = _mm256_set1_pd(1.0 / c2);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d gv = _mm256_loadu_pd(g + i);
    __m256d mv = _mm256_fmadd_pd(b1v, _mm256_loadu_pd(m + i), _mm256_mul_pd(ob1, gv));
    __m256d vv = _mm256_fmadd_pd(b2v, _mm256_loadu_pd(v + i),
                                 _mm256_mul_pd(ob2, _mm256_mul_pd(gv, gv)));
    _mm256_storeu_pd(m + i, mv);
    _mm256_storeu_pd(v + i, vv);
    __m256d mhat = _mm256_mul_pd(mv, ic1);
    __m256d vhat = _mm256_mul_pd(vv, ic2);
    __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(vhat), epsv);
    __m256d upd = _mm256_div_pd(_mm256_mul_pd(lrv, mhat), denom);
    _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), upd));
  }
  for (; i < n; ++i) {
    m[i] = b1 * m[i] + (1.0 - b1) * g[i];
    v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
    double mhat = m[i] / c1;
    double vhat = v[i] / c2;
    p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

void d_conv_taps(double* d, const double* x, const double* w, const int* off, int taps,
                 size_t n) {
  while (taps > 16) {
    d_conv_taps(d, x, w, off, 16, n);
    w += 16;
    off += 16;
    taps -= 16;
  }
  __m256d wv[16];
  for (int j = 0; j < taps; ++j) wv[j] = _mm256_set1_pd(w[j]);
  size_t t = 0;
  for (; t + 4 <= n; t += 4) {
    __m256d acc = _mm256_loadu_pd(d + t);
    for (int j = 0; j < taps; ++j)
      acc = _mm256_fmadd_pd(wv[j], _mm256_loadu_pd(x + ptrdiff_t(t) + off[j]), acc);
    _mm256_storeu_pd(d + t, acc);
  }
  for (; t < n; ++t) {
    double acc = d[t];
    for (int j = 0; j < taps; ++j) acc += w[j] * x[ptrdiff_t(t) + off[j]];
    d[t] = acc;
  }
}

void d_dot_taps(const double* g, const double* x, const int* off, int taps, size_t n,
                double* out) {
  while (taps > 8) {
    d_dot_taps(g, x, off, 8, n, out);
    off += 8;
    out += 8;
    taps -= 8;
  }
  __m256d acc[8];
  for (int j = 0; j < taps; ++j) acc[j] = _mm256_setzero_pd();
  size_t t = 0;
  for (; t + 4 <= n; t += 4) {
    __m256d gv = _mm256_loadu_pd(g + t);
    for (int j = 0; j < taps; ++j)
      acc[j] = _mm256_fmadd_pd(gv, _mm256_loadu_pd(x + ptrdiff_t(t) + off[j]), acc[j]);
  }
  for (int j = 0; j < taps; ++j) {
    double a = hsum(acc[j]);
    for (size_t r = t; r < n; ++r) a += g[r] * x[ptrdiff_t(r) + off[j]];
    out[j] += a;
  }
}

void d_axpy4(double* d, const double* a, const double* x0, size_t stride, size_t n) {
  const double* x1 = x0 + stride;
  const double* x2 = x1 + stride;
  const double* x3 = x2 + stride;
  __m256d a0 = _mm256_set1_pd(a[0]), a1 = _mm256_set1_pd(a[1]);
  __m256d a2 = _mm256_set1_pd(a[2]), a3 = _mm256_set1_pd(a[3]);
  size_t t = 0;
  for (; t + 4 <= n; t += 4) {
    __m256d acc = _mm256_loadu_pd(d + t);
    acc = _mm256_fmadd_pd(a0, _mm256_loadu_pd(x0 + t), acc);
    acc = _mm256_fmadd_pd(a1, _mm256_loadu_pd(x1 + t), acc);
    acc = _mm256_fmadd_pd(a2, _mm256_loadu_pd(x2 + t), acc);
    acc = _mm256_fmadd_pd(a3, _mm256_loadu_pd(x3 + t), acc);
    _mm256_storeu_pd(d + t, acc);
  }
  for (; t < n; ++t) d[t] += a[0] * x0[t] + a[1] * x1[t] + a[2] * x2[t] + a[3] * x3[t];
}

}  // namespace

template <>
const OpTable<float>& avx2_table<float>() {
  static const OpTable<float> t = {
      f_add, f_sub, f_mul, f_div, f_scale, f_axpy, f_dot, f_dot_native, f_sum, f_sumsq,
      f_max_abs, f_leaky_relu, f_clamp, f_all_finite, f_adam_update,
      f_conv_taps, f_dot_taps, f_axpy4};
  return t;
}

template <>
const OpTable<double>& avx2_table<double>() {
  static const OpTable<double> t = {
      d_add, d_sub, d_mul, d_div, d_scale, d_axpy, d_dot, d_dot_native, d_sum, d_sumsq,
      d_max_abs, d_leaky_relu, d_clamp, d_all_finite, d_adam_update,
      d_conv_taps, d_dot_taps, d_axpy4};
  return t;
}

}  // namespace svc::kernels::detail
