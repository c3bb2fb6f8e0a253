#include <cmath>

#include "kernels/kernels.hpp"

// Reference kernels. These define the semantics the SIMD variants are tested
// against; keep them simple and obviously correct.

namespace svc::kernels::detail {

namespace {

template <class S>
void s_add(S* d, const S* a, const S* b, size_t n) {
  for (size_t i = 0; i < n; ++i) d[i] = a[i] + b[i];
}

template <class S>
void s_sub(S* d, const S* a, const S* b, size_t n) {
  for (size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
}

template <class S>
void s_mul(S* d, const S* a, const S* b, size_t n) {
  for (size_t i = 0; i < n; ++i) d[i] = a[i] * b[i];
}

template <class S>
void s_div(S* d, const S* a, const S* b, size_t n) {
  for (size_t i = 0; i < n; ++i) d[i] = a[i] / b[i];
}

template <class S>
void s_scale(S* d, const S* a, S k, size_t n) {
  for (size_t i = 0; i < n; ++i) d[i] = k * a[i];
}

template <class S>
void s_axpy(S* d, S k, const S* x, size_t n) {
  for (size_t i = 0; i < n; ++i) d[i] += k * x[i];
}

template <class S>
double s_dot(const S* a, const S* b, size_t n) {
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) acc += double(a[i]) * double(b[i]);
  return acc;
}

template <class S>
S s_dot_native(const S* a, const S* b, size_t n) {
  S acc = 0;
  for (size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

template <class S>
double s_sum(const S* a, size_t n) {
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) acc += double(a[i]);
  return acc;
}

template <class S>
double s_sumsq(const S* a, size_t n) {
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) acc += double(a[i]) * double(a[i]);
  return acc;
}

template <class S>
S s_max_abs(const S* a, size_t n) {
  S best = 0;
  for (size_t i = 0; i < n; ++i) {
    S v = a[i] < 0 ? -a[i] : a[i];
    if (v > best) best = v;
  }
  return best;
}

template <class S>
void s_leaky_relu(S* d, const S* a, S slope, size_t n) {
  for (size_t i = 0; i < n; ++i) d[i] = a[i] > 0 ? a[i] : slope * a[i];
}

template <class S>
void s_clamp(S* d, const S* a, S lo, S hi, size_t n) {
  for (size_t i = 0; i < n; ++i) {
    S v = a[i];
    if (v < lo) v = lo;
    if (v > hi) v = hi;
    d[i] = v;
  }
}

template <class S>
bool s_all_finite(const S* a, size_t n) {
  for (size_t i = 0; i < n; ++i) {
    if (!std::isfinite(a[i])) return false;
  }
  return true;
}

template <class S>
void s_adam_update(S* p, S* m, S* v, const S* g, size_t n, S lr, S b1, S b2,
                   S eps, S c1, S c2) {
  for (size_t i = 0; i < n; ++i) {
    m[i] = b1 * m[i] + (S(1) - b1) * g[i];
    v[i] = b2 * v[i] + (S(1) - b2) * g[i] * g[i];
    S mhat = m[i] / c1;
    S vhat = v[i] / c2;
    p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

template <class S>
void s_conv_taps(S* d, const S* x, const S* w, const int* off, int taps, size_t n) {
  for (size_t t = 0; t < n; ++t) {
    S acc = d[t];
    for (int j = 0; j < taps; ++j) acc += w[j] * x[ptrdiff_t(t) + off[j]];
    d[t] = acc;
  }
}

template <class S>
void s_dot_taps(const S* g, const S* x, const int* off, int taps, size_t n, double* out) {
  for (int j = 0; j < taps; ++j) {
    double acc = 0.0;
    const S* xj = x + off[j];
    for (size_t t = 0; t < n; ++t) acc += double(g[t]) * double(xj[t]);
    out[j] += acc;
  }
}

template <class S>
void s_axpy4(S* d, const S* a, const S* x0, size_t row_stride, size_t n) {
  const S* x1 = x0 + row_stride;
  const S* x2 = x1 + row_stride;
  const S* x3 = x2 + row_stride;
  for (size_t t = 0; t < n; ++t)
    d[t] += a[0] * x0[t] + a[1] * x1[t] + a[2] * x2[t] + a[3] * x3[t];
}

template <class S>
OpTable<S> make_table() {
  OpTable<S> t;
  t.add = s_add<S>;
  t.sub = s_sub<S>;
  t.mul = s_mul<S>;
  t.div = s_div<S>;
  t.scale = s_scale<S>;
  t.axpy = s_axpy<S>;
  t.dot = s_dot<S>;
  t.dot_native = s_dot_native<S>;
  t.sum = s_sum<S>;
  t.sumsq = s_sumsq<S>;
  t.max_abs = s_max_abs<S>;
  t.leaky_relu = s_leaky_relu<S>;
  t.clamp = s_clamp<S>;
  t.all_finite = s_all_finite<S>;
  t.adam_update = s_adam_update<S>;
  t.conv_taps = s_conv_taps<S>;
  t.dot_taps = s_dot_taps<S>;
  t.axpy4 = s_axpy4<S>;
  return t;
}

}  // namespace

template <>
const OpTable<float>& scalar_table<float>() {
  static const OpTable<float> t = make_table<float>();
  return t;
}

template <>
const OpTable<double>& scalar_table<double>() {
  static const OpTable<double> t = make_table<double>();
  return t;
}

}  // namespace svc::kernels::detail
