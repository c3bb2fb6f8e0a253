#include "kernels/kernels.hpp"

namespace svc::kernels {

namespace {

Isa detect_isa() {
#if defined(SVC_HAVE_AVX2_BUILD) && (defined(__x86_64__) || defined(__i386__))
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return Isa::avx2;
#endif
  return Isa::scalar;
}

Isa g_isa = detect_isa();

}  // namespace

Isa active_isa() { return g_isa; }

bool cpu_supports_avx2() { return detect_isa() == Isa::avx2; }

void force_isa(Isa isa) {
  if (isa == Isa::avx2 && !cpu_supports_avx2()) isa = Isa::scalar;
  g_isa = isa;
}

template <>
const OpTable<float>& ops<float>() {
#if defined(SVC_HAVE_AVX2_BUILD)
  if (g_isa == Isa::avx2) return detail::avx2_table<float>();
#endif
  return detail::scalar_table<float>();
}

template <>
const OpTable<double>& ops<double>() {
#if defined(SVC_HAVE_AVX2_BUILD)
  if (g_isa == Isa::avx2) return detail::avx2_table<double>();
#endif
  return detail::scalar_table<double>();
}

}  // namespace svc::kernels
