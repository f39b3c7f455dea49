#include "percolab/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>

#include "percolab/common.hpp"

namespace percolab::kernels {

std::string to_string(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

double weighted_power_sum_scalar(std::span<const double> base, std::span<const int> half_pow,
                                 std::span<const double> s, std::span<const double> w) {
  if (base.size() != half_pow.size() || s.size() != w.size()) throw DomainError("kernel: length mismatch");
  CompensatedSum acc;
  for (std::size_t j = 0; j < s.size(); ++j) {
    double term = w[j];
    for (std::size_t i = 0; i < base.size(); ++i) term *= std::pow(base[i] + s[j], 0.5 * half_pow[i]);
    acc.add(term);
  }
  return acc.value();
}

bool avx2_supported() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

#if !(defined(__x86_64__) || defined(__i386__))
double weighted_power_sum_avx2(std::span<const double> base, std::span<const int> half_pow,
                               std::span<const double> s, std::span<const double> w) {
  return weighted_power_sum_scalar(base, half_pow, s, w);
}
#endif

Isa active_isa() {
  static const Isa isa = [] {
    const char* env = std::getenv("PERCOLAB_SIMD");
    if (env && std::strcmp(env, "scalar") == 0) return Isa::scalar;
    return avx2_supported() ? Isa::avx2 : Isa::scalar;
  }();
  return isa;
}

double weighted_power_sum(std::span<const double> base, std::span<const int> half_pow,
                          std::span<const double> s, std::span<const double> w) {
  return active_isa() == Isa::avx2 ? weighted_power_sum_avx2(base, half_pow, s, w)
                                   : weighted_power_sum_scalar(base, half_pow, s, w);
}

}  // namespace percolab::kernels
