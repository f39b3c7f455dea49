#if defined(__x86_64__) || defined(__i386__)

#include <immintrin.h>

#include <cstdlib>

#include "percolab/common.hpp"
#include "percolab/kernels.hpp"

namespace percolab::kernels {

namespace {

__attribute__((target("avx2,fma"))) inline __m256d powi(__m256d x, int n) {
  __m256d r = _mm256_set1_pd(1.0);
  while (n > 0) {
    if (n & 1) r = _mm256_mul_pd(r, x);
    x = _mm256_mul_pd(x, x);
    n >>= 1;
  }
  return r;
}

// x^(q/2) for integer q.
__attribute__((target("avx2,fma"))) inline __m256d half_power(__m256d x, int q) {
  const int a = std::abs(q);
  __m256d r = powi(x, a / 2);
  if (a & 1) r = _mm256_mul_pd(r, _mm256_sqrt_pd(x));
  return q < 0 ? _mm256_div_pd(_mm256_set1_pd(1.0), r) : r;
}

inline double half_power_scalar(double x, int q) {
  const int a = std::abs(q);
  double r = 1.0, b = x;
  for (int n = a / 2; n > 0; n >>= 1, b *= b)
    if (n & 1) r *= b;
  if (a & 1) r *= std::sqrt(x);
  return q < 0 ? 1.0 / r : r;
}

}  // namespace

__attribute__((target("avx2,fma"))) double weighted_power_sum_avx2(std::span<const double> base,
                                                                    std::span<const int> half_pow,
                                                                    std::span<const double> s,
                                                                    std::span<const double> w) {
  if (base.size() != half_pow.size() || s.size() != w.size()) throw DomainError("kernel: length mismatch");
  const std::size_t n = s.size();
  __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 8 <= n; j += 8) {
    __m256d s0 = _mm256_loadu_pd(&s[j]), s1 = _mm256_loadu_pd(&s[j + 4]);
    __m256d t0 = _mm256_loadu_pd(&w[j]), t1 = _mm256_loadu_pd(&w[j + 4]);
    for (std::size_t i = 0; i < base.size(); ++i) {
      __m256d b = _mm256_set1_pd(base[i]);
      t0 = _mm256_mul_pd(t0, half_power(_mm256_add_pd(b, s0), half_pow[i]));
      t1 = _mm256_mul_pd(t1, half_power(_mm256_add_pd(b, s1), half_pow[i]));
    }
    acc0 = _mm256_add_pd(acc0, t0);
    acc1 = _mm256_add_pd(acc1, t1);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, _mm256_add_pd(acc0, acc1));
  double total = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; j < n; ++j) {
    double term = w[j];
    for (std::size_t i = 0; i < base.size(); ++i) term *= half_power_scalar(base[i] + s[j], half_pow[i]);
    total += term;
  }
  return total;
}

}  // namespace percolab::kernels

#endif
