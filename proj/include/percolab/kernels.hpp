#pragma once

#include <span>
#include <string>

namespace percolab::kernels {

// Inner loop of the reduced lattice sums:
//   sum_j w[j] * prod_i (base[i] + s[j])^(half_pow[i] / 2)
// Exponents are half-integers, so every power is a product of multiplies,
// one sqrt and at most one division.
double weighted_power_sum(std::span<const double> base, std::span<const int> half_pow,
                          std::span<const double> s, std::span<const double> w);

enum class Isa { scalar, avx2 };

std::string to_string(Isa isa);

// Scalar reference (std::pow per factor).
double weighted_power_sum_scalar(std::span<const double> base, std::span<const int> half_pow,
                                 std::span<const double> s, std::span<const double> w);
// AVX2+FMA variant; only callable when avx2_supported().
double weighted_power_sum_avx2(std::span<const double> base, std::span<const int> half_pow,
                               std::span<const double> s, std::span<const double> w);

bool avx2_supported();
// Variant used by weighted_power_sum. PERCOLAB_SIMD=scalar|avx2 overrides the
// cpu check; a request for avx2 on a cpu without it falls back to scalar.
Isa active_isa();

}  // namespace percolab::kernels
