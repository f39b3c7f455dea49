#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace percolab {

// Precondition violation detected at an API boundary.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A size/attempt guard refused to run.
class GuardError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Counter-based random numbers.
//
// Every draw is mix64(key + (i+1)*golden) for a stream key and a counter i, so
// any position in any stream can be evaluated directly.
// ---------------------------------------------------------------------------

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Derives a stream key from a seed and a path of stream indices.
inline std::uint64_t stream_key(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  std::uint64_t k = mix64(seed + kGolden);
  for (std::uint64_t p : path) k = mix64(k ^ mix64(p + 0x632BE59BD9B4E019ULL));
  return k;
}

inline std::uint64_t counter_bits(std::uint64_t key, std::uint64_t i) {
  return mix64(key + (i + 1) * kGolden);
}

inline double counter_uniform(std::uint64_t key, std::uint64_t i) {
  return static_cast<double>(counter_bits(key, i) >> 11) * 0x1.0p-53;
}

class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key) : key_(key) {}
  CounterRng(std::uint64_t seed, std::initializer_list<std::uint64_t> path)
      : key_(stream_key(seed, path)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() { return counter_bits(key_, counter_++); }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
  // Uniform on (0, 1].
  double uniform_pos() { return 1.0 - uniform(); }
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
  }
  double normal() {
    double u1 = uniform_pos(), u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  std::uint64_t key() const { return key_; }
  std::uint64_t position() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// ---------------------------------------------------------------------------
// Summation and moments.
// ---------------------------------------------------------------------------

// Neumaier compensated sum.
class CompensatedSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  void add(const CompensatedSum& o) {
    add(o.sum_);
    add(o.comp_);
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct MCEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
};

// Associative (sum, sum of squares, count) triple.
struct Moments {
  CompensatedSum sum;
  CompensatedSum sumsq;
  std::uint64_t count = 0;

  void add(double x) {
    sum.add(x);
    sumsq.add(x * x);
    ++count;
  }
  void merge(const Moments& o) {
    sum.add(o.sum);
    sumsq.add(o.sumsq);
    count += o.count;
  }
  double mean() const { return count ? sum.value() / static_cast<double>(count) : 0.0; }
  // Standard error of the mean.
  double stderr_of_mean() const {
    if (count < 2) return 0.0;
    double n = static_cast<double>(count);
    double m = mean();
    double var = (sumsq.value() / n - m * m) * n / (n - 1.0);
    return var > 0.0 ? std::sqrt(var / n) : 0.0;
  }
  MCEstimate estimate(std::uint64_t seed) const { return {mean(), stderr_of_mean(), count, seed}; }
};

// ---------------------------------------------------------------------------
// Deterministic chunked parallelism.
//
// Work items 0..chunks-1 are processed by `workers` threads; results are
// stored per chunk so callers can reduce in chunk order regardless of the
// worker count.
// ---------------------------------------------------------------------------

unsigned default_workers();

void parallel_chunks(std::size_t chunks, unsigned workers,
                     const std::function<void(std::size_t)>& body);

template <typename T>
std::vector<T> map_chunks(std::size_t chunks, unsigned workers,
                          const std::function<T(std::size_t)>& body) {
  std::vector<T> out(chunks);
  parallel_chunks(chunks, workers, [&](std::size_t c) { out[c] = body(c); });
  return out;
}

}  // namespace percolab
