#include "mrf/simd/kernels.hpp"

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>

#include <cmath>

namespace mrf::simd {
namespace {

// Lane k of the accumulator holds indices i with i % 4 == k, so the
// horizontal combine ((s0+s1)+(s2+s3)) reproduces the scalar reference
// exactly. No FMA anywhere: mul and add round separately, as in scalar.

inline double hcombine(__m256d acc) {
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

double sum_avx2(const double* x, std::size_t len) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= len; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  }
  double total = hcombine(acc);
  for (; i < len; ++i) total += x[i];
  return total;
}

double dot_avx2(const double* x, const double* y, std::size_t len) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= len; i += 4) {
    const __m256d p = _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    acc = _mm256_add_pd(acc, p);
  }
  double total = hcombine(acc);
  for (; i < len; ++i) total += x[i] * y[i];
  return total;
}

double abs_diff_sum_avx2(const double* x, const double* y, std::size_t len) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= len; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    acc = _mm256_add_pd(acc, _mm256_andnot_pd(sign_mask, d));
  }
  double total = hcombine(acc);
  for (; i < len; ++i) total += std::fabs(x[i] - y[i]);
  return total;
}

void scale_avx2(double* x, std::size_t len, double c) {
  const __m256d vc = _mm256_set1_pd(c);
  std::size_t i = 0;
  for (; i + 4 <= len; i += 4) {
    _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), vc));
  }
  for (; i < len; ++i) x[i] *= c;
}

void phase_flip_above_avx2(double* amps, const double* values, std::size_t len,
                           double threshold) {
  const __m256d thr = _mm256_set1_pd(threshold);
  const __m256d sign = _mm256_set1_pd(-0.0);
  std::size_t i = 0;
  for (; i + 4 <= len; i += 4) {
    const __m256d v = _mm256_loadu_pd(values + i);
    const __m256d mask = _mm256_cmp_pd(v, thr, _CMP_GT_OQ);
    const __m256d a = _mm256_loadu_pd(amps + i);
    _mm256_storeu_pd(amps + i, _mm256_xor_pd(a, _mm256_and_pd(mask, sign)));
  }
  for (; i < len; ++i) {
    if (values[i] > threshold) amps[i] = -amps[i];
  }
}

void invert_about_mean_avx2(double* amps, std::size_t len) {
  if (len == 0) return;
  const double mean = sum_avx2(amps, len) / static_cast<double>(len);
  const double twice = 2.0 * mean;
  const __m256d vt = _mm256_set1_pd(twice);
  std::size_t i = 0;
  for (; i + 4 <= len; i += 4) {
    _mm256_storeu_pd(amps + i, _mm256_sub_pd(vt, _mm256_loadu_pd(amps + i)));
  }
  for (; i < len; ++i) amps[i] = twice - amps[i];
}

void add_clique_energy_avx2(double* energies, std::size_t n_configs,
                            const int* shifts, int l, const double* theta) {
  const __m256i one = _mm256_set1_epi64x(1);
  std::size_t c = 0;
  for (; c + 4 <= n_configs; c += 4) {
    __m256i cfg = _mm256_set_epi64x(static_cast<long long>(c + 3),
                                    static_cast<long long>(c + 2),
                                    static_cast<long long>(c + 1),
                                    static_cast<long long>(c));
    __m256i sub = _mm256_setzero_si256();
    for (int k = 0; k < l; ++k) {
      __m256i bit = _mm256_and_si256(_mm256_srli_epi64(cfg, shifts[k]), one);
      sub = _mm256_or_si256(sub, _mm256_slli_epi64(bit, l - 1 - k));
    }
    const __m256d th = _mm256_i64gather_pd(theta, sub, 8);
    _mm256_storeu_pd(energies + c,
                     _mm256_add_pd(_mm256_loadu_pd(energies + c), th));
  }
  for (; c < n_configs; ++c) {
    std::size_t sub = 0;
    for (int k = 0; k < l; ++k) {
      sub |= ((c >> shifts[k]) & 1u) << (l - 1 - k);
    }
    energies[c] += theta[sub];
  }
}

}  // namespace

const Kernels& avx2_kernels() {
  static const Kernels k{sum_avx2,
                         dot_avx2,
                         abs_diff_sum_avx2,
                         scale_avx2,
                         phase_flip_above_avx2,
                         invert_about_mean_avx2,
                         add_clique_energy_avx2};
  return k;
}

}  // namespace mrf::simd

#endif  // x86
