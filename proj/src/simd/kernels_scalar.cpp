#include "mrf/simd/kernels.hpp"

#include <cmath>

// Scalar reference kernels. The reductions deliberately mirror the AVX2
// lane layout: four accumulators striped over indices mod 4, combined as
// ((s0+s1)+(s2+s3)), then the tail added in index order. This fixes the
// floating-point operation order so both backends agree bit for bit.
namespace mrf::simd {
namespace {

double sum_scalar(const double* x, std::size_t len) {
  double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
  std::size_t i = 0;
  for (; i + 4 <= len; i += 4) {
    s0 += x[i];
    s1 += x[i + 1];
    s2 += x[i + 2];
    s3 += x[i + 3];
  }
  double total = (s0 + s1) + (s2 + s3);
  for (; i < len; ++i) total += x[i];
  return total;
}

double dot_scalar(const double* x, const double* y, std::size_t len) {
  double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
  std::size_t i = 0;
  for (; i + 4 <= len; i += 4) {
    s0 += x[i] * y[i];
    s1 += x[i + 1] * y[i + 1];
    s2 += x[i + 2] * y[i + 2];
    s3 += x[i + 3] * y[i + 3];
  }
  double total = (s0 + s1) + (s2 + s3);
  for (; i < len; ++i) total += x[i] * y[i];
  return total;
}

double abs_diff_sum_scalar(const double* x, const double* y, std::size_t len) {
  double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
  std::size_t i = 0;
  for (; i + 4 <= len; i += 4) {
    s0 += std::fabs(x[i] - y[i]);
    s1 += std::fabs(x[i + 1] - y[i + 1]);
    s2 += std::fabs(x[i + 2] - y[i + 2]);
    s3 += std::fabs(x[i + 3] - y[i + 3]);
  }
  double total = (s0 + s1) + (s2 + s3);
  for (; i < len; ++i) total += std::fabs(x[i] - y[i]);
  return total;
}

void scale_scalar(double* x, std::size_t len, double c) {
  for (std::size_t i = 0; i < len; ++i) x[i] *= c;
}

void phase_flip_above_scalar(double* amps, const double* values,
                             std::size_t len, double threshold) {
  for (std::size_t i = 0; i < len; ++i) {
    if (values[i] > threshold) amps[i] = -amps[i];
  }
}

void invert_about_mean_scalar(double* amps, std::size_t len) {
  if (len == 0) return;
  const double mean = sum_scalar(amps, len) / static_cast<double>(len);
  const double twice = 2.0 * mean;
  for (std::size_t i = 0; i < len; ++i) amps[i] = twice - amps[i];
}

void add_clique_energy_scalar(double* energies, std::size_t n_configs,
                              const int* shifts, int l, const double* theta) {
  for (std::size_t c = 0; c < n_configs; ++c) {
    std::size_t sub = 0;
    for (int k = 0; k < l; ++k) {
      sub |= ((c >> shifts[k]) & 1u) << (l - 1 - k);
    }
    energies[c] += theta[sub];
  }
}

}  // namespace

const Kernels& scalar_kernels() {
  static const Kernels k{sum_scalar,
                         dot_scalar,
                         abs_diff_sum_scalar,
                         scale_scalar,
                         phase_flip_above_scalar,
                         invert_about_mean_scalar,
                         add_clique_energy_scalar};
  return k;
}

}  // namespace mrf::simd
