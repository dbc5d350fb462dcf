#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

// Data-parallel inner-loop kernels with a scalar reference implementation and
// an AVX2 variant selected at runtime. Both backends compute bit-identical
// results: reductions are striped over four accumulators (one per 64-bit lane
// of a 256-bit vector) and combined in a fixed order, so the floating-point
// operation sequence is the same regardless of backend.
namespace mrf::simd {

enum class Backend { scalar, avx2 };

struct Kernels {
  // Striped sum: s[k] = sum of x[4t+k], result ((s0+s1)+(s2+s3)) + tail.
  double (*sum)(const double* x, std::size_t len);
  // Striped dot product, same accumulation scheme as sum.
  double (*dot)(const double* x, const double* y, std::size_t len);
  // Striped sum of |x[i] - y[i]|.
  double (*abs_diff_sum)(const double* x, const double* y, std::size_t len);
  // x[i] *= c
  void (*scale)(double* x, std::size_t len, double c);
  // amps[i] = -amps[i] where values[i] > threshold  (Grover phase oracle)
  void (*phase_flip_above)(double* amps, const double* values, std::size_t len,
                           double threshold);
  // amps[i] = 2*mean - amps[i], mean computed with the striped sum
  // (Grover diffusion / inversion about the mean)
  void (*invert_about_mean)(double* amps, std::size_t len);
  // energies[c] += theta[subkey(c)] for c in [0, n_configs) where
  // subkey(c) = sum_k ((c >> shifts[k]) & 1) << (l-1-k).
  // Used to accumulate per-clique interaction terms over all 2^n
  // configurations of a joint table.
  void (*add_clique_energy)(double* energies, std::size_t n_configs,
                            const int* shifts, int l, const double* theta);
};

bool avx2_supported();

// Active backend: AVX2 when the CPU supports it, overridable with the
// MRF_SIMD environment variable ("scalar" or "avx2") or force_backend().
Backend active_backend();
void force_backend(Backend b);
void reset_backend();  // back to auto-detection

const Kernels& kernels();
const Kernels& kernels_for(Backend b);

std::string backend_name(Backend b);

}  // namespace mrf::simd
