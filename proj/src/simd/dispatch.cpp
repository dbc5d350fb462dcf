#include "mrf/simd/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <stdexcept>

namespace mrf::simd {

const Kernels& scalar_kernels();
#if defined(__x86_64__) || defined(__i386__)
const Kernels& avx2_kernels();
#endif

bool avx2_supported() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

namespace {

Backend detect() {
  if (const char* env = std::getenv("MRF_SIMD")) {
    if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
    if (std::strcmp(env, "avx2") == 0) {
      if (!avx2_supported())
        throw std::runtime_error("MRF_SIMD=avx2 but CPU lacks AVX2");
      return Backend::avx2;
    }
  }
  return avx2_supported() ? Backend::avx2 : Backend::scalar;
}

std::atomic<int> forced{-1};

}  // namespace

Backend active_backend() {
  const int f = forced.load(std::memory_order_relaxed);
  if (f >= 0) return static_cast<Backend>(f);
  static const Backend auto_detected = detect();
  return auto_detected;
}

void force_backend(Backend b) {
  if (b == Backend::avx2 && !avx2_supported())
    throw std::runtime_error("AVX2 backend not supported on this CPU");
  forced.store(static_cast<int>(b), std::memory_order_relaxed);
}

void reset_backend() { forced.store(-1, std::memory_order_relaxed); }

const Kernels& kernels_for(Backend b) {
#if defined(__x86_64__) || defined(__i386__)
  if (b == Backend::avx2) return avx2_kernels();
#endif
  (void)b;
  return scalar_kernels();
}

const Kernels& kernels() { return kernels_for(active_backend()); }

std::string backend_name(Backend b) {
  return b == Backend::avx2 ? "avx2" : "scalar";
}

}  // namespace mrf::simd
