#include <cmath>
#include <vector>

#include "doctest.h"
#include "mrf/rng.hpp"
#include "mrf/simd/kernels.hpp"

using mrf::simd::Backend;
using mrf::simd::kernels_for;

namespace {

std::vector<double> random_vec(std::size_t len, mrf::Rng& rng) {
  std::vector<double> v(len);
  for (auto& x : v) x = rng.uniform() * 2.0 - 1.0;
  return v;
}

}  // namespace

TEST_CASE("scalar and avx2 kernels agree bit-for-bit") {
  if (!mrf::simd::avx2_supported()) {
    MESSAGE("AVX2 not available; equivalence suite skipped");
    return;
  }
  const auto& s = kernels_for(Backend::scalar);
  const auto& a = kernels_for(Backend::avx2);
  mrf::Rng rng(1234);

  // Lengths straddling the vector width, including tails and empty input.
  for (std::size_t len : {0u, 1u, 3u, 4u, 5u, 8u, 31u, 64u, 67u, 1024u}) {
    auto x = random_vec(len, rng);
    auto y = random_vec(len, rng);

    CHECK(s.sum(x.data(), len) == a.sum(x.data(), len));
    CHECK(s.dot(x.data(), y.data(), len) == a.dot(x.data(), y.data(), len));
    CHECK(s.abs_diff_sum(x.data(), y.data(), len) ==
          a.abs_diff_sum(x.data(), y.data(), len));

    auto x1 = x, x2 = x;
    s.scale(x1.data(), len, 0.7371);
    a.scale(x2.data(), len, 0.7371);
    CHECK(x1 == x2);

    auto a1 = x, a2 = x;
    s.phase_flip_above(a1.data(), y.data(), len, 0.1);
    a.phase_flip_above(a2.data(), y.data(), len, 0.1);
    CHECK(a1 == a2);

    auto m1 = x, m2 = x;
    s.invert_about_mean(m1.data(), len);
    a.invert_about_mean(m2.data(), len);
    CHECK(m1 == m2);
  }
}

TEST_CASE("clique energy accumulation matches between backends and a direct loop") {
  mrf::Rng rng(99);
  const int n = 10;
  const std::size_t configs = std::size_t{1} << n;
  for (int l : {1, 2, 3}) {
    std::vector<int> shifts;
    for (int k = 0; k < l; ++k) shifts.push_back(static_cast<int>(rng.below(n)));
    std::vector<double> theta(std::size_t{1} << l);
    for (auto& t : theta) t = rng.uniform() - 0.5;

    std::vector<double> e_scalar(configs, 0.0), e_direct(configs, 0.0);
    kernels_for(Backend::scalar)
        .add_clique_energy(e_scalar.data(), configs, shifts.data(), l,
                           theta.data());
    for (std::size_t c = 0; c < configs; ++c) {
      std::size_t sub = 0;
      for (int k = 0; k < l; ++k) sub |= ((c >> shifts[k]) & 1u) << (l - 1 - k);
      e_direct[c] += theta[sub];
    }
    CHECK(e_scalar == e_direct);

    if (mrf::simd::avx2_supported()) {
      std::vector<double> e_avx(configs, 0.0);
      kernels_for(Backend::avx2)
          .add_clique_energy(e_avx.data(), configs, shifts.data(), l,
                             theta.data());
      CHECK(e_avx == e_scalar);
    }
  }
}

TEST_CASE("invert_about_mean implements 2*mean - x") {
  const auto& k = kernels_for(Backend::scalar);
  std::vector<double> v{1.0, 2.0, 3.0, 4.0, 10.0};
  const double mean = 4.0;
  auto w = v;
  k.invert_about_mean(w.data(), w.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    CHECK(w[i] == doctest::Approx(2 * mean - v[i]).epsilon(1e-15));
  }
}

TEST_CASE("backend dispatch honours force_backend") {
  const Backend original = mrf::simd::active_backend();
  mrf::simd::force_backend(Backend::scalar);
  CHECK(mrf::simd::active_backend() == Backend::scalar);
  mrf::simd::reset_backend();
  CHECK(mrf::simd::active_backend() == original);
}
