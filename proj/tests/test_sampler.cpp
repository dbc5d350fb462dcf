#include <cmath>
#include <filesystem>
#include <map>

#include "doctest.h"
#include "mrf/experiment.hpp"
#include "mrf/rng.hpp"
#include "mrf/sampler.hpp"
#include "support/naive_oracles.hpp"

using mrf::Model;

namespace {

Model zero_field_model(int n) {
  std::vector<mrf::CliqueTensor> cliques;
  cliques.push_back({{1}, {0.0, 0.0}});
  return Model(n, 2, 0.1, 1.0, std::move(cliques));
}

Model pair_model(double j = 0.5) {
  // theta(x1, x2) = j * x1 * x2
  return Model(2, 2, j, 1.0, {{{1, 2}, {j, -j, -j, j}}});
}

}  // namespace

TEST_CASE("exact_joint: all-zero tensors give the uniform distribution") {
  const auto table = mrf::exact_joint(zero_field_model(3));
  REQUIRE(table.probs.size() == 8);
  for (double p : table.probs) CHECK(p == doctest::Approx(1.0 / 8).epsilon(1e-14));
  CHECK(table.z == doctest::Approx(8.0).epsilon(1e-14));
}

TEST_CASE("exact_joint: single pair clique, hand-normalized") {
  const auto table = mrf::exact_joint(pair_model(0.5));
  const double z = 2 * std::exp(0.5) + 2 * std::exp(-0.5);
  // configs in key order: (-,-), (-,+), (+,-), (+,+)
  CHECK(table.probs[0] == doctest::Approx(std::exp(0.5) / z).epsilon(1e-14));
  CHECK(table.probs[1] == doctest::Approx(std::exp(-0.5) / z).epsilon(1e-14));
  CHECK(table.probs[2] == doctest::Approx(std::exp(-0.5) / z).epsilon(1e-14));
  CHECK(table.probs[3] == doctest::Approx(std::exp(0.5) / z).epsilon(1e-14));
}

TEST_CASE("exact_joint: five-node example sums to one and matches brute force") {
  const Model m = mrf::figure1_model();
  const auto table = mrf::exact_joint(m);
  double sum = 0.0;
  for (double p : table.probs) sum += p;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));

  const auto brute = naive::joint(m);
  const auto marg3 = naive::marginal(brute, 5, {3});
  const auto mine3 = naive::marginal(table.probs, 5, {3});
  CHECK(mine3[0] == doctest::Approx(marg3[0]).epsilon(1e-12));
  CHECK(mine3[1] == doctest::Approx(marg3[1]).epsilon(1e-12));
}

TEST_CASE("exact_joint: normalization holds on random models") {
  mrf::GeneratorSpec spec;
  spec.n = 12;
  spec.r = 3;
  spec.d = 3;
  for (std::uint64_t seed : {11, 12, 13}) {
    spec.seed = seed;
    const auto table = mrf::exact_joint(mrf::gen_model(spec));
    double sum = 0.0;
    for (double p : table.probs) sum += p;
    CHECK(std::fabs(sum - 1.0) <= 1e-12);
  }
}

TEST_CASE("exact_joint refuses n over the limit") {
  CHECK_THROWS_AS(mrf::exact_joint(zero_field_model(21)),
                  std::invalid_argument);
}

TEST_CASE("sample_exact: uniform marginals concentrate") {
  const auto table = mrf::exact_joint(zero_field_model(4));
  const auto samples = mrf::sample_exact(table, 100000, 77);
  for (int v = 1; v <= 4; ++v) {
    std::size_t plus = 0;
    for (std::size_t m = 0; m < samples.count(); ++m)
      plus += samples.at(m, v) > 0;
    CHECK(std::fabs(double(plus) / double(samples.count()) - 0.5) < 0.01);
  }
}

TEST_CASE("sample_exact: point mass gives identical rows") {
  mrf::JointTable table;
  table.n = 3;
  table.probs.assign(8, 0.0);
  table.probs[5] = 1.0;  // (+,-,+)
  table.z = 1.0;
  const auto samples = mrf::sample_exact(table, 100, 1);
  for (std::size_t m = 0; m < samples.count(); ++m) {
    CHECK(samples.at(m, 1) == 1);
    CHECK(samples.at(m, 2) == -1);
    CHECK(samples.at(m, 3) == 1);
  }
}

TEST_CASE("sample_exact: byte-identical across runs with the same seed") {
  const auto table = mrf::exact_joint(mrf::figure1_model());
  const auto a = mrf::sample_exact(table, 5000, 4242);
  const auto b = mrf::sample_exact(table, 5000, 4242);
  REQUIRE(a.raw().size() == b.raw().size());
  CHECK(std::equal(a.raw().begin(), a.raw().end(), b.raw().begin()));
  CHECK(a.count() == 5000);

  const auto c = mrf::sample_exact(table, 5000, 4243);
  CHECK_FALSE(std::equal(a.raw().begin(), a.raw().end(), c.raw().begin()));
}

TEST_CASE("sample_exact: zero draws is a valid empty set") {
  const auto table = mrf::exact_joint(zero_field_model(2));
  const auto samples = mrf::sample_exact(table, 0, 9);
  CHECK(samples.count() == 0);
}

TEST_CASE("sample_exact: max-config frequency error within 5/sqrt(M)") {
  mrf::GeneratorSpec spec;
  spec.n = 6;
  spec.r = 2;
  spec.d = 2;
  spec.seed = 3;
  const auto table = mrf::exact_joint(mrf::gen_model(spec));
  const std::size_t m_count = 1000000;
  const auto samples = mrf::sample_exact(table, m_count, 31);
  std::vector<std::uint64_t> counts(table.probs.size(), 0);
  for (const auto& [key, cnt] : samples.distinct_rows()) counts[key] += cnt;
  double worst = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    worst = std::max(worst, std::fabs(double(counts[k]) / double(m_count) -
                                      table.probs[k]));
  }
  CHECK(worst <= 5.0 / std::sqrt(double(m_count)));
}

TEST_CASE("sample file round-trip and CSV export") {
  const auto table = mrf::exact_joint(mrf::figure1_model());
  const auto samples = mrf::sample_exact(table, 257, 5);
  const auto dir = std::filesystem::temp_directory_path();
  const auto bin = dir / "mrf_samples_rt.bin";
  samples.save(bin);
  const auto back = mrf::SampleSet::load(bin);
  CHECK(back.n() == samples.n());
  CHECK(back.count() == samples.count());
  CHECK(back.seed() == samples.seed());
  CHECK(std::equal(back.raw().begin(), back.raw().end(), samples.raw().begin()));

  const auto csv = dir / "mrf_samples_rt.csv";
  samples.export_csv(csv);
  CHECK(std::filesystem::file_size(csv) > 0);
  std::filesystem::remove(bin);
  std::filesystem::remove(csv);
}

TEST_CASE("packed_column matches byte data") {
  const auto table = mrf::exact_joint(mrf::figure1_model());
  const auto samples = mrf::sample_exact(table, 130, 8);
  for (int v = 1; v <= samples.n(); ++v) {
    const auto bits = samples.packed_column(v);
    for (std::size_t m = 0; m < samples.count(); ++m) {
      const bool bit = (bits[m >> 6] >> (m & 63)) & 1u;
      CHECK(bit == (samples.at(m, v) > 0));
    }
  }
}

TEST_CASE("gibbs conditional equals the exact-table conditional pointwise") {
  const Model m = mrf::figure1_model();
  const auto table = mrf::exact_joint(m);
  const int n = m.n();
  std::vector<std::int8_t> config(n);
  for (std::size_t cfg = 0; cfg < table.probs.size(); ++cfg) {
    for (int j = 0; j < n; ++j)
      config[j] = ((cfg >> (n - 1 - j)) & 1u) ? 1 : -1;
    for (int u = 1; u <= n; ++u) {
      // table conditional: p(+1, rest) / (p(+1, rest) + p(-1, rest))
      const std::size_t plus = cfg | (std::size_t{1} << (n - u));
      const std::size_t minus = cfg & ~(std::size_t{1} << (n - u));
      const double expected =
          table.probs[plus] / (table.probs[plus] + table.probs[minus]);
      CHECK(mrf::gibbs_conditional_plus(m, config, u) ==
            doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("gibbs: zero-field chain has half-half marginals") {
  const auto res = mrf::gibbs_sample(zero_field_model(5), 20000, {200, 1}, 17);
  CHECK(res.warnings.empty());
  for (int v = 1; v <= 5; ++v) {
    std::size_t plus = 0;
    for (std::size_t m = 0; m < res.samples.count(); ++m)
      plus += res.samples.at(m, v) > 0;
    CHECK(std::fabs(double(plus) / double(res.samples.count()) - 0.5) < 0.02);
  }
}

TEST_CASE("gibbs: total variation to the exact joint is small") {
  const Model m = mrf::figure1_model();
  const auto table = mrf::exact_joint(m);
  const std::size_t m_count = 100000;
  const auto res = mrf::gibbs_sample(m, m_count, {1000, 1}, 23);
  std::vector<double> freq(table.probs.size(), 0.0);
  for (const auto& [key, cnt] : res.samples.distinct_rows())
    freq[key] = double(cnt) / double(m_count);
  double tv = 0.0;
  for (std::size_t k = 0; k < freq.size(); ++k)
    tv += std::fabs(freq[k] - table.probs[k]);
  tv /= 2.0;
  CHECK(tv <= 0.02);
}

TEST_CASE("gibbs: positive pair coupling gives positive correlation") {
  const auto res = mrf::gibbs_sample(pair_model(0.5), 20000, {500, 1}, 29);
  double corr = 0.0;
  for (std::size_t m = 0; m < res.samples.count(); ++m)
    corr += res.samples.at(m, 1) * res.samples.at(m, 2);
  corr /= double(res.samples.count());
  CHECK(corr > 0.2);
}

TEST_CASE("gibbs: zero burn-in and thinning are flagged") {
  const auto res = mrf::gibbs_sample(pair_model(0.2), 10, {0, 0}, 1);
  CHECK(res.warnings.size() == 2);
}
