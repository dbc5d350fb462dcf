#pragma once

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "mrf/keys.hpp"
#include "mrf/model.hpp"

namespace mrf {

// Full joint distribution over 2^n configurations, indexed by ConfigKey
// (node 1 = most significant bit). Only available up to `exact_limit` nodes.
struct JointTable {
  int n = 0;
  std::vector<double> probs;
  double z = 0;  // partition function, diagnostic

  double prob(ConfigKey key) const { return probs[key]; }
};

inline constexpr int kExactModeLimit = 20;

// probs[x] proportional to exp(sum over cliques of theta(x_clique)).
// Throws std::invalid_argument when n exceeds the limit.
JointTable exact_joint(const Model& model, int exact_limit = kExactModeLimit);

// M x n matrix of +/-1 observations, row-major, one byte per entry.
// Immutable after creation; the distinct-row histogram is built lazily under
// a mutex and shared by concurrent readers afterwards.
class SampleSet {
 public:
  SampleSet(int n, std::uint64_t seed, std::vector<std::int8_t> data);
  SampleSet(const SampleSet& other);
  SampleSet& operator=(const SampleSet&) = delete;

  int n() const { return n_; }
  std::size_t count() const { return m_count_; }
  std::uint64_t seed() const { return seed_; }

  std::int8_t at(std::size_t m, int v) const {  // v is 1-based
    return data_[m * n_ + (v - 1)];
  }
  std::span<const std::int8_t> row(std::size_t m) const {
    return {data_.data() + m * n_, static_cast<std::size_t>(n_)};
  }
  std::span<const std::int8_t> raw() const { return data_; }

  // Bit-packed view of one column: bit m set iff sample m has +1 at node v.
  std::vector<std::uint64_t> packed_column(int v) const;

  // Per-sample configuration keys for an ordered node tuple, in sample order.
  std::vector<ConfigKey> column_keys(std::span<const int> nodes) const;

  ConfigKey row_key(std::size_t m) const;

  // Distinct full-row configurations with multiplicities, sorted by key.
  // Requires n <= 64.
  const std::vector<std::pair<ConfigKey, std::uint64_t>>& distinct_rows() const;

  void save(const std::filesystem::path& path) const;
  static SampleSet load(const std::filesystem::path& path);
  void export_csv(const std::filesystem::path& path) const;

 private:
  int n_;
  std::size_t m_count_;
  std::uint64_t seed_;
  std::vector<std::int8_t> data_;
  mutable std::once_flag distinct_once_;
  mutable std::vector<std::pair<ConfigKey, std::uint64_t>> distinct_;
};

// M i.i.d. draws by inverse CDF over the joint table. Deterministic in seed.
SampleSet sample_exact(const JointTable& table, std::size_t m_count,
                       std::uint64_t seed);

struct GibbsOptions {
  std::size_t burn_in = 1000;
  std::size_t thinning = 1;
};

struct GibbsResult {
  SampleSet samples;
  std::vector<std::string> warnings;
};

// Systematic-scan Gibbs sampler (node 1..n per sweep). The single-site
// conditional of node u is computed from the cliques containing u only.
GibbsResult gibbs_sample(const Model& model, std::size_t m_count,
                         const GibbsOptions& opts, std::uint64_t seed);

// p(x_u = +1 | rest) for the given full configuration; exposed so tests can
// compare it against conditionals of the exact joint table.
double gibbs_conditional_plus(const Model& model,
                              std::span<const std::int8_t> config, int u);

}  // namespace mrf
