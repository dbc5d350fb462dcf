#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "mrf/keys.hpp"
#include "mrf/sampler.hpp"

namespace mrf {

// Target node plus ordered conditioning set with the S-configurations
// observed in the samples.
struct ConditioningContext {
  int u = 0;
  std::vector<int> s_set;  // ascending, excludes u
  std::vector<std::pair<ConfigKey, std::uint64_t>> s_configs;  // sorted, counts sum to M
};

// Empirical probability table over an ordered node tuple: observed
// configurations only, value = count / M.
std::map<ConfigKey, double> empirical_prob(const SampleSet& samples,
                                           std::span<const int> nodes);

// Per-(u, S) cache over the distinct sample rows. One build pass; each
// v_hat query for a subset I then costs O(#distinct rows), not O(M).
// Read-only after construction; concurrent queries are safe.
class EmpiricalCache {
 public:
  EmpiricalCache(const SampleSet& samples, int u, std::vector<int> s_set);

  const ConditioningContext& context() const { return ctx_; }
  std::size_t sample_count() const { return m_; }

  // Observed-triple statistics for one queried subset I, exposed for the
  // vhat CLI breakdown and the cache-consistency tests.
  struct TripleStats {
    // key = (key_s << (l+1)) | (key_i << 1) | bit_u, ascending
    std::vector<std::pair<ConfigKey, std::uint64_t>> triples;
    std::vector<std::uint64_t> i_counts;                    // dense, 2^l
    std::map<ConfigKey, std::uint64_t> is_counts;           // (key_s << l) | key_i
    int l = 0;
  };
  TripleStats query(std::span<const int> i_set) const;

  // Empirical information quantity of the expanded form: the sum runs over
  // the observed (x_u, x_I, x_S) triples in ascending key order, with
  //   term = p(u) p(I) |p(u,I,S) p(S) - p(u,S) p(I,S)| / p(S).
  double v_hat(std::span<const int> i_set) const;

  double p_u(int bit_u) const {
    return static_cast<double>(u_counts_[bit_u]) / static_cast<double>(m_);
  }
  double p_s(ConfigKey key_s) const;
  double p_us(int bit_u, ConfigKey key_s) const;

 private:
  ConditioningContext ctx_;
  std::size_t m_;
  int n_;
  // per distinct row: full key, count, projected (u,S) pieces
  std::vector<ConfigKey> row_keys_;
  std::vector<std::uint64_t> row_counts_;
  std::vector<std::uint8_t> row_bit_u_;
  std::vector<ConfigKey> row_key_s_;
  std::uint64_t u_counts_[2] = {0, 0};
  std::map<ConfigKey, std::uint64_t> s_counts_;
  std::map<ConfigKey, std::uint64_t> us_counts_;  // (bit_u << |S|) | key_s
};

// Convenience wrapper: builds the cache and evaluates once.
double v_hat(const SampleSet& samples, int u, std::span<const int> s_set,
             std::span<const int> i_set);

// Exact v_{u,I|S} from a joint table, by marginalization. The summation
// runs over all configurations with p(x_S) > 0.
double true_v(const JointTable& table, int u, std::span<const int> s_set,
              std::span<const int> i_set);

// Strict threshold comparison of the learning rule.
inline bool threshold_test(double v_value, double tau) { return v_value > tau; }

}  // namespace mrf
