#include "mrf/empirics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace mrf {

namespace {

void check_nodes(int n, std::span<const int> nodes, const char* what) {
  std::set<int> seen;
  for (int v : nodes) {
    if (v < 1 || v > n)
      throw std::invalid_argument(std::string(what) + ": node out of range");
    if (!seen.insert(v).second)
      throw std::invalid_argument(std::string(what) + ": duplicate node");
  }
}

}  // namespace

std::map<ConfigKey, double> empirical_prob(const SampleSet& samples,
                                           std::span<const int> nodes) {
  if (nodes.empty())
    throw std::invalid_argument("empirical_prob: empty node tuple");
  check_nodes(samples.n(), nodes, "empirical_prob");
  std::map<ConfigKey, std::uint64_t> counts;
  for (const auto& [key, cnt] : samples.distinct_rows()) {
    counts[project_key(key, samples.n(), nodes)] += cnt;
  }
  std::map<ConfigKey, double> out;
  const double m = static_cast<double>(samples.count());
  for (const auto& [key, cnt] : counts) out[key] = static_cast<double>(cnt) / m;
  return out;
}

EmpiricalCache::EmpiricalCache(const SampleSet& samples, int u,
                               std::vector<int> s_set)
    : m_(samples.count()), n_(samples.n()) {
  if (m_ == 0) throw std::invalid_argument("EmpiricalCache: empty sample set");
  if (u < 1 || u > n_) throw std::invalid_argument("EmpiricalCache: u out of range");
  std::sort(s_set.begin(), s_set.end());
  check_nodes(n_, s_set, "EmpiricalCache S");
  for (int v : s_set) {
    if (v == u) throw std::invalid_argument("EmpiricalCache: u in S");
  }
  ctx_.u = u;
  ctx_.s_set = std::move(s_set);

  const auto& rows = samples.distinct_rows();
  row_keys_.reserve(rows.size());
  row_counts_.reserve(rows.size());
  row_bit_u_.reserve(rows.size());
  row_key_s_.reserve(rows.size());
  const int ls = static_cast<int>(ctx_.s_set.size());
  for (const auto& [key, cnt] : rows) {
    row_keys_.push_back(key);
    row_counts_.push_back(cnt);
    const std::uint8_t bu =
        static_cast<std::uint8_t>((key >> bit_position(n_, u)) & 1u);
    const ConfigKey ks = project_key(key, n_, ctx_.s_set);
    row_bit_u_.push_back(bu);
    row_key_s_.push_back(ks);
    u_counts_[bu] += cnt;
    s_counts_[ks] += cnt;
    us_counts_[(static_cast<ConfigKey>(bu) << ls) | ks] += cnt;
  }
  ctx_.s_configs.assign(s_counts_.begin(), s_counts_.end());
}

double EmpiricalCache::p_s(ConfigKey key_s) const {
  const auto it = s_counts_.find(key_s);
  if (it == s_counts_.end()) return 0.0;
  return static_cast<double>(it->second) / static_cast<double>(m_);
}

double EmpiricalCache::p_us(int bit_u, ConfigKey key_s) const {
  const int ls = static_cast<int>(ctx_.s_set.size());
  const auto it = us_counts_.find((static_cast<ConfigKey>(bit_u) << ls) | key_s);
  if (it == us_counts_.end()) return 0.0;
  return static_cast<double>(it->second) / static_cast<double>(m_);
}

EmpiricalCache::TripleStats EmpiricalCache::query(
    std::span<const int> i_set) const {
  if (i_set.empty())
    throw std::invalid_argument("v_hat: empty subset I");
  check_nodes(n_, i_set, "v_hat I");
  for (int v : i_set) {
    if (v == ctx_.u || std::binary_search(ctx_.s_set.begin(), ctx_.s_set.end(), v))
      throw std::invalid_argument("v_hat: I overlaps {u} or S");
  }
  const int l = static_cast<int>(i_set.size());
  const int ls = static_cast<int>(ctx_.s_set.size());
  if (1 + l + ls > 62)
    throw std::invalid_argument("v_hat: combined key width too large");

  TripleStats st;
  st.l = l;
  st.i_counts.assign(std::size_t{1} << l, 0);
  std::map<ConfigKey, std::uint64_t> triples;
  for (std::size_t d = 0; d < row_keys_.size(); ++d) {
    const ConfigKey ki = project_key(row_keys_[d], n_, i_set);
    const ConfigKey composite = (row_key_s_[d] << (l + 1)) | (ki << 1) |
                                static_cast<ConfigKey>(row_bit_u_[d]);
    triples[composite] += row_counts_[d];
    st.i_counts[ki] += row_counts_[d];
    st.is_counts[(row_key_s_[d] << l) | ki] += row_counts_[d];
  }
  st.triples.assign(triples.begin(), triples.end());
  return st;
}

double EmpiricalCache::v_hat(std::span<const int> i_set) const {
  const TripleStats st = query(i_set);
  const int l = st.l;
  const int ls = static_cast<int>(ctx_.s_set.size());
  const double m = static_cast<double>(m_);
  const ConfigKey i_mask = (ConfigKey{1} << l) - 1;

  double total = 0.0;
  for (const auto& [composite, cnt] : st.triples) {
    const int bu = static_cast<int>(composite & 1u);
    const ConfigKey ki = (composite >> 1) & i_mask;
    const ConfigKey ks = composite >> (l + 1);
    const double pu = static_cast<double>(u_counts_[bu]) / m;
    const double pi = static_cast<double>(st.i_counts[ki]) / m;
    const double ps = static_cast<double>(s_counts_.at(ks)) / m;
    const double puis = static_cast<double>(cnt) / m;
    const double pus =
        static_cast<double>(us_counts_.at((static_cast<ConfigKey>(bu) << ls) | ks)) / m;
    const double pis = static_cast<double>(st.is_counts.at((ks << l) | ki)) / m;
    const double inner = std::fabs(puis * ps - pus * pis) / ps;
    total += pu * pi * inner;
  }
  return total;
}

double v_hat(const SampleSet& samples, int u, std::span<const int> s_set,
             std::span<const int> i_set) {
  EmpiricalCache cache(samples, u, std::vector<int>(s_set.begin(), s_set.end()));
  return cache.v_hat(i_set);
}

double true_v(const JointTable& table, int u, std::span<const int> s_set,
              std::span<const int> i_set) {
  const int n = table.n;
  if (u < 1 || u > n) throw std::invalid_argument("true_v: u out of range");
  std::vector<int> s_sorted(s_set.begin(), s_set.end());
  std::sort(s_sorted.begin(), s_sorted.end());
  check_nodes(n, s_sorted, "true_v S");
  check_nodes(n, i_set, "true_v I");
  if (i_set.empty()) throw std::invalid_argument("true_v: empty subset I");
  for (int v : s_sorted)
    if (v == u) throw std::invalid_argument("true_v: u in S");
  for (int v : i_set) {
    if (v == u || std::binary_search(s_sorted.begin(), s_sorted.end(), v))
      throw std::invalid_argument("true_v: I overlaps {u} or S");
  }

  const int l = static_cast<int>(i_set.size());
  const int ls = static_cast<int>(s_sorted.size());
  const std::size_t joint_size = std::size_t{1} << (1 + l + ls);
  std::vector<double> joint(joint_size, 0.0);
  const ConfigKey i_mask = (ConfigKey{1} << l) - 1;

  for (std::size_t cfg = 0; cfg < table.probs.size(); ++cfg) {
    const ConfigKey full = static_cast<ConfigKey>(cfg);
    const ConfigKey bu = (full >> bit_position(n, u)) & 1u;
    const ConfigKey ki = project_key(full, n, i_set);
    const ConfigKey ks = project_key(full, n, s_sorted);
    joint[(ks << (l + 1)) | (ki << 1) | bu] += table.probs[cfg];
  }

  std::vector<double> p_u(2, 0.0), p_i(std::size_t{1} << l, 0.0),
      p_s(std::size_t{1} << ls, 0.0), p_us(std::size_t{2} << ls, 0.0),
      p_is(std::size_t{1} << (l + ls), 0.0);
  for (std::size_t idx = 0; idx < joint_size; ++idx) {
    const double p = joint[idx];
    const int bu = static_cast<int>(idx & 1u);
    const ConfigKey ki = (idx >> 1) & i_mask;
    const ConfigKey ks = idx >> (l + 1);
    p_u[bu] += p;
    p_i[ki] += p;
    p_s[ks] += p;
    p_us[(static_cast<ConfigKey>(bu) << ls) | ks] += p;
    p_is[(ks << l) | ki] += p;
  }

  double total = 0.0;
  for (std::size_t idx = 0; idx < joint_size; ++idx) {
    const int bu = static_cast<int>(idx & 1u);
    const ConfigKey ki = (idx >> 1) & i_mask;
    const ConfigKey ks = idx >> (l + 1);
    const double ps = p_s[ks];
    if (ps <= 0.0) continue;
    const double inner =
        std::fabs(joint[idx] * ps -
                  p_us[(static_cast<ConfigKey>(bu) << ls) | ks] * p_is[(ks << l) | ki]) /
        ps;
    total += p_u[bu] * p_i[ki] * inner;
  }
  return total;
}

}  // namespace mrf
