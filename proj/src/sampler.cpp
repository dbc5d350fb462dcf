#include "mrf/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "mrf/rng.hpp"
#include "mrf/simd/kernels.hpp"

namespace mrf {

JointTable exact_joint(const Model& model, int exact_limit) {
  const int n = model.n();
  if (n > exact_limit) {
    throw std::invalid_argument(
        "exact_joint: n = " + std::to_string(n) + " exceeds the exact-mode limit " +
        std::to_string(exact_limit) + "; use the Gibbs sampler instead");
  }
  const std::size_t size = std::size_t{1} << n;
  JointTable table;
  table.n = n;
  table.probs.assign(size, 0.0);

  const auto& k = simd::kernels();
  std::vector<int> shifts;
  for (const auto& c : model.cliques()) {
    shifts.clear();
    for (int v : c.vertices) shifts.push_back(bit_position(n, v));
    k.add_clique_energy(table.probs.data(), size, shifts.data(), c.size(),
                        c.entries.data());
  }
  for (auto& p : table.probs) p = std::exp(p);
  table.z = k.sum(table.probs.data(), size);
  k.scale(table.probs.data(), size, 1.0 / table.z);
  return table;
}

SampleSet::SampleSet(int n, std::uint64_t seed, std::vector<std::int8_t> data)
    : n_(n), seed_(seed), data_(std::move(data)) {
  if (n_ < 1) throw std::invalid_argument("SampleSet: n must be positive");
  if (data_.size() % n_ != 0)
    throw std::invalid_argument("SampleSet: data size not a multiple of n");
  m_count_ = data_.size() / n_;
  for (std::int8_t v : data_) {
    if (v != 1 && v != -1)
      throw std::invalid_argument("SampleSet: entries must be +1 or -1");
  }
}

SampleSet::SampleSet(const SampleSet& other)
    : n_(other.n_), m_count_(other.m_count_), seed_(other.seed_),
      data_(other.data_) {}

std::vector<std::uint64_t> SampleSet::packed_column(int v) const {
  std::vector<std::uint64_t> bits((m_count_ + 63) / 64, 0);
  for (std::size_t m = 0; m < m_count_; ++m) {
    if (at(m, v) > 0) bits[m >> 6] |= std::uint64_t{1} << (m & 63);
  }
  return bits;
}

ConfigKey SampleSet::row_key(std::size_t m) const {
  ConfigKey key = 0;
  const std::int8_t* r = data_.data() + m * n_;
  for (int j = 0; j < n_; ++j) {
    key |= static_cast<ConfigKey>(r[j] > 0) << (n_ - 1 - j);
  }
  return key;
}

std::vector<ConfigKey> SampleSet::column_keys(std::span<const int> nodes) const {
  const int k = static_cast<int>(nodes.size());
  std::vector<ConfigKey> keys(m_count_, 0);
  for (int i = 0; i < k; ++i) {
    const int col = nodes[i] - 1;
    const int shift = k - 1 - i;
    for (std::size_t m = 0; m < m_count_; ++m) {
      keys[m] |= static_cast<ConfigKey>(data_[m * n_ + col] > 0) << shift;
    }
  }
  return keys;
}

const std::vector<std::pair<ConfigKey, std::uint64_t>>&
SampleSet::distinct_rows() const {
  std::call_once(distinct_once_, [this] {
    if (n_ > 64)
      throw std::invalid_argument("distinct_rows requires n <= 64");
    std::vector<ConfigKey> keys(m_count_);
    for (std::size_t m = 0; m < m_count_; ++m) keys[m] = row_key(m);
    std::sort(keys.begin(), keys.end());
    for (std::size_t i = 0; i < keys.size();) {
      std::size_t j = i;
      while (j < keys.size() && keys[j] == keys[i]) ++j;
      distinct_.emplace_back(keys[i], j - i);
      i = j;
    }
  });
  return distinct_;
}

namespace {
constexpr char kMagic[8] = {'M', 'R', 'F', 'S', 'A', 'M', 'P', '\0'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::ifstream& in, T& v) {
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
}
}  // namespace

void SampleSet::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out.write(kMagic, sizeof(kMagic));
  write_pod(out, kVersion);
  write_pod(out, static_cast<std::uint32_t>(n_));
  write_pod(out, static_cast<std::uint64_t>(m_count_));
  write_pod(out, seed_);
  out.write(reinterpret_cast<const char*>(data_.data()),
            static_cast<std::streamsize>(data_.size()));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

SampleSet SampleSet::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("not a sample file: " + path.string());
  std::uint32_t version = 0, n = 0;
  std::uint64_t m = 0, seed = 0;
  read_pod(in, version);
  read_pod(in, n);
  read_pod(in, m);
  read_pod(in, seed);
  if (version != kVersion)
    throw std::runtime_error("unsupported sample file version");
  std::vector<std::int8_t> data(static_cast<std::size_t>(m) * n);
  in.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(data.size()));
  if (!in) throw std::runtime_error("truncated sample file: " + path.string());
  return SampleSet(static_cast<int>(n), seed, std::move(data));
}

void SampleSet::export_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  for (std::size_t m = 0; m < m_count_; ++m) {
    for (int j = 0; j < n_; ++j) {
      if (j) out << ',';
      out << static_cast<int>(data_[m * n_ + j]);
    }
    out << '\n';
  }
}

SampleSet sample_exact(const JointTable& table, std::size_t m_count,
                       std::uint64_t seed) {
  const int n = table.n;
  const std::size_t size = table.probs.size();
  std::vector<double> cdf(size);
  double acc = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    acc += table.probs[i];
    cdf[i] = acc;
  }
  cdf[size - 1] = std::max(cdf[size - 1], 1.0);  // guard the last bucket

  Rng rng(seed);
  std::vector<std::int8_t> data(m_count * n);
  for (std::size_t m = 0; m < m_count; ++m) {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    const ConfigKey key = static_cast<ConfigKey>(it - cdf.begin());
    for (int j = 0; j < n; ++j) {
      data[m * n + j] =
          static_cast<std::int8_t>(((key >> (n - 1 - j)) & 1u) ? 1 : -1);
    }
  }
  return SampleSet(n, seed, std::move(data));
}

double gibbs_conditional_plus(const Model& model,
                              std::span<const std::int8_t> config, int u) {
  // p(x_u = +1 | rest) from the cliques containing u only (Markov property).
  double e_plus = 0.0, e_minus = 0.0;
  for (const auto& c : model.cliques()) {
    bool has_u = false;
    for (int v : c.vertices) has_u |= (v == u);
    if (!has_u) continue;
    const int l = c.size();
    ConfigKey base = 0;
    int u_shift = 0;
    for (int i = 0; i < l; ++i) {
      const int v = c.vertices[i];
      if (v == u) {
        u_shift = l - 1 - i;
      } else {
        base |= static_cast<ConfigKey>(config[v - 1] > 0) << (l - 1 - i);
      }
    }
    e_plus += c.entries[base | (ConfigKey{1} << u_shift)];
    e_minus += c.entries[base];
  }
  return 1.0 / (1.0 + std::exp(e_minus - e_plus));
}

GibbsResult gibbs_sample(const Model& model, std::size_t m_count,
                         const GibbsOptions& opts, std::uint64_t seed) {
  std::vector<std::string> warnings;
  if (opts.burn_in == 0)
    warnings.push_back("burn_in = 0: chain starts at an arbitrary state");
  if (opts.thinning == 0)
    warnings.push_back("thinning = 0: treated as 1 (every sweep kept)");
  const std::size_t thin = std::max<std::size_t>(1, opts.thinning);

  const int n = model.n();
  Rng rng(seed);
  std::vector<std::int8_t> state(n);
  for (int j = 0; j < n; ++j) state[j] = rng.uniform() < 0.5 ? -1 : 1;

  auto sweep = [&] {
    for (int u = 1; u <= n; ++u) {
      const double p = gibbs_conditional_plus(model, state, u);
      state[u - 1] = rng.uniform() < p ? 1 : -1;
    }
  };

  for (std::size_t s = 0; s < opts.burn_in; ++s) sweep();

  std::vector<std::int8_t> data(m_count * n);
  for (std::size_t m = 0; m < m_count; ++m) {
    for (std::size_t t = 0; t < thin; ++t) sweep();
    std::copy(state.begin(), state.end(), data.begin() + m * n);
  }
  return GibbsResult{SampleSet(n, seed, std::move(data)), std::move(warnings)};
}

}  // namespace mrf
