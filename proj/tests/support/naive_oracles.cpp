#include "naive_oracles.hpp"

#include <cmath>

namespace naive {

std::uint64_t count_matching(const mrf::SampleSet& samples,
                             const std::vector<int>& nodes,
                             std::uint64_t want) {
  const int k = static_cast<int>(nodes.size());
  std::uint64_t count = 0;
  for (std::size_t m = 0; m < samples.count(); ++m) {
    bool match = true;
    for (int i = 0; i < k; ++i) {
      const bool bit = (want >> (k - 1 - i)) & 1u;
      if ((samples.at(m, nodes[i]) > 0) != bit) {
        match = false;
        break;
      }
    }
    if (match) ++count;
  }
  return count;
}

double v_hat(const mrf::SampleSet& samples, int u, const std::vector<int>& s,
             const std::vector<int>& i_set) {
  const int ls = static_cast<int>(s.size());
  const int l = static_cast<int>(i_set.size());
  const double m = static_cast<double>(samples.count());

  double total = 0.0;
  for (std::uint64_t ks = 0; ks < (std::uint64_t{1} << ls); ++ks) {
    const std::uint64_t c_s = count_matching(samples, s, ks);
    if (c_s == 0) continue;
    for (std::uint64_t ki = 0; ki < (std::uint64_t{1} << l); ++ki) {
      for (std::uint64_t bu = 0; bu < 2; ++bu) {
        // full triple (u, I, S) in tuple order u, then I, then S
        std::vector<int> tuple;
        tuple.push_back(u);
        tuple.insert(tuple.end(), i_set.begin(), i_set.end());
        tuple.insert(tuple.end(), s.begin(), s.end());
        const std::uint64_t want = (bu << (l + ls)) | (ki << ls) | ks;
        const std::uint64_t c_uis = count_matching(samples, tuple, want);
        if (c_uis == 0) continue;

        std::vector<int> us_tuple{u};
        us_tuple.insert(us_tuple.end(), s.begin(), s.end());
        std::vector<int> is_tuple(i_set);
        is_tuple.insert(is_tuple.end(), s.begin(), s.end());

        const std::uint64_t c_u = count_matching(samples, {u}, bu);
        const std::uint64_t c_i = count_matching(samples, i_set, ki);
        const std::uint64_t c_us =
            count_matching(samples, us_tuple, (bu << ls) | ks);
        const std::uint64_t c_is =
            count_matching(samples, is_tuple, (ki << ls) | ks);

        const double pu = static_cast<double>(c_u) / m;
        const double pi = static_cast<double>(c_i) / m;
        const double ps = static_cast<double>(c_s) / m;
        const double puis = static_cast<double>(c_uis) / m;
        const double pus = static_cast<double>(c_us) / m;
        const double pis = static_cast<double>(c_is) / m;
        const double inner = std::fabs(puis * ps - pus * pis) / ps;
        total += pu * pi * inner;
      }
    }
  }
  return total;
}

std::vector<double> joint(const mrf::Model& model) {
  const int n = model.n();
  std::vector<double> probs(std::size_t{1} << n);
  double z = 0.0;
  for (std::size_t cfg = 0; cfg < probs.size(); ++cfg) {
    double energy = 0.0;
    for (const auto& c : model.cliques()) {
      const int l = c.size();
      std::size_t idx = 0;
      for (int i = 0; i < l; ++i) {
        const bool bit = (cfg >> (n - c.vertices[i])) & 1u;
        idx |= static_cast<std::size_t>(bit) << (l - 1 - i);
      }
      energy += c.entries[idx];
    }
    probs[cfg] = std::exp(energy);
    z += probs[cfg];
  }
  for (auto& p : probs) p /= z;
  return probs;
}

std::vector<double> marginal(const std::vector<double>& joint, int n,
                             const std::vector<int>& nodes) {
  const int k = static_cast<int>(nodes.size());
  std::vector<double> out(std::size_t{1} << k, 0.0);
  for (std::size_t cfg = 0; cfg < joint.size(); ++cfg) {
    std::size_t key = 0;
    for (int i = 0; i < k; ++i) {
      key |= ((cfg >> (n - nodes[i])) & 1u) << (k - 1 - i);
    }
    out[key] += joint[cfg];
  }
  return out;
}

}  // namespace naive
