#include "mrf/qmaxfind.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mrf/rng.hpp"
#include "mrf/simd/kernels.hpp"

namespace mrf {

int index_bits(int n) {
  if (n < 1) throw std::invalid_argument("index_bits: n must be >= 1");
  int b = 1;
  while ((1 << b) < n) ++b;
  return b;
}

SubsetString encode_subset(std::span<const int> indices, int n) {
  const int b = index_bits(n);
  const int l = static_cast<int>(indices.size());
  if (l < 1 || l * b > 62)
    throw std::invalid_argument("encode_subset: size out of range");
  SubsetString s;
  s.indices.assign(indices.begin(), indices.end());
  s.l = l;
  for (int i = 0; i < l; ++i) {
    const int j = indices[i];
    if (j < 1 || j > n) throw std::invalid_argument("encode_subset: index out of range");
    s.code |= static_cast<std::uint64_t>(j - 1) << ((l - 1 - i) * b);
  }
  return s;
}

std::optional<std::vector<int>> decode_string(std::uint64_t code, int l, int n,
                                              int u) {
  const int b = index_bits(n);
  const std::uint64_t mask = (std::uint64_t{1} << b) - 1;
  std::vector<int> out(l);
  for (int i = 0; i < l; ++i) {
    const std::uint64_t field = (code >> ((l - 1 - i) * b)) & mask;
    const int j = static_cast<int>(field) + 1;
    if (j > n || j == u) return std::nullopt;
    if (i > 0 && j <= out[i - 1]) return std::nullopt;
    out[i] = j;
  }
  return out;
}

MembershipResult membership_check(const SubsetString& str, int n, int u) {
  MembershipResult res;
  res.comparisons = std::max(0, str.l - 1);
  res.bits_per_comparison = index_bits(n);
  res.member = true;
  for (int i = 0; i < str.l; ++i) {
    const int j = str.indices[i];
    if (j < 1 || j > n || j == u || (i > 0 && j <= str.indices[i - 1])) {
      res.member = false;
      break;
    }
  }
  return res;
}

namespace {

// Seeded measurement of a real statevector: sample index with probability
// amps[i]^2 / ||amps||^2.
std::size_t measure(std::span<const double> amps, Rng& rng) {
  const auto& k = simd::kernels();
  const double norm2 = k.dot(amps.data(), amps.data(), amps.size());
  const double target = rng.uniform() * norm2;
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < amps.size(); ++i) {
    acc += amps[i] * amps[i];
    if (target < acc) return i;
  }
  return amps.size() - 1;
}

}  // namespace

MaxFindResult durr_hoyer_amplitude(std::span<const double> values, double eta,
                                   std::uint64_t seed,
                                   const DurrHoyerOptions& opts) {
  const std::size_t n = values.size();
  if (n == 0) throw std::invalid_argument("durr_hoyer_amplitude: empty input");
  if (n > opts.amplitude_limit)
    throw std::invalid_argument(
        "durr_hoyer_amplitude: N exceeds the amplitude-mode limit; use the "
        "accounting mode");
  if (!(eta > 0.0) || !(eta < 1.0))
    throw std::invalid_argument("durr_hoyer_amplitude: eta must be in (0,1)");

  MaxFindResult res;
  res.ledger.mode = "amplitude";
  Rng rng(seed);
  std::size_t best = static_cast<std::size_t>(rng.below(n));
  res.ledger.oracle_calls += 1;  // initial threshold verification
  if (n == 1) {
    res.argmax = 0;
    return res;
  }

  const auto& k = simd::kernels();
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  const int max_fails =
      std::max(3, static_cast<int>(std::ceil(std::log2(1.0 / eta))) + 2);
  std::vector<double> amps(n);

  bool improved = true;
  while (improved) {
    improved = false;
    double m = 1.0;
    int fails = 0;
    while (fails < max_fails) {
      const std::uint64_t span = static_cast<std::uint64_t>(std::ceil(m));
      const std::uint64_t iters = rng.below(span);
      // Grover run: uniform start, `iters` oracle+diffusion rounds.
      std::fill(amps.begin(), amps.end(), 1.0 / sqrt_n);
      for (std::uint64_t it = 0; it < iters; ++it) {
        k.phase_flip_above(amps.data(), values.data(), n, values[best]);
        k.invert_about_mean(amps.data(), n);
      }
      const std::size_t cand = measure(amps, rng);
      res.ledger.grover_iterations += iters;
      res.ledger.oracle_calls += iters + 1;  // +1 verification of cand
      if (values[cand] > values[best]) {
        best = cand;
        improved = true;
        break;
      }
      if (m >= sqrt_n) ++fails;
      m = std::min(opts.lambda * m, sqrt_n);
    }
  }

  // Canonicalize ties toward the lowest index.
  for (std::size_t i = 0; i < n; ++i) {
    if (values[i] == values[best]) {
      best = i;
      break;
    }
  }
  res.argmax = best;
  return res;
}

MaxFindResult durr_hoyer_accounting(
    const std::function<double(std::size_t)>& oracle, std::size_t n_range,
    double eta, std::uint64_t seed, const DurrHoyerOptions& opts) {
  if (n_range == 0)
    throw std::invalid_argument("durr_hoyer_accounting: empty range");
  if (!(eta > 0.0) || !(eta < 1.0))
    throw std::invalid_argument("durr_hoyer_accounting: eta must be in (0,1)");

  MaxFindResult res;
  res.ledger.mode = "accounting";
  Rng rng(seed);

  // The oracle is evaluated once per index to drive the exact better-set
  // bookkeeping; those evaluations are simulation overhead, the ledger
  // charges only what the quantum search would pay.
  std::vector<double> values(n_range);
  for (std::size_t i = 0; i < n_range; ++i) values[i] = oracle(i);

  std::size_t best = static_cast<std::size_t>(rng.below(n_range));
  const double dn = static_cast<double>(n_range);
  while (true) {
    std::vector<std::size_t> better;
    for (std::size_t i = 0; i < n_range; ++i) {
      if (values[i] > values[best]) better.push_back(i);
    }
    if (better.empty()) break;
    const double t = static_cast<double>(better.size());
    const std::uint64_t charge =
        static_cast<std::uint64_t>(std::ceil(opts.c0 * std::sqrt(dn / t)));
    res.ledger.grover_iterations += charge;
    res.ledger.oracle_calls += charge;
    best = better[rng.below(better.size())];
  }
  const std::uint64_t verify =
      static_cast<std::uint64_t>(std::ceil(opts.c0 * std::sqrt(dn))) *
      static_cast<std::uint64_t>(std::max(1.0, std::ceil(std::log2(1.0 / eta))));
  res.ledger.oracle_calls += verify;

  // Exact argmax, lowest index on ties.
  for (std::size_t i = 0; i < n_range; ++i) {
    if (values[i] == values[best]) {
      best = i;
      break;
    }
  }
  res.argmax = best;
  return res;
}

std::optional<FoundSubset> find_subset_quantum(const EmpiricalCache& cache,
                                               int n, int l, double tau,
                                               const QuantumPlan& plan,
                                               QueryLedger& ledger,
                                               std::uint64_t& eval_count) {
  const auto& ctx = cache.context();
  const int b = index_bits(n);
  if (l * b > 30)
    throw std::invalid_argument("find_subset_quantum: code space too large");
  const std::size_t space = std::size_t{1} << (l * b);

  // Values over the full code space; invalid codes (outside the string set
  // or overlapping {u} u S) carry the flagged -infinity sentinel so the
  // search space keeps the paper-comparable size.
  constexpr double kInvalid = -std::numeric_limits<double>::infinity();
  std::vector<double> values(space, kInvalid);
  std::uint64_t scan_cost = 0;
  std::size_t valid = 0;
  for (std::size_t code = 0; code < space; ++code) {
    const auto decoded = decode_string(code, l, n, ctx.u);
    if (!decoded) continue;
    bool overlaps = false;
    for (int v : *decoded) {
      if (std::binary_search(ctx.s_set.begin(), ctx.s_set.end(), v))
        overlaps = true;
    }
    if (overlaps) continue;
    values[code] = cache.v_hat(*decoded);
    ++eval_count;
    ++valid;
  }

  // Cost a classical linear scan over the same flagged oracle space would
  // have paid: one query per code until the first pass, or all of them.
  for (std::size_t code = 0; code < space; ++code) {
    ++scan_cost;
    if (values[code] != kInvalid && threshold_test(values[code], tau)) break;
  }

  MaxFindResult found;
  if (plan.mode == SimMode::amplitude) {
    if (space > plan.dh.amplitude_limit)
      throw std::invalid_argument(
          "find_subset_quantum: code space exceeds the amplitude-mode limit; "
          "use the accounting mode");
    found = durr_hoyer_amplitude(values, plan.eta, plan.seed, plan.dh);
  } else {
    found = durr_hoyer_accounting(
        [&values](std::size_t i) { return values[i]; }, space, plan.eta,
        plan.seed, plan.dh);
  }
  found.ledger.classical_equiv_cost = scan_cost;
  ledger.merge(found.ledger);

  if (valid == 0) return std::nullopt;
  const double vmax = values[found.argmax];
  if (vmax == kInvalid || !threshold_test(vmax, tau)) return std::nullopt;
  return FoundSubset{*decode_string(found.argmax, l, n, ctx.u), vmax};
}

QuantumLearnResult learn_neighborhood_quantum(const SampleSet& samples,
                                              ModelMeta meta,
                                              const SearchPlan& plan,
                                              double eta_budget, SimMode mode,
                                              std::uint64_t seed,
                                              const DurrHoyerOptions& dh) {
  if (samples.count() == 0)
    throw std::invalid_argument("learn_neighborhood_quantum: empty sample set");
  if (!(eta_budget > 0.0) || !(eta_budget < 1.0))
    throw std::invalid_argument("learn_neighborhood_quantum: eta_budget in (0,1)");
  plan.validate();

  // Per-call failure budget: w / (2 L (r-1)), so the union bound over the
  // at most L(r-1) max-finding calls spends half of w. Floored to keep the
  // log2(1/eta) charges finite when cap_l is the theoretical bound.
  const double calls = std::max(1.0, plan.cap_l * (meta.r - 1));
  const double eta = std::clamp(eta_budget / (2.0 * calls), 1e-15, 0.5);

  auto shared = std::make_shared<QueryLedger>();
  shared->mode = mode == SimMode::amplitude ? "amplitude" : "accounting";
  auto counter = std::make_shared<std::uint64_t>(0);

  struct CacheSlot {
    std::vector<int> s;
    std::shared_ptr<EmpiricalCache> cache;
  };
  auto slot = std::make_shared<CacheSlot>();
  auto cache_for = [&samples, plan, slot](const std::vector<int>& s) {
    if (!slot->cache || slot->s != s) {
      slot->cache = std::make_shared<EmpiricalCache>(samples, plan.u, s);
      slot->s = s;
    }
    return slot->cache;
  };

  SubsetFinder finder;
  const int n = meta.n;
  finder.find = [cache_for, n, plan, mode, eta, seed, dh, shared, counter](
                    const std::vector<int>& s, int l, std::uint64_t& evals) {
    QuantumPlan qp;
    qp.mode = mode;
    qp.eta = eta;
    qp.dh = dh;
    qp.seed = derive_seed(seed, (*counter)++);
    auto found = find_subset_quantum(*cache_for(s), n, l, plan.tau, qp,
                                     *shared, evals);
    return found;
  };
  finder.value = [cache_for](const std::vector<int>& s,
                             const std::vector<int>& i_set,
                             std::uint64_t& evals) {
    ++evals;
    return cache_for(s)->v_hat(i_set);
  };

  QuantumLearnResult out{learn_neighborhood_with(finder, meta, plan), *shared};
  return out;
}

namespace {
inline double log2c(double x) { return std::log2(x); }
}

double CostModel::membership_cost(int l, int n) const {
  return c_membership * l * log2c(std::max(2.0, static_cast<double>(n)));
}

double CostModel::single_marginal_cost(int r, double m, int n) const {
  return c_single * (std::pow(2.0, r - 1) * m + m * log2c(std::max(2.0, double(n))));
}

double CostModel::joint_marginal_cost(int s_size, double m, int n,
                                      double s_configs, int r) const {
  return c_joint * s_size * m *
         (log2c(std::max(2.0, double(n))) + s_configs * std::pow(2.0, r - 1));
}

double CostModel::state_prep_cost(int s_size, double m, int n,
                                  double s_configs, int r) const {
  return c_state * s_size * m *
         (s_configs * std::pow(2.0, r - 1) + log2c(std::max(2.0, double(n))));
}

double CostModel::subset_search_cost(int s_size, double s_configs, int r,
                                     double m, int n, double w) const {
  return c_search * s_size * s_configs * std::pow(2.0, r - 1) * m *
         std::sqrt(std::pow(static_cast<double>(n), r - 1)) * log2c(1.0 / w);
}

double CostModel::total_cost(double cap_l, double m, int n, int r,
                             double w) const {
  return c_total * std::exp2(cap_l) * m *
         std::sqrt(std::pow(static_cast<double>(n), r + 1)) * log2c(1.0 / w);
}

double CostModel::classical_total_cost(double m, int n, int r) const {
  return c3 * m * std::pow(static_cast<double>(n), r);
}

double CostModel::log2_crossover_n(double cap_l, double w, int r) const {
  if (r < 2) throw std::invalid_argument("crossover: r must be >= 2");
  // 2^L n^{(r+1)/2} log2(1/w) = c3 n^r  =>  n^{(r-1)/2} = 2^L log2(1/w)/c3
  return (2.0 * cap_l + 2.0 * log2c(log2c(1.0 / w)) - 2.0 * log2c(c3)) /
         (r - 1);
}

double CostModel::crossover_n(double cap_l, double w, int r) const {
  return std::exp2(log2_crossover_n(cap_l, w, r));
}

CostPrediction predict_costs(int n, int r, int d, double m, double w,
                             double alpha, double beta, const CostModel& cm) {
  CostPrediction p;
  p.constants = derived_constants_from_params(n, r, d, alpha, beta, w);
  // Representative search state: converged |S| = d, s = min(2^|S|, M).
  const int s_size = std::max(1, d);
  const double s_configs = std::min(std::exp2(s_size), m);
  p.membership = cm.membership_cost(r - 1, n);
  p.single_marginal = cm.single_marginal_cost(r, m, n);
  p.joint_marginal = cm.joint_marginal_cost(s_size, m, n, s_configs, r);
  p.state_prep = cm.state_prep_cost(s_size, m, n, s_configs, r);
  p.subset_search = cm.subset_search_cost(s_size, s_configs, r, m, n, w);
  p.quantum_total = cm.total_cost(p.constants.cap_l, m, n, r, w);
  p.classical_total = cm.classical_total_cost(m, n, r);
  p.log2_crossover_n = cm.log2_crossover_n(p.constants.cap_l, w, r);
  p.crossover_n = std::exp2(p.log2_crossover_n);
  return p;
}

}  // namespace mrf
