#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "mrf/empirics.hpp"
#include "mrf/experiment.hpp"
#include "mrf/greedy.hpp"
#include "mrf/rng.hpp"

using mrf::EmpiricalCache;
using mrf::Model;
using mrf::SearchPlan;

namespace {

Model chain4(double j = 0.3) {
  // path 1 - 2 - 3 - 4 with pairwise couplings j * x_a * x_b
  std::vector<mrf::CliqueTensor> cliques;
  for (auto [a, b] : {std::pair{1, 2}, {2, 3}, {3, 4}}) {
    cliques.push_back({{a, b}, {j, -j, -j, j}});
  }
  return Model(4, 2, j, 1.0, std::move(cliques));
}

mrf::SampleSet uniform_samples(int n, std::size_t m, std::uint64_t seed) {
  mrf::Rng rng(seed);
  std::vector<std::int8_t> data(m * n);
  for (auto& x : data) x = rng.uniform() < 0.5 ? -1 : 1;
  return mrf::SampleSet(n, seed, std::move(data));
}

// Evaluator over exact tables: drives the learner with true_v instead of
// empirical estimates.
mrf::SubsetFinder exact_finder(const mrf::JointTable& table, int u, int n,
                               double tau) {
  mrf::SubsetFinder f;
  f.find = [&table, u, n, tau](const std::vector<int>& s, int l,
                               std::uint64_t& evals) -> std::optional<mrf::FoundSubset> {
    for (const auto& cand : mrf::enumerate_candidates(n, u, s, l)) {
      ++evals;
      const double v = mrf::true_v(table, u, s, cand);
      if (mrf::threshold_test(v, tau)) return mrf::FoundSubset{cand, v};
    }
    return std::nullopt;
  };
  f.value = [&table, u](const std::vector<int>& s, const std::vector<int>& i,
                        std::uint64_t& evals) {
    ++evals;
    return mrf::true_v(table, u, s, i);
  };
  return f;
}

}  // namespace

TEST_CASE("enumerate_candidates: size, order and counts") {
  const auto singles = mrf::enumerate_candidates(5, 1, std::vector<int>{}, 1);
  CHECK(singles == std::vector<std::vector<int>>{{2}, {3}, {4}, {5}});

  const auto pairs = mrf::enumerate_candidates(5, 1, std::vector<int>{2}, 2);
  CHECK(pairs.size() == 3);  // C(3, 2)
  CHECK(pairs == std::vector<std::vector<int>>{{3, 4}, {3, 5}, {4, 5}});

  // count always equals C(n-1-|S|, l)
  auto binom = [](int n, int k) {
    double r = 1;
    for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
    return static_cast<std::size_t>(r + 0.5);
  };
  for (int n : {5, 8}) {
    for (int s_size : {0, 1, 2}) {
      std::vector<int> s;
      for (int v = 2; v < 2 + s_size; ++v) s.push_back(v);
      for (int l : {1, 2, 3}) {
        CHECK(mrf::enumerate_candidates(n, 1, s, l).size() ==
              binom(n - 1 - s_size, l));
      }
    }
  }

  // l exceeding the pool yields an empty enumeration
  CHECK(mrf::enumerate_candidates(3, 1, std::vector<int>{2}, 2).empty());
}

TEST_CASE("find_subset_classical: first passing subset in lexicographic order") {
  const auto table = mrf::exact_joint(mrf::figure1_model());
  const auto samples = mrf::sample_exact(table, 50000, 11);
  EmpiricalCache cache(samples, 1, {});

  // Expected: scan pairs lexicographically with the same threshold.
  const double tau = 0.02;
  std::optional<std::vector<int>> expected;
  for (const auto& cand : mrf::enumerate_candidates(5, 1, std::vector<int>{}, 2)) {
    if (cache.v_hat(cand) > tau) {
      expected = cand;
      break;
    }
  }
  REQUIRE(expected.has_value());

  std::uint64_t evals = 0;
  const auto found = mrf::find_subset_classical(cache, 5, 2, tau,
                                                mrf::SelectionRule::first_passing,
                                                evals);
  REQUIRE(found.has_value());
  CHECK(found->subset == *expected);
  CHECK(evals >= 1);
}

TEST_CASE("find_subset_classical: nothing passes under independence") {
  const auto samples = uniform_samples(6, 40000, 3);
  EmpiricalCache cache(samples, 1, {});
  std::uint64_t evals = 0;
  const auto found = mrf::find_subset_classical(cache, 6, 1, 0.05,
                                                mrf::SelectionRule::first_passing,
                                                evals);
  CHECK_FALSE(found.has_value());
  CHECK(evals == 5);  // full scan
}

TEST_CASE("find_subset_classical: argmax ties break to the lexicographic first") {
  const auto samples = uniform_samples(4, 100, 9);
  EmpiricalCache cache(samples, 1, {});
  std::uint64_t evals = 0;
  // tau tiny negative threshold is invalid; use a tiny positive one and
  // verify the argmax is the max over the exhaustive scan.
  const auto found = mrf::find_subset_classical(cache, 4, 1, 1e-9,
                                                mrf::SelectionRule::argmax,
                                                evals);
  double best = -1.0;
  std::vector<int> best_subset;
  for (const auto& cand : mrf::enumerate_candidates(4, 1, std::vector<int>{}, 1)) {
    const double v = cache.v_hat(cand);
    if (v > best) {
      best = v;
      best_subset = cand;
    }
  }
  if (found) {
    CHECK(found->subset == best_subset);
    CHECK(found->v == best);
  } else {
    CHECK(best <= 1e-9);
  }
}

TEST_CASE("learn_neighborhood: chain interior node") {
  const Model m = chain4(0.35);
  const auto table = mrf::exact_joint(m);
  const auto samples = mrf::sample_exact(table, 100000, 21);
  SearchPlan plan;
  plan.u = 2;
  plan.tau = mrf::calibrate_tau(samples, 2);
  plan.cap_l = 3;
  const auto res = mrf::learn_neighborhood(samples, {4, 2}, plan);
  CHECK(res.neighbors == std::vector<int>{1, 3});
  CHECK_FALSE(res.cap_terminated);
}

TEST_CASE("learn_neighborhood: five-node example, node 1") {
  const auto table = mrf::exact_joint(mrf::figure1_model());
  const auto samples = mrf::sample_exact(table, 100000, 33);
  SearchPlan plan;
  plan.u = 1;
  plan.tau = mrf::calibrate_tau(samples);
  plan.cap_l = 4;
  const auto res = mrf::learn_neighborhood(samples, {5, 3}, plan);
  CHECK(res.neighbors == std::vector<int>{2, 3, 5});
  // every pruned node sits below tau, every survivor at or above
  for (const auto& p : res.pruned) CHECK(p.v < plan.tau);
}

TEST_CASE("learn_neighborhood: edgeless model yields empty neighborhoods") {
  const auto samples = uniform_samples(5, 50000, 77);
  for (int u = 1; u <= 5; ++u) {
    SearchPlan plan;
    plan.u = u;
    plan.tau = 0.05;
    plan.cap_l = 4;
    const auto res = mrf::learn_neighborhood(samples, {5, 3}, plan);
    CHECK(res.neighbors.empty());
  }
}

TEST_CASE("learn_neighborhood: deterministic across repeated runs") {
  const auto table = mrf::exact_joint(mrf::figure1_model());
  const auto samples = mrf::sample_exact(table, 20000, 5);
  SearchPlan plan;
  plan.u = 4;
  plan.tau = 0.02;
  plan.cap_l = 4;
  const auto a = mrf::learn_neighborhood(samples, {5, 3}, plan);
  const auto b = mrf::learn_neighborhood(samples, {5, 3}, plan);
  CHECK(a.neighbors == b.neighbors);
  CHECK(a.stats.v_evals == b.stats.v_evals);
  REQUIRE(a.superset_trace.size() == b.superset_trace.size());
  for (std::size_t i = 0; i < a.superset_trace.size(); ++i) {
    CHECK(a.superset_trace[i].subset == b.superset_trace[i].subset);
    CHECK(a.superset_trace[i].v == b.superset_trace[i].v);
  }
}

TEST_CASE("learn_neighborhood: superset property before pruning") {
  const auto table = mrf::exact_joint(mrf::figure1_model());
  const auto truth = mrf::neighborhoods(mrf::figure1_model());
  int hits = 0;
  const int trials = 10;
  for (int t = 0; t < trials; ++t) {
    const auto samples = mrf::sample_exact(table, 100000, 1000 + t);
    SearchPlan plan;
    plan.u = 1;
    plan.tau = mrf::calibrate_tau(samples);
    plan.cap_l = 4;
    const auto res = mrf::learn_neighborhood(samples, {5, 3}, plan);
    std::set<int> superset;
    for (const auto& tr : res.superset_trace)
      superset.insert(tr.subset.begin(), tr.subset.end());
    const auto& nu = truth.of(1);
    if (std::all_of(nu.begin(), nu.end(),
                    [&](int v) { return superset.count(v) > 0; }))
      ++hits;
  }
  CHECK(hits >= 9);
}

TEST_CASE("learn_neighborhood: evaluation count stays under the crude bound") {
  const auto table = mrf::exact_joint(mrf::figure1_model());
  const auto samples = mrf::sample_exact(table, 50000, 13);
  SearchPlan plan;
  plan.u = 1;
  plan.tau = 0.02;
  plan.cap_l = 4;
  const auto res = mrf::learn_neighborhood(samples, {5, 3}, plan);
  // (L+1) * sum_{l=1}^{r-1} C(n-1, l) with n=5, r=3, L=4
  const double bound = (4 + 1) * (4 + 6);
  CHECK(static_cast<double>(res.stats.v_evals) <= bound);
}

TEST_CASE("pruning soundness: with exact values no true neighbor is removed") {
  mrf::GeneratorSpec spec;
  spec.n = 7;
  spec.r = 3;
  spec.d = 3;
  int checked = 0;
  for (std::uint64_t seed = 0; checked < 3 && seed < 20; ++seed) {
    spec.seed = seed;
    const Model m = mrf::gen_model(spec);
    const auto table = mrf::exact_joint(m);
    const auto nb = mrf::neighborhoods(m);
    ++checked;
    for (int u = 1; u <= m.n(); ++u) {
      SearchPlan plan;
      plan.u = u;
      plan.tau = 1e-7;  // far below any exact signal, far above exact zeros
      plan.cap_l = 6;
      const auto res = mrf::learn_neighborhood_with(
          exact_finder(table, u, m.n(), plan.tau), {m.n(), m.r()}, plan);
      for (const auto& p : res.pruned) {
        const auto& nu = nb.of(u);
        CHECK_FALSE(std::binary_search(nu.begin(), nu.end(), p.node));
      }
    }
  }
  CHECK(checked == 3);
}

TEST_CASE("recover_graph: five-node example end to end") {
  const auto table = mrf::exact_joint(mrf::figure1_model());
  const auto samples = mrf::sample_exact(table, 100000, 2);
  SearchPlan plan;
  plan.tau = mrf::calibrate_tau(samples);
  plan.cap_l = 4;
  const auto rec = mrf::recover_graph(samples, {5, 3}, plan,
                                      mrf::Symmetrization::union_rule, 2);
  CHECK(rec.edges == mrf::figure1_edges());
  CHECK(rec.asymmetries.empty());
  // JSON rendering includes the per-node traces
  const auto json = mrf::to_json_string(rec);
  CHECK(json.find("superset_trace") != std::string::npos);
}

TEST_CASE("recover_graph: empty samples throw") {
  mrf::SampleSet empty(3, 0, {});
  SearchPlan plan;
  plan.tau = 0.1;
  plan.cap_l = 2;
  CHECK_THROWS_AS(mrf::recover_graph(empty, {3, 2}, plan), std::invalid_argument);
}

TEST_CASE("search plan validation") {
  SearchPlan plan;
  plan.u = 1;
  plan.tau = 0.0;
  plan.cap_l = 2;
  CHECK_THROWS_AS(plan.validate(), std::invalid_argument);
  plan.tau = 0.1;
  plan.cap_l = 0;
  CHECK_THROWS_AS(plan.validate(), std::invalid_argument);
}
