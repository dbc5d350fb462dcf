#include "mrf/greedy.hpp"

#include <algorithm>
#include <chrono>
#include <set>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace mrf {

void SearchPlan::validate() const {
  if (u < 1) throw std::invalid_argument("SearchPlan: u must be >= 1");
  if (!(tau > 0.0)) throw std::invalid_argument("SearchPlan: tau must be > 0");
  if (cap_l < 1.0) throw std::invalid_argument("SearchPlan: cap_l must be >= 1");
}

std::vector<std::vector<int>> enumerate_candidates(int n, int u,
                                                   std::span<const int> s_set,
                                                   int l) {
  if (l < 1) throw std::invalid_argument("enumerate_candidates: l must be >= 1");
  std::set<int> excluded(s_set.begin(), s_set.end());
  excluded.insert(u);
  std::vector<int> pool;
  for (int v = 1; v <= n; ++v) {
    if (!excluded.count(v)) pool.push_back(v);
  }
  std::vector<std::vector<int>> out;
  const int p = static_cast<int>(pool.size());
  if (l > p) return out;
  std::vector<int> idx(l);
  for (int i = 0; i < l; ++i) idx[i] = i;
  while (true) {
    std::vector<int> tuple(l);
    for (int i = 0; i < l; ++i) tuple[i] = pool[idx[i]];
    out.push_back(std::move(tuple));
    int i = l - 1;
    while (i >= 0 && idx[i] == p - l + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < l; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

std::optional<FoundSubset> find_subset_classical(const EmpiricalCache& cache,
                                                 int n, int l, double tau,
                                                 SelectionRule rule,
                                                 std::uint64_t& eval_count) {
  const auto& ctx = cache.context();
  std::optional<FoundSubset> best;
  for (const auto& cand : enumerate_candidates(n, ctx.u, ctx.s_set, l)) {
    const double v = cache.v_hat(cand);
    ++eval_count;
    if (rule == SelectionRule::first_passing) {
      if (threshold_test(v, tau)) return FoundSubset{cand, v};
    } else {
      if (!best || v > best->v) best = FoundSubset{cand, v};
    }
  }
  if (rule == SelectionRule::argmax && best && threshold_test(best->v, tau))
    return best;
  return std::nullopt;
}

NeighborhoodResult learn_neighborhood_with(const SubsetFinder& finder,
                                           ModelMeta meta,
                                           const SearchPlan& plan) {
  plan.validate();
  if (meta.r < 2) throw std::invalid_argument("learn: need r >= 2");
  if (plan.u > meta.n) throw std::invalid_argument("learn: u out of range");
  const auto t0 = std::chrono::steady_clock::now();

  NeighborhoodResult res;
  res.u = plan.u;
  res.selection_rule =
      plan.selection == SelectionRule::first_passing ? "first_passing" : "argmax";

  std::vector<int> s;  // kept sorted
  while (true) {
    if (static_cast<double>(s.size()) > plan.cap_l) {
      res.cap_terminated = true;
      break;
    }
    std::optional<FoundSubset> found;
    int found_l = 0;
    for (int l = meta.r - 1; l >= 1; --l) {
      found = finder.find(s, l, res.stats.v_evals);
      if (found) {
        found_l = l;
        break;
      }
    }
    if (!found) break;
    res.superset_trace.push_back({found->subset, found->v, found_l});
    for (int v : found->subset) s.push_back(v);
    std::sort(s.begin(), s.end());
  }

  // Pruning pass: ascending node order, remove i when v(u, i | S\{i}) < tau,
  // removals take effect immediately for later checks.
  std::vector<int> survivors;
  std::vector<int> remaining = s;
  for (int i : s) {
    std::vector<int> rest;
    for (int v : remaining) {
      if (v != i) rest.push_back(v);
    }
    const double v = finder.value(rest, {i}, res.stats.v_evals);
    if (v < plan.tau) {
      res.pruned.push_back({i, v});
      remaining.erase(std::find(remaining.begin(), remaining.end(), i));
    } else {
      survivors.push_back(i);
    }
  }
  res.neighbors = survivors;

  const auto t1 = std::chrono::steady_clock::now();
  res.stats.wall_ms =
      std::chrono::duration<double, std::milli>(t1 - t0).count();
  return res;
}

NeighborhoodResult learn_neighborhood(const SampleSet& samples, ModelMeta meta,
                                      const SearchPlan& plan) {
  if (samples.count() == 0)
    throw std::invalid_argument("learn_neighborhood: empty sample set");
  SubsetFinder finder;
  // One cache per S state; the subsequent size rounds and the pruning pass
  // reuse it through the shared_ptr captured below.
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
  const int n = meta.n;
  finder.find = [cache_for, n, plan](const std::vector<int>& s, int l,
                                     std::uint64_t& evals) {
    return find_subset_classical(*cache_for(s), n, l, plan.tau, plan.selection,
                                 evals);
  };
  finder.value = [cache_for](const std::vector<int>& s,
                             const std::vector<int>& i_set,
                             std::uint64_t& evals) {
    ++evals;
    return cache_for(s)->v_hat(i_set);
  };
  return learn_neighborhood_with(finder, meta, plan);
}

GraphRecovery recover_graph(const SampleSet& samples, ModelMeta meta,
                            const SearchPlan& plan_template,
                            Symmetrization rule, int threads) {
  if (samples.count() == 0)
    throw std::invalid_argument("recover_graph: empty sample set");
  samples.distinct_rows();  // build the shared histogram before going parallel
  GraphRecovery out;
  out.symmetrization =
      rule == Symmetrization::union_rule ? "union" : "intersection";
  out.per_node.resize(meta.n);

  const int workers = std::max(1, std::min(threads, meta.n));
  std::atomic<int> next{1};
  auto work = [&] {
    while (true) {
      const int u = next.fetch_add(1);
      if (u > meta.n) break;
      SearchPlan plan = plan_template;
      plan.u = u;
      out.per_node[u - 1] = learn_neighborhood(samples, meta, plan);
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  std::set<std::pair<int, int>> claims;
  for (const auto& r : out.per_node) {
    for (int v : r.neighbors) claims.insert({r.u, v});
  }
  std::set<std::pair<int, int>> edges;
  for (const auto& [u, v] : claims) {
    const bool reverse = claims.count({v, u}) > 0;
    const auto edge = std::minmax(u, v);
    if (!reverse && u < v) out.asymmetries.emplace_back(u, v);
    if (!reverse && u > v) out.asymmetries.emplace_back(v, u);
    if (rule == Symmetrization::union_rule) {
      edges.insert({edge.first, edge.second});
    } else if (reverse) {
      edges.insert({edge.first, edge.second});
    }
  }
  std::sort(out.asymmetries.begin(), out.asymmetries.end());
  out.asymmetries.erase(
      std::unique(out.asymmetries.begin(), out.asymmetries.end()),
      out.asymmetries.end());
  out.edges.assign(edges.begin(), edges.end());
  return out;
}

namespace {

nlohmann::json result_json(const NeighborhoodResult& r) {
  nlohmann::json j;
  j["u"] = r.u;
  j["neighbors"] = r.neighbors;
  j["cap_terminated"] = r.cap_terminated;
  j["selection_rule"] = r.selection_rule;
  j["prune_rule"] = r.prune_rule;
  j["superset_trace"] = nlohmann::json::array();
  for (const auto& t : r.superset_trace) {
    j["superset_trace"].push_back(
        {{"subset", t.subset}, {"v_hat", t.v}, {"size", t.size}});
  }
  j["pruned"] = nlohmann::json::array();
  for (const auto& p : r.pruned) {
    j["pruned"].push_back({{"node", p.node}, {"v_hat", p.v}});
  }
  j["stats"] = {{"v_evals", r.stats.v_evals}, {"wall_ms", r.stats.wall_ms}};
  return j;
}

}  // namespace

std::string to_json_string(const NeighborhoodResult& r, int indent) {
  return result_json(r).dump(indent);
}

std::string to_json_string(const GraphRecovery& g, int indent) {
  nlohmann::json j;
  j["symmetrization"] = g.symmetrization;
  j["edges"] = nlohmann::json::array();
  for (const auto& [u, v] : g.edges) j["edges"].push_back({u, v});
  j["asymmetries"] = nlohmann::json::array();
  for (const auto& [u, v] : g.asymmetries) j["asymmetries"].push_back({u, v});
  j["per_node"] = nlohmann::json::array();
  for (const auto& r : g.per_node) j["per_node"].push_back(result_json(r));
  return j.dump(indent);
}

}  // namespace mrf
