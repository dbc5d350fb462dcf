#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mrf/empirics.hpp"
#include "mrf/sampler.hpp"

namespace mrf {

enum class SelectionRule {
  first_passing,  // first subset in lexicographic order with v > tau
  argmax          // best subset overall, if it passes tau (lowest code on ties)
};

struct ModelMeta {
  int n = 0;
  int r = 0;
};

// Parameters of one neighborhood search. Subset sizes are searched in
// descending order r-1, r-2, ..., 1.
struct SearchPlan {
  int u = 0;
  double tau = 0.0;       // practical threshold in use
  double cap_l = 0.0;     // superset size bound
  SelectionRule selection = SelectionRule::first_passing;

  void validate() const;
};

struct TraceEntry {
  std::vector<int> subset;
  double v = 0.0;
  int size = 0;
};

struct PrunedEntry {
  int node = 0;
  double v = 0.0;
};

struct LearnStats {
  std::uint64_t v_evals = 0;
  double wall_ms = 0.0;
};

struct NeighborhoodResult {
  int u = 0;
  std::vector<int> neighbors;  // sorted, post-pruning
  std::vector<TraceEntry> superset_trace;
  std::vector<PrunedEntry> pruned;
  LearnStats stats;
  bool cap_terminated = false;
  // Resolved policy choices, recorded so results are self-describing.
  std::string selection_rule;
  std::string prune_rule = "single pass ascending, removals applied immediately";
};

// All strictly increasing size-l tuples over [n] \ ({u} u S), lexicographic.
std::vector<std::vector<int>> enumerate_candidates(int n, int u,
                                                   std::span<const int> s_set,
                                                   int l);

struct FoundSubset {
  std::vector<int> subset;
  double v = 0.0;
};

// Scan F^l_{u,S} in lexicographic order. Under first_passing returns the
// first subset with v > tau; under argmax scans everything and returns the
// maximum if it passes. eval_count is incremented per v evaluation.
std::optional<FoundSubset> find_subset_classical(const EmpiricalCache& cache,
                                                 int n, int l, double tau,
                                                 SelectionRule rule,
                                                 std::uint64_t& eval_count);

// Evaluator abstraction so the same control flow runs against empirical
// caches, exact tables (for the pruning-soundness properties) or the
// simulated quantum subset finder.
struct SubsetFinder {
  // find(S, l, eval_count) -> passing subset of size l or nullopt
  std::function<std::optional<FoundSubset>(const std::vector<int>&, int,
                                           std::uint64_t&)> find;
  // value(S, I, eval_count) -> v value used by the pruning pass
  std::function<double(const std::vector<int>&, const std::vector<int>&,
                       std::uint64_t&)> value;
};

NeighborhoodResult learn_neighborhood_with(const SubsetFinder& finder,
                                           ModelMeta meta,
                                           const SearchPlan& plan);

// Algorithm: grow S by repeated subset search over sizes r-1..1 until no
// size passes or |S| exceeds cap_l, then prune each i in S (ascending) with
// v(u, i | S \ {i}) < tau, removals applied immediately.
NeighborhoodResult learn_neighborhood(const SampleSet& samples, ModelMeta meta,
                                      const SearchPlan& plan);

enum class Symmetrization { union_rule, intersection_rule };

struct GraphRecovery {
  std::vector<NeighborhoodResult> per_node;          // index u-1
  std::vector<std::pair<int, int>> edges;            // symmetrized, sorted
  std::vector<std::pair<int, int>> asymmetries;      // u < v, one-sided claims
  std::string symmetrization;
};

// Runs learn_neighborhood for every node (optionally in parallel) and
// symmetrizes the per-node claims into an edge set.
GraphRecovery recover_graph(const SampleSet& samples, ModelMeta meta,
                            const SearchPlan& plan_template,
                            Symmetrization rule = Symmetrization::union_rule,
                            int threads = 1);

std::string to_json_string(const NeighborhoodResult& r, int indent = 2);
std::string to_json_string(const GraphRecovery& g, int indent = 2);

}  // namespace mrf
