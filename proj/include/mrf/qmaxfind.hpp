#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mrf/greedy.hpp"

namespace mrf {

// Bits per packed index field: ceil(log2 n), at least 1. Fields store the
// 0-based index (j - 1) so every j in [1, n] fits.
int index_bits(int n);

// Ordered index string (j_1, ..., j_l), j_i in [n] \ {u}, packed into
// l fields of index_bits(n) bits each, first index most significant.
struct SubsetString {
  std::vector<int> indices;
  int l = 0;
  std::uint64_t code = 0;
};

SubsetString encode_subset(std::span<const int> indices, int n);

// Inverse of encode_subset on the valid-string set: returns nullopt when a
// field is out of range, equals u, or the indices do not strictly increase.
std::optional<std::vector<int>> decode_string(std::uint64_t code, int l, int n,
                                              int u);

struct MembershipResult {
  bool member = false;
  int comparisons = 0;          // l - 1
  int bits_per_comparison = 0;  // ceil(log2 n)
};

// Strict-increase membership test with its charged comparison cost.
MembershipResult membership_check(const SubsetString& str, int n, int u);

// Oracle-evaluation accounting for one simulated run.
struct QueryLedger {
  std::uint64_t oracle_calls = 0;        // Grover iterations + verifications
  std::uint64_t grover_iterations = 0;
  // Queries a classical linear scan over the same flagged oracle space
  // would have used (first pass stops it, otherwise all of them).
  std::uint64_t classical_equiv_cost = 0;
  std::string mode;

  void merge(const QueryLedger& other) {
    oracle_calls += other.oracle_calls;
    grover_iterations += other.grover_iterations;
    classical_equiv_cost += other.classical_equiv_cost;
    if (mode.empty()) mode = other.mode;
  }
};

struct DurrHoyerOptions {
  double c0 = 1.0;        // accounting-mode charge constant
  double lambda = 1.2;    // amplitude-mode schedule growth factor
  std::size_t amplitude_limit = std::size_t{1} << 14;
};

struct MaxFindResult {
  std::size_t argmax = 0;
  QueryLedger ledger;
};

// Amplitude-level simulation of maximum finding: repeated Grover searches on
// a statevector over N basis states, marked set = {i : values[i] > current
// best}, exponentially growing iteration schedule for the unknown marked
// count, measurement by seeded sampling. Finds the maximum with probability
// >= 1 - eta. Ties in the returned argmax are canonicalized to the lowest
// index.
MaxFindResult durr_hoyer_amplitude(std::span<const double> values, double eta,
                                   std::uint64_t seed,
                                   const DurrHoyerOptions& opts = {});

// Idealized accounting simulation: repeatedly jump to a uniform element of
// the better set (computed exactly through the oracle) and charge
// ceil(c0 * sqrt(N/t)) per round, plus a final verification charge of
// ceil(c0 * sqrt(N)) * ceil(log2(1/eta)). The returned argmax is exact by
// construction; only the ledger is stochastic.
MaxFindResult durr_hoyer_accounting(
    const std::function<double(std::size_t)>& oracle, std::size_t n_range,
    double eta, std::uint64_t seed, const DurrHoyerOptions& opts = {});

enum class SimMode { amplitude, accounting };

struct QuantumPlan {
  SimMode mode = SimMode::accounting;
  double eta = 0.1;
  std::uint64_t seed = 0;
  DurrHoyerOptions dh;
};

// Subset search over the full code space of size (2^ceil(log2 n))^l: codes
// outside the valid-string set, or overlapping {u} u S, score -infinity;
// valid codes score the v_hat of their subset. Returns the found subset when
// the maximum passes tau. Both outcomes charge the same search cost.
std::optional<FoundSubset> find_subset_quantum(const EmpiricalCache& cache,
                                               int n, int l, double tau,
                                               const QuantumPlan& plan,
                                               QueryLedger& ledger,
                                               std::uint64_t& eval_count);

struct QuantumLearnResult {
  NeighborhoodResult result;
  QueryLedger ledger;
};

// Control flow of the classical learner with the subset search replaced by
// simulated quantum maximum finding; each search runs at per-call failure
// budget eta = w / (2 L (r-1)) so the union bound over at most L(r-1) calls
// stays within eta_budget/2.
QuantumLearnResult learn_neighborhood_quantum(const SampleSet& samples,
                                              ModelMeta meta,
                                              const SearchPlan& plan,
                                              double eta_budget, SimMode mode,
                                              std::uint64_t seed,
                                              const DurrHoyerOptions& dh = {});

// Closed-form cost model with configurable constants. Logs are base 2.
struct CostModel {
  double c_membership = 1.0;
  double c_single = 1.0;
  double c_joint = 1.0;
  double c_state = 1.0;
  double c_search = 1.0;
  double c_total = 1.0;
  double c3 = 1.0;  // classical-side constant of the crossover inequality

  double membership_cost(int l, int n) const;                  // O(l log n)
  double single_marginal_cost(int r, double m, int n) const;    // U_I
  double joint_marginal_cost(int s_size, double m, int n, double s_configs,
                             int r) const;                      // U_{I u S}
  double state_prep_cost(int s_size, double m, int n, double s_configs,
                         int r) const;                          // U_v
  double subset_search_cost(int s_size, double s_configs, int r, double m,
                            int n, double w) const;             // one search
  double total_cost(double cap_l, double m, int n, int r, double w) const;
  double classical_total_cost(double m, int n, int r) const;

  // Smallest n with 2^L * M * n^{(r+1)/2} * log2(1/w) < c3 * M * n^r,
  // reported in log2 form to survive astronomically large L.
  double log2_crossover_n(double cap_l, double w, int r) const;
  double crossover_n(double cap_l, double w, int r) const;
};

struct CostPrediction {
  DerivedConstants constants;
  double membership = 0;
  double single_marginal = 0;
  double joint_marginal = 0;
  double state_prep = 0;
  double subset_search = 0;
  double quantum_total = 0;
  double classical_total = 0;
  double crossover_n = 0;
  double log2_crossover_n = 0;
};

// Evaluates every cost formula at the worst-case search state (|S| at the
// practical cap, s = min(2^|S|, M), l = r-1).
CostPrediction predict_costs(int n, int r, int d, double m, double w,
                             double alpha, double beta,
                             const CostModel& cm = {});

}  // namespace mrf
