#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mrf/greedy.hpp"
#include "mrf/model.hpp"
#include "mrf/qmaxfind.hpp"
#include "mrf/sampler.hpp"

namespace mrf {

// Random bounded-degree r-wise hypergraph generator. Every generated clique
// is maximal and all of its entries are drawn with |entry| in [alpha, beta],
// which forces the non-degeneracy conditions by construction.
struct GeneratorSpec {
  std::string preset;       // "figure1" ignores the numeric fields
  int n = 0;
  int r = 2;
  int d = 2;
  double alpha = 0.1;
  double beta = 0.3;
  double clique_density = 1.0;  // target cliques per node
  std::uint64_t seed = 0;
};

Model gen_model(const GeneratorSpec& spec);

// The five-node worked example: 3-cliques (1,2,5), (2,4,5), 2-cliques (1,2),
// (1,3), (1,5), (2,4), (2,5), (3,4), (4,5) and five singleton cliques.
// Deterministic product-form tensors sized for desk-scale recovery.
Model figure1_model();
const std::vector<std::pair<int, int>>& figure1_edges();

// Practical threshold: v_hat of every singleton at S = {} (for one node, or
// pooled over all ordered pairs when u is absent), sorted; tau sits at the
// midpoint of the largest gap. The theoretical value stays available through
// derived_constants.
double calibrate_tau(const SampleSet& samples, std::optional<int> u = {});

struct SamplerSettings {
  std::string mode = "exact";  // "exact" | "gibbs"
  std::size_t count = 100000;
  std::size_t burn_in = 1000;
  std::size_t thinning = 1;
};

struct LearnerSettings {
  std::string kind = "classical";  // "classical" | "quantum"
  std::string tau_mode = "auto";   // "auto" | "theoretical" | "fixed"
  double tau = 0.0;                // used when tau_mode == "fixed"
  double cap_l = 0.0;              // 0 = min(theoretical L, n-1)
  std::string selection = "first"; // "first" | "argmax"
  double eta_budget = 0.1;         // quantum only
  std::string qmode = "accounting";
};

struct ExperimentConfig {
  std::string model_path;               // either a path ...
  std::optional<GeneratorSpec> generator;  // ... or a generator spec
  SamplerSettings sampler;
  LearnerSettings learner;
  int trials = 20;
  std::uint64_t seed = 0;
  int threads = 0;  // 0 = hardware concurrency

  std::string to_json_string(int indent = 2) const;
  static ExperimentConfig from_json_string(const std::string& text);
  static ExperimentConfig load(const std::filesystem::path& path);
};

struct TrialOutcome {
  int trial = 0;
  std::uint64_t seed = 0;
  std::vector<std::pair<int, int>> edges;
  bool correct = false;
  double precision = 0.0;
  double recall = 0.0;
  double tau_used = 0.0;
  std::uint64_t v_evals = 0;
  QueryLedger ledger;  // zero for classical runs
};

struct RunReport {
  ExperimentConfig config;
  std::string version;
  std::vector<std::pair<int, int>> true_edges;
  std::vector<TrialOutcome> trials;
  int successes = 0;
  double mean_oracle_calls = 0.0;
  double mean_classical_equiv = 0.0;
  double wall_ms = 0.0;  // excluded from reproducibility comparisons

  std::string to_json_string(bool include_timing = true, int indent = 2) const;
  std::string to_csv_string() const;
};

// Samples, learns and scores `trials` independent runs against the model's
// ground-truth graph. Per-trial failures are recorded, not fatal, unless
// every trial fails.
RunReport run_experiment(const ExperimentConfig& config);

// One scaling-benchmark run: Durr-Hoyer accounting search plus a classical
// lexicographic scan over the same synthetic value array.
struct ScalingRow {
  int n = 0;
  int l = 0;
  std::uint64_t code_space = 0;
  int trial = 0;
  std::uint64_t oracle_calls = 0;
  std::uint64_t grover_iterations = 0;
  std::uint64_t classical_equiv_cost = 0;
  bool success = true;
};

// Synthetic values on the valid codes (uniform [0,1)), invalid codes score
// -infinity; tau above 1 measures the no-passing-subset worst case.
std::vector<ScalingRow> bench_scaling(const std::vector<int>& n_list, int r,
                                      int trials, double eta, double tau,
                                      std::uint64_t seed);

std::string scaling_csv(const std::vector<ScalingRow>& rows);

// Least-squares slope of log2(mean cost) against log2(code space).
double fit_log_slope(const std::vector<double>& sizes,
                     const std::vector<double>& costs);

struct CrossoverRow {
  double cap_l = 0;
  double w = 0;
  int r = 0;
  double log2_crossover_n = 0;
  double crossover_n = 0;
};

// Predicted crossover across a (cap_l, w, r) grid; when a scaling CSV is
// supplied its measured quantum/classical ratio per K is printed alongside.
std::string report_crossover(const std::vector<double>& cap_ls,
                             const std::vector<double>& ws,
                             const std::vector<int>& rs, const CostModel& cm,
                             const std::optional<std::string>& scaling_csv_text);

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mrf
