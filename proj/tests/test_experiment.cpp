#include <cmath>

#include "doctest.h"
#include "json.hpp"
#include "mrf/experiment.hpp"

using mrf::ExperimentConfig;
using mrf::GeneratorSpec;

namespace {

nlohmann::json strip_timing(const std::string& report_json) {
  auto j = nlohmann::json::parse(report_json);
  j.erase("timing");
  return j;
}

}  // namespace

TEST_CASE("gen_model: the figure1 preset reproduces the worked example") {
  GeneratorSpec spec;
  spec.preset = "figure1";
  const auto m = mrf::gen_model(spec);
  CHECK(m.n() == 5);
  CHECK(m.r() == 3);
  CHECK(m.cliques().size() == 14);  // 2 + 7 + 5
  CHECK(mrf::validate_model(m).empty());
  const auto maximal = mrf::maximal_hyperedges(m);
  CHECK(maximal == std::vector<std::vector<int>>{
                       {1, 2, 5}, {1, 3}, {2, 4, 5}, {3, 4}});
  const auto nb = mrf::neighborhoods(m);
  CHECK(nb.of(1) == std::vector<int>{2, 3, 5});
  CHECK(nb.degree == 3);
}

TEST_CASE("gen_model: random specs validate; infeasible specs throw") {
  GeneratorSpec spec;
  spec.n = 10;
  spec.r = 2;
  spec.d = 3;
  spec.seed = 17;
  const auto m = mrf::gen_model(spec);
  CHECK(mrf::validate_model(m).empty());
  CHECK(mrf::neighborhoods(m).degree <= 3);

  GeneratorSpec bad = spec;
  bad.d = 10;  // d must stay below n for a bounded-degree model
  CHECK_THROWS_AS(mrf::gen_model(bad), std::invalid_argument);

  GeneratorSpec tiny = spec;
  tiny.r = 3;
  tiny.d = 1;  // cannot host an r-clique
  CHECK_THROWS_AS(mrf::gen_model(tiny), std::invalid_argument);
}

TEST_CASE("calibrate_tau separates the five-node example") {
  const auto table = mrf::exact_joint(mrf::figure1_model());
  const auto samples = mrf::sample_exact(table, 100000, 12);
  const double tau = mrf::calibrate_tau(samples);
  // lands between the indirect-dependence cluster and the edge cluster
  CHECK(tau > 0.012);
  CHECK(tau < 0.03);
  // per-node variant works as well
  const double tau1 = mrf::calibrate_tau(samples, 1);
  CHECK(tau1 > 0.0);
}

TEST_CASE("experiment config JSON round-trips") {
  ExperimentConfig c;
  c.generator = GeneratorSpec{};
  c.generator->preset = "figure1";
  c.sampler.count = 5000;
  c.learner.kind = "quantum";
  c.learner.qmode = "accounting";
  c.trials = 4;
  c.seed = 99;
  const auto text = c.to_json_string();
  const auto back = ExperimentConfig::from_json_string(text);
  CHECK(back.to_json_string() == text);
}

TEST_CASE("run_experiment: deterministic given the master seed") {
  ExperimentConfig c;
  c.generator = GeneratorSpec{};
  c.generator->preset = "figure1";
  c.sampler.count = 20000;
  c.trials = 3;
  c.seed = 4;
  c.threads = 2;
  const auto a = mrf::run_experiment(c);
  const auto b = mrf::run_experiment(c);
  CHECK(strip_timing(a.to_json_string()) == strip_timing(b.to_json_string()));
  CHECK(a.successes >= 2);
  // CSV has one row per trial plus the header
  const auto csv = a.to_csv_string();
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
}

TEST_CASE("run_experiment: report echoes a re-runnable config") {
  ExperimentConfig c;
  c.generator = GeneratorSpec{};
  c.generator->preset = "figure1";
  c.sampler.count = 10000;
  c.trials = 2;
  c.seed = 8;
  const auto report = mrf::run_experiment(c);
  const auto echoed = nlohmann::json::parse(report.to_json_string())["config"];
  const auto c2 = ExperimentConfig::from_json_string(echoed.dump());
  const auto report2 = mrf::run_experiment(c2);
  CHECK(strip_timing(report.to_json_string()) ==
        strip_timing(report2.to_json_string()));
}

TEST_CASE("run_experiment: quantum path produces ledgers") {
  ExperimentConfig c;
  c.generator = GeneratorSpec{};
  c.generator->preset = "figure1";
  c.sampler.count = 20000;
  c.learner.kind = "quantum";
  c.learner.qmode = "accounting";
  c.learner.eta_budget = 0.1;
  c.trials = 2;
  c.seed = 10;
  const auto report = mrf::run_experiment(c);
  for (const auto& t : report.trials) {
    CHECK(t.ledger.oracle_calls > 0);
    CHECK(t.ledger.mode == "accounting");
  }
  CHECK(report.mean_oracle_calls > 0);
}

TEST_CASE("bench_scaling emits complete rows with exact argmax") {
  const auto rows = mrf::bench_scaling({8, 16}, 3, 5, 0.1, 2.0, 77);
  CHECK(rows.size() == 10);
  for (const auto& r : rows) {
    CHECK(r.success);
    CHECK(r.oracle_calls > 0);
    CHECK(r.classical_equiv_cost > 0);
    CHECK(r.code_space == (std::uint64_t{1} << (2 * mrf::index_bits(r.n))));
  }
  const auto csv = mrf::scaling_csv(rows);
  CHECK(csv.find("oracle_calls") != std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 11);
}

TEST_CASE("fit_log_slope recovers exact power laws") {
  std::vector<double> sizes{64, 256, 1024, 4096};
  std::vector<double> sqrt_costs, linear_costs;
  for (double s : sizes) {
    sqrt_costs.push_back(3.0 * std::sqrt(s));
    linear_costs.push_back(0.5 * s);
  }
  CHECK(mrf::fit_log_slope(sizes, sqrt_costs) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(mrf::fit_log_slope(sizes, linear_costs) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("report_crossover prints the grid and optional measured ratios") {
  const mrf::CostModel cm;
  const auto text = mrf::report_crossover({8, 16}, {0.1}, {3, 4}, cm, {});
  CHECK(text.find("log2_crossover_n") != std::string::npos);

  const auto rows = mrf::bench_scaling({8}, 3, 3, 0.1, 2.0, 5);
  const auto with_measured =
      mrf::report_crossover({8}, {0.1}, {3}, cm, mrf::scaling_csv(rows));
  CHECK(with_measured.find("mean_oracle_calls") != std::string::npos);
}

TEST_CASE("run_experiment validates the model before running") {
  ExperimentConfig c;
  c.generator = GeneratorSpec{};
  c.generator->n = 6;
  c.generator->r = 2;
  c.generator->d = 2;
  c.generator->seed = 3;
  c.sampler.count = 2000;
  c.trials = 1;
  const auto report = mrf::run_experiment(c);  // random model path works
  CHECK(report.trials.size() == 1);
}
