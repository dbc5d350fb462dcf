#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "mrf/empirics.hpp"
#include "mrf/experiment.hpp"
#include "mrf/greedy.hpp"
#include "mrf/model.hpp"
#include "mrf/qmaxfind.hpp"
#include "mrf/rng.hpp"
#include "mrf/sampler.hpp"

namespace fs = std::filesystem;

namespace {

// Exit codes: 0 success, 1 usage error, 2 validation failure,
// 3 experiment failure.
constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kValidation = 2;
constexpr int kExperiment = 3;

std::uint64_t seed_or_env(std::uint64_t seed, bool seed_set) {
  if (seed_set) return seed;
  if (const char* env = std::getenv("MRF_SEED")) {
    return std::strtoull(env, nullptr, 10);
  }
  return 0;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::istringstream in(text);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    if (!tok.empty()) out.push_back(std::stoi(tok));
  }
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << text;
}

fs::path in_dir(const std::string& out_dir, const std::string& name) {
  if (out_dir.empty()) return name;
  fs::create_directories(out_dir);
  return fs::path(out_dir) / name;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structure learning for binary r-wise Markov random fields:\n"
               "greedy neighborhood recovery and its simulated-quantum\n"
               "counterpart with query-count accounting."};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
  std::string out_dir;
  std::string format = "json";
  app.add_option("--seed", seed, "master seed (env MRF_SEED as fallback)")
      ->each([&seed_set](const std::string&) { seed_set = true; });
  app.add_option("--threads", threads, "worker threads (0 = hardware)");
  app.add_option("--out-dir", out_dir, "directory for output files");
  app.add_option("--format", format, "report format: json|csv")
      ->check(CLI::IsMember({"json", "csv"}));

  // gen-model
  auto* gen = app.add_subcommand("gen-model", "generate a random or preset model");
  std::string gen_preset;
  int gen_n = 8, gen_r = 2, gen_d = 2;
  double gen_alpha = 0.1, gen_beta = 0.3, gen_density = 1.0;
  std::string gen_out = "model.json";
  gen->add_option("--preset", gen_preset, "preset name (figure1)");
  gen->add_option("--n", gen_n, "node count");
  gen->add_option("--r", gen_r, "max clique size");
  gen->add_option("--d", gen_d, "max degree");
  gen->add_option("--alpha", gen_alpha, "non-degeneracy lower bound");
  gen->add_option("--beta", gen_beta, "entry upper bound");
  gen->add_option("--density", gen_density, "target cliques per node");
  gen->add_option("--out", gen_out, "output model file");

  // validate
  auto* val = app.add_subcommand("validate", "check non-degeneracy of a model");
  std::string val_model;
  val->add_option("--model", val_model, "model file")->required();

  // sample
  auto* smp = app.add_subcommand("sample", "draw samples from a model");
  std::string smp_model, smp_out = "samples.bin", smp_csv;
  std::size_t smp_count = 100000, smp_burn = 1000, smp_thin = 1;
  bool smp_gibbs = false;
  smp->add_option("--model", smp_model, "model file")->required();
  smp->add_option("--count", smp_count, "number of samples M");
  smp->add_option("--out", smp_out, "output sample file");
  smp->add_option("--csv", smp_csv, "also export CSV to this path");
  smp->add_flag("--gibbs", smp_gibbs, "use the Gibbs sampler");
  smp->add_option("--burn-in", smp_burn, "Gibbs burn-in sweeps");
  smp->add_option("--thin", smp_thin, "Gibbs thinning");

  // vhat
  auto* vh = app.add_subcommand("vhat", "evaluate one empirical v value");
  std::string vh_samples, vh_s, vh_i;
  int vh_u = 1;
  vh->add_option("--samples", vh_samples, "sample file")->required();
  vh->add_option("--u", vh_u, "target node")->required();
  vh->add_option("--s", vh_s, "conditioning set, e.g. \"2,5\"");
  vh->add_option("--i", vh_i, "query subset, e.g. \"3\"")->required();

  // learn / qlearn
  auto add_learn_opts = [](CLI::App* cmd, std::string& samples, int& u,
                           std::string& meta, double& tau, bool& tau_theo,
                           bool& tau_auto, double& cap, std::string& sel,
                           std::string& out) {
    cmd->add_option("--samples", samples, "sample file")->required();
    cmd->add_option("--u", u, "target node")->required();
    cmd->add_option("--model-meta", meta, "n,r of the generating model")->required();
    cmd->add_option("--tau", tau, "practical threshold");
    cmd->add_flag("--tau-theoretical", tau_theo, "use the theoretical threshold");
    cmd->add_flag("--tau-auto", tau_auto, "calibrate tau from singleton gaps");
    cmd->add_option("--cap-L", cap, "superset size bound");
    cmd->add_option("--selection", sel, "first|argmax")
        ->check(CLI::IsMember({"first", "argmax"}));
    cmd->add_option("--out", out, "result JSON path");
  };

  auto* lrn = app.add_subcommand("learn", "classical neighborhood learning");
  std::string lrn_samples, lrn_meta, lrn_sel = "first", lrn_out = "result.json";
  int lrn_u = 1;
  double lrn_tau = 0.0, lrn_cap = 0.0;
  bool lrn_theo = false, lrn_auto = false;
  add_learn_opts(lrn, lrn_samples, lrn_u, lrn_meta, lrn_tau, lrn_theo,
                 lrn_auto, lrn_cap, lrn_sel, lrn_out);

  auto* ql = app.add_subcommand("qlearn", "quantum-simulated neighborhood learning");
  std::string ql_samples, ql_meta, ql_sel = "first", ql_out = "result.json";
  int ql_u = 1;
  double ql_tau = 0.0, ql_cap = 0.0;
  bool ql_theo = false, ql_auto = false;
  std::string ql_mode = "accounting";
  double ql_budget = 0.1;
  add_learn_opts(ql, ql_samples, ql_u, ql_meta, ql_tau, ql_theo, ql_auto,
                 ql_cap, ql_sel, ql_out);
  ql->add_option("--mode", ql_mode, "amplitude|accounting")
      ->check(CLI::IsMember({"amplitude", "accounting"}));
  ql->add_option("--eta-budget", ql_budget, "total failure budget w");

  // recover
  auto* rec = app.add_subcommand("recover", "recover the whole graph");
  std::string rec_samples, rec_meta, rec_sel = "first", rec_out = "graph.json";
  double rec_tau = 0.0, rec_cap = 0.0;
  bool rec_theo = false, rec_auto = false;
  std::string rec_sym = "union";
  rec->add_option("--samples", rec_samples, "sample file")->required();
  rec->add_option("--model-meta", rec_meta, "n,r of the generating model")->required();
  rec->add_option("--tau", rec_tau, "practical threshold");
  rec->add_flag("--tau-theoretical", rec_theo, "use the theoretical threshold");
  rec->add_flag("--tau-auto", rec_auto, "calibrate tau from singleton gaps");
  rec->add_option("--cap-L", rec_cap, "superset size bound");
  rec->add_option("--selection", rec_sel, "first|argmax")
      ->check(CLI::IsMember({"first", "argmax"}));
  rec->add_option("--symmetrize", rec_sym, "union|intersection")
      ->check(CLI::IsMember({"union", "intersection"}));
  rec->add_option("--out", rec_out, "graph JSON path");

  // bench-scaling
  auto* bench = app.add_subcommand("bench-scaling",
                                   "query-count scaling benchmark");
  std::string bench_nlist = "8,16,32,64,128,256";
  int bench_r = 3, bench_trials = 100;
  double bench_eta = 0.1, bench_tau = 2.0;
  std::string bench_out = "scaling.csv";
  bench->add_option("--n-list", bench_nlist, "comma-separated node counts");
  bench->add_option("--r", bench_r, "clique bound (search size r-1)");
  bench->add_option("--trials", bench_trials, "trials per size");
  bench->add_option("--eta", bench_eta, "per-search failure budget");
  bench->add_option("--tau", bench_tau, "threshold (>1 means nothing passes)");
  bench->add_option("--out", bench_out, "output CSV");

  // crossover
  auto* cx = app.add_subcommand("crossover", "predicted classical/quantum crossover");
  std::string cx_L = "8,16,32", cx_w = "0.2,0.1,0.05", cx_r = "3,4,5";
  std::string cx_csv;
  double cx_c3 = 1.0;
  cx->add_option("--cap-L", cx_L, "comma-separated L values");
  cx->add_option("--w", cx_w, "comma-separated failure budgets");
  cx->add_option("--r", cx_r, "comma-separated r values");
  cx->add_option("--c3", cx_c3, "classical-side constant");
  cx->add_option("--scaling-csv", cx_csv, "measured scaling CSV to compare");

  // report
  auto* rep = app.add_subcommand("report", "run an experiment config end to end");
  std::string rep_config, rep_preset;
  bool rep_no_timing = false;
  rep->add_option("--config", rep_config, "experiment config JSON");
  rep->add_option("--preset", rep_preset,
                  "figure1-classical|figure1-quantum shortcut");
  rep->add_flag("--no-timing", rep_no_timing,
                "omit timing fields for byte-stable reports");

  CLI11_PARSE(app, argc, argv);
  const std::uint64_t master = seed_or_env(seed, seed_set);

  try {
    if (*gen) {
      mrf::GeneratorSpec spec;
      spec.preset = gen_preset;
      spec.n = gen_n;
      spec.r = gen_r;
      spec.d = gen_d;
      spec.alpha = gen_alpha;
      spec.beta = gen_beta;
      spec.clique_density = gen_density;
      spec.seed = master;
      const mrf::Model model = mrf::gen_model(spec);
      model.save(in_dir(out_dir, gen_out));
      std::cout << "wrote " << in_dir(out_dir, gen_out).string() << " (n="
                << model.n() << ", r=" << model.r() << ", cliques="
                << model.cliques().size() << ")\n";
      return kOk;
    }

    if (*val) {
      const mrf::Model model = mrf::Model::load(val_model);
      const auto violations = mrf::validate_model(model);
      if (violations.empty()) {
        std::cout << "model is (alpha, beta)-non-degenerate\n";
        return kOk;
      }
      for (const auto& v : violations) {
        std::cout << "condition " << v.condition << ": " << v.detail << "\n";
      }
      return kValidation;
    }

    if (*smp) {
      const mrf::Model model = mrf::Model::load(smp_model);
      if (smp_gibbs) {
        const auto res = mrf::gibbs_sample(model, smp_count,
                                           {smp_burn, smp_thin}, master);
        for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
        res.samples.save(in_dir(out_dir, smp_out));
        if (!smp_csv.empty()) res.samples.export_csv(in_dir(out_dir, smp_csv));
      } else {
        const auto table = mrf::exact_joint(model);
        const auto samples = mrf::sample_exact(table, smp_count, master);
        samples.save(in_dir(out_dir, smp_out));
        if (!smp_csv.empty()) samples.export_csv(in_dir(out_dir, smp_csv));
      }
      std::cout << "wrote " << in_dir(out_dir, smp_out).string() << " (M="
                << smp_count << ")\n";
      return kOk;
    }

    if (*vh) {
      const auto samples = mrf::SampleSet::load(vh_samples);
      const auto s_set = parse_int_list(vh_s);
      const auto i_set = parse_int_list(vh_i);
      mrf::EmpiricalCache cache(samples, vh_u, s_set);
      const double v = cache.v_hat(i_set);
      std::cout << "v_hat(u=" << vh_u << ", I={" << vh_i << "} | S={" << vh_s
                << "}) = " << v << "\n";
      const auto st = cache.query(i_set);
      std::cout << "observed (x_u, x_I, x_S) triples (key: S|I|u bits):\n";
      for (const auto& [key, cnt] : st.triples) {
        std::cout << "  key=" << key << " count=" << cnt << "\n";
      }
      return kOk;
    }

    auto resolve_tau = [&](const mrf::SampleSet& samples,
                           const std::string& meta_text, double tau_opt,
                           bool theo, bool aut, std::optional<int> u) {
      const auto meta = parse_int_list(meta_text);
      if (meta.size() != 2) throw std::invalid_argument("--model-meta wants n,r");
      double tau = tau_opt;
      if (aut || (tau_opt <= 0.0 && !theo)) {
        tau = mrf::calibrate_tau(samples, u);
        std::cout << "auto-calibrated tau = " << tau << "\n";
      } else if (theo) {
        throw std::invalid_argument(
            "--tau-theoretical needs the generating model; compute it with "
            "derived_constants and pass --tau instead");
      }
      return std::make_tuple(mrf::ModelMeta{meta[0], meta[1]}, tau);
    };

    if (*lrn) {
      const auto samples = mrf::SampleSet::load(lrn_samples);
      auto [meta, tau] = resolve_tau(samples, lrn_meta, lrn_tau, lrn_theo,
                                     lrn_auto, lrn_u);
      mrf::SearchPlan plan;
      plan.u = lrn_u;
      plan.tau = tau;
      plan.cap_l = lrn_cap > 0 ? lrn_cap : meta.n - 1;
      plan.selection = lrn_sel == "argmax" ? mrf::SelectionRule::argmax
                                           : mrf::SelectionRule::first_passing;
      const auto res = mrf::learn_neighborhood(samples, meta, plan);
      write_text(in_dir(out_dir, lrn_out), mrf::to_json_string(res) + "\n");
      std::cout << "neighbors(" << lrn_u << ") = {";
      for (std::size_t i = 0; i < res.neighbors.size(); ++i)
        std::cout << (i ? "," : "") << res.neighbors[i];
      std::cout << "}  v_evals=" << res.stats.v_evals << "\n";
      return kOk;
    }

    if (*ql) {
      const auto samples = mrf::SampleSet::load(ql_samples);
      auto [meta, tau] = resolve_tau(samples, ql_meta, ql_tau, ql_theo,
                                     ql_auto, ql_u);
      mrf::SearchPlan plan;
      plan.u = ql_u;
      plan.tau = tau;
      plan.cap_l = ql_cap > 0 ? ql_cap : meta.n - 1;
      plan.selection = ql_sel == "argmax" ? mrf::SelectionRule::argmax
                                          : mrf::SelectionRule::first_passing;
      const auto mode = ql_mode == "amplitude" ? mrf::SimMode::amplitude
                                               : mrf::SimMode::accounting;
      const auto q = mrf::learn_neighborhood_quantum(samples, meta, plan,
                                                     ql_budget, mode, master);
      write_text(in_dir(out_dir, ql_out), mrf::to_json_string(q.result) + "\n");
      std::cout << "neighbors(" << ql_u << ") = {";
      for (std::size_t i = 0; i < q.result.neighbors.size(); ++i)
        std::cout << (i ? "," : "") << q.result.neighbors[i];
      std::cout << "}  oracle_calls=" << q.ledger.oracle_calls
                << " classical_equiv=" << q.ledger.classical_equiv_cost << "\n";
      return kOk;
    }

    if (*rec) {
      const auto samples = mrf::SampleSet::load(rec_samples);
      auto [meta, tau] = resolve_tau(samples, rec_meta, rec_tau, rec_theo,
                                     rec_auto, std::nullopt);
      mrf::SearchPlan plan;
      plan.tau = tau;
      plan.cap_l = rec_cap > 0 ? rec_cap : meta.n - 1;
      plan.selection = rec_sel == "argmax" ? mrf::SelectionRule::argmax
                                           : mrf::SelectionRule::first_passing;
      const auto rule = rec_sym == "intersection"
                            ? mrf::Symmetrization::intersection_rule
                            : mrf::Symmetrization::union_rule;
      const int workers = threads > 0 ? threads : 2;
      const auto rec_res = mrf::recover_graph(samples, meta, plan, rule, workers);
      write_text(in_dir(out_dir, rec_out), mrf::to_json_string(rec_res) + "\n");
      std::cout << "edges:";
      for (const auto& [a, b] : rec_res.edges)
        std::cout << " (" << a << "," << b << ")";
      std::cout << "\nasymmetries: " << rec_res.asymmetries.size() << "\n";
      return kOk;
    }

    if (*bench) {
      const auto rows = mrf::bench_scaling(parse_int_list(bench_nlist), bench_r,
                                           bench_trials, bench_eta, bench_tau,
                                           master);
      write_text(in_dir(out_dir, bench_out), mrf::scaling_csv(rows));
      std::cout << "wrote " << in_dir(out_dir, bench_out).string() << " ("
                << rows.size() << " rows)\n";
      return kOk;
    }

    if (*cx) {
      std::vector<double> Ls, ws;
      for (int v : parse_int_list(cx_L)) Ls.push_back(v);
      {
        std::istringstream in(cx_w);
        std::string tok;
        while (std::getline(in, tok, ',')) ws.push_back(std::stod(tok));
      }
      mrf::CostModel cm;
      cm.c3 = cx_c3;
      std::optional<std::string> csv;
      if (!cx_csv.empty()) {
        std::ifstream in(cx_csv);
        if (!in) throw std::runtime_error("cannot open " + cx_csv);
        std::stringstream ss;
        ss << in.rdbuf();
        csv = ss.str();
      }
      std::cout << mrf::report_crossover(Ls, ws, parse_int_list(cx_r), cm, csv);
      return kOk;
    }

    if (*rep) {
      mrf::ExperimentConfig config;
      if (!rep_config.empty()) {
        config = mrf::ExperimentConfig::load(rep_config);
      } else if (rep_preset == "figure1-classical" ||
                 rep_preset == "figure1-quantum") {
        config.generator = mrf::GeneratorSpec{};
        config.generator->preset = "figure1";
        config.learner.kind =
            rep_preset == "figure1-quantum" ? "quantum" : "classical";
        config.trials = 20;
      } else {
        std::cerr << "report: need --config or --preset\n";
        return kUsage;
      }
      if (seed_set) config.seed = master;
      if (threads > 0) config.threads = threads;
      const auto report = mrf::run_experiment(config);
      const auto base = in_dir(out_dir, "report");
      if (format == "csv") {
        write_text(base.string() + ".csv", report.to_csv_string());
        std::cout << "wrote " << base.string() << ".csv\n";
      } else {
        write_text(base.string() + ".json",
                   report.to_json_string(!rep_no_timing) + "\n");
        write_text(base.string() + ".csv", report.to_csv_string());
        std::cout << "wrote " << base.string() << ".json and .csv\n";
      }
      std::cout << "successes: " << report.successes << "/"
                << report.trials.size() << "\n";
      return report.successes > 0 || report.trials.empty() ? kOk : kExperiment;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const mrf::DegenerateConstants& e) {
    std::cerr << "degenerate constants: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExperiment;
  }
  return kUsage;
}
