#include "mrf/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "mrf/rng.hpp"

namespace mrf {

namespace {

int spin_from_bit(unsigned bit) { return bit ? 1 : -1; }

// Product-form tensor theta(x) = weight * prod_k x_k over the clique.
std::vector<double> product_tensor(int l, double weight) {
  std::vector<double> entries(std::size_t{1} << l);
  for (std::size_t cfg = 0; cfg < entries.size(); ++cfg) {
    int prod = 1;
    for (int k = 0; k < l; ++k) prod *= spin_from_bit((cfg >> k) & 1u);
    entries[cfg] = weight * prod;
  }
  return entries;
}

}  // namespace

Model figure1_model() {
  constexpr double kPair = 0.12;
  constexpr double kTriple = 0.06;
  std::vector<CliqueTensor> cliques;
  for (auto vs : {std::vector<int>{1, 2, 5}, std::vector<int>{2, 4, 5}}) {
    cliques.push_back({vs, product_tensor(3, kTriple)});
  }
  for (auto vs :
       {std::vector<int>{1, 2}, std::vector<int>{1, 3}, std::vector<int>{1, 5},
        std::vector<int>{2, 4}, std::vector<int>{2, 5}, std::vector<int>{3, 4},
        std::vector<int>{4, 5}}) {
    cliques.push_back({vs, product_tensor(2, kPair)});
  }
  for (int v = 1; v <= 5; ++v) {
    cliques.push_back({{v}, {0.0, 0.0}});
  }
  return Model(5, 3, 0.05, 0.25, std::move(cliques));
}

const std::vector<std::pair<int, int>>& figure1_edges() {
  static const std::vector<std::pair<int, int>> edges = {
      {1, 2}, {1, 3}, {1, 5}, {2, 4}, {2, 5}, {3, 4}, {4, 5}};
  return edges;
}

Model gen_model(const GeneratorSpec& spec) {
  if (spec.preset == "figure1") return figure1_model();
  if (!spec.preset.empty())
    throw std::invalid_argument("unknown preset: " + spec.preset);

  const int n = spec.n, r = spec.r, d = spec.d;
  if (n < 2) throw std::invalid_argument("gen_model: n must be >= 2");
  if (r < 2 || r > n) throw std::invalid_argument("gen_model: need 2 <= r <= n");
  if (d < 1 || d >= n)
    throw std::invalid_argument("gen_model: need 1 <= d <= n-1 (bounded degree)");
  if (d < r - 1)
    throw std::invalid_argument("gen_model: need d >= r-1 to host an r-clique");
  if (!(spec.alpha > 0) || spec.alpha > spec.beta)
    throw std::invalid_argument("gen_model: need 0 < alpha <= beta");

  Rng rng(spec.seed);
  std::vector<std::set<int>> adj(n + 1);
  std::vector<std::vector<int>> chosen;
  const int target = std::max(1, static_cast<int>(spec.clique_density * n));
  int attempts = 0;
  const int max_attempts = 200 * target + 200;
  auto degree_ok = [&](const std::vector<int>& verts) {
    for (int v : verts) {
      std::set<int> would = adj[v];
      for (int w : verts)
        if (w != v) would.insert(w);
      if (static_cast<int>(would.size()) > d) return false;
    }
    return true;
  };
  while (static_cast<int>(chosen.size()) < target && attempts < max_attempts) {
    ++attempts;
    const int size = 2 + static_cast<int>(rng.below(r - 1));  // uniform in [2, r]
    std::set<int> verts;
    while (static_cast<int>(verts.size()) < size)
      verts.insert(1 + static_cast<int>(rng.below(n)));
    std::vector<int> vs(verts.begin(), verts.end());
    if (!degree_ok(vs)) continue;
    bool related = false;
    for (const auto& c : chosen) {
      const bool sub = std::includes(c.begin(), c.end(), vs.begin(), vs.end());
      const bool sup = std::includes(vs.begin(), vs.end(), c.begin(), c.end());
      if (sub || sup) related = true;
    }
    if (related) continue;  // keep every generated clique maximal
    chosen.push_back(vs);
    for (int v : vs) {
      for (int w : vs)
        if (w != v) adj[v].insert(w);
    }
  }
  if (chosen.empty())
    throw std::invalid_argument("gen_model: could not place any clique");

  std::sort(chosen.begin(), chosen.end());
  std::vector<CliqueTensor> cliques;
  for (const auto& vs : chosen) {
    const int l = static_cast<int>(vs.size());
    std::vector<double> entries(std::size_t{1} << l);
    for (auto& e : entries) {
      const double mag = spec.alpha + (spec.beta - spec.alpha) * rng.uniform();
      e = rng.uniform() < 0.5 ? -mag : mag;
    }
    cliques.push_back({vs, std::move(entries)});
  }
  Model model(n, r, spec.alpha, spec.beta, std::move(cliques));
  const auto violations = validate_model(model);
  if (!violations.empty()) {
    std::string what = "gen_model: generated model fails validation:";
    for (const auto& v : violations) what += " [" + v.detail + "]";
    throw std::logic_error(what);
  }
  return model;
}

double calibrate_tau(const SampleSet& samples, std::optional<int> u) {
  const int n = samples.n();
  std::vector<double> vals;
  auto add_for = [&](int node) {
    EmpiricalCache cache(samples, node, {});
    for (int i = 1; i <= n; ++i) {
      if (i == node) continue;
      const int tuple[1] = {i};
      vals.push_back(cache.v_hat(tuple));
    }
  };
  if (u) {
    add_for(*u);
  } else {
    for (int node = 1; node <= n; ++node) add_for(node);
  }
  std::sort(vals.begin(), vals.end());
  if (vals.empty()) throw std::invalid_argument("calibrate_tau: no pairs");
  if (vals.size() == 1) return vals[0] / 2.0;
  double best_gap = -1.0;
  double tau = vals[0] / 2.0;
  for (std::size_t k = 0; k + 1 < vals.size(); ++k) {
    const double gap = vals[k + 1] - vals[k];
    if (gap > best_gap) {
      best_gap = gap;
      tau = (vals[k] + vals[k + 1]) / 2.0;
    }
  }
  return std::max(tau, 1e-12);
}

std::string ExperimentConfig::to_json_string(int indent) const {
  nlohmann::json j;
  if (!model_path.empty()) j["model"] = {{"path", model_path}};
  if (generator) {
    nlohmann::json g;
    if (!generator->preset.empty()) {
      g["preset"] = generator->preset;
    } else {
      g = {{"n", generator->n},         {"r", generator->r},
           {"d", generator->d},         {"alpha", generator->alpha},
           {"beta", generator->beta},   {"clique_density", generator->clique_density},
           {"seed", generator->seed}};
    }
    j["model"] = {{"generator", g}};
  }
  j["sampler"] = {{"mode", sampler.mode},
                  {"count", sampler.count},
                  {"burn_in", sampler.burn_in},
                  {"thinning", sampler.thinning}};
  j["learner"] = {{"kind", learner.kind},       {"tau_mode", learner.tau_mode},
                  {"tau", learner.tau},         {"cap_l", learner.cap_l},
                  {"selection", learner.selection},
                  {"eta_budget", learner.eta_budget},
                  {"qmode", learner.qmode}};
  j["trials"] = trials;
  j["seed"] = seed;
  j["threads"] = threads;
  return j.dump(indent);
}

ExperimentConfig ExperimentConfig::from_json_string(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  ExperimentConfig c;
  const auto& m = j.at("model");
  if (m.contains("path")) c.model_path = m.at("path").get<std::string>();
  if (m.contains("generator")) {
    GeneratorSpec g;
    const auto& gj = m.at("generator");
    if (gj.contains("preset")) {
      g.preset = gj.at("preset").get<std::string>();
    } else {
      g.n = gj.at("n").get<int>();
      g.r = gj.at("r").get<int>();
      g.d = gj.at("d").get<int>();
      g.alpha = gj.at("alpha").get<double>();
      g.beta = gj.at("beta").get<double>();
      g.clique_density = gj.value("clique_density", 1.0);
      g.seed = gj.value("seed", std::uint64_t{0});
    }
    c.generator = g;
  }
  if (j.contains("sampler")) {
    const auto& s = j.at("sampler");
    c.sampler.mode = s.value("mode", std::string("exact"));
    c.sampler.count = s.value("count", std::size_t{100000});
    c.sampler.burn_in = s.value("burn_in", std::size_t{1000});
    c.sampler.thinning = s.value("thinning", std::size_t{1});
  }
  if (j.contains("learner")) {
    const auto& l = j.at("learner");
    c.learner.kind = l.value("kind", std::string("classical"));
    c.learner.tau_mode = l.value("tau_mode", std::string("auto"));
    c.learner.tau = l.value("tau", 0.0);
    c.learner.cap_l = l.value("cap_l", 0.0);
    c.learner.selection = l.value("selection", std::string("first"));
    c.learner.eta_budget = l.value("eta_budget", 0.1);
    c.learner.qmode = l.value("qmode", std::string("accounting"));
  }
  c.trials = j.value("trials", 20);
  c.seed = j.value("seed", std::uint64_t{0});
  c.threads = j.value("threads", 0);
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_string(ss.str());
}

namespace {

std::vector<std::pair<int, int>> model_edges(const Model& model) {
  std::set<std::pair<int, int>> edges;
  const auto nb = neighborhoods(model);
  for (int u = 1; u <= model.n(); ++u) {
    for (int v : nb.of(u)) edges.insert({std::min(u, v), std::max(u, v)});
  }
  return {edges.begin(), edges.end()};
}

}  // namespace

RunReport run_experiment(const ExperimentConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  const Model model = !config.model_path.empty()
                          ? Model::load(config.model_path)
                          : gen_model(config.generator.value());
  const auto violations = validate_model(model);
  if (!violations.empty()) {
    std::string what = "run_experiment: model fails validation:";
    for (const auto& v : violations) what += " [" + v.detail + "]";
    throw std::runtime_error(what);
  }

  RunReport report;
  report.config = config;
  report.version = kVersion;
  report.true_edges = model_edges(model);

  const bool exact_mode = config.sampler.mode == "exact";
  JointTable table;
  if (exact_mode) table = exact_joint(model);

  const ModelMeta meta{model.n(), model.r()};
  const bool quantum = config.learner.kind == "quantum";
  const SimMode qmode = config.learner.qmode == "amplitude"
                            ? SimMode::amplitude
                            : SimMode::accounting;

  double cap_l = config.learner.cap_l;
  if (cap_l <= 0.0) {
    cap_l = static_cast<double>(model.n() - 1);
    try {
      cap_l = std::min(cap_l, derived_constants(model, 0.1).cap_l);
    } catch (const DegenerateConstants&) {
      // keep the n-1 cap
    }
  }

  report.trials.resize(config.trials);
  std::atomic<int> next{0};
  std::atomic<int> failures{0};
  auto run_trial = [&](int t) {
    TrialOutcome& out = report.trials[t];
    out.trial = t;
    out.seed = derive_seed(config.seed, static_cast<std::uint64_t>(t) * 2 + 1);
    try {
      SampleSet samples =
          exact_mode
              ? sample_exact(table, config.sampler.count, out.seed)
              : gibbs_sample(model, config.sampler.count,
                             {config.sampler.burn_in, config.sampler.thinning},
                             out.seed)
                    .samples;

      double tau = config.learner.tau;
      if (config.learner.tau_mode == "auto") {
        tau = calibrate_tau(samples);
      } else if (config.learner.tau_mode == "theoretical") {
        tau = derived_constants(model, config.learner.eta_budget).tau;
      }
      out.tau_used = tau;

      SearchPlan plan;
      plan.tau = tau;
      plan.cap_l = cap_l;
      plan.selection = config.learner.selection == "argmax"
                           ? SelectionRule::argmax
                           : SelectionRule::first_passing;

      std::set<std::pair<int, int>> got;
      if (quantum) {
        for (int u = 1; u <= meta.n; ++u) {
          plan.u = u;
          const auto q = learn_neighborhood_quantum(
              samples, meta, plan, config.learner.eta_budget, qmode,
              derive_seed(out.seed, static_cast<std::uint64_t>(u)));
          out.ledger.merge(q.ledger);
          out.v_evals += q.result.stats.v_evals;
          for (int v : q.result.neighbors)
            got.insert({std::min(u, v), std::max(u, v)});
        }
      } else {
        GraphRecovery rec = recover_graph(samples, meta, plan,
                                          Symmetrization::union_rule, 1);
        for (const auto& e : rec.edges) got.insert(e);
        for (const auto& r : rec.per_node) out.v_evals += r.stats.v_evals;
      }
      out.edges.assign(got.begin(), got.end());

      const std::set<std::pair<int, int>> truth(report.true_edges.begin(),
                                                report.true_edges.end());
      std::size_t inter = 0;
      for (const auto& e : got)
        if (truth.count(e)) ++inter;
      out.precision = got.empty() ? 1.0 : double(inter) / double(got.size());
      out.recall = truth.empty() ? 1.0 : double(inter) / double(truth.size());
      out.correct = got == truth;
    } catch (const std::exception& e) {
      out.correct = false;
      out.precision = out.recall = 0.0;
      failures.fetch_add(1);
    }
  };

  int workers = config.threads > 0
                    ? config.threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min(workers, config.trials));
  if (workers == 1) {
    for (int t = 0; t < config.trials; ++t) run_trial(t);
  } else {
    auto worker = [&] {
      while (true) {
        const int t = next.fetch_add(1);
        if (t >= config.trials) break;
        run_trial(t);
      }
    };
    std::vector<std::thread> pool;
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  if (config.trials > 0 && failures.load() == config.trials)
    throw std::runtime_error("run_experiment: every trial failed");

  for (const auto& t : report.trials) {
    report.successes += t.correct ? 1 : 0;
    report.mean_oracle_calls += static_cast<double>(t.ledger.oracle_calls);
    report.mean_classical_equiv +=
        static_cast<double>(t.ledger.classical_equiv_cost);
  }
  if (config.trials > 0) {
    report.mean_oracle_calls /= config.trials;
    report.mean_classical_equiv /= config.trials;
  }
  const auto t1 = std::chrono::steady_clock::now();
  report.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  return report;
}

std::string RunReport::to_json_string(bool include_timing, int indent) const {
  nlohmann::json j;
  j["config"] = nlohmann::json::parse(config.to_json_string());
  j["version"] = version;
  j["true_edges"] = nlohmann::json::array();
  for (const auto& [u, v] : true_edges) j["true_edges"].push_back({u, v});
  j["successes"] = successes;
  j["trial_count"] = trials.size();
  j["mean_oracle_calls"] = mean_oracle_calls;
  j["mean_classical_equiv"] = mean_classical_equiv;
  j["trials"] = nlohmann::json::array();
  for (const auto& t : trials) {
    nlohmann::json tj;
    tj["trial"] = t.trial;
    tj["seed"] = t.seed;
    tj["correct"] = t.correct;
    tj["precision"] = t.precision;
    tj["recall"] = t.recall;
    tj["tau_used"] = t.tau_used;
    tj["v_evals"] = t.v_evals;
    tj["edges"] = nlohmann::json::array();
    for (const auto& [u, v] : t.edges) tj["edges"].push_back({u, v});
    tj["ledger"] = {{"oracle_calls", t.ledger.oracle_calls},
                    {"grover_iterations", t.ledger.grover_iterations},
                    {"classical_equiv_cost", t.ledger.classical_equiv_cost},
                    {"mode", t.ledger.mode}};
    j["trials"].push_back(tj);
  }
  if (include_timing) j["timing"] = {{"wall_ms", wall_ms}};
  return j.dump(indent);
}

std::string RunReport::to_csv_string() const {
  std::ostringstream out;
  out << "trial,seed,correct,precision,recall,tau_used,v_evals,oracle_calls,"
         "classical_equiv_cost\n";
  for (const auto& t : trials) {
    out << t.trial << ',' << t.seed << ',' << (t.correct ? 1 : 0) << ','
        << t.precision << ',' << t.recall << ',' << t.tau_used << ','
        << t.v_evals << ',' << t.ledger.oracle_calls << ','
        << t.ledger.classical_equiv_cost << '\n';
  }
  return out.str();
}

std::vector<ScalingRow> bench_scaling(const std::vector<int>& n_list, int r,
                                      int trials, double eta, double tau,
                                      std::uint64_t seed) {
  std::vector<ScalingRow> rows;
  const int l = r - 1;
  for (const int n : n_list) {
    const int b = index_bits(n);
    if (l * b > 30)
      throw std::invalid_argument("bench_scaling: code space too large");
    const std::size_t space = std::size_t{1} << (l * b);
    for (int t = 0; t < trials; ++t) {
      const std::uint64_t trial_seed =
          derive_seed(seed, (static_cast<std::uint64_t>(n) << 20) + t);
      Rng rng(trial_seed);
      // Synthetic oracle: uniform values on valid codes, -inf elsewhere.
      std::vector<double> values(space,
                                 -std::numeric_limits<double>::infinity());
      std::vector<std::size_t> valid;
      for (std::size_t code = 0; code < space; ++code) {
        if (decode_string(code, l, n, /*u=*/0)) valid.push_back(code);
      }
      for (const std::size_t code : valid) values[code] = rng.uniform();

      auto res = durr_hoyer_accounting(
          [&values](std::size_t i) { return values[i]; }, space, eta,
          derive_seed(trial_seed, 1));

      ScalingRow row;
      row.n = n;
      row.l = l;
      row.code_space = space;
      row.trial = t;
      row.oracle_calls = res.ledger.oracle_calls;
      row.grover_iterations = res.ledger.grover_iterations;
      // Classical linear scan over the same flagged oracle space.
      std::uint64_t scan = 0;
      for (std::size_t code = 0; code < space; ++code) {
        ++scan;
        if (values[code] >= 0.0 && threshold_test(values[code], tau)) break;
      }
      row.classical_equiv_cost = scan;
      double vmax = -std::numeric_limits<double>::infinity();
      for (const std::size_t code : valid) vmax = std::max(vmax, values[code]);
      row.success = values[res.argmax] == vmax;
      rows.push_back(row);
    }
  }
  return rows;
}

std::string scaling_csv(const std::vector<ScalingRow>& rows) {
  std::ostringstream out;
  out << "n,l,code_space,trial,oracle_calls,grover_iterations,"
         "classical_equiv_cost,success\n";
  for (const auto& r : rows) {
    out << r.n << ',' << r.l << ',' << r.code_space << ',' << r.trial << ','
        << r.oracle_calls << ',' << r.grover_iterations << ','
        << r.classical_equiv_cost << ',' << (r.success ? 1 : 0) << '\n';
  }
  return out.str();
}

double fit_log_slope(const std::vector<double>& sizes,
                     const std::vector<double>& costs) {
  if (sizes.size() != costs.size() || sizes.size() < 2)
    throw std::invalid_argument("fit_log_slope: need >= 2 points");
  const std::size_t k = sizes.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double x = std::log2(sizes[i]);
    const double y = std::log2(costs[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

std::string report_crossover(const std::vector<double>& cap_ls,
                             const std::vector<double>& ws,
                             const std::vector<int>& rs, const CostModel& cm,
                             const std::optional<std::string>& csv_text) {
  std::ostringstream out;
  out << "cap_l,w,r,log2_crossover_n,crossover_n\n";
  for (const double L : cap_ls) {
    for (const double w : ws) {
      for (const int r : rs) {
        const double lg = cm.log2_crossover_n(L, w, r);
        out << L << ',' << w << ',' << r << ',' << lg << ',' << std::exp2(lg)
            << '\n';
      }
    }
  }
  if (csv_text) {
    // Aggregate measured quantum/classical cost ratios per code-space size.
    std::istringstream in(*csv_text);
    std::string line;
    std::getline(in, line);  // header
    std::map<std::uint64_t, std::pair<double, double>> sums;  // K -> (q, c)
    std::map<std::uint64_t, int> counts;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::istringstream ls(line);
      std::string field;
      std::vector<std::string> fields;
      while (std::getline(ls, field, ',')) fields.push_back(field);
      if (fields.size() < 7) continue;
      const std::uint64_t k = std::stoull(fields[2]);
      sums[k].first += std::stod(fields[4]);
      sums[k].second += std::stod(fields[6]);
      counts[k] += 1;
    }
    out << "\ncode_space,mean_oracle_calls,mean_classical_cost,ratio\n";
    for (const auto& [k, qc] : sums) {
      const double q = qc.first / counts[k];
      const double c = qc.second / counts[k];
      out << k << ',' << q << ',' << c << ',' << (q / c) << '\n';
    }
  }
  return out.str();
}

}  // namespace mrf
