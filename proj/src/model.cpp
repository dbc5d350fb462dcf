#include "mrf/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace mrf {

namespace {

double binom(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return r;
}

}  // namespace

double CliqueTensor::max_abs() const {
  double m = 0.0;
  for (double e : entries) m = std::max(m, std::fabs(e));
  return m;
}

Model::Model(int n, int r, double alpha, double beta,
             std::vector<CliqueTensor> cliques)
    : n_(n), r_(r), alpha_(alpha), beta_(beta), cliques_(std::move(cliques)) {
  if (n_ < 1 || n_ > 4096) throw std::invalid_argument("node count out of range");
  if (r_ < 1 || r_ > n_) throw std::invalid_argument("clique bound r out of range");
  if (!(alpha_ > 0) || !(beta_ > 0) || alpha_ > beta_)
    throw std::invalid_argument("require 0 < alpha <= beta");
  std::set<std::vector<int>> seen;
  for (const auto& c : cliques_) {
    const int l = c.size();
    if (l < 1 || l > r_)
      throw std::invalid_argument("clique size outside [1, r]");
    for (int i = 0; i < l; ++i) {
      if (c.vertices[i] < 1 || c.vertices[i] > n_)
        throw std::invalid_argument("clique vertex outside [1, n]");
      if (i > 0 && c.vertices[i] <= c.vertices[i - 1])
        throw std::invalid_argument("clique vertices must strictly increase");
    }
    if (c.entries.size() != (std::size_t{1} << l))
      throw std::invalid_argument("tensor must have exactly 2^l entries");
    for (double e : c.entries) {
      if (!std::isfinite(e)) throw std::invalid_argument("non-finite tensor entry");
    }
    if (!seen.insert(c.vertices).second)
      throw std::invalid_argument("duplicate clique vertex set");
  }
}

bool Model::operator==(const Model& other) const {
  if (n_ != other.n_ || r_ != other.r_ || alpha_ != other.alpha_ ||
      beta_ != other.beta_ || cliques_.size() != other.cliques_.size())
    return false;
  for (std::size_t i = 0; i < cliques_.size(); ++i) {
    if (cliques_[i].vertices != other.cliques_[i].vertices) return false;
    if (cliques_[i].entries != other.cliques_[i].entries) return false;
  }
  return true;
}

std::string Model::to_json_string(int indent) const {
  nlohmann::json j;
  j["n"] = n_;
  j["r"] = r_;
  j["alpha"] = alpha_;
  j["beta"] = beta_;
  j["cliques"] = nlohmann::json::array();
  for (const auto& c : cliques_) {
    j["cliques"].push_back({{"vertices", c.vertices}, {"entries", c.entries}});
  }
  return j.dump(indent);
}

Model Model::from_json_string(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  std::vector<CliqueTensor> cliques;
  for (const auto& c : j.at("cliques")) {
    cliques.push_back({c.at("vertices").get<std::vector<int>>(),
                       c.at("entries").get<std::vector<double>>()});
  }
  return Model(j.at("n").get<int>(), j.at("r").get<int>(),
               j.at("alpha").get<double>(), j.at("beta").get<double>(),
               std::move(cliques));
}

void Model::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << to_json_string() << "\n";
}

Model Model::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_string(ss.str());
}

std::vector<Violation> validate_model(const Model& model) {
  std::vector<Violation> out;

  // Condition 1: every co-occurring pair must appear in some clique whose
  // tensor is non-zero.
  std::map<std::pair<int, int>, double> pair_witness;
  for (const auto& c : model.cliques()) {
    const double m = c.max_abs();
    for (std::size_t i = 0; i < c.vertices.size(); ++i) {
      for (std::size_t k = i + 1; k < c.vertices.size(); ++k) {
        auto key = std::make_pair(c.vertices[i], c.vertices[k]);
        auto [it, inserted] = pair_witness.try_emplace(key, m);
        if (!inserted) it->second = std::max(it->second, m);
      }
    }
  }
  for (const auto& [edge, witness] : pair_witness) {
    if (witness == 0.0) {
      out.push_back({1, "edge (" + std::to_string(edge.first) + "," +
                            std::to_string(edge.second) +
                            ") has no clique with a non-zero tensor"});
    }
  }

  // Condition 2: every maximal hyperedge needs an entry >= alpha in
  // magnitude.
  for (const auto& h : maximal_hyperedges(model)) {
    double best = 0.0;
    for (const auto& c : model.cliques()) {
      if (c.vertices == h) best = c.max_abs();
    }
    if (best < model.alpha()) {
      std::string verts;
      for (int v : h) verts += (verts.empty() ? "" : ",") + std::to_string(v);
      out.push_back({2, "maximal hyperedge (" + verts +
                            ") has max |entry| = " + std::to_string(best) +
                            " < alpha"});
    }
  }

  // Condition 3: all entries bounded by beta.
  for (const auto& c : model.cliques()) {
    if (c.max_abs() > model.beta()) {
      std::string verts;
      for (int v : c.vertices)
        verts += (verts.empty() ? "" : ",") + std::to_string(v);
      out.push_back({3, "clique (" + verts + ") has |entry| = " +
                            std::to_string(c.max_abs()) + " > beta"});
    }
  }
  return out;
}

std::vector<std::vector<int>> maximal_hyperedges(const Model& model) {
  std::vector<std::vector<int>> out;
  const auto& cs = model.cliques();
  for (const auto& c : cs) {
    bool contained = false;
    for (const auto& other : cs) {
      if (other.vertices.size() <= c.vertices.size()) continue;
      if (std::includes(other.vertices.begin(), other.vertices.end(),
                        c.vertices.begin(), c.vertices.end())) {
        contained = true;
        break;
      }
    }
    if (!contained) out.push_back(c.vertices);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Neighborhoods neighborhoods(const Model& model) {
  std::vector<std::set<int>> sets(model.n() + 1);
  for (const auto& c : model.cliques()) {
    for (int a : c.vertices) {
      for (int b : c.vertices) {
        if (a != b) sets[a].insert(b);
      }
    }
  }
  Neighborhoods out;
  out.neighbors.resize(model.n() + 1);
  for (int u = 1; u <= model.n(); ++u) {
    out.neighbors[u].assign(sets[u].begin(), sets[u].end());
    out.degree = std::max(out.degree, static_cast<int>(sets[u].size()));
  }
  return out;
}

namespace {

DerivedConstants constants_from_gamma(double gamma, int r, int d, double alpha,
                                      double beta, double w, int n_for_bound) {
  if (gamma <= 0.0)
    throw DegenerateConstants("gamma = 0: all tensors vanish, tau undefined");
  const double choose_d_rm1 = binom(d, r - 1);
  if (choose_d_rm1 <= 0.0)
    throw DegenerateConstants("C(d, r-1) = 0: degree too small for r, tau undefined");
  if (!(w > 0.0) || !(w < 1.0))
    throw std::invalid_argument("failure budget w must lie in (0, 1)");

  DerivedConstants c;
  c.gamma = gamma;
  double bound = 0.0;
  for (int l = 1; l <= r; ++l) bound += binom(d, l - 1);
  c.gamma_upper_bound = beta * bound;
  c.delta = 0.5 * std::exp(-2.0 * gamma);
  const double r2r = std::pow(static_cast<double>(r), 2.0 * r);
  c.tau = 2.0 * alpha * alpha * std::pow(c.delta, r - 1) /
          (r2r * std::pow(2.0, r + 1) * choose_d_rm1 * gamma * std::exp(2.0 * gamma));
  c.cap_l = 8.0 / (c.tau * c.tau);

  // All logs base 2. The bracket is evaluated directly; the 2^{2L}/delta^{2L}
  // factor is kept in log space because L is typically enormous.
  const double L = c.cap_l;
  const double bracket = std::log2(1.0 / w) + std::log2(L + r) +
                         (L + r) * std::log2(2.0 * n_for_bound) + 1.0;
  c.log2_sample_bound = std::log2(60.0) + 2.0 * L - 2.0 * std::log2(c.tau) -
                        2.0 * L * std::log2(c.delta) + std::log2(bracket);
  c.sample_bound = std::exp2(c.log2_sample_bound);
  return c;
}

}  // namespace

DerivedConstants derived_constants(const Model& model, double w) {
  // gamma = sup_u sum over cliques containing u of the tensor's max entry;
  // absent cliques contribute zero.
  double gamma = 0.0;
  std::vector<double> per_node(model.n() + 1, 0.0);
  for (const auto& c : model.cliques()) {
    const double m = c.max_abs();
    for (int v : c.vertices) per_node[v] += m;
  }
  for (int u = 1; u <= model.n(); ++u) gamma = std::max(gamma, per_node[u]);

  const int d = neighborhoods(model).degree;
  return constants_from_gamma(gamma, model.r(), d, model.alpha(), model.beta(),
                              w, model.n());
}

DerivedConstants derived_constants_from_params(int n, int r, int d,
                                               double alpha, double beta,
                                               double w) {
  double bound = 0.0;
  for (int l = 1; l <= r; ++l) bound += binom(d, l - 1);
  return constants_from_gamma(beta * bound, r, d, alpha, beta, w,
                              std::max(2, n));
}

}  // namespace mrf
