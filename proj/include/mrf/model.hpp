#pragma once

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mrf/keys.hpp"

namespace mrf {

// Interaction tensor attached to one clique. `entries` holds all 2^l values
// ordered by the configuration encoding of keys.hpp (-1 -> 0, +1 -> 1, last
// vertex = least significant bit).
struct CliqueTensor {
  std::vector<int> vertices;  // 1-based, strictly increasing
  std::vector<double> entries;

  int size() const { return static_cast<int>(vertices.size()); }
  double max_abs() const;
  // Tensor value for the clique configuration extracted from a full row key.
  double value(ConfigKey full_key, int n) const {
    return entries[project_key(full_key, n, vertices)];
  }
};

// Binary r-wise Markov random field over nodes 1..n. Immutable after
// construction; construction throws std::invalid_argument on structural
// problems (index ranges, tensor shapes, duplicate cliques), which are
// distinct from the non-degeneracy violations reported by validate_model.
class Model {
 public:
  Model(int n, int r, double alpha, double beta,
        std::vector<CliqueTensor> cliques);

  int n() const { return n_; }
  int r() const { return r_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  const std::vector<CliqueTensor>& cliques() const { return cliques_; }

  std::string to_json_string(int indent = 2) const;
  static Model from_json_string(const std::string& text);
  void save(const std::filesystem::path& path) const;
  static Model load(const std::filesystem::path& path);

  bool operator==(const Model& other) const;

 private:
  int n_;
  int r_;
  double alpha_;
  double beta_;
  std::vector<CliqueTensor> cliques_;
};

// One non-degeneracy violation. `condition` is 1, 2 or 3 matching the three
// clauses of the (alpha, beta) non-degeneracy definition.
struct Violation {
  int condition;
  std::string detail;
};

// Empty iff the model is (alpha, beta)-non-degenerate:
//   1. every pair of nodes co-occurring in a clique is witnessed by some
//      clique containing both whose tensor is non-zero;
//   2. every maximal hyperedge has an entry with |entry| >= alpha;
//   3. every entry satisfies |entry| <= beta.
std::vector<Violation> validate_model(const Model& model);

// Cliques not strictly contained in another clique of the model, sorted.
std::vector<std::vector<int>> maximal_hyperedges(const Model& model);

struct Neighborhoods {
  std::vector<std::vector<int>> neighbors;  // index 0 unused; sorted per node
  int degree = 0;                           // d = max_u |N(u)|

  const std::vector<int>& of(int u) const { return neighbors[u]; }
};

// N(u) = union of clique co-members of u; degree d = max_u |N(u)|.
Neighborhoods neighborhoods(const Model& model);

class DegenerateConstants : public std::runtime_error {
 public:
  explicit DegenerateConstants(const std::string& what)
      : std::runtime_error(what) {}
};

// Constants derived from the model. tau is astronomically small for
// realistic parameters, so cap_l and the sample bound are also reported in
// log2 form; learners take a user-supplied practical threshold instead and
// report the theoretical value alongside.
struct DerivedConstants {
  double gamma = 0;
  double gamma_upper_bound = 0;  // beta * sum_l C(d, l-1)
  double delta = 0;              // exp(-2*gamma) / 2
  double tau = 0;
  double cap_l = 0;              // 8 / tau^2
  double log2_sample_bound = 0;  // log2 of the Theorem-type M lower bound
  double sample_bound = 0;       // 2^log2_sample_bound; +inf when it overflows
};

// Throws DegenerateConstants when gamma == 0 or when the tau denominator
// vanishes (d < r-1 makes C(d, r-1) = 0).
DerivedConstants derived_constants(const Model& model, double w);

// Same computation from bare parameters, with gamma taken at its upper
// bound beta * sum_{l=1}^{r} C(d, l-1). Used by cost prediction.
DerivedConstants derived_constants_from_params(int n, int r, int d,
                                               double alpha, double beta,
                                               double w);

}  // namespace mrf
