#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "c3rf/errors.hpp"

namespace c3rf {

// A joint assignment, one label per variable, in variable-id order.
using Configuration = std::vector<int>;

struct VariableSpec {
  int id = 0;
  int cardinality = 2;
};

// Dense log-potential table, row-major in scope order: the first scope
// variable is the most significant index. -inf marks forbidden assignments;
// +inf and NaN are rejected at build time.
struct FactorSpec {
  int id = 0;
  std::vector<int> scope;
  std::vector<double> table;
};

struct FactorGraph {
  std::vector<VariableSpec> variables;
  std::vector<FactorSpec> factors;
  // variable id -> indices of incident factors, ascending
  std::vector<std::vector<int>> var_factors;

  int num_variables() const { return static_cast<int>(variables.size()); }
  int num_factors() const { return static_cast<int>(factors.size()); }
  int cardinality(int var) const { return variables[static_cast<std::size_t>(var)].cardinality; }
  int degree(int var) const { return static_cast<int>(var_factors[static_cast<std::size_t>(var)].size()); }

  // true when the bipartite variable/factor graph is acyclic
  bool is_forest() const;
};

// Validates ids, scopes and tables, and builds adjacency.
FactorGraph build_graph(std::vector<VariableSpec> vars, std::vector<FactorSpec> factors);

// Gibbs distribution P(y) proportional to exp(score(y) / temperature).
struct GibbsModel {
  FactorGraph graph;
  double temperature = 1.0;
};

GibbsModel make_model(FactorGraph graph, double temperature = 1.0);
GibbsModel with_temperature(const GibbsModel& model, double temperature);

// Row-major table index of y restricted to the factor scope.
std::size_t factor_table_index(const FactorGraph& g, const FactorSpec& f, const Configuration& y);

void validate_configuration(const FactorGraph& g, const Configuration& y);

// Untempered score: sum of factor log-potentials at y. Never NaN; -inf iff
// some factor forbids y.
double score(const GibbsModel& model, const Configuration& y);

// score / temperature
double log_gibbs_weight(const GibbsModel& model, const Configuration& y);

// side x side binary grid with general unary and 4-connected pairwise tables,
// entries i.i.d. uniform on [potential_low, 0]. Deterministic in seed.
GibbsModel gen_grid(int side, std::uint64_t seed, double potential_low = -5.0,
                    double temperature = 1.0);

}  // namespace c3rf
