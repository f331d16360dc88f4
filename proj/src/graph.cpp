#include "c3rf/graph.hpp"

#include <cmath>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "c3rf/logspace.hpp"
#include "c3rf/rng.hpp"

namespace c3rf {

namespace {

// union-find over variables and factors, factors offset by num_variables
struct UnionFind {
  std::vector<int> parent;

  explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }

  int find(int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  }

  // returns false when x and y were already connected
  bool unite(int x, int y) {
    int rx = find(x), ry = find(y);
    if (rx == ry) return false;
    parent[static_cast<std::size_t>(rx)] = ry;
    return true;
  }
};

}  // namespace

bool FactorGraph::is_forest() const {
  UnionFind uf(num_variables() + num_factors());
  for (int f = 0; f < num_factors(); ++f) {
    for (int v : factors[static_cast<std::size_t>(f)].scope) {
      if (!uf.unite(v, num_variables() + f)) return false;
    }
  }
  return true;
}

FactorGraph build_graph(std::vector<VariableSpec> vars, std::vector<FactorSpec> factors) {
  const int n = static_cast<int>(vars.size());
  for (int i = 0; i < n; ++i) {
    const auto& v = vars[static_cast<std::size_t>(i)];
    if (v.id != i)
      fail(ErrorCode::duplicate_id,
           "variable ids must be contiguous 0..n-1; position " + std::to_string(i) + " has id " +
               std::to_string(v.id));
    if (v.cardinality < 2)
      fail(ErrorCode::invalid_argument,
           "variable " + std::to_string(i) + " has cardinality " + std::to_string(v.cardinality) +
               "; need >= 2");
  }
  for (std::size_t fi = 0; fi < factors.size(); ++fi) {
    auto& f = factors[fi];
    if (f.id != static_cast<int>(fi))
      fail(ErrorCode::duplicate_id,
           "factor ids must be contiguous 0..m-1; position " + std::to_string(fi) + " has id " +
               std::to_string(f.id));
    if (f.scope.empty())
      fail(ErrorCode::scope_out_of_range, "factor " + std::to_string(fi) + " has empty scope");
    std::size_t table_size = 1;
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    for (int v : f.scope) {
      if (v < 0 || v >= n)
        fail(ErrorCode::scope_out_of_range, "factor " + std::to_string(fi) +
                                                " references variable " + std::to_string(v));
      if (seen[static_cast<std::size_t>(v)])
        fail(ErrorCode::scope_out_of_range, "factor " + std::to_string(fi) +
                                                " repeats variable " + std::to_string(v));
      seen[static_cast<std::size_t>(v)] = true;
      table_size *= static_cast<std::size_t>(vars[static_cast<std::size_t>(v)].cardinality);
    }
    if (f.table.size() != table_size)
      fail(ErrorCode::table_size_mismatch,
           "factor " + std::to_string(fi) + " table has " + std::to_string(f.table.size()) +
               " entries; scope requires " + std::to_string(table_size));
    for (double x : f.table) {
      if (std::isnan(x) || (std::isinf(x) && x > 0))
        fail(ErrorCode::nan_potential,
             "factor " + std::to_string(fi) + " contains a NaN or +inf log-potential");
    }
  }

  FactorGraph g;
  g.variables = std::move(vars);
  g.factors = std::move(factors);
  g.var_factors.assign(static_cast<std::size_t>(n), {});
  for (int f = 0; f < g.num_factors(); ++f) {
    for (int v : g.factors[static_cast<std::size_t>(f)].scope)
      g.var_factors[static_cast<std::size_t>(v)].push_back(f);
  }
  return g;
}

GibbsModel make_model(FactorGraph graph, double temperature) {
  if (!(temperature > 0.0) || std::isinf(temperature))
    fail(ErrorCode::invalid_argument, "temperature must be finite and > 0");
  return GibbsModel{std::move(graph), temperature};
}

GibbsModel with_temperature(const GibbsModel& model, double temperature) {
  return make_model(model.graph, temperature);
}

std::size_t factor_table_index(const FactorGraph& g, const FactorSpec& f, const Configuration& y) {
  std::size_t idx = 0;
  for (int v : f.scope) {
    idx = idx * static_cast<std::size_t>(g.cardinality(v)) +
          static_cast<std::size_t>(y[static_cast<std::size_t>(v)]);
  }
  return idx;
}

void validate_configuration(const FactorGraph& g, const Configuration& y) {
  if (static_cast<int>(y.size()) != g.num_variables())
    fail(ErrorCode::invalid_configuration,
         "configuration has " + std::to_string(y.size()) + " labels; graph has " +
             std::to_string(g.num_variables()) + " variables");
  for (int i = 0; i < g.num_variables(); ++i) {
    int label = y[static_cast<std::size_t>(i)];
    if (label < 0 || label >= g.cardinality(i))
      fail(ErrorCode::invalid_configuration,
           "label " + std::to_string(label) + " out of range for variable " + std::to_string(i));
  }
}

double score(const GibbsModel& model, const Configuration& y) {
  validate_configuration(model.graph, y);
  double s = 0.0;
  for (const auto& f : model.graph.factors) {
    double t = f.table[factor_table_index(model.graph, f, y)];
    if (is_neg_inf(t)) return kNegInf;
    s += t;
  }
  return s;
}

double log_gibbs_weight(const GibbsModel& model, const Configuration& y) {
  return score(model, y) / model.temperature;
}

GibbsModel gen_grid(int side, std::uint64_t seed, double potential_low, double temperature) {
  if (side < 1) fail(ErrorCode::invalid_argument, "grid side must be >= 1");
  if (!(potential_low <= 0.0))
    fail(ErrorCode::invalid_argument, "potential_low must be <= 0");

  Rng rng(seed);
  const int n = side * side;
  std::vector<VariableSpec> vars;
  vars.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) vars.push_back({i, 2});

  std::vector<FactorSpec> factors;
  int next_id = 0;
  for (int i = 0; i < n; ++i) {
    FactorSpec f;
    f.id = next_id++;
    f.scope = {i};
    f.table = {rng.uniform(potential_low, 0.0), rng.uniform(potential_low, 0.0)};
    factors.push_back(std::move(f));
  }
  // 4-connected edges, row-major, right neighbor before down neighbor
  for (int r = 0; r < side; ++r) {
    for (int c = 0; c < side; ++c) {
      const int i = r * side + c;
      if (c + 1 < side) {
        FactorSpec f;
        f.id = next_id++;
        f.scope = {i, i + 1};
        f.table = {rng.uniform(potential_low, 0.0), rng.uniform(potential_low, 0.0),
                   rng.uniform(potential_low, 0.0), rng.uniform(potential_low, 0.0)};
        factors.push_back(std::move(f));
      }
      if (r + 1 < side) {
        FactorSpec f;
        f.id = next_id++;
        f.scope = {i, i + side};
        f.table = {rng.uniform(potential_low, 0.0), rng.uniform(potential_low, 0.0),
                   rng.uniform(potential_low, 0.0), rng.uniform(potential_low, 0.0)};
        factors.push_back(std::move(f));
      }
    }
  }
  return make_model(build_graph(std::move(vars), std::move(factors)), temperature);
}

}  // namespace c3rf
