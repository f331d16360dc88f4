#include <cmath>
#include <limits>

#include "doctest.h"

#include "c3rf/enumerate.hpp"
#include "c3rf/graph.hpp"
#include "c3rf/logspace.hpp"
#include "support.hpp"

using namespace c3rf;

namespace {

GibbsModel tiny_chain() {
  // two binary variables, one unary each, one pairwise
  std::vector<VariableSpec> vars{{0, 2}, {1, 2}};
  std::vector<FactorSpec> factors{
      {0, {0}, {0.0, 1.0}},
      {1, {1}, {0.5, -0.5}},
      {2, {0, 1}, {0.1, 0.2, 0.3, 0.4}},
  };
  return make_model(build_graph(vars, factors));
}

}  // namespace

TEST_CASE("build_graph validates input") {
  std::vector<VariableSpec> vars{{0, 2}, {1, 2}};

  SUBCASE("variable ids must match positions") {
    std::vector<VariableSpec> bad{{0, 2}, {2, 2}};
    CHECK_THROWS_AS(build_graph(bad, {}), Error);
  }
  SUBCASE("cardinality below two is rejected") {
    std::vector<VariableSpec> bad{{0, 1}};
    CHECK_THROWS_AS(build_graph(bad, {}), Error);
  }
  SUBCASE("empty scope") {
    std::vector<FactorSpec> bad{{0, {}, {0.0}}};
    CHECK_THROWS_AS(build_graph(vars, bad), Error);
  }
  SUBCASE("scope variable out of range") {
    std::vector<FactorSpec> bad{{0, {5}, {0.0, 0.0}}};
    CHECK_THROWS_AS(build_graph(vars, bad), Error);
  }
  SUBCASE("duplicate scope entries") {
    std::vector<FactorSpec> bad{{0, {0, 0}, {0.0, 0.0, 0.0, 0.0}}};
    CHECK_THROWS_AS(build_graph(vars, bad), Error);
  }
  SUBCASE("table size must match scope cardinalities") {
    std::vector<FactorSpec> bad{{0, {0, 1}, {0.0, 0.0}}};
    CHECK_THROWS_AS(build_graph(vars, bad), Error);
  }
  SUBCASE("NaN and +inf potentials are rejected") {
    std::vector<FactorSpec> nan_table{{0, {0}, {0.0, std::numeric_limits<double>::quiet_NaN()}}};
    CHECK_THROWS_AS(build_graph(vars, nan_table), Error);
    std::vector<FactorSpec> posinf{{0, {0}, {0.0, std::numeric_limits<double>::infinity()}}};
    CHECK_THROWS_AS(build_graph(vars, posinf), Error);
  }
  SUBCASE("-inf is allowed") {
    std::vector<FactorSpec> ok{{0, {0}, {0.0, kNegInf}}};
    CHECK_NOTHROW(build_graph(vars, ok));
  }
  SUBCASE("adjacency is ascending") {
    const FactorGraph g = tiny_chain().graph;
    CHECK(g.var_factors[0] == std::vector<int>{0, 2});
    CHECK(g.var_factors[1] == std::vector<int>{1, 2});
    CHECK(g.degree(0) == 2);
  }
}

TEST_CASE("make_model validates temperature") {
  std::vector<VariableSpec> vars{{0, 2}};
  std::vector<FactorSpec> factors{{0, {0}, {0.0, 0.0}}};
  auto g = build_graph(vars, factors);
  CHECK_THROWS_AS(make_model(g, 0.0), Error);
  CHECK_THROWS_AS(make_model(g, -1.0), Error);
  CHECK_THROWS_AS(make_model(g, std::numeric_limits<double>::infinity()), Error);
  CHECK(make_model(g, 2.0).temperature == 2.0);
}

TEST_CASE("score sums factor tables in row-major scope order") {
  const GibbsModel m = tiny_chain();
  // y = (1, 0): unary0 -> 1.0, unary1 -> 0.5, pair index 1*2+0 -> 0.3
  CHECK(score(m, {1, 0}) == doctest::Approx(1.8).epsilon(1e-12));
  CHECK(log_gibbs_weight(with_temperature(m, 2.0), {1, 0}) ==
        doctest::Approx(0.9).epsilon(1e-12));
}

TEST_CASE("score short-circuits to -inf on forbidden assignments") {
  std::vector<VariableSpec> vars{{0, 2}};
  std::vector<FactorSpec> factors{{0, {0}, {kNegInf, 0.0}}, {1, {0}, {1.0, 2.0}}};
  const GibbsModel m = make_model(build_graph(vars, factors));
  CHECK(is_neg_inf(score(m, {0})));
  CHECK(score(m, {1}) == doctest::Approx(2.0));
}

TEST_CASE("validate_configuration rejects wrong lengths and labels") {
  const GibbsModel m = tiny_chain();
  CHECK_THROWS_AS(validate_configuration(m.graph, {0}), Error);
  CHECK_THROWS_AS(validate_configuration(m.graph, {0, 2}), Error);
  CHECK_NOTHROW(validate_configuration(m.graph, {1, 1}));
}

TEST_CASE("is_forest distinguishes trees from loops") {
  CHECK(tiny_chain().graph.is_forest());
  CHECK(testsupport::random_tree_model(3).graph.is_forest());
  CHECK_FALSE(gen_grid(2, 0).graph.is_forest());
}

TEST_CASE("gen_grid layout and determinism") {
  const GibbsModel a = gen_grid(3, 42);
  const GibbsModel b = gen_grid(3, 42);
  const GibbsModel c = gen_grid(3, 43);

  CHECK(a.graph.num_variables() == 9);
  // 9 unaries + 12 grid edges
  CHECK(a.graph.num_factors() == 21);
  for (const auto& v : a.graph.variables) CHECK(v.cardinality == 2);

  bool identical = true;
  for (int f = 0; f < a.graph.num_factors(); ++f) {
    if (a.graph.factors[static_cast<std::size_t>(f)].table !=
        b.graph.factors[static_cast<std::size_t>(f)].table)
      identical = false;
  }
  CHECK(identical);

  bool differs = false;
  for (int f = 0; f < a.graph.num_factors(); ++f) {
    if (a.graph.factors[static_cast<std::size_t>(f)].table !=
        c.graph.factors[static_cast<std::size_t>(f)].table)
      differs = true;
  }
  CHECK(differs);

  for (const auto& f : a.graph.factors) {
    for (double x : f.table) {
      CHECK(x <= 0.0);
      CHECK(x >= -5.0);
    }
  }
}

TEST_CASE("enumeration visits the joint space in lexicographic order") {
  const GibbsModel m = tiny_chain();
  std::vector<Configuration> seen;
  for_each_configuration(m.graph, [&](const Configuration& y) { seen.push_back(y); });
  const std::vector<Configuration> want{{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  CHECK(seen == want);
}

TEST_CASE("enumeration respects the size cap") {
  std::vector<VariableSpec> vars;
  std::vector<FactorSpec> factors;
  for (int i = 0; i < 30; ++i) {
    vars.push_back({i, 2});
    factors.push_back({i, {i}, {0.0, 0.0}});
  }
  const GibbsModel m = make_model(build_graph(vars, factors));
  CHECK_THROWS_AS(for_each_configuration(m.graph, [](const Configuration&) {}), Error);
}

TEST_CASE("ball enumeration orders members by distance then position then label") {
  std::vector<int> cards{2, 2, 3};
  std::vector<Configuration> seen;
  for_each_ball_member({0, 0, 0}, cards, 1,
                       [&](const Configuration& y) { seen.push_back(y); });
  const std::vector<Configuration> want{
      {0, 0, 0},                       // distance 0
      {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {0, 0, 2},  // distance 1
  };
  CHECK(seen == want);
}
