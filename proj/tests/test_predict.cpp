#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"

#include "c3rf/predict.hpp"
#include "c3rf/rng.hpp"
#include "support.hpp"

using namespace c3rf;
using testsupport::random_multilabel_model;
using testsupport::random_tree_model;
using testsupport::random_uniform_loopy_model;

namespace {

const InferenceBackend kExact{InferenceBackend::Kind::exact, {}, kDefaultEnumerationCap};

CandidateSet two_candidates(const Configuration& a, const Configuration& b, double sa, double sb) {
  CandidateSet set;
  set.items = {{a, sa, 1.0}, {b, sb, 1.0}};
  return set;
}

GibbsModel flat_binary_chain(int n) {
  std::vector<VariableSpec> vars;
  std::vector<FactorSpec> factors;
  for (int i = 0; i < n; ++i) vars.push_back({i, 2});
  factors.push_back({0, {0}, {0.0, 0.0}});
  return make_model(build_graph(vars, factors));
}

}  // namespace

TEST_CASE("radius_from_fraction rounds and clamps") {
  CHECK(radius_from_fraction(0.0, 10) == 0);
  CHECK(radius_from_fraction(1.0, 10) == 10);
  CHECK(radius_from_fraction(0.25, 10) == 3);   // round half away from zero: 2.5 -> 3
  CHECK(radius_from_fraction(0.24, 10) == 2);
  CHECK(radius_from_fraction(0.5, 3) == 2);     // 1.5 -> 2
  CHECK_THROWS_AS(radius_from_fraction(-0.1, 4), Error);
  CHECK_THROWS_AS(radius_from_fraction(1.5, 4), Error);
}

TEST_CASE("empty candidate sets are rejected") {
  const GibbsModel m = flat_binary_chain(2);
  CandidateSet empty;
  LossSpec loss;
  CHECK_THROWS_AS(delta_predict(m, empty, loss), Error);
  CHECK_THROWS_AS(map_predict(m, empty), Error);
}

TEST_CASE("candidate labels must fit the model") {
  const GibbsModel m = flat_binary_chain(2);
  LossSpec loss;
  CHECK_THROWS_AS(delta_predict(m, two_candidates({0, 1, 0}, {0, 0, 0}, 0, 0), loss), Error);
  CHECK_THROWS_AS(delta_predict(m, two_candidates({0, 2}, {0, 0}, 0, 0), loss), Error);
}

TEST_CASE("candidate weights must be positive") {
  const GibbsModel m = flat_binary_chain(2);
  CandidateSet set = two_candidates({0, 0}, {1, 1}, 0, 0);
  set.items[1].weight = 0.0;
  LossSpec loss;
  CHECK_THROWS_AS(delta_predict(m, set, loss), Error);
  set.items[1].weight = -1.0;
  CHECK_THROWS_AS(delta_predict(m, set, loss), Error);
}

TEST_CASE("map_predict returns candidate zero with zero objectives") {
  const GibbsModel m = flat_binary_chain(3);
  const CandidateSet set = two_candidates({1, 0, 1}, {0, 0, 0}, 2.0, 5.0);
  const Prediction p = map_predict(m, set);
  CHECK(p.chosen_index == 0);
  CHECK(p.chosen == Configuration{1, 0, 1});
  CHECK(p.objective_values == std::vector<double>{0.0, 0.0});
  CHECK(p.backend == "map");
}

TEST_CASE("delta_predict ranks candidates by score-weighted expected loss") {
  // two binary variables, strong unary pull toward (1,1)
  std::vector<VariableSpec> vars{{0, 2}, {1, 2}};
  std::vector<FactorSpec> factors{{0, {0}, {0.0, 2.0}}, {1, {1}, {0.0, 2.0}}};
  const GibbsModel m = make_model(build_graph(vars, factors));
  const CandidateSet set = two_candidates({1, 1}, {0, 0}, 4.0, 0.0);
  LossSpec loss;
  const Prediction p = delta_predict(m, set, loss);
  // the high-scoring candidate dominates the weighting, so predicting it
  // costs less than predicting its complement
  REQUIRE(p.objective_values.size() == 2);
  CHECK(p.objective_values[0] < p.objective_values[1]);
  CHECK(p.chosen_index == 0);
  CHECK(p.backend == "gibbs");
  // log weights are tempered scores
  CHECK(p.log_weights[0] == doctest::Approx(4.0));
  CHECK(p.log_weights[1] == doctest::Approx(0.0));
}

TEST_CASE("delta objective values follow the shifted-weight formula") {
  const GibbsModel m = flat_binary_chain(2);
  const Configuration a{0, 0}, b{1, 1};
  CandidateSet set = two_candidates(a, b, 0.0, 0.0);
  set.items[0].weight = 3.0;
  LossSpec loss;
  const Prediction p = delta_predict(m, set, loss);
  // flat scores: both weights exp(0) = 1; objective_j = sum_c w_c loss(c, yhat_j)
  CHECK(p.objective_values[0] == doctest::Approx(1.0));         // 3*0 + 1*1
  CHECK(p.objective_values[1] == doctest::Approx(3.0));         // 3*1 + 1*0
  CHECK(p.chosen_index == 0);
}

TEST_CASE("mass ties on a flat model resolve to the smallest index") {
  const GibbsModel m = flat_binary_chain(3);
  const CandidateSet set = two_candidates({0, 0, 0}, {1, 1, 1}, 0.0, 0.0);
  LossSpec loss;
  const Prediction p = mass_predict(m, set, 1, loss, kExact);
  // symmetric model: identical objectives, index 0 wins
  CHECK(p.objective_values[0] == doctest::Approx(p.objective_values[1]));
  CHECK(p.chosen_index == 0);
  // each candidate's log weight is the log volume of its ball (flat scores)
  CHECK(p.log_weights[0] == doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("radius zero collapses mass and c3rf_fela onto delta") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    // uniform cardinality: the iou FELA rejects marginal vectors shorter
    // than the class universe
    const GibbsModel m = random_uniform_loopy_model(seed, 5, 3, 1.0);
    const CandidateSet set = divmbest(m, 4, 0.3);
    for (LossKind kind : {LossKind::hamming, LossKind::iou}) {
      LossSpec loss;
      loss.kind = kind;
      int k = 2;
      for (int v = 0; v < m.graph.num_variables(); ++v)
        k = std::max(k, m.graph.cardinality(v));
      loss.num_classes = k;

      const Prediction d = delta_predict(m, set, loss);
      const Prediction mz = mass_predict(m, set, 0, loss, kExact);
      const Prediction cz = c3rf_fela_predict(m, set, 0, loss, kExact);
      CHECK(mz.chosen_index == d.chosen_index);
      CHECK(cz.chosen_index == d.chosen_index);
      // objective vectors agree exactly at radius zero and T = 1
      for (std::size_t j = 0; j < set.items.size(); ++j) {
        CHECK(mz.objective_values[j] == d.objective_values[j]);
        CHECK(cz.objective_values[j] == d.objective_values[j]);
      }
    }
  }
}

TEST_CASE("full radius with the exact backend collapses c3rf_fela onto crf_fela") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const GibbsModel m = random_multilabel_model(seed + 40, 5, 3, 1.0);
    const int n = m.graph.num_variables();
    const CandidateSet set = divmbest(m, 3, 0.25);
    LossSpec loss;
    const Prediction crf = crf_fela_predict(m, set, loss, kExact);
    const Prediction c3 = c3rf_fela_predict(m, set, n, loss, kExact);
    CHECK(c3.chosen_index == crf.chosen_index);
    // c3rf objectives are a positive multiple of the crf ones; rank must match
    for (std::size_t a = 0; a < set.items.size(); ++a)
      for (std::size_t b = 0; b < set.items.size(); ++b)
        CHECK((crf.objective_values[a] < crf.objective_values[b]) ==
              (c3.objective_values[a] < c3.objective_values[b]));
  }
}

TEST_CASE("predict dispatches on the configured kind and rho") {
  const GibbsModel m = random_multilabel_model(3, 5, 2, 1.0);
  const CandidateSet set = divmbest(m, 3, 0.2);
  PredictorConfig cfg;
  cfg.kind = PredictorKind::mass;
  cfg.radius_fraction = 0.4;
  cfg.temperature = 1.0;
  const int radius = radius_from_fraction(0.4, m.graph.num_variables());
  const Prediction via_cfg = predict(m, set, cfg, kExact);
  const Prediction direct = mass_predict(m, set, radius, cfg.loss, kExact);
  CHECK(via_cfg.chosen_index == direct.chosen_index);
  CHECK(via_cfg.objective_values == direct.objective_values);

  cfg.kind = PredictorKind::map;
  CHECK(predict(m, set, cfg, kExact).chosen_index == 0);
}

TEST_CASE("predict applies the configured temperature") {
  const GibbsModel m = random_tree_model(17, 6, 2);
  const CandidateSet set = divmbest(m, 3, 0.3);
  PredictorConfig cfg;
  cfg.kind = PredictorKind::delta;
  cfg.temperature = 2.5;
  const Prediction p = predict(m, set, cfg, kExact);
  for (std::size_t j = 0; j < set.items.size(); ++j)
    CHECK(p.log_weights[j] == doctest::Approx(set.items[j].score / 2.5).epsilon(1e-12));
}

TEST_CASE("c3rf_marginals mixes ball posteriors by mass") {
  // flat model, two complementary centers, radius 0: the mixture is
  // 0.5 * point mass at each center
  const GibbsModel m = flat_binary_chain(2);
  const CandidateSet set = two_candidates({0, 0}, {1, 1}, 0.0, 0.0);
  const Marginals mix = c3rf_marginals(m, set, 0, kExact);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(mix.node[i][0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(mix.node[i][1] == doctest::Approx(0.5).epsilon(1e-12));
  }
  CHECK(mix.converged);

  // single candidate at radius 0: one-hot rows
  CandidateSet solo;
  solo.items = {{{1, 0}, 0.0, 1.0}};
  const Marginals one = c3rf_marginals(m, solo, 0, kExact);
  CHECK(one.node[0][1] == doctest::Approx(1.0));
  CHECK(one.node[1][0] == doctest::Approx(1.0));
}

TEST_CASE("c3rf_marginals at full radius reproduce the unconstrained marginals") {
  const GibbsModel m = random_multilabel_model(12, 4, 3, 1.0);
  const int n = m.graph.num_variables();
  const CandidateSet set = divmbest(m, 3, 0.2);
  const Marginals mix = c3rf_marginals(m, set, n, kExact);
  const Marginals exact = exact_marginals(m);
  for (std::size_t i = 0; i < exact.node.size(); ++i)
    for (std::size_t k = 0; k < exact.node[i].size(); ++k)
      CHECK(mix.node[i][k] == doctest::Approx(exact.node[i][k]).epsilon(1e-9));
}

TEST_CASE("log_prob_objective averages log marginals per class") {
  // ground truth [0, 1], point-mass marginals at the truth: log prob 0
  NodeMarginals exact{{1.0, 0.0}, {0.0, 1.0}};
  const auto per_class = log_prob_objective(exact, {0, 1}, 2);
  REQUIRE(per_class.size() == 2);
  CHECK(per_class[0].has_value());
  CHECK(*per_class[0] == doctest::Approx(0.0));
  CHECK(*per_class[1] == doctest::Approx(0.0));
  CHECK(class_mean_log_prob(per_class) == doctest::Approx(0.0));

  // uniform marginals: every position scores log 0.5
  NodeMarginals uniform(2, {0.5, 0.5});
  const auto u = log_prob_objective(uniform, {0, 1}, 2);
  CHECK(*u[0] == doctest::Approx(std::log(0.5)).epsilon(1e-12));
  CHECK(class_mean_log_prob(u) == doctest::Approx(std::log(0.5)).epsilon(1e-12));

  // a class missing from the ground truth yields no entry
  const auto missing = log_prob_objective(uniform, {0, 0}, 2);
  CHECK(missing[0].has_value());
  CHECK_FALSE(missing[1].has_value());
  CHECK(class_mean_log_prob(missing) == doctest::Approx(std::log(0.5)).epsilon(1e-12));

  std::vector<std::optional<double>> none{std::nullopt, std::nullopt};
  CHECK_THROWS_AS(class_mean_log_prob(none), Error);
}

TEST_CASE("objective ties break toward the smallest candidate index") {
  const GibbsModel m = flat_binary_chain(4);
  CandidateSet set;
  set.items = {{{0, 0, 1, 1}, 0.0, 1.0}, {{1, 1, 0, 0}, 0.0, 1.0}, {{0, 0, 1, 1}, 0.0, 1.0}};
  LossSpec loss;
  const Prediction p = delta_predict(m, set, loss);
  // candidates 0 and 2 are identical, so their objectives tie exactly
  CHECK(p.objective_values[0] == p.objective_values[2]);
  CHECK(p.chosen_index == 0);
}

TEST_CASE("per-candidate convergence flags are reported") {
  const GibbsModel m = random_multilabel_model(25, 5, 2, 1.0);
  const CandidateSet set = divmbest(m, 2, 0.4);
  LossSpec loss;
  const Prediction p = c3rf_fela_predict(m, set, 1, loss);  // loopy backend
  CHECK(p.converged.size() == set.items.size());
  CHECK(p.backend == "bp");
}
