#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "c3rf/candidates.hpp"
#include "c3rf/graph.hpp"
#include "c3rf/predict.hpp"

namespace c3rf {

struct ParameterGrid {
  std::vector<double> lambdas{0.05, 0.1, 0.2, 0.5, 1.0};
  std::vector<double> radius_fractions{0.0, 0.05, 0.1, 0.25, 0.5, 1.0};
  std::vector<double> temperatures{0.5, 1.0, 2.0, 5.0};
};

struct CVPlan {
  enum class Mode { kfold, leave_one_out };
  Mode mode = Mode::kfold;
  int folds = 5;         // ignored for leave-one-out
  int permutations = 1;  // seeded reshuffles of the instance order
  std::uint64_t seed = 0;
};

struct CorpusInstance {
  GibbsModel model;
  Configuration ground_truth;
  std::optional<CandidateSet> candidates;  // when absent, regenerated per lambda
};

using Corpus = std::vector<CorpusInstance>;

struct TuneOptions {
  int num_candidates = 3;  // M for divmbest; not searched
  MapSolver solver = MapSolver::exhaustive;
  InferenceBackend backend;
  std::uint64_t enumeration_cap = kDefaultEnumerationCap;
};

// Corpus-level evaluation of a predictor: mean instance loss for hamming,
// corpus-level intersection-over-union accuracy for iou.
double evaluate_corpus(const Corpus& corpus, const PredictorConfig& config, double lambda,
                       const TuneOptions& options = {});

struct GridPointScore {
  int permutation = 0;
  int fold = 0;
  double lambda = 0.0;
  double rho = 0.0;
  double temperature = 1.0;
  double heldin = 0.0;
  double heldout = 0.0;
};

struct FoldWinner {
  int permutation = 0;
  int fold = 0;
  double lambda = 0.0;
  double rho = 0.0;
  double temperature = 1.0;
  double heldout = 0.0;
};

struct SearchResult {
  PredictorConfig best;       // radius_fraction and temperature of the winner
  double best_lambda = 0.0;
  double best_mean_heldout = 0.0;
  std::vector<GridPointScore> report;  // one row per (permutation, fold, grid point)
  std::vector<FoldWinner> fold_winners;
};

// Empirical risk minimization over the grid: per (permutation, fold) the grid
// point with the best held-in performance wins; the final selection maximizes
// the mean held-out score. Ties break toward lexicographically smallest
// (lambda, rho, T).
SearchResult grid_search_erm(const Corpus& corpus, const ParameterGrid& grid, const CVPlan& plan,
                             const PredictorConfig& base, const TuneOptions& options = {});

// Same protocol scored by the mean class-mean log probability of the ground
// truth under mixture marginals (unconstrained marginals for the crf_fela
// kind).
SearchResult grid_search_bdt(const Corpus& corpus, const ParameterGrid& grid, const CVPlan& plan,
                             const PredictorConfig& base, const TuneOptions& options = {});

}  // namespace c3rf
