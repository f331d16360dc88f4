#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "c3rf/candidates.hpp"
#include "c3rf/graph.hpp"
#include "c3rf/hamming.hpp"
#include "c3rf/infer.hpp"
#include "c3rf/loss.hpp"

namespace c3rf {

enum class PredictorKind { map, delta, mass, crf_fela, c3rf_fela };

struct PredictorConfig {
  PredictorKind kind = PredictorKind::c3rf_fela;
  double radius_fraction = 0.0;  // R = round(rho * n)
  double temperature = 1.0;
  LossSpec loss;
};

// Posterior/marginal provider: loopy BP by default, exact enumeration for
// oracle comparisons.
struct InferenceBackend {
  enum class Kind { loopy_bp, exact } kind = Kind::loopy_bp;
  BPSettings settings;
  std::uint64_t enumeration_cap = kDefaultEnumerationCap;
};

struct Prediction {
  Configuration chosen;
  int chosen_index = 0;  // minimizes objective_values; ties -> smallest index
  std::vector<double> objective_values;  // one per candidate
  std::vector<double> log_weights;       // per-candidate log weight (score/T or log-mass)
  std::vector<bool> converged;           // per-candidate BP convergence, when applicable
  std::string backend;
};

int radius_from_fraction(double rho, int n);

// argmin_j sum_c w_c exp(score_c/T - max) loss(c, yhat_j)
Prediction delta_predict(const GibbsModel& model, const CandidateSet& cands, const LossSpec& loss);
// Like delta, with ball masses Z({c}, R) in place of Gibbs weights.
Prediction mass_predict(const GibbsModel& model, const CandidateSet& cands, int radius,
                        const LossSpec& loss, const InferenceBackend& backend = {});
// argmin_j fela(P, yhat_j) under unconstrained marginals.
Prediction crf_fela_predict(const GibbsModel& model, const CandidateSet& cands,
                            const LossSpec& loss, const InferenceBackend& backend = {});
// argmin_j sum_c w_c exp(log_mass_c - max) fela(P_{c,R}, yhat_j)
Prediction c3rf_fela_predict(const GibbsModel& model, const CandidateSet& cands, int radius,
                             const LossSpec& loss, const InferenceBackend& backend = {});
// Baseline: candidate 0 (the MAP under divmbest ordering).
Prediction map_predict(const GibbsModel& model, const CandidateSet& cands);

Prediction predict(const GibbsModel& model, const CandidateSet& cands, const PredictorConfig& config,
                   const InferenceBackend& backend = {});

// Mass-weighted mixture of ball-constrained marginals over candidates,
// normalized per variable.
Marginals c3rf_marginals(const GibbsModel& model, const CandidateSet& cands, int radius,
                         const InferenceBackend& backend = {});

// Per-class mean log marginal probability of the ground-truth labels; classes
// absent from the ground truth are omitted.
std::vector<std::optional<double>> log_prob_objective(const NodeMarginals& marginals,
                                                      const Configuration& ground_truth,
                                                      int num_classes);
double class_mean_log_prob(const std::vector<std::optional<double>>& per_class);

}  // namespace c3rf
