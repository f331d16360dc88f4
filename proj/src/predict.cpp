#include "c3rf/predict.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "c3rf/logspace.hpp"

namespace c3rf {

namespace {

void require_candidates(const GibbsModel& model, const CandidateSet& cands) {
  if (cands.empty()) fail(ErrorCode::empty_candidate_set, "predictor requires candidates");
  for (const auto& c : cands.items) {
    validate_configuration(model.graph, c.labels);
    if (!(c.weight > 0.0)) fail(ErrorCode::invalid_argument, "candidate weights must be > 0");
  }
}

int argmin_index(const std::vector<double>& values) {
  int best = 0;
  for (int j = 1; j < static_cast<int>(values.size()); ++j) {
    if (values[static_cast<std::size_t>(j)] < values[static_cast<std::size_t>(best)]) best = j;
  }
  return best;
}

// sum_c w_c exp(lw_c - max_lw) q[c][j] for each candidate position j
std::vector<double> weighted_objectives(const CandidateSet& cands, const std::vector<double>& log_w,
                                        const std::vector<std::vector<double>>& q) {
  double max_lw = kNegInf;
  for (double lw : log_w) max_lw = std::max(max_lw, lw);
  const int m = cands.size();
  std::vector<double> obj(static_cast<std::size_t>(m), 0.0);
  for (int c = 0; c < m; ++c) {
    const double lw = log_w[static_cast<std::size_t>(c)];
    if (is_neg_inf(lw)) continue;
    const double w = cands.items[static_cast<std::size_t>(c)].weight *
                     std::exp(lw - (is_neg_inf(max_lw) ? 0.0 : max_lw));
    for (int j = 0; j < m; ++j) obj[static_cast<std::size_t>(j)] += w * q[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)];
  }
  return obj;
}

std::vector<std::vector<double>> pairwise_losses(const CandidateSet& cands, const LossSpec& loss) {
  const int m = cands.size();
  std::vector<std::vector<double>> q(static_cast<std::size_t>(m),
                                     std::vector<double>(static_cast<std::size_t>(m), 0.0));
  for (int c = 0; c < m; ++c) {
    for (int j = 0; j < m; ++j) {
      q[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)] = configuration_loss(
          loss, cands.items[static_cast<std::size_t>(c)].labels, cands.items[static_cast<std::size_t>(j)].labels);
    }
  }
  return q;
}

Prediction finish(const CandidateSet& cands, std::vector<double> objectives,
                  std::vector<double> log_weights, std::vector<bool> converged,
                  const char* backend) {
  Prediction p;
  p.chosen_index = argmin_index(objectives);
  p.chosen = cands.items[static_cast<std::size_t>(p.chosen_index)].labels;
  p.objective_values = std::move(objectives);
  p.log_weights = std::move(log_weights);
  p.converged = std::move(converged);
  p.backend = backend;
  return p;
}

ConstrainedPosterior posterior_via(const GibbsModel& model, const HammingBall& ball,
                                   const InferenceBackend& backend) {
  if (backend.kind == InferenceBackend::Kind::exact)
    return exact_constrained_oracle(model, ball, backend.enumeration_cap);
  return constrained_posterior(model, ball, backend.settings);
}

}  // namespace

int radius_from_fraction(double rho, int n) {
  if (rho < 0.0 || rho > 1.0) fail(ErrorCode::invalid_argument, "radius fraction must lie in [0, 1]");
  const int r = static_cast<int>(std::lround(rho * n));
  return std::clamp(r, 0, n);
}

Prediction delta_predict(const GibbsModel& model, const CandidateSet& cands, const LossSpec& loss) {
  require_candidates(model, cands);
  std::vector<double> log_w;
  log_w.reserve(cands.items.size());
  for (const auto& c : cands.items) log_w.push_back(c.score / model.temperature);
  std::vector<double> obj = weighted_objectives(cands, log_w, pairwise_losses(cands, loss));
  return finish(cands, std::move(obj), std::move(log_w), {}, "gibbs");
}

Prediction mass_predict(const GibbsModel& model, const CandidateSet& cands, int radius,
                        const LossSpec& loss, const InferenceBackend& backend) {
  require_candidates(model, cands);
  std::vector<double> log_w;
  std::vector<bool> converged;
  log_w.reserve(cands.items.size());
  for (const auto& c : cands.items) {
    const ConstrainedPosterior post = posterior_via(model, {c.labels, radius}, backend);
    log_w.push_back(post.log_mass);
    converged.push_back(post.converged);
  }
  std::vector<double> obj = weighted_objectives(cands, log_w, pairwise_losses(cands, loss));
  return finish(cands, std::move(obj), std::move(log_w), std::move(converged),
                backend.kind == InferenceBackend::Kind::exact ? "exact" : "bp");
}

Prediction crf_fela_predict(const GibbsModel& model, const CandidateSet& cands, const LossSpec& loss,
                            const InferenceBackend& backend) {
  require_candidates(model, cands);
  Marginals m = backend.kind == InferenceBackend::Kind::exact
                    ? exact_marginals(model, backend.enumeration_cap)
                    : sum_product(model, backend.settings);
  std::vector<double> obj;
  obj.reserve(cands.items.size());
  for (const auto& c : cands.items) obj.push_back(fela(loss, m.node, c.labels));
  return finish(cands, std::move(obj), {}, {m.converged},
                backend.kind == InferenceBackend::Kind::exact ? "exact" : "bp");
}

Prediction c3rf_fela_predict(const GibbsModel& model, const CandidateSet& cands, int radius,
                             const LossSpec& loss, const InferenceBackend& backend) {
  require_candidates(model, cands);
  const int m = cands.size();
  std::vector<double> log_w;
  std::vector<bool> converged;
  std::vector<std::vector<double>> q(static_cast<std::size_t>(m),
                                     std::vector<double>(static_cast<std::size_t>(m), 0.0));
  log_w.reserve(cands.items.size());
  for (int c = 0; c < m; ++c) {
    const ConstrainedPosterior post =
        posterior_via(model, {cands.items[static_cast<std::size_t>(c)].labels, radius}, backend);
    log_w.push_back(post.log_mass);
    converged.push_back(post.converged);
    for (int j = 0; j < m; ++j)
      q[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)] =
          fela(loss, post.node_marginals, cands.items[static_cast<std::size_t>(j)].labels);
  }
  std::vector<double> obj = weighted_objectives(cands, log_w, q);
  return finish(cands, std::move(obj), std::move(log_w), std::move(converged),
                backend.kind == InferenceBackend::Kind::exact ? "exact" : "bp");
}

Prediction map_predict(const GibbsModel& model, const CandidateSet& cands) {
  require_candidates(model, cands);
  // candidate 0 is the MAP under divmbest ordering
  return finish(cands, std::vector<double>(cands.items.size(), 0.0), {}, {}, "map");
}

Prediction predict(const GibbsModel& model, const CandidateSet& cands, const PredictorConfig& config,
                   const InferenceBackend& backend) {
  const GibbsModel tempered = with_temperature(model, config.temperature);
  const int n = model.graph.num_variables();
  const int radius = radius_from_fraction(config.radius_fraction, n);
  switch (config.kind) {
    case PredictorKind::map: return map_predict(tempered, cands);
    case PredictorKind::delta: return delta_predict(tempered, cands, config.loss);
    case PredictorKind::mass: return mass_predict(tempered, cands, radius, config.loss, backend);
    case PredictorKind::crf_fela: return crf_fela_predict(tempered, cands, config.loss, backend);
    case PredictorKind::c3rf_fela:
      return c3rf_fela_predict(tempered, cands, radius, config.loss, backend);
  }
  fail(ErrorCode::invalid_argument, "unknown predictor kind");
}

Marginals c3rf_marginals(const GibbsModel& model, const CandidateSet& cands, int radius,
                         const InferenceBackend& backend) {
  require_candidates(model, cands);
  const FactorGraph& g = model.graph;

  std::vector<ConstrainedPosterior> posts;
  std::vector<double> log_w;
  posts.reserve(cands.items.size());
  for (const auto& c : cands.items) {
    posts.push_back(posterior_via(model, {c.labels, radius}, backend));
    log_w.push_back(posts.back().log_mass);
  }
  double max_lw = kNegInf;
  for (double lw : log_w) max_lw = std::max(max_lw, lw);
  if (is_neg_inf(max_lw)) fail(ErrorCode::empty_ball, "no candidate ball carries mass");

  Marginals out;
  out.converged = true;
  out.iterations = 0;
  for (const auto& post : posts) out.converged = out.converged && post.converged;
  out.node.reserve(static_cast<std::size_t>(g.num_variables()));
  for (int i = 0; i < g.num_variables(); ++i) {
    std::vector<double> mix(static_cast<std::size_t>(g.cardinality(i)), 0.0);
    double total = 0.0;
    for (std::size_t c = 0; c < posts.size(); ++c) {
      if (is_neg_inf(log_w[c])) continue;
      const double w = cands.items[c].weight * std::exp(log_w[c] - max_lw);
      for (std::size_t k = 0; k < mix.size(); ++k) {
        mix[k] += w * posts[c].node_marginals[static_cast<std::size_t>(i)][k];
      }
    }
    for (double p : mix) total += p;
    for (double& p : mix) p /= total;
    out.node.push_back(std::move(mix));
  }
  return out;
}

std::vector<std::optional<double>> log_prob_objective(const NodeMarginals& marginals,
                                                      const Configuration& ground_truth,
                                                      int num_classes) {
  if (marginals.size() != ground_truth.size())
    fail(ErrorCode::length_mismatch, "marginals and ground truth differ in length");
  if (num_classes < 2) fail(ErrorCode::invalid_argument, "need at least two classes");

  std::vector<std::optional<double>> out(static_cast<std::size_t>(num_classes));
  std::vector<double> sums(static_cast<std::size_t>(num_classes), 0.0);
  std::vector<int> counts(static_cast<std::size_t>(num_classes), 0);
  for (std::size_t i = 0; i < ground_truth.size(); ++i) {
    const int k = ground_truth[i];
    if (k < 0 || k >= num_classes)
      fail(ErrorCode::invalid_configuration, "ground-truth label outside the class universe");
    if (static_cast<std::size_t>(k) >= marginals[i].size())
      fail(ErrorCode::dimension_mismatch, "marginal vector shorter than the class universe");
    sums[static_cast<std::size_t>(k)] += std::log(marginals[i][static_cast<std::size_t>(k)]);
    counts[static_cast<std::size_t>(k)] += 1;
  }
  for (int k = 0; k < num_classes; ++k) {
    if (counts[static_cast<std::size_t>(k)] > 0)
      out[static_cast<std::size_t>(k)] =
          sums[static_cast<std::size_t>(k)] / counts[static_cast<std::size_t>(k)];
  }
  return out;
}

double class_mean_log_prob(const std::vector<std::optional<double>>& per_class) {
  double total = 0.0;
  int present = 0;
  for (const auto& v : per_class) {
    if (v) {
      total += *v;
      ++present;
    }
  }
  if (present == 0) fail(ErrorCode::invalid_argument, "no class present in the ground truth");
  return total / present;
}

}  // namespace c3rf
